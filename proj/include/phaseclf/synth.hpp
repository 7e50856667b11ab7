#pragma once

// Seeded synthetic occurrence narratives. Each record is background filler plus
// 2-5 keywords of its class, so keyword lookup recovers the label exactly unless
// label noise re-drew it. Accuracy ceiling at noise q over m classes: 1 - q (m - 1) / m.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "phaseclf/error.hpp"
#include "phaseclf/ingest.hpp"
#include "phaseclf/rng.hpp"
#include "phaseclf/textprep.hpp"

namespace phaseclf {

struct SynthProfile {
    std::size_t num_records = 2000;
    std::vector<double> class_proportions;
    std::vector<std::vector<std::string>> keywords;
    // Raw label text written for each class; several entries are used round-robin.
    std::vector<std::vector<std::string>> raw_labels;
    std::size_t background_vocab = 300;
    std::size_t min_length = 12;
    std::size_t max_length = 40;
    double label_noise = 0.05;
    std::uint64_t seed = 1;

    /// Seven classes in default-schema order, proportions from the reference test-set supports.
    static SynthProfile defaults() {
        SynthProfile p;
        const double supports[] = {1915, 1253, 1267, 1908, 1819, 1310, 684};
        double total = 0;
        for (double s : supports) total += s;
        for (double s : supports) p.class_proportions.push_back(s / total);
        p.keywords = {
            {"glideslope", "localiser", "downwind", "minima", "outermarker"},
            {"climbout", "ascent", "gradient", "stepclimb", "departureleg"},
            {"autopilot", "levelflight", "enroute", "oceanic", "flightlevel"},
            {"touchdown", "flare", "rollout", "threshold", "bounced"},
            {"aerobatic", "spin", "lowlevel", "mustering", "spraying"},
            {"rotation", "liftoff", "takeoffroll", "runup", "v1"},
            {"unreported", "unspecified", "undetermined", "indeterminate", "unclear"},
        };
        p.raw_labels = {{"Approach"},      {"Climb", "Initial climb"}, {"Cruise"},
                        {"Landing"},       {"Manoeuvring"},            {"Take-off"},
                        {"Unknown", "Standing", "Taxiing", "Descent"}};
        return p;
    }

    std::size_t num_classes() const { return class_proportions.size(); }

    void validate() const {
        const std::size_t m = num_classes();
        if (m < 2) throw ConfigError("synth: need at least 2 classes");
        if (keywords.size() != m || raw_labels.size() != m)
            throw ConfigError("synth: keywords, raw_labels and class_proportions must have one entry per class");
        double total = 0;
        for (double p : class_proportions) {
            if (p < 0) throw ConfigError("synth: negative class proportion");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9) throw ConfigError("synth: class proportions must sum to 1");
        std::set<std::string> seen;
        for (const auto& ks : keywords) {
            if (ks.size() < 3) throw ConfigError("synth: each class needs at least 3 keywords");
            for (const auto& k : ks)
                if (!seen.insert(k).second) throw ConfigError("synth: keyword used by two classes: " + k);
        }
        for (const auto& rl : raw_labels)
            if (rl.empty()) throw ConfigError("synth: each class needs a raw label");
        if (!(label_noise >= 0 && label_noise < 1)) throw ConfigError("synth: label_noise must be in [0, 1)");
        if (min_length < 1 || max_length < min_length) throw ConfigError("synth: bad narrative length range");
        if (background_vocab < 1) throw ConfigError("synth: background_vocab must be >= 1");
    }

    double bayes_accuracy() const {
        const auto m = static_cast<double>(num_classes());
        return 1.0 - label_noise * (m - 1) / m;
    }
};

/// Pronounceable filler words (consonant-vowel syllables) that avoid keywords and stop words.
/// They all end in a vowel, so no lemmatizer rule touches them.
inline std::vector<std::string> background_words(const SynthProfile& profile) {
    static constexpr char consonants[] = "bdfgklmnprtvz";
    static constexpr char vowels[] = "aeiou";
    constexpr std::size_t nc = sizeof consonants - 1, nv = sizeof vowels - 1, syll = nc * nv;
    std::set<std::string> reserved(default_stoplist_words().begin(), default_stoplist_words().end());
    for (const auto& ks : profile.keywords) reserved.insert(ks.begin(), ks.end());

    std::vector<std::string> out;
    for (std::size_t i = 0; out.size() < profile.background_vocab; ++i) {
        std::string w;
        std::size_t x = i * 7919 % (syll * syll * syll);  // scatter so neighbouring words differ early
        for (int s = 0; s < 3; ++s, x /= syll) {
            w += consonants[(x % syll) / nv];
            w += vowels[x % nv];
        }
        if (!reserved.contains(w)) out.push_back(std::move(w));
    }
    return out;
}

inline std::vector<OccurrenceRecord> generate_corpus(const SynthProfile& profile) {
    profile.validate();
    const auto words = background_words(profile);
    const std::size_t m = profile.num_classes();
    Rng rng(profile.seed);
    std::vector<OccurrenceRecord> out;
    out.reserve(profile.num_records);
    for (std::size_t r = 0; r < profile.num_records; ++r) {
        const double u = rng.uniform();
        std::size_t label = m - 1;
        double acc = 0;
        for (std::size_t k = 0; k < m; ++k) {
            acc += profile.class_proportions[k];
            if (u < acc) {
                label = k;
                break;
            }
        }
        const auto length = static_cast<std::size_t>(
            rng.between(static_cast<std::int64_t>(profile.min_length), static_cast<std::int64_t>(profile.max_length)));
        std::vector<std::string> tokens;
        tokens.reserve(length + 5);
        for (std::size_t t = 0; t < length; ++t) tokens.push_back(words[rng.below(words.size())]);
        const auto& kws = profile.keywords[label];
        const auto n_kw = static_cast<std::size_t>(rng.between(2, 5));
        for (std::size_t j = 0; j < n_kw; ++j) {
            const auto pos = static_cast<std::ptrdiff_t>(rng.below(tokens.size() + 1));
            tokens.insert(tokens.begin() + pos, kws[rng.below(kws.size())]);
        }
        if (profile.label_noise > 0 && rng.uniform() < profile.label_noise) label = rng.below(m);

        std::string text;
        for (std::size_t t = 0; t < tokens.size(); ++t) {
            if (t) text += (t % 9 == 0) ? ", " : " ";
            text += tokens[t];
        }
        text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
        text += '.';
        out.push_back({std::move(text), label});
    }
    return out;
}

/// Class whose keywords occur most often in the narrative (lowest index on ties; 0 if none occur).
inline std::size_t keyword_classify(const std::string& narrative, const SynthProfile& profile) {
    const auto tokens = tokenize(normalize_text(narrative, PrepConfig::split_chars(default_strip_chars())));
    std::size_t best = 0, best_hits = 0;
    for (std::size_t k = 0; k < profile.keywords.size(); ++k) {
        std::size_t hits = 0;
        for (const auto& t : tokens)
            for (const auto& kw : profile.keywords[k])
                if (t == kw) ++hits;
        if (hits > best_hits) {
            best_hits = hits;
            best = k;
        }
    }
    return best;
}

/// Delimited corpus with the header ingest expects by default.
inline std::string corpus_to_delimited(const std::vector<OccurrenceRecord>& records, const SynthProfile& profile,
                                       const CsvOptions& options = {}) {
    const char d = options.delimiter;
    std::string out = quote_field(options.summary_column, d) + d + quote_field(options.label_column, d) + "\n";
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto& labels = profile.raw_labels.at(records[r].label);
        out += quote_field(records[r].narrative, d) + d + quote_field(labels[r % labels.size()], d) + "\n";
    }
    return out;
}

}  // namespace phaseclf
