#pragma once

// Narrative -> fixed-length id sequence, class index -> one-hot vector.
//
// Pipeline order: normalize_text -> tokenize -> filter_tokens -> lemmatize_token -> encode_sequence.
// Stop words are removed before lemmatization.
//
// Lemmatizer suffix rules, tried in order; the first rule whose suffix and guard both match
// is applied and no further rule is tried:
//
//   sses -> ss
//   ies  -> y     (token longer than the suffix)
//   ing  -> ""    (remaining stem >= 3 chars)
//   ed   -> ""    (remaining stem >= 3 chars)
//   es   -> ""    (remaining stem >= 3 chars and ends in ch, sh, x, z or ss)
//   s    -> ""    (remaining stem >= 3 chars and token does not end in ss)

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "phaseclf/error.hpp"
#include "phaseclf/ingest.hpp"

namespace phaseclf {

inline constexpr std::uint32_t kPadId = 0;
inline constexpr std::uint32_t kOovId = 1;
inline constexpr std::size_t kReservedIds = 2;

inline const std::vector<std::string>& default_stoplist_words() {
    static const std::vector<std::string> words = {
        "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and", "any", "are",
        "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but", "by",
        "can", "could", "did", "do", "does", "doing", "down", "during", "each", "either", "else", "even",
        "ever", "every", "few", "for", "from", "further", "had", "has", "have", "having", "he", "her", "here",
        "hers", "herself", "him", "himself", "his", "how", "however", "i", "if", "in", "into", "is", "it",
        "its", "itself", "just", "least", "less", "may", "me", "might", "more", "most", "much", "must", "my",
        "myself", "neither", "no", "nor", "not", "now", "of", "off", "often", "on", "once", "only", "or",
        "other", "others", "otherwise", "our", "ours", "ourselves", "out", "over", "own", "per", "perhaps",
        "quite", "rather", "really", "s", "same", "she", "should", "since", "so", "some", "such", "t", "than",
        "that", "the", "their", "theirs", "them", "themselves", "then", "there", "these", "they", "this",
        "those", "though", "through", "thus", "to", "too", "under", "until", "up", "upon", "us", "very",
        "via", "was", "we", "were", "what", "whatever", "when", "where", "whether", "which", "while", "who",
        "whom", "whose", "why", "will", "with", "within", "without", "would", "yet", "you", "your", "yours",
        "yourself", "yourselves",
    };
    return words;
}

inline std::string default_strip_chars() { return "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~"; }

struct PrepConfig {
    std::size_t max_len = 2000;
    std::size_t vocab_size = 100000;
    std::set<std::string> stoplist{default_stoplist_words().begin(), default_stoplist_words().end()};
    // Each entry is one character; multi-byte UTF-8 characters are allowed.
    std::vector<std::string> strip_chars = split_chars(default_strip_chars());
    bool lemmatize = true;

    void validate() const {
        if (max_len < 1) throw ConfigError("prep.max_len must be >= 1");
        if (vocab_size < 3) throw ConfigError("prep.vocab_size must be >= 3");
    }

    /// Split a string into UTF-8 characters.
    static std::vector<std::string> split_chars(std::string_view s) {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < s.size();) {
            const auto lead = static_cast<unsigned char>(s[i]);
            std::size_t len = 1;
            if (lead >= 0xF0) len = 4;
            else if (lead >= 0xE0) len = 3;
            else if (lead >= 0xC0) len = 2;
            len = std::min(len, s.size() - i);
            out.emplace_back(s.substr(i, len));
            i += len;
        }
        return out;
    }
};

/// Non-empty trimmed lines of a UTF-8 text file.
inline std::vector<std::string> load_word_list(const std::string& path) {
    std::vector<std::string> out;
    const std::string text = read_file(path);
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        auto line = detail::trim(std::string_view(text).substr(start, end - start));
        if (!line.empty()) out.push_back(std::move(line));
        start = end + 1;
    }
    return out;
}

/// Lower-case ASCII letters, replace strip characters by spaces, collapse whitespace runs, trim.
inline std::string normalize_text(std::string_view text, std::span<const std::string> strip_chars) {
    std::array<bool, 256> strip_ascii{};
    std::vector<std::string_view> strip_multi;
    for (const auto& c : strip_chars) {
        if (c.size() == 1) strip_ascii[static_cast<unsigned char>(c[0])] = true;
        else if (!c.empty()) strip_multi.push_back(c);
    }

    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    const auto emit_space = [&] { pending_space = !out.empty(); };
    for (std::size_t i = 0; i < text.size();) {
        const auto ch = static_cast<unsigned char>(text[i]);
        if (ch < 0x80) {
            if (strip_ascii[ch] || std::isspace(ch)) {
                emit_space();
            } else {
                if (pending_space) out += ' ';
                pending_space = false;
                out += static_cast<char>(ch >= 'A' && ch <= 'Z' ? ch - 'A' + 'a' : ch);
            }
            ++i;
            continue;
        }
        bool stripped = false;
        for (auto m : strip_multi) {
            if (text.substr(i, m.size()) == m) {
                emit_space();
                i += m.size();
                stripped = true;
                break;
            }
        }
        if (stripped) continue;
        if (pending_space) out += ' ';
        pending_space = false;
        out += static_cast<char>(ch);
        ++i;
    }
    return out;
}

inline std::string normalize_text(std::string_view text, const PrepConfig& config) {
    return normalize_text(text, config.strip_chars);
}

inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        const std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) tokens.emplace_back(text.substr(start, i - start));
    }
    return tokens;
}

inline std::vector<std::string> filter_tokens(std::vector<std::string> tokens, const std::set<std::string>& stoplist) {
    std::erase_if(tokens, [&](const std::string& t) { return stoplist.contains(t); });
    return tokens;
}

inline std::string lemmatize_token(std::string_view token) {
    const auto ends = [&](std::string_view suffix) { return token.ends_with(suffix); };
    const auto stem = [&](std::size_t suffix_len) { return token.substr(0, token.size() - suffix_len); };

    if (ends("sses")) return std::string(stem(2));
    if (ends("ies") && token.size() > 3) return std::string(stem(3)) + "y";
    if (ends("ing") && token.size() >= 6) return std::string(stem(3));
    if (ends("ed") && token.size() >= 5) return std::string(stem(2));
    if (ends("es") && token.size() >= 5) {
        const auto s = stem(2);
        if (s.ends_with("ch") || s.ends_with("sh") || s.ends_with("x") || s.ends_with("z") || s.ends_with("ss"))
            return std::string(s);
    }
    if (ends("s") && token.size() >= 4 && !ends("ss")) return std::string(stem(1));
    return std::string(token);
}

/// normalize -> tokenize -> filter -> (optional) lemmatize.
inline std::vector<std::string> prepare_tokens(std::string_view text, const PrepConfig& config) {
    auto tokens = filter_tokens(tokenize(normalize_text(text, config)), config.stoplist);
    if (config.lemmatize)
        for (auto& t : tokens) t = lemmatize_token(t);
    return tokens;
}

class Vocabulary {
public:
    Vocabulary() : id_to_token_{"<pad>", "<oov>"} {}

    /// Build from an ordered token list; line k of the list receives id k + 2.
    static Vocabulary from_tokens(std::span<const std::string> ordered) {
        Vocabulary v;
        for (const auto& t : ordered) {
            if (t.empty() || t.find_first_of(" \t\r\n") != std::string::npos)
                throw DataError("invalid vocabulary token: '" + t + "'");
            if (!v.token_to_id_.emplace(t, static_cast<std::uint32_t>(v.id_to_token_.size())).second)
                throw DataError("duplicate vocabulary token: " + t);
            v.id_to_token_.push_back(t);
        }
        return v;
    }

    std::size_t size() const { return id_to_token_.size(); }

    std::uint32_t id_of(const std::string& token) const {
        const auto it = token_to_id_.find(token);
        return it == token_to_id_.end() ? kOovId : it->second;
    }

    bool contains(const std::string& token) const { return token_to_id_.contains(token); }

    const std::string& token(std::uint32_t id) const { return id_to_token_.at(id); }

    /// One token per line in id order, reserved ids excluded.
    std::string serialize() const {
        std::string out;
        for (std::size_t id = kReservedIds; id < id_to_token_.size(); ++id) {
            out += id_to_token_[id];
            out += '\n';
        }
        return out;
    }

    static Vocabulary deserialize(std::string_view text) {
        std::vector<std::string> tokens;
        std::size_t start = 0;
        while (start < text.size()) {
            auto end = text.find('\n', start);
            if (end == std::string_view::npos) end = text.size();
            auto line = text.substr(start, end - start);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            tokens.emplace_back(line);
            start = end + 1;
        }
        return from_tokens(tokens);
    }

    /// FNV-1a 64-bit hash of the serialized form, as 16 hex digits.
    std::string digest() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : serialize()) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        static constexpr char hex[] = "0123456789abcdef";
        std::string out(16, '0');
        for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = hex[h & 0xf];
        return out;
    }

    bool operator==(const Vocabulary& other) const { return id_to_token_ == other.id_to_token_; }

private:
    std::unordered_map<std::string, std::uint32_t> token_to_id_;
    std::vector<std::string> id_to_token_;
};

/// Rank by descending frequency, ties by first occurrence; keep the top vocab_size - 2.
inline Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& corpus, std::size_t vocab_size) {
    struct Entry {
        std::size_t count = 0;
        std::size_t first = 0;
    };
    std::unordered_map<std::string, Entry> stats;
    std::vector<std::string> order;
    std::size_t position = 0;
    for (const auto& doc : corpus) {
        for (const auto& tok : doc) {
            auto [it, inserted] = stats.try_emplace(tok, Entry{0, position});
            if (inserted) order.push_back(tok);
            ++it->second.count;
            ++position;
        }
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](const std::string& a, const std::string& b) { return stats[a].count > stats[b].count; });
    const std::size_t keep = vocab_size > kReservedIds ? vocab_size - kReservedIds : 0;
    if (order.size() > keep) order.resize(keep);
    return Vocabulary::from_tokens(order);
}

inline Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& corpus, const PrepConfig& config) {
    return build_vocabulary(corpus, config.vocab_size);
}

struct SequenceVector {
    std::vector<std::uint32_t> ids;
    std::size_t true_length = 0;

    std::span<const std::uint32_t> prefix() const { return {ids.data(), true_length}; }
};

/// Unknown tokens map to OOV; short inputs are post-padded with PAD, long inputs keep their head.
inline SequenceVector encode_sequence(std::span<const std::string> tokens, const Vocabulary& vocab,
                                      std::size_t max_len) {
    SequenceVector seq;
    seq.ids.assign(max_len, kPadId);
    seq.true_length = std::min(tokens.size(), max_len);
    for (std::size_t t = 0; t < seq.true_length; ++t) seq.ids[t] = vocab.id_of(tokens[t]);
    return seq;
}

inline std::vector<double> encode_label(std::size_t class_index, std::size_t num_classes) {
    if (class_index >= num_classes)
        throw NumericError("class index " + std::to_string(class_index) + " out of range for " +
                           std::to_string(num_classes) + " classes");
    std::vector<double> one_hot(num_classes, 0.0);
    one_hot[class_index] = 1.0;
    return one_hot;
}

}  // namespace phaseclf
