#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "support.hpp"

using namespace phaseclf;
using phaseclf::test_support::small_profile;

TEST(Synth, NoiseFreeCorpusIsKeywordSeparable) {
    const auto profile = small_profile(2000, 0.0, 4);
    const auto corpus = generate_corpus(profile);
    ASSERT_EQ(corpus.size(), 2000u);
    for (const auto& r : corpus) ASSERT_EQ(keyword_classify(r.narrative, profile), r.label) << r.narrative;
}

TEST(Synth, Deterministic) {
    const auto a = generate_corpus(small_profile(300, 0.1, 9));
    const auto b = generate_corpus(small_profile(300, 0.1, 9));
    const auto c = generate_corpus(small_profile(300, 0.1, 10));
    ASSERT_EQ(a.size(), b.size());
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].narrative, b[i].narrative);
        EXPECT_EQ(a[i].label, b[i].label);
        differs = differs || a[i].narrative != c[i].narrative;
    }
    EXPECT_TRUE(differs);
}

// Multinomial oracle: each count within 3 standard deviations of n * p_k.
TEST(Synth, ClassCountsFollowProportions) {
    const auto profile = small_profile(10000, 0.0, 12);
    std::vector<double> counts(profile.num_classes(), 0);
    for (const auto& r : generate_corpus(profile)) counts[r.label] += 1;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double p = profile.class_proportions[k];
        const double sd = std::sqrt(10000 * p * (1 - p));
        EXPECT_LE(std::abs(counts[k] - 10000 * p), 3 * sd) << k;
    }
}

TEST(Synth, KeywordClassifierMatchesBayesBound) {
    const auto profile = small_profile(10000, 0.05, 13);
    EXPECT_NEAR(profile.bayes_accuracy(), 1 - 0.05 * 6 / 7, 1e-15);
    std::size_t hits = 0;
    for (const auto& r : generate_corpus(profile))
        if (keyword_classify(r.narrative, profile) == r.label) ++hits;
    EXPECT_NEAR(static_cast<double>(hits) / 10000, profile.bayes_accuracy(), 0.02);
}

// After the text pipeline, keyword tokens remain distinct across classes and never collide with filler.
TEST(Synth, KeywordsStayDisjointAfterPreparation) {
    const auto profile = SynthProfile::defaults();
    const PrepConfig prep;
    std::set<std::string> seen;
    for (const auto& ks : profile.keywords)
        for (const auto& k : ks) {
            const auto toks = prepare_tokens(k, prep);
            ASSERT_EQ(toks.size(), 1u) << k;
            EXPECT_TRUE(seen.insert(toks[0]).second) << k;
        }
    for (const auto& w : background_words(profile)) {
        const auto toks = prepare_tokens(w, prep);
        ASSERT_EQ(toks.size(), 1u) << w;
        EXPECT_EQ(toks[0], w);
        EXPECT_FALSE(seen.contains(w)) << w;
    }
}

TEST(Synth, EveryNarrativeSurvivesPreparation) {
    const auto p = test_support::synth_prepared(small_profile(1000, 0.05, 14), 64);
    EXPECT_EQ(p.dataset.size(), 1000u);
    EXPECT_EQ(p.stats.dropped_empty_narrative, 0u);
    for (const auto& s : p.dataset.sequences) EXPECT_GE(s.true_length, 1u);
}

TEST(Synth, DelimitedCorpusRecoversLabelsThroughIngest) {
    const auto profile = small_profile(200, 0.1, 15);
    const auto corpus = generate_corpus(profile);
    const auto raw = parse_corpus(corpus_to_delimited(corpus, profile));
    const auto [records, stats] = clean_corpus(raw, LabelSchema::default_schema());
    ASSERT_EQ(records.size(), corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        EXPECT_EQ(records[i].narrative, corpus[i].narrative);
        EXPECT_EQ(records[i].label, corpus[i].label);
    }
}

TEST(Synth, ProfileValidation) {
    auto p = SynthProfile::defaults();
    p.class_proportions[0] += 0.1;
    EXPECT_THROW(p.validate(), ConfigError);
    p = SynthProfile::defaults();
    p.keywords[1][0] = p.keywords[0][0];
    EXPECT_THROW(p.validate(), ConfigError);
    p = SynthProfile::defaults();
    p.label_noise = 1.0;
    EXPECT_THROW(p.validate(), ConfigError);
}
