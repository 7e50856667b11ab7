#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "phaseclf/ingest.hpp"
#include "phaseclf/rng.hpp"

using namespace phaseclf;

namespace {

const std::string kFixture = std::string(PHASECLF_TEST_DATA_DIR) + "/fixture.csv";

}  // namespace

TEST(LoadCorpus, ThreeWellFormedRowsInOrder) {
    const auto recs = parse_corpus("Summary,PhaseOfFlight\na,Approach\nb,Climb\nc,Cruise\n");
    ASSERT_EQ(recs.size(), 3u);
    EXPECT_EQ(recs[0].summary, "a");
    EXPECT_EQ(recs[1].phase_raw, "Climb");
    EXPECT_EQ(recs[2].summary, "c");
    EXPECT_EQ(recs[0].source_row, 2u);
    EXPECT_EQ(recs[2].source_row, 4u);
}

TEST(LoadCorpus, HeaderOnlyIsEmpty) {
    EXPECT_TRUE(parse_corpus("Summary,PhaseOfFlight\n").empty());
}

// Expected rows were produced by Python's csv module on the same fixture file.
TEST(LoadCorpus, MatchesReferenceParserOnFixture) {
    const auto recs = load_corpus(kFixture);
    const std::vector<std::pair<std::string, std::string>> expected = {
        {"engine failed, on approach", "Approach"},
        {"plain text", "landing"},
        {"multi\nline \"quoted\" text", "Climb; Cruise"},
        {"   ", "Cruise"},
        {"", "Take-off"},
        {"last row no newline", "standing"},
    };
    ASSERT_EQ(recs.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        EXPECT_EQ(recs[i].summary, expected[i].first) << i;
        EXPECT_EQ(recs[i].phase_raw, expected[i].second) << i;
    }
    const std::vector<std::size_t> rows = {2, 3, 4, 6, 7, 8};
    for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(recs[i].source_row, rows[i]);
}

TEST(LoadCorpus, QuotedDelimiterPreserved) {
    const auto recs = parse_corpus("Summary,PhaseOfFlight\n\"engine failed, on approach\",Approach\n");
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].summary, "engine failed, on approach");
}

TEST(LoadCorpus, CustomDelimiterAndColumns) {
    CsvOptions o;
    o.delimiter = ';';
    o.summary_column = "Text";
    o.label_column = "Phase";
    const auto recs = parse_corpus("Phase;Text\nLanding;touch, down\n", o);
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].summary, "touch, down");
    EXPECT_EQ(recs[0].phase_raw, "Landing");
}

TEST(LoadCorpus, MissingColumnNamesIt) {
    try {
        parse_corpus("Summary,Phase\nx,y\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("PhaseOfFlight"), std::string::npos);
    }
}

TEST(LoadCorpus, MalformedQuotingNamesRow) {
    const auto expect_row = [](const std::string& text, const std::string& row) {
        try {
            parse_corpus(text);
            FAIL() << "expected DataError";
        } catch (const DataError& e) {
            EXPECT_NE(std::string(e.what()).find("line " + row), std::string::npos) << e.what();
        }
    };
    expect_row("Summary,PhaseOfFlight\nok,Climb\n\"unterminated,Climb\n", "3");
    expect_row("Summary,PhaseOfFlight\n\"closed\"junk,Climb\n", "2");
    expect_row("Summary,PhaseOfFlight\nok,Climb\nbad\"quote,Climb\n", "3");
}

TEST(LoadCorpus, MissingFileIsDataError) {
    EXPECT_THROW(load_corpus("/nonexistent/corpus.csv"), DataError);
}

TEST(LoadCorpus, ShortRowIsDataError) {
    EXPECT_THROW(parse_corpus("Summary,PhaseOfFlight\nonly-one-field\n"), DataError);
}

TEST(CanonicalizeLabel, CaseAndWhitespace) {
    const auto s = LabelSchema::default_schema();
    EXPECT_EQ(canonicalize_label(" LANDING ", s), s.index_of("Landing"));
    EXPECT_EQ(canonicalize_label("climb", s), s.index_of("Climb"));
    EXPECT_EQ(canonicalize_label("Initial Climb", s), s.index_of("Climb"));
    EXPECT_EQ(canonicalize_label("Take-off", s), s.index_of("Take-off"));
    EXPECT_EQ(canonicalize_label("manoeuvring", s), s.index_of("Manoeuvring/airwork"));
}

TEST(CanonicalizeLabel, UnmappedGoesToUnknown) {
    const auto s = LabelSchema::default_schema();
    EXPECT_EQ(canonicalize_label("standing", s), s.index_of("Unknown"));
    EXPECT_EQ(canonicalize_label("taxiing", s), s.index_of("Unknown"));
    EXPECT_EQ(canonicalize_label("descent", s), s.index_of("Unknown"));
    EXPECT_EQ(canonicalize_label("", s), s.index_of("Unknown"));
}

TEST(CanonicalizeLabel, MultiPhaseTakesFirst) {
    const auto s = LabelSchema::default_schema();
    EXPECT_EQ(canonicalize_label("Climb; Cruise", s), s.index_of("Climb"));
    EXPECT_EQ(canonicalize_label("Approach, Landing", s), s.index_of("Approach"));
}

TEST(LabelSchema, RejectsInvalid) {
    EXPECT_THROW(LabelSchema({"A"}, {}, "A"), ConfigError);
    EXPECT_THROW(LabelSchema({"A", "A"}, {}, "A"), ConfigError);
    EXPECT_THROW(LabelSchema({"A", "B"}, {}, "C"), ConfigError);
    EXPECT_THROW(LabelSchema({"A", "B"}, {{"x", "Z"}}, "B"), ConfigError);
}

TEST(CleanCorpus, BlankSummariesDropped) {
    const auto s = LabelSchema::default_schema();
    std::vector<RawRecord> recs;
    for (std::size_t i = 0; i < 10; ++i) recs.push_back({i < 2 ? "  \t" : "text " + std::to_string(i), "climb", i + 2});
    const auto [kept, stats] = clean_corpus(recs, s);
    EXPECT_EQ(stats.input_count, 10u);
    EXPECT_EQ(stats.retained_count, 8u);
    EXPECT_EQ(stats.dropped_empty_narrative, 2u);
    EXPECT_EQ(stats.dropped_unmappable_label, 0u);
    EXPECT_TRUE(stats.consistent());
    EXPECT_EQ(kept.size(), 8u);
}

TEST(CleanCorpus, UnknownKeptByDefaultDroppedOnFlag) {
    const std::vector<RawRecord> recs = {{"a", "standing", 2}, {"b", "landing", 3}};
    const auto keep = LabelSchema::default_schema();
    const auto [kept, stats] = clean_corpus(recs, keep);
    EXPECT_EQ(kept.size(), 2u);
    EXPECT_EQ(kept[0].label, keep.unknown_index());

    const LabelSchema drop(keep.classes(), keep.raw_to_class(), keep.unknown_class(), true);
    const auto [kept2, stats2] = clean_corpus(recs, drop);
    EXPECT_EQ(kept2.size(), 1u);
    EXPECT_EQ(stats2.dropped_unmappable_label, 1u);
    EXPECT_TRUE(stats2.consistent());
}

// Property: the stats identity holds and retained_count equals an independent recount.
TEST(CleanCorpus, StatsIdentityOnRandomFixtures) {
    const auto base = LabelSchema::default_schema();
    const std::vector<std::string> summaries = {"", " ", "\t\n", "engine", " fire on climb ", "x"};
    const std::vector<std::string> labels = {"climb", "standing", "LANDING", "", "cruise; approach", "bogus"};
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const bool drop_unknown = trial % 2 == 1;
        const LabelSchema s(base.classes(), base.raw_to_class(), base.unknown_class(), drop_unknown);
        std::vector<RawRecord> recs;
        const auto n = rng.below(40);
        for (std::size_t i = 0; i < n; ++i)
            recs.push_back({summaries[rng.below(summaries.size())], labels[rng.below(labels.size())], i + 2});

        std::size_t recount = 0;
        for (const auto& r : recs) {
            bool blank = true;
            for (char c : r.summary)
                if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
            const auto norm = LabelSchema::normalize_raw(r.phase_raw);
            const bool unknown = !s.raw_to_class().contains(norm) || s.raw_to_class().at(norm) == "Unknown";
            if (!blank && !(drop_unknown && unknown)) ++recount;
        }

        const auto [kept, stats] = clean_corpus(recs, s);
        EXPECT_TRUE(stats.consistent());
        EXPECT_EQ(stats.retained_count, recount);
        for (const auto& k : kept) {
            EXPECT_LT(k.label, s.size());
            EXPECT_FALSE(k.narrative.empty());
        }
        // Deterministic.
        const auto [kept2, stats2] = clean_corpus(recs, s);
        ASSERT_EQ(kept.size(), kept2.size());
        for (std::size_t i = 0; i < kept.size(); ++i) EXPECT_EQ(kept[i].narrative, kept2[i].narrative);
    }
}

TEST(QuoteField, RoundTripsThroughParser) {
    Rng rng(5);
    const std::string alphabet = "ab,\"\n ;x";
    for (int trial = 0; trial < 100; ++trial) {
        std::string a, b;
        for (std::size_t i = rng.below(12); i > 0; --i) a += alphabet[rng.below(alphabet.size())];
        for (std::size_t i = rng.below(12); i > 0; --i) b += alphabet[rng.below(alphabet.size())];
        if (b.empty()) b = "z";
        const std::string text = "Summary,PhaseOfFlight\n" + quote_field(a) + "," + quote_field(b) + "\n";
        const auto recs = parse_corpus(text);
        ASSERT_EQ(recs.size(), 1u) << text;
        EXPECT_EQ(recs[0].summary, a);
        EXPECT_EQ(recs[0].phase_raw, b);
    }
}
