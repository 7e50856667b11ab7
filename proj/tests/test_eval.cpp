#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "phaseclf/eval.hpp"
#include "phaseclf/rng.hpp"

using namespace phaseclf;

namespace {

// Published per-class report of the best model: precision, recall, f1, support.
struct ReportRow {
    const char* label;
    double p, r, f;
    std::uint64_t support;
};
const ReportRow kReference[] = {
    {"Approach", 0.86, 0.91, 0.88, 1915},
    {"Climb", 0.86, 0.91, 0.88, 1253},
    {"Cruise", 0.83, 0.88, 0.86, 1267},
    {"Landing", 0.97, 0.87, 0.92, 1908},
    {"Manoeuvring/airwork", 0.84, 0.84, 0.84, 1819},
    {"Take-off", 0.92, 0.90, 0.91, 1310},
    {"Unknown", 0.80, 0.76, 0.78, 684},
};

std::vector<std::string> reference_labels() {
    std::vector<std::string> out;
    for (const auto& r : kReference) out.push_back(r.label);
    return out;
}

}  // namespace

TEST(ConfusionMatrix, RowsAreActualColumnsPredicted) {
    const std::vector<std::size_t> t = {0, 0, 1, 2}, p = {1, 0, 1, 1};
    const auto cm = confusion_matrix(t, p, 3);
    EXPECT_EQ(cm(0, 1), 1u);
    EXPECT_EQ(cm(0, 0), 1u);
    EXPECT_EQ(cm(2, 1), 1u);
    EXPECT_EQ(cm(1, 2), 0u);
    EXPECT_EQ(cm.total(), 4u);
    EXPECT_EQ(cm.trace(), 2u);
    EXPECT_EQ(cm.false_positives(1), 2u);
    EXPECT_EQ(cm.false_negatives(0), 1u);
    EXPECT_EQ(cm.true_negatives(2), 3u);
    EXPECT_EQ(cm.to_delimited({"a", "b", "c"}), "actual\\predicted,a,b,c\na,1,1,0\nb,0,1,0\nc,0,1,0\n");
    const std::vector<std::size_t> bad = {3, 0, 0, 0};
    EXPECT_THROW(confusion_matrix(bad, p, 3), NumericError);
    EXPECT_THROW(confusion_matrix(std::vector<std::size_t>{0}, p, 3), NumericError);
}

TEST(ClassMetrics, ZeroDenominatorsGiveZero) {
    const std::vector<std::size_t> t = {0, 0, 0}, p = {0, 0, 0};
    const auto cm = confusion_matrix(t, p, 3);
    const auto c1 = class_metrics(cm, 1);
    EXPECT_EQ(c1.precision, 0.0);
    EXPECT_EQ(c1.recall, 0.0);
    EXPECT_EQ(c1.f1, 0.0);
    EXPECT_EQ(c1.support, 0u);
    EXPECT_EQ(class_metrics(cm, 0).f1, 1.0);
    EXPECT_THROW(accuracy(ConfusionMatrix(3)), NumericError);
    EXPECT_THROW(summarize(ConfusionMatrix(3)), NumericError);
}

TEST(Metrics, MatchBruteForceOracleOnTenThousandPairs) {
    Rng rng(55);
    const std::size_t m = 7, n = 10000;
    std::vector<std::size_t> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = rng.below(m);
        p[i] = rng.uniform() < 0.6 ? t[i] : rng.below(m);
    }
    const auto o = test_support::oracle_metrics(t, p, m);
    const auto cm = confusion_matrix(t, p, m);
    const auto s = summarize(cm);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) EXPECT_EQ(static_cast<double>(cm(a, b)), o.confusion[a][b]);
    for (std::size_t k = 0; k < m; ++k) {
        EXPECT_NEAR(s.per_class[k].precision, o.precision[k], 1e-12);
        EXPECT_NEAR(s.per_class[k].recall, o.recall[k], 1e-12);
        EXPECT_NEAR(s.per_class[k].f1, o.f1[k], 1e-12);
        EXPECT_EQ(static_cast<double>(s.per_class[k].support), o.support[k]);
    }
    EXPECT_NEAR(s.macro.precision, o.macro_p, 1e-12);
    EXPECT_NEAR(s.macro.recall, o.macro_r, 1e-12);
    EXPECT_NEAR(s.macro.f1, o.macro_f, 1e-12);
    EXPECT_NEAR(s.weighted.precision, o.weighted_p, 1e-12);
    EXPECT_NEAR(s.weighted.recall, o.weighted_r, 1e-12);
    EXPECT_NEAR(s.weighted.f1, o.weighted_f, 1e-12);
    EXPECT_NEAR(s.accuracy, o.accuracy, 1e-12);
    EXPECT_EQ(s.total_support, n);
}

// Property: support-weighted recall equals accuracy for every confusion matrix.
TEST(Metrics, WeightedRecallEqualsAccuracy) {
    Rng rng(56);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 2 + rng.below(8), n = 1 + rng.below(300);
        std::vector<std::size_t> t(n), p(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = rng.below(m), p[i] = rng.below(m);
        const auto s = summarize(confusion_matrix(t, p, m));
        EXPECT_NEAR(s.weighted.recall, s.accuracy, 1e-12);
        for (const auto& c : s.per_class) {
            EXPECT_GE(c.f1, std::min(c.precision, c.recall) - 1e-15);
            EXPECT_LE(c.f1, std::max(c.precision, c.recall) + 1e-15);
        }
    }
}

TEST(Format2dp, HalvesRoundUp) {
    EXPECT_EQ(format_2dp(0.125), "0.13");
    EXPECT_EQ(format_2dp(0.285), "0.29");
    EXPECT_EQ(format_2dp(0.875), "0.88");
    EXPECT_EQ(format_2dp(0.8543), "0.85");
    EXPECT_EQ(format_2dp(0.0), "0.00");
    EXPECT_EQ(format_2dp(1.0), "1.00");
    EXPECT_EQ(format_2dp(0.994999), "0.99");
}

TEST(ReferenceReport, InternalArithmetic) {
    EXPECT_EQ(format_2dp(f1_score(0.97, 0.87)), "0.92");
    double macro = 0, weighted = 0;
    std::uint64_t total = 0;
    for (const auto& r : kReference) {
        macro += r.p / 7;
        weighted += r.p * static_cast<double>(r.support);
        total += r.support;
    }
    EXPECT_EQ(total, 10156u);
    EXPECT_EQ(format_2dp(macro), "0.87");
    EXPECT_EQ(format_2dp(weighted / static_cast<double>(total)), "0.88");
}

// Listed F1 values agree with F1(p, r) for every class except Cruise, whose listed 0.86 is
// not what F1(0.83, 0.88) = 0.854 rounds to.
TEST(ReferenceReport, ListedF1AgreesWithPrecisionAndRecall) {
    for (const auto& r : kReference) {
        if (std::string(r.label) == "Cruise") {
            EXPECT_EQ(format_2dp(f1_score(r.p, r.r)), "0.85");
            continue;
        }
        EXPECT_EQ(format_2dp(f1_score(r.p, r.r)), format_2dp(r.f)) << r.label;
    }
}

TEST(ReferenceReport, RenderedFromListedValues) {
    EvalSummary s;
    for (const auto& r : kReference) s.per_class.push_back({r.p, r.r, r.f, r.support});
    s.macro = macro_average(s.per_class);
    s.weighted = weighted_average(s.per_class);
    s.total_support = 10156;
    s.accuracy = s.weighted.recall;  // accuracy is support-weighted recall
    const auto report = render_report(s, reference_labels());
    const auto pos = report.find("accuracy");
    ASSERT_NE(pos, std::string::npos);
    const auto line = report.substr(pos, report.find('\n', pos) - pos);
    EXPECT_NE(line.find(" 0.87 "), std::string::npos) << line;
    EXPECT_EQ(line.substr(line.size() - 5), "10156") << line;
    EXPECT_NE(report.find("macro avg       0.87      0.87      0.87     10156"), std::string::npos) << report;
    EXPECT_NE(report.find("Landing       0.97      0.87      0.92      1908"), std::string::npos) << report;
}

TEST(RenderReport, ExactBytes) {
    const std::vector<std::size_t> t = {0, 0, 1, 1}, p = {0, 1, 1, 1};
    const auto report = render_report(summarize(confusion_matrix(t, p, 2)), {"A", "B"});
    const std::string expected =
        "              precision    recall  f1-score   support\n"
        "\n"
        "           A       1.00      0.50      0.67         2\n"
        "           B       0.67      1.00      0.80         2\n"
        "\n"
        "    accuracy                           0.75         4\n"
        "   macro avg       0.83      0.75      0.73         4\n"
        "weighted avg       0.83      0.75      0.73         4\n";
    EXPECT_EQ(report, expected);
    EXPECT_THROW(render_report(summarize(confusion_matrix(t, p, 2)), {"A"}), NumericError);
}

TEST(ConfusionMatrix, SpecCases) {
    const std::vector<std::size_t> d = {0, 1, 2};
    const auto id = confusion_matrix(d, d, 3);
    EXPECT_EQ(id.trace(), 3u);
    EXPECT_EQ(accuracy(id), 1.0);
    const std::vector<std::size_t> t = {0, 0}, p = {1, 1};
    const auto off = confusion_matrix(t, p, 2);
    EXPECT_EQ(off(0, 1), 2u);
    EXPECT_EQ(off(0, 0) + off(1, 0) + off(1, 1), 0u);
    EXPECT_EQ(accuracy(off), 0.0);
}

TEST(ClassMetrics, TwoThirdsPrecision) {
    // Class 0: TP 2, FP 1, FN 0.
    const std::vector<std::size_t> t = {0, 0, 1}, p = {0, 0, 0};
    const auto c = class_metrics(confusion_matrix(t, p, 2), 0);
    EXPECT_DOUBLE_EQ(c.precision, 2.0 / 3);
    EXPECT_EQ(c.recall, 1.0);
    EXPECT_DOUBLE_EQ(c.f1, 0.8);
}

TEST(ConfusionMatrix, CountIdentitiesOnRandomData) {
    Rng rng(57);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = 2 + rng.below(7), n = 1 + rng.below(500);
        std::vector<std::size_t> t(n), p(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = rng.below(m), p[i] = rng.below(m);
        const auto cm = confusion_matrix(t, p, m);
        const auto s = summarize(cm);
        std::uint64_t support = 0;
        for (std::size_t k = 0; k < m; ++k) {
            EXPECT_EQ(cm.true_positives(k) + cm.false_positives(k) + cm.false_negatives(k) + cm.true_negatives(k), n);
            support += s.per_class[k].support;
        }
        EXPECT_EQ(support, n);
        EXPECT_NEAR(static_cast<double>(cm.trace()), s.accuracy * static_cast<double>(n), 1e-9);
    }
}

TEST(Averages, DegenerateCases) {
    const std::vector<ClassMetrics> same = {{0.5, 0.25, 1.0 / 3, 4}, {0.5, 0.25, 1.0 / 3, 9}};
    EXPECT_DOUBLE_EQ(macro_average(same).precision, 0.5);
    EXPECT_DOUBLE_EQ(weighted_average(same).recall, 0.25);
    const std::vector<ClassMetrics> one = {{0.9, 0.8, 0.7, 10}, {0.1, 0.2, 0.3, 0}};
    EXPECT_DOUBLE_EQ(weighted_average(one).precision, 0.9);
    EXPECT_DOUBLE_EQ(weighted_average(one).f1, 0.7);
    const std::vector<ClassMetrics> equal = {{0.9, 0.8, 0.7, 5}, {0.1, 0.2, 0.3, 5}};
    EXPECT_DOUBLE_EQ(weighted_average(equal).precision, macro_average(equal).precision);
    EXPECT_DOUBLE_EQ(weighted_average(equal).f1, macro_average(equal).f1);
}

TEST(RenderReport, PerfectSingleClassAndPurity) {
    const std::vector<std::size_t> t = {0, 0, 0};
    const auto s = summarize(confusion_matrix(t, t, 1));
    const auto r = render_report(s, {"Only"});
    EXPECT_NE(r.find("Only       1.00      1.00      1.00         3"), std::string::npos) << r;
    EXPECT_NE(r.find("weighted avg       1.00      1.00      1.00         3"), std::string::npos) << r;
    EXPECT_EQ(render_report(s, {"Only"}), r);
}
