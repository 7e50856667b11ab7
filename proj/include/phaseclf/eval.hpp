#pragma once

// Multi-class evaluation: confusion matrix (rows = actual class, columns = predicted class),
// per-class precision/recall/F1, macro and support-weighted averages, and the plain-text
// classification report.
//
// Zero-denominator convention: precision, recall and F1 are 0 whenever their denominator is 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "phaseclf/error.hpp"
#include "phaseclf/ingest.hpp"

namespace phaseclf {

class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t num_classes) : m_(num_classes), counts_(num_classes * num_classes, 0) {}

    std::size_t num_classes() const { return m_; }

    std::uint64_t operator()(std::size_t actual, std::size_t predicted) const { return counts_[actual * m_ + predicted]; }
    std::uint64_t& operator()(std::size_t actual, std::size_t predicted) { return counts_[actual * m_ + predicted]; }

    std::uint64_t total() const {
        std::uint64_t s = 0;
        for (auto c : counts_) s += c;
        return s;
    }
    std::uint64_t trace() const {
        std::uint64_t s = 0;
        for (std::size_t k = 0; k < m_; ++k) s += (*this)(k, k);
        return s;
    }
    std::uint64_t row_sum(std::size_t k) const {
        std::uint64_t s = 0;
        for (std::size_t j = 0; j < m_; ++j) s += (*this)(k, j);
        return s;
    }
    std::uint64_t col_sum(std::size_t k) const {
        std::uint64_t s = 0;
        for (std::size_t i = 0; i < m_; ++i) s += (*this)(i, k);
        return s;
    }

    std::uint64_t true_positives(std::size_t k) const { return (*this)(k, k); }
    std::uint64_t false_positives(std::size_t k) const { return col_sum(k) - true_positives(k); }
    std::uint64_t false_negatives(std::size_t k) const { return row_sum(k) - true_positives(k); }
    std::uint64_t true_negatives(std::size_t k) const {
        return total() - true_positives(k) - false_positives(k) - false_negatives(k);
    }

    /// Delimited grid with a header row and a leading column of class names.
    std::string to_delimited(const std::vector<std::string>& labels, char delimiter = ',') const {
        std::string out = quote_field("actual\\predicted", delimiter);
        for (const auto& l : labels) out += delimiter + quote_field(l, delimiter);
        out += '\n';
        for (std::size_t i = 0; i < m_; ++i) {
            out += quote_field(labels.at(i), delimiter);
            for (std::size_t j = 0; j < m_; ++j) out += delimiter + std::to_string((*this)(i, j));
            out += '\n';
        }
        return out;
    }

    bool operator==(const ConfusionMatrix&) const = default;

private:
    std::size_t m_;
    std::vector<std::uint64_t> counts_;
};

inline ConfusionMatrix confusion_matrix(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                                        std::size_t num_classes) {
    if (y_true.size() != y_pred.size())
        throw NumericError("confusion_matrix: " + std::to_string(y_true.size()) + " true labels vs " +
                           std::to_string(y_pred.size()) + " predictions");
    ConfusionMatrix cm(num_classes);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] >= num_classes || y_pred[i] >= num_classes)
            throw NumericError("confusion_matrix: class index out of range at position " + std::to_string(i));
        ++cm(y_true[i], y_pred[i]);
    }
    return cm;
}

struct ClassMetrics {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    std::uint64_t support = 0;
};

inline double safe_ratio(double num, double den) { return den == 0 ? 0.0 : num / den; }

inline double f1_score(double precision, double recall) {
    return safe_ratio(2 * precision * recall, precision + recall);
}

inline ClassMetrics class_metrics(const ConfusionMatrix& cm, std::size_t k) {
    if (k >= cm.num_classes()) throw NumericError("class_metrics: class index out of range");
    const auto tp = static_cast<double>(cm.true_positives(k));
    ClassMetrics c;
    c.precision = safe_ratio(tp, tp + static_cast<double>(cm.false_positives(k)));
    c.recall = safe_ratio(tp, tp + static_cast<double>(cm.false_negatives(k)));
    c.f1 = f1_score(c.precision, c.recall);
    c.support = cm.row_sum(k);
    return c;
}

inline double accuracy(const ConfusionMatrix& cm) {
    const auto total = cm.total();
    if (total == 0) throw NumericError("accuracy of an empty confusion matrix");
    return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

struct MetricAverages {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
};

inline MetricAverages macro_average(std::span<const ClassMetrics> per_class) {
    if (per_class.empty()) throw NumericError("macro_average needs at least one class");
    MetricAverages a;
    for (const auto& c : per_class) {
        a.precision += c.precision;
        a.recall += c.recall;
        a.f1 += c.f1;
    }
    const auto n = static_cast<double>(per_class.size());
    return {a.precision / n, a.recall / n, a.f1 / n};
}

inline MetricAverages weighted_average(std::span<const ClassMetrics> per_class) {
    MetricAverages a;
    std::uint64_t total = 0;
    for (const auto& c : per_class) {
        const auto w = static_cast<double>(c.support);
        a.precision += w * c.precision;
        a.recall += w * c.recall;
        a.f1 += w * c.f1;
        total += c.support;
    }
    if (total == 0) throw NumericError("weighted_average with zero total support");
    const auto n = static_cast<double>(total);
    return {a.precision / n, a.recall / n, a.f1 / n};
}

struct EvalSummary {
    std::vector<ClassMetrics> per_class;
    MetricAverages macro;
    MetricAverages weighted;
    double accuracy = 0;
    std::uint64_t total_support = 0;
};

inline EvalSummary summarize(const ConfusionMatrix& cm) {
    EvalSummary s;
    for (std::size_t k = 0; k < cm.num_classes(); ++k) s.per_class.push_back(class_metrics(cm, k));
    s.macro = macro_average(s.per_class);
    s.weighted = weighted_average(s.per_class);
    s.accuracy = accuracy(cm);
    s.total_support = cm.total();
    return s;
}

/// Two decimals, halves rounded up. The small nudge absorbs binary representation error
/// so that e.g. 0.125 and 0.285 both round up.
inline std::string format_2dp(double value) {
    const double scaled = std::floor(value * 100.0 + 0.5 + 1e-9);
    const auto hundredths = static_cast<long long>(scaled);
    const bool negative = hundredths < 0;
    const long long mag = negative ? -hundredths : hundredths;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s%lld.%02lld", negative ? "-" : "", mag / 100, mag % 100);
    return buf;
}

/// Fixed-width classification report.
inline std::string render_report(const EvalSummary& summary, const std::vector<std::string>& labels) {
    if (labels.size() != summary.per_class.size()) throw NumericError("render_report: label count mismatch");
    std::size_t width = std::string("weighted avg").size();
    for (const auto& l : labels) width = std::max(width, l.size());

    const auto pad_left = [](const std::string& s, std::size_t w) {
        return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
    };
    const auto cell = [&](const std::string& s) { return " " + pad_left(s, 9); };
    const auto row = [&](const std::string& name, const std::string& p, const std::string& r, const std::string& f,
                         std::uint64_t support) {
        return pad_left(name, width) + " " + cell(p) + cell(r) + cell(f) + cell(std::to_string(support)) + "\n";
    };

    std::string out = std::string(width, ' ') + " " + cell("precision") + cell("recall") + cell("f1-score") +
                      cell("support") + "\n\n";
    for (std::size_t k = 0; k < labels.size(); ++k) {
        const auto& c = summary.per_class[k];
        out += row(labels[k], format_2dp(c.precision), format_2dp(c.recall), format_2dp(c.f1), c.support);
    }
    out += "\n";
    out += row("accuracy", "", "", format_2dp(summary.accuracy), summary.total_support);
    out += row("macro avg", format_2dp(summary.macro.precision), format_2dp(summary.macro.recall),
               format_2dp(summary.macro.f1), summary.total_support);
    out += row("weighted avg", format_2dp(summary.weighted.precision), format_2dp(summary.weighted.recall),
               format_2dp(summary.weighted.f1), summary.total_support);
    return out;
}

}  // namespace phaseclf
