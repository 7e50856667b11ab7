#pragma once

// Brute-force metric definitions computed straight from label pairs, with no shared code
// from the library's confusion-matrix path.

#include <cstddef>
#include <vector>

namespace phaseclf::test_support {

struct OracleMetrics {
    std::vector<std::vector<double>> confusion;  // [actual][predicted]
    std::vector<double> precision, recall, f1, support;
    double macro_p = 0, macro_r = 0, macro_f = 0;
    double weighted_p = 0, weighted_r = 0, weighted_f = 0;
    double accuracy = 0;
};

inline OracleMetrics oracle_metrics(const std::vector<std::size_t>& y_true, const std::vector<std::size_t>& y_pred,
                                    std::size_t m) {
    OracleMetrics o;
    o.confusion.assign(m, std::vector<double>(m, 0.0));
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t p = 0; p < m; ++p)
            for (std::size_t i = 0; i < y_true.size(); ++i)
                if (y_true[i] == a && y_pred[i] == p) o.confusion[a][p] += 1;

    double correct = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i)
        if (y_true[i] == y_pred[i]) correct += 1;
    o.accuracy = correct / static_cast<double>(y_true.size());

    double total = 0;
    for (std::size_t k = 0; k < m; ++k) {
        double tp = 0, fp = 0, fn = 0, sup = 0;
        for (std::size_t i = 0; i < y_true.size(); ++i) {
            if (y_true[i] == k && y_pred[i] == k) tp += 1;
            if (y_true[i] != k && y_pred[i] == k) fp += 1;
            if (y_true[i] == k && y_pred[i] != k) fn += 1;
            if (y_true[i] == k) sup += 1;
        }
        const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
        const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
        const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
        o.precision.push_back(p);
        o.recall.push_back(r);
        o.f1.push_back(f);
        o.support.push_back(sup);
        o.macro_p += p / static_cast<double>(m);
        o.macro_r += r / static_cast<double>(m);
        o.macro_f += f / static_cast<double>(m);
        o.weighted_p += p * sup;
        o.weighted_r += r * sup;
        o.weighted_f += f * sup;
        total += sup;
    }
    o.weighted_p /= total;
    o.weighted_r /= total;
    o.weighted_f /= total;
    return o;
}

}  // namespace phaseclf::test_support
