#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>

#include "phaseclf/error.hpp"
#include "phaseclf/model.hpp"

namespace phaseclf {

struct AdamHyper {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const {
        if (!(lr > 0)) throw ConfigError("train.adam.lr must be > 0");
        if (!(beta1 >= 0 && beta1 < 1)) throw ConfigError("train.adam.beta1 must be in [0, 1)");
        if (!(beta2 >= 0 && beta2 < 1)) throw ConfigError("train.adam.beta2 must be in [0, 1)");
        if (!(epsilon > 0)) throw ConfigError("train.adam.epsilon must be > 0");
    }

    bool operator==(const AdamHyper&) const = default;
};

template <typename T>
struct AdamState {
    ParamSet<T> m;
    ParamSet<T> v;
    std::uint64_t t = 0;

    static AdamState fresh(const ParamSet<T>& params) { return {params.zeros_like(), params.zeros_like(), 0}; }
};

/// One Adam update in place:
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
///   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps), with bias-corrected m_hat, v_hat.
template <typename T>
void adam_step(ParamSet<T>& params, const ParamSet<T>& grads, AdamState<T>& state, const AdamHyper& hyper) {
    if (grads.size() != params.size() || state.m.size() != params.size())
        throw NumericError("adam: parameter, gradient and state sets differ");
    for (std::size_t p = 0; p < grads.size(); ++p) {
        if (grads.tensors()[p].shape != params.tensors()[p].shape)
            throw NumericError("adam: gradient shape mismatch for " + params.names()[p]);
        if (!grads.tensors()[p].all_finite())
            throw NumericError("adam: non-finite gradient in parameter " + grads.names()[p]);
    }

    ++state.t;
    const double t = static_cast<double>(state.t);
    const T b1 = static_cast<T>(hyper.beta1), b2 = static_cast<T>(hyper.beta2);
    const T c1 = static_cast<T>(1.0 - std::pow(hyper.beta1, t));
    const T c2 = static_cast<T>(1.0 - std::pow(hyper.beta2, t));
    const T lr = static_cast<T>(hyper.lr), eps = static_cast<T>(hyper.epsilon);

    for (std::size_t p = 0; p < params.size(); ++p) {
        auto& theta = params.tensors()[p].data;
        const auto& g = grads.tensors()[p].data;
        auto& m = state.m.tensors()[p].data;
        auto& v = state.v.tensors()[p].data;
        for (std::size_t j = 0; j < theta.size(); ++j) {
            m[j] = b1 * m[j] + (T(1) - b1) * g[j];
            v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
            const T m_hat = m[j] / c1;
            const T v_hat = v[j] / c2;
            theta[j] -= lr * m_hat / (std::sqrt(v_hat) + eps);
        }
    }
}

/// Rescale gradients so their global L2 norm is at most max_norm. Returns the norm before clipping.
template <typename T>
double clip_global_norm(ParamSet<T>& grads, double max_norm) {
    double sq = 0.0;
    for (const auto& t : grads.tensors())
        for (const T v : t.data) sq += static_cast<double>(v) * static_cast<double>(v);
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0) {
        const T scale = static_cast<T>(max_norm / norm);
        for (auto& t : grads.tensors())
            for (auto& v : t.data) v *= scale;
    }
    return norm;
}

}  // namespace phaseclf
