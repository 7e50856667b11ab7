#pragma once

// Central finite-difference check of model_backward. The numeric side only
// ever calls model_forward, so it does not share code with the backward pass.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "phaseclf/model.hpp"

namespace phaseclf {

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::string worst_parameter;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    std::size_t checked = 0;
};

inline double relative_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

/// Compare analytic gradients of cross_entropy(model(ids), label) with central differences.
inline GradCheckResult gradient_check(const ModelSpec& spec, ParamSet<double> params,
                                      std::span<const std::uint32_t> ids, std::size_t true_length, std::size_t label,
                                      double step = 1e-5) {
    const auto loss_at = [&](const ParamSet<double>& p) {
        const auto c = model_forward<double>(spec, p, ids, true_length);
        return cross_entropy<double>(c.probs, label);
    };
    const auto cache = model_forward<double>(spec, params, ids, true_length);
    const auto dlogits = softmax_cross_entropy_grad<double>(cache.probs, label);
    const auto grads = model_backward<double>(spec, params, cache, dlogits);

    GradCheckResult r;
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto& tensor = params.tensors()[p];
        for (std::size_t j = 0; j < tensor.size(); ++j) {
            const double saved = tensor.data[j];
            tensor.data[j] = saved + step;
            const double plus = loss_at(params);
            tensor.data[j] = saved - step;
            const double minus = loss_at(params);
            tensor.data[j] = saved;
            const double numeric = (plus - minus) / (2 * step);
            const double analytic = grads.tensors()[p].data[j];
            const double err = relative_error(analytic, numeric);
            ++r.checked;
            if (err > r.max_relative_error || r.worst_parameter.empty()) {
                r.max_relative_error = err;
                r.worst_parameter = params.names()[p];
                r.worst_index = j;
                r.analytic = analytic;
                r.numeric = numeric;
            }
        }
    }
    return r;
}

/// Toy dimensions for gradient checks: embed 4, hidden 3, 3 classes, length 5.
inline ModelSpec toy_spec(Architecture arch) {
    ModelSpec s;
    s.architecture = arch;
    s.vocab_size = 10;
    s.embed_dim = 4;
    s.hidden_dim = 3;
    s.kernel_width = 3;
    s.dense_dim = 3;
    s.dense_layers = 1;
    s.num_classes = 3;
    s.max_len = 5;
    return s;
}

/// Gradient check at toy dimensions on a fixed full-length sequence.
inline GradCheckResult toy_gradient_check(Architecture arch, std::uint64_t seed = 7) {
    const ModelSpec spec = toy_spec(arch);
    auto params = init_params<double>(spec, seed);
    // Non-zero biases so ReLU units sit away from their kink.
    Rng rng(seed + 1);
    for (std::size_t p = 0; p < params.size(); ++p)
        if (params.tensors()[p].rank() == 1)
            for (auto& v : params.tensors()[p].data) v += rng.uniform(-0.3, 0.3);
    const std::vector<std::uint32_t> ids = {3, 7, 2, 9, 5};
    return gradient_check(spec, std::move(params), ids, ids.size(), 1);
}

}  // namespace phaseclf
