#pragma once

// The four sequence classifiers, sharing one layout:
//
//   embedding -> sequence block -> dense(ReLU) x dense_layers -> output dense -> softmax
//
// Sequence blocks:
//   SRNN   ReLU recurrence, summary = hidden state at position true_length - 1
//   LSTM   standard LSTM, same summary rule
//   BLSTM  forward and backward LSTMs, summary = concat of both final states
//   CNN    same-padded conv1d + ReLU, summary = masked global max pool

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phaseclf/error.hpp"
#include "phaseclf/nncore.hpp"
#include "phaseclf/rng.hpp"
#include "phaseclf/tensor.hpp"
#include "phaseclf/textprep.hpp"

namespace phaseclf {

enum class Architecture { srnn, lstm, blstm, cnn };

inline constexpr std::array<Architecture, 4> kAllArchitectures = {Architecture::lstm, Architecture::srnn,
                                                                  Architecture::blstm, Architecture::cnn};

inline std::string to_string(Architecture a) {
    switch (a) {
        case Architecture::srnn: return "srnn";
        case Architecture::lstm: return "lstm";
        case Architecture::blstm: return "blstm";
        case Architecture::cnn: return "cnn";
    }
    return "?";
}

/// Display name as used in comparison tables.
inline std::string display_name(Architecture a) {
    switch (a) {
        case Architecture::srnn: return "sRNN";
        case Architecture::lstm: return "LSTM";
        case Architecture::blstm: return "BLSTM";
        case Architecture::cnn: return "CNN";
    }
    return "?";
}

inline std::optional<Architecture> parse_architecture(std::string_view name) {
    const auto lower = detail::to_lower(name);
    for (const auto a : kAllArchitectures)
        if (to_string(a) == lower) return a;
    return std::nullopt;
}

struct ModelSpec {
    Architecture architecture = Architecture::lstm;
    std::size_t vocab_size = 0;
    std::size_t embed_dim = 32;
    std::size_t hidden_dim = 32;  // recurrent units or conv filters
    std::size_t kernel_width = 3;
    std::size_t dense_dim = 32;
    std::size_t dense_layers = 1;
    std::size_t num_classes = 0;
    std::size_t max_len = 2000;

    void validate() const {
        const auto positive = [](std::size_t v, const char* name) {
            if (v < 1) throw ConfigError(std::string("model.") + name + " must be >= 1");
        };
        positive(vocab_size, "vocab_size");
        positive(embed_dim, "embed_dim");
        positive(hidden_dim, "hidden_dim");
        positive(dense_dim, "dense_dim");
        positive(num_classes, "num_classes");
        positive(max_len, "max_len");
        if (architecture == Architecture::cnn) {
            if (kernel_width % 2 == 0) throw ConfigError("model.kernel_width must be odd");
            if (kernel_width > max_len) throw ConfigError("model.kernel_width must be <= max_len");
        }
    }

    /// Width of the sequence summary fed to the dense stack.
    std::size_t summary_dim() const { return architecture == Architecture::blstm ? 2 * hidden_dim : hidden_dim; }

    bool operator==(const ModelSpec&) const = default;
};

/// Ordered, named parameter tensors. Order is fixed by the architecture and never changes.
template <typename T>
class ParamSet {
public:
    void add(std::string name, Tensor<T> tensor) {
        names_.push_back(std::move(name));
        tensors_.push_back(std::move(tensor));
    }

    std::size_t size() const { return tensors_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    std::vector<Tensor<T>>& tensors() { return tensors_; }
    const std::vector<Tensor<T>>& tensors() const { return tensors_; }

    std::optional<std::size_t> find(std::string_view name) const {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) return i;
        return std::nullopt;
    }

    Tensor<T>& operator[](std::string_view name) { return tensors_[index(name)]; }
    const Tensor<T>& operator[](std::string_view name) const { return tensors_[index(name)]; }

    ParamSet zeros_like() const {
        ParamSet out;
        for (std::size_t i = 0; i < size(); ++i) out.add(names_[i], Tensor<T>(tensors_[i].shape));
        return out;
    }

    void fill(T value) {
        for (auto& t : tensors_) t.fill(value);
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& t : tensors_) n += t.size();
        return n;
    }

    template <typename U>
    ParamSet<U> cast() const {
        ParamSet<U> out;
        for (std::size_t i = 0; i < size(); ++i) {
            Tensor<U> t(tensors_[i].shape);
            for (std::size_t j = 0; j < t.size(); ++j) t.data[j] = static_cast<U>(tensors_[i].data[j]);
            out.add(names_[i], std::move(t));
        }
        return out;
    }

    bool operator==(const ParamSet&) const = default;

private:
    std::size_t index(std::string_view name) const {
        if (auto i = find(name)) return *i;
        throw NumericError("no parameter named " + std::string(name));
    }

    std::vector<std::string> names_;
    std::vector<Tensor<T>> tensors_;
};

namespace detail {

inline constexpr std::array<const char*, 4> kGateNames = {"i", "f", "o", "g"};

inline std::string dense_name(std::size_t layer, const char* part) {
    return "dense" + std::to_string(layer) + "." + part;
}

template <typename T>
LstmWeights<T> lstm_weights(const ParamSet<T>& p, const std::string& prefix) {
    LstmWeights<T> w;
    for (std::size_t q = 0; q < 4; ++q) {
        w.W[q] = &p[prefix + ".W_" + kGateNames[q]];
        w.U[q] = &p[prefix + ".U_" + kGateNames[q]];
        w.b[q] = &p[prefix + ".b_" + kGateNames[q]];
    }
    return w;
}

template <typename T>
LstmGrads<T> lstm_grads(ParamSet<T>& p, const std::string& prefix) {
    LstmGrads<T> g;
    for (std::size_t q = 0; q < 4; ++q) {
        g.W[q] = &p[prefix + ".W_" + kGateNames[q]];
        g.U[q] = &p[prefix + ".U_" + kGateNames[q]];
        g.b[q] = &p[prefix + ".b_" + kGateNames[q]];
    }
    return g;
}

}  // namespace detail

/// Parameter names and shapes for a spec, in canonical order.
inline std::vector<std::pair<std::string, std::vector<std::size_t>>> parameter_layout(const ModelSpec& spec) {
    std::vector<std::pair<std::string, std::vector<std::size_t>>> out;
    const std::size_t D = spec.embed_dim, H = spec.hidden_dim;
    out.push_back({"embedding", {spec.vocab_size, D}});
    const auto lstm = [&](const std::string& prefix) {
        for (const char* g : detail::kGateNames) out.push_back({prefix + ".W_" + g, {H, D}});
        for (const char* g : detail::kGateNames) out.push_back({prefix + ".U_" + g, {H, H}});
        for (const char* g : detail::kGateNames) out.push_back({prefix + ".b_" + g, {H}});
    };
    switch (spec.architecture) {
        case Architecture::srnn:
            out.push_back({"rnn.W", {H, D}});
            out.push_back({"rnn.U", {H, H}});
            out.push_back({"rnn.b", {H}});
            break;
        case Architecture::lstm: lstm("lstm"); break;
        case Architecture::blstm:
            lstm("lstm_fwd");
            lstm("lstm_bwd");
            break;
        case Architecture::cnn:
            out.push_back({"conv.filters", {H, spec.kernel_width, D}});
            out.push_back({"conv.bias", {H}});
            break;
    }
    std::size_t in = spec.summary_dim();
    for (std::size_t l = 0; l < spec.dense_layers; ++l) {
        out.push_back({detail::dense_name(l, "W"), {spec.dense_dim, in}});
        out.push_back({detail::dense_name(l, "b"), {spec.dense_dim}});
        in = spec.dense_dim;
    }
    out.push_back({"output.W", {spec.num_classes, in}});
    out.push_back({"output.b", {spec.num_classes}});
    return out;
}

/// Glorot-uniform weights, zero biases, LSTM forget-gate bias 1. Deterministic in seed.
template <typename T>
ParamSet<T> init_params(const ModelSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    ParamSet<T> params;
    for (auto& [name, shape] : parameter_layout(spec)) {
        Tensor<T> t(shape);
        if (shape.size() >= 2) {
            std::size_t fan_in = 1;
            for (std::size_t i = 1; i < shape.size(); ++i) fan_in *= shape[i];
            const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + shape[0]));
            for (auto& v : t.data) v = static_cast<T>(rng.uniform(-limit, limit));
        } else if (name.ends_with(".b_f")) {
            t.fill(T(1));
        }
        params.add(name, std::move(t));
    }
    return params;
}

template <typename T>
void check_params(const ModelSpec& spec, const ParamSet<T>& params) {
    const auto layout = parameter_layout(spec);
    if (layout.size() != params.size()) throw NumericError("parameter set does not match model spec");
    for (std::size_t i = 0; i < layout.size(); ++i)
        if (layout[i].first != params.names()[i] || layout[i].second != params.tensors()[i].shape)
            throw NumericError("parameter " + layout[i].first + " expected shape " + shape_string(layout[i].second));
}

/// Intermediate values from model_forward needed by model_backward.
template <typename T>
struct ForwardCache {
    ModelSpec spec;
    const void* params_id = nullptr;
    std::vector<std::uint32_t> ids;  // unpadded prefix
    Tensor<T> embedded;
    std::vector<std::vector<T>> rnn_hidden;
    LstmTrace<T> lstm_fwd;
    LstmTrace<T> lstm_bwd;
    Tensor<T> conv_out;
    PoolResult<T> pool;
    std::vector<std::vector<T>> activations;  // [0] = summary, [l + 1] = output of dense layer l
    std::vector<T> logits;
    std::vector<T> probs;
};

template <typename T>
ForwardCache<T> model_forward(const ModelSpec& spec, const ParamSet<T>& params, std::span<const std::uint32_t> ids,
                              std::size_t true_length) {
    if (true_length == 0) throw NumericError("cannot run a model on an empty sequence (true_length 0)");
    if (true_length > ids.size()) throw NumericError("true_length exceeds sequence length");
    ForwardCache<T> cache;
    cache.spec = spec;
    cache.params_id = &params;
    cache.ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(true_length));
    cache.embedded = embedding_forward<T>(cache.ids, params["embedding"]);

    std::vector<T> summary;
    switch (spec.architecture) {
        case Architecture::srnn: {
            const RnnWeights<T> w{params["rnn.W"], params["rnn.U"], params["rnn.b"]};
            cache.rnn_hidden = srnn_sequence<T>(cache.embedded, w);
            summary = cache.rnn_hidden.back();
            break;
        }
        case Architecture::lstm:
            cache.lstm_fwd = lstm_sequence<T>(cache.embedded, detail::lstm_weights(params, "lstm"));
            summary = cache.lstm_fwd.last_hidden();
            break;
        case Architecture::blstm: {
            cache.lstm_fwd = lstm_sequence<T>(cache.embedded, detail::lstm_weights(params, "lstm_fwd"), false);
            cache.lstm_bwd = lstm_sequence<T>(cache.embedded, detail::lstm_weights(params, "lstm_bwd"), true);
            summary = cache.lstm_fwd.last_hidden();
            const auto& b = cache.lstm_bwd.last_hidden();
            summary.insert(summary.end(), b.begin(), b.end());
            break;
        }
        case Architecture::cnn:
            cache.conv_out = conv1d_forward<T>(cache.embedded, params["conv.filters"], params["conv.bias"]);
            cache.pool = masked_global_max_pool<T>(cache.conv_out, true_length);
            summary = cache.pool.values;
            break;
    }

    cache.activations.push_back(std::move(summary));
    for (std::size_t l = 0; l < spec.dense_layers; ++l)
        cache.activations.push_back(dense_forward<T>(cache.activations.back(), params[detail::dense_name(l, "W")],
                                                     params[detail::dense_name(l, "b")], Activation::relu));
    cache.logits = dense_forward<T>(cache.activations.back(), params["output.W"], params["output.b"], Activation::none);
    cache.probs = softmax<T>(cache.logits);
    return cache;
}

template <typename T>
ForwardCache<T> model_forward(const ModelSpec& spec, const ParamSet<T>& params, const SequenceVector& seq) {
    return model_forward(spec, params, std::span<const std::uint32_t>(seq.ids), seq.true_length);
}

/// Accumulate (+=) parameter gradients given d(loss)/d(logits).
template <typename T>
void model_backward(const ModelSpec& spec, const ParamSet<T>& params, const ForwardCache<T>& cache,
                    std::span<const T> grad_logits, ParamSet<T>& grads) {
    if (!(cache.spec == spec) || cache.params_id != &params)
        throw NumericError("forward cache does not belong to this model and parameter set");
    if (grad_logits.size() != spec.num_classes) throw NumericError("logit gradient has wrong length");

    std::vector<T> d = dense_backward<T>(cache.activations.back(), cache.logits, params["output.W"], Activation::none,
                                         grad_logits, grads["output.W"], grads["output.b"]);
    for (std::size_t l = spec.dense_layers; l-- > 0;)
        d = dense_backward<T>(cache.activations[l], cache.activations[l + 1], params[detail::dense_name(l, "W")],
                              Activation::relu, d, grads[detail::dense_name(l, "W")],
                              grads[detail::dense_name(l, "b")]);

    Tensor<T> d_embedded(cache.embedded.shape);
    switch (spec.architecture) {
        case Architecture::srnn: {
            const RnnWeights<T> w{params["rnn.W"], params["rnn.U"], params["rnn.b"]};
            srnn_sequence_backward<T>(cache.embedded, cache.rnn_hidden, w, d,
                                      RnnGrads<T>{grads["rnn.W"], grads["rnn.U"], grads["rnn.b"]}, d_embedded);
            break;
        }
        case Architecture::lstm:
            lstm_sequence_backward<T>(cache.embedded, cache.lstm_fwd, detail::lstm_weights(params, "lstm"), d,
                                      detail::lstm_grads(grads, "lstm"), d_embedded);
            break;
        case Architecture::blstm: {
            const std::size_t H = spec.hidden_dim;
            const std::span<const T> d_all(d);
            lstm_sequence_backward<T>(cache.embedded, cache.lstm_fwd, detail::lstm_weights(params, "lstm_fwd"),
                                      d_all.subspan(0, H), detail::lstm_grads(grads, "lstm_fwd"), d_embedded);
            lstm_sequence_backward<T>(cache.embedded, cache.lstm_bwd, detail::lstm_weights(params, "lstm_bwd"),
                                      d_all.subspan(H, H), detail::lstm_grads(grads, "lstm_bwd"), d_embedded);
            break;
        }
        case Architecture::cnn: {
            Tensor<T> d_conv(cache.conv_out.shape);
            for (std::size_t f = 0; f < d.size(); ++f) d_conv(cache.pool.argmax[f], f) = d[f];
            conv1d_backward<T>(cache.embedded, cache.conv_out, params["conv.filters"], d_conv, grads["conv.filters"],
                               grads["conv.bias"], d_embedded);
            break;
        }
    }
    embedding_backward<T>(cache.ids, d_embedded, grads["embedding"]);
}

template <typename T>
ParamSet<T> model_backward(const ModelSpec& spec, const ParamSet<T>& params, const ForwardCache<T>& cache,
                           std::span<const T> grad_logits) {
    auto grads = params.zeros_like();
    model_backward(spec, params, cache, grad_logits, grads);
    return grads;
}

}  // namespace phaseclf
