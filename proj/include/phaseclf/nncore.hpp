#pragma once

// Layer primitives and their exact reverse-mode derivatives.
// Sequence layers only ever see the unpadded prefix of an encoded sequence, so
// PAD positions cannot influence outputs or receive gradient.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "phaseclf/error.hpp"
#include "phaseclf/tensor.hpp"

namespace phaseclf {

enum class Activation { none, relu };

template <typename T>
inline T sigmoid(T x) {
    return x >= T(0) ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x));
}

template <typename T>
inline T relu(T x) {
    return x > T(0) ? x : T(0);
}

// ---------------------------------------------------------------------------
// Embedding

/// Row t of the result is E[ids[t]].
template <typename T>
Tensor<T> embedding_forward(std::span<const std::uint32_t> ids, const Tensor<T>& E) {
    const std::size_t dim = E.shape[1];
    Tensor<T> out({ids.size(), dim});
    for (std::size_t t = 0; t < ids.size(); ++t) {
        if (ids[t] >= E.shape[0])
            throw NumericError("token id " + std::to_string(ids[t]) + " out of range for embedding with " +
                               std::to_string(E.shape[0]) + " rows");
        const auto src = E.row(ids[t]);
        std::copy(src.begin(), src.end(), out.row(t).begin());
    }
    return out;
}

/// Scatter-add d_embedded rows into the looked-up rows of dE.
template <typename T>
void embedding_backward(std::span<const std::uint32_t> ids, const Tensor<T>& d_embedded, Tensor<T>& dE) {
    for (std::size_t t = 0; t < ids.size(); ++t) linalg::add(dE.row(ids[t]), d_embedded.row(t));
}

// ---------------------------------------------------------------------------
// Simple recurrent cell: h_t = ReLU(W x_t + U h_{t-1} + b)

template <typename T>
struct RnnWeights {
    const Tensor<T>& W;
    const Tensor<T>& U;
    const Tensor<T>& b;
};

template <typename T>
struct RnnGrads {
    Tensor<T>& W;
    Tensor<T>& U;
    Tensor<T>& b;
};

template <typename T>
std::vector<T> srnn_step(std::span<const T> x, std::span<const T> h_prev, const RnnWeights<T>& w) {
    std::vector<T> a(w.b.data.begin(), w.b.data.end());
    linalg::matvec_add<T>(w.W, x, a);
    linalg::matvec_add<T>(w.U, h_prev, a);
    for (auto& v : a) v = relu(v);
    return a;
}

/// Hidden states for every step of the sequence (rows of `inputs`), starting from h = 0.
template <typename T>
std::vector<std::vector<T>> srnn_sequence(const Tensor<T>& inputs, const RnnWeights<T>& w) {
    const std::size_t hidden = w.b.size();
    std::vector<std::vector<T>> hs;
    hs.reserve(inputs.shape[0]);
    std::vector<T> h(hidden, T(0));
    for (std::size_t t = 0; t < inputs.shape[0]; ++t) {
        h = srnn_step<T>(inputs.row(t), h, w);
        hs.push_back(h);
    }
    return hs;
}

/// Backpropagation through time from a gradient on the last hidden state.
template <typename T>
void srnn_sequence_backward(const Tensor<T>& inputs, const std::vector<std::vector<T>>& hs, const RnnWeights<T>& w,
                            std::span<const T> d_last, RnnGrads<T> g, Tensor<T>& d_inputs) {
    const std::size_t hidden = w.b.size();
    std::vector<T> dh(d_last.begin(), d_last.end());
    std::vector<T> da(hidden);
    const std::vector<T> zeros(hidden, T(0));
    for (std::size_t t = hs.size(); t-- > 0;) {
        for (std::size_t k = 0; k < hidden; ++k) da[k] = hs[t][k] > T(0) ? dh[k] : T(0);
        const std::span<const T> h_prev = t > 0 ? std::span<const T>(hs[t - 1]) : std::span<const T>(zeros);
        linalg::outer_add<T>(g.W, da, inputs.row(t));
        linalg::outer_add<T>(g.U, da, h_prev);
        linalg::add<T>(g.b.data, da);
        linalg::matvec_transposed_add<T>(w.W, da, d_inputs.row(t));
        std::fill(dh.begin(), dh.end(), T(0));
        linalg::matvec_transposed_add<T>(w.U, da, dh);
    }
}

// ---------------------------------------------------------------------------
// LSTM cell, gate order i, f, o, g:
//   i = s(W_i x + U_i h + b_i)   f = s(W_f x + U_f h + b_f)   o = s(W_o x + U_o h + b_o)
//   g = tanh(W_g x + U_g h + b_g)   c' = f*c + i*g   h' = o*tanh(c')

inline constexpr std::size_t kGateI = 0, kGateF = 1, kGateO = 2, kGateG = 3;

template <typename T>
struct LstmWeights {
    std::array<const Tensor<T>*, 4> W;
    std::array<const Tensor<T>*, 4> U;
    std::array<const Tensor<T>*, 4> b;

    std::size_t hidden() const { return b[0]->size(); }
};

template <typename T>
struct LstmGrads {
    std::array<Tensor<T>*, 4> W;
    std::array<Tensor<T>*, 4> U;
    std::array<Tensor<T>*, 4> b;
};

template <typename T>
struct LstmStep {
    std::array<std::vector<T>, 4> gates;  // post-activation i, f, o, g
    std::vector<T> c;
    std::vector<T> tanh_c;
    std::vector<T> h;
};

template <typename T>
LstmStep<T> lstm_step(std::span<const T> x, std::span<const T> h_prev, std::span<const T> c_prev,
                      const LstmWeights<T>& w) {
    const std::size_t hidden = w.hidden();
    LstmStep<T> s;
    for (std::size_t q = 0; q < 4; ++q) {
        auto& a = s.gates[q];
        a.assign(w.b[q]->data.begin(), w.b[q]->data.end());
        linalg::matvec_add<T>(*w.W[q], x, a);
        linalg::matvec_add<T>(*w.U[q], h_prev, a);
        for (auto& v : a) v = q == kGateG ? std::tanh(v) : sigmoid(v);
    }
    s.c.resize(hidden);
    s.tanh_c.resize(hidden);
    s.h.resize(hidden);
    for (std::size_t k = 0; k < hidden; ++k) {
        s.c[k] = s.gates[kGateF][k] * c_prev[k] + s.gates[kGateI][k] * s.gates[kGateG][k];
        s.tanh_c[k] = std::tanh(s.c[k]);
        s.h[k] = s.gates[kGateO][k] * s.tanh_c[k];
    }
    return s;
}

/// Steps in processing order; step j consumed input row order[j].
template <typename T>
struct LstmTrace {
    std::vector<LstmStep<T>> steps;
    std::vector<std::size_t> order;

    const std::vector<T>& last_hidden() const { return steps.back().h; }
};

template <typename T>
LstmTrace<T> lstm_sequence(const Tensor<T>& inputs, const LstmWeights<T>& w, bool reverse = false) {
    const std::size_t n = inputs.shape[0], hidden = w.hidden();
    LstmTrace<T> trace;
    trace.steps.reserve(n);
    std::vector<T> h(hidden, T(0)), c(hidden, T(0));
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t t = reverse ? n - 1 - j : j;
        trace.steps.push_back(lstm_step<T>(inputs.row(t), h, c, w));
        trace.order.push_back(t);
        h = trace.steps.back().h;
        c = trace.steps.back().c;
    }
    return trace;
}

template <typename T>
void lstm_sequence_backward(const Tensor<T>& inputs, const LstmTrace<T>& trace, const LstmWeights<T>& w,
                            std::span<const T> d_last, LstmGrads<T> g, Tensor<T>& d_inputs) {
    const std::size_t hidden = w.hidden();
    std::vector<T> dh(d_last.begin(), d_last.end());
    std::vector<T> dc(hidden, T(0));
    std::array<std::vector<T>, 4> da;
    for (auto& v : da) v.resize(hidden);
    const std::vector<T> zeros(hidden, T(0));

    for (std::size_t j = trace.steps.size(); j-- > 0;) {
        const auto& s = trace.steps[j];
        const auto& c_prev = j > 0 ? trace.steps[j - 1].c : zeros;
        const auto& h_prev = j > 0 ? trace.steps[j - 1].h : zeros;
        const auto& gi = s.gates[kGateI];
        const auto& gf = s.gates[kGateF];
        const auto& go = s.gates[kGateO];
        const auto& gg = s.gates[kGateG];
        for (std::size_t k = 0; k < hidden; ++k) {
            const T d_o = dh[k] * s.tanh_c[k];
            dc[k] += dh[k] * go[k] * (T(1) - s.tanh_c[k] * s.tanh_c[k]);
            const T d_i = dc[k] * gg[k];
            const T d_g = dc[k] * gi[k];
            const T d_f = dc[k] * c_prev[k];
            da[kGateI][k] = d_i * gi[k] * (T(1) - gi[k]);
            da[kGateF][k] = d_f * gf[k] * (T(1) - gf[k]);
            da[kGateO][k] = d_o * go[k] * (T(1) - go[k]);
            da[kGateG][k] = d_g * (T(1) - gg[k] * gg[k]);
            dc[k] *= gf[k];
        }
        const std::size_t t = trace.order[j];
        std::fill(dh.begin(), dh.end(), T(0));
        for (std::size_t q = 0; q < 4; ++q) {
            linalg::outer_add<T>(*g.W[q], da[q], inputs.row(t));
            linalg::outer_add<T>(*g.U[q], da[q], h_prev);
            linalg::add<T>(g.b[q]->data, da[q]);
            linalg::matvec_transposed_add<T>(*w.W[q], da[q], d_inputs.row(t));
            linalg::matvec_transposed_add<T>(*w.U[q], da[q], dh);
        }
    }
}

/// concat(last forward hidden state, last backward hidden state).
template <typename T>
std::vector<T> bilstm_forward(const Tensor<T>& inputs, const LstmWeights<T>& fwd, const LstmWeights<T>& bwd) {
    const auto f = lstm_sequence<T>(inputs, fwd, false);
    const auto b = lstm_sequence<T>(inputs, bwd, true);
    std::vector<T> out = f.last_hidden();
    out.insert(out.end(), b.last_hidden().begin(), b.last_hidden().end());
    return out;
}

// ---------------------------------------------------------------------------
// 1-D convolution with same padding and ReLU.
//   out[t, f] = ReLU(bias[f] + sum_{k,d} filters[f, k, d] * in[t + k - (kw - 1) / 2, d])
// Rows outside [0, rows(in)) read as zero.

template <typename T>
Tensor<T> conv1d_forward(const Tensor<T>& inputs, const Tensor<T>& filters, const Tensor<T>& bias) {
    const std::size_t n = inputs.shape[0], dim = inputs.shape[1];
    const std::size_t nf = filters.shape[0], kw = filters.shape[1];
    if (kw % 2 == 0) throw NumericError("conv kernel width must be odd");
    if (filters.shape[2] != dim) throw NumericError("conv filter depth does not match embedding width");
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(kw - 1) / 2;
    Tensor<T> out({n, nf});
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t f = 0; f < nf; ++f) {
            T acc = bias.data[f];
            for (std::size_t k = 0; k < kw; ++k) {
                const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(t + k) - half;
                if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(n)) continue;
                const T* w = filters.data.data() + (f * kw + k) * dim;
                const T* x = inputs.data.data() + static_cast<std::size_t>(pos) * dim;
                for (std::size_t d = 0; d < dim; ++d) acc += w[d] * x[d];
            }
            out(t, f) = relu(acc);
        }
    }
    return out;
}

/// d_out is the gradient on the post-ReLU output.
template <typename T>
void conv1d_backward(const Tensor<T>& inputs, const Tensor<T>& out, const Tensor<T>& filters, const Tensor<T>& d_out,
                     Tensor<T>& d_filters, Tensor<T>& d_bias, Tensor<T>& d_inputs) {
    const std::size_t n = inputs.shape[0], dim = inputs.shape[1];
    const std::size_t nf = filters.shape[0], kw = filters.shape[1];
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(kw - 1) / 2;
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t f = 0; f < nf; ++f) {
            if (out(t, f) <= T(0)) continue;
            const T da = d_out(t, f);
            if (da == T(0)) continue;
            d_bias.data[f] += da;
            for (std::size_t k = 0; k < kw; ++k) {
                const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(t + k) - half;
                if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(n)) continue;
                const std::size_t off = (f * kw + k) * dim;
                const T* x = inputs.data.data() + static_cast<std::size_t>(pos) * dim;
                T* dx = d_inputs.data.data() + static_cast<std::size_t>(pos) * dim;
                for (std::size_t d = 0; d < dim; ++d) {
                    d_filters.data[off + d] += da * x[d];
                    dx[d] += da * filters.data[off + d];
                }
            }
        }
    }
}

template <typename T>
struct PoolResult {
    std::vector<T> values;
    std::vector<std::size_t> argmax;  // winning position per feature, earliest on ties
};

/// Per-feature max over rows t < true_length.
template <typename T>
PoolResult<T> masked_global_max_pool(const Tensor<T>& features, std::size_t true_length) {
    if (true_length == 0) throw NumericError("masked max pool needs true_length >= 1");
    if (true_length > features.shape[0]) throw NumericError("true_length exceeds feature rows");
    const std::size_t nf = features.shape[1];
    PoolResult<T> r{std::vector<T>(nf), std::vector<std::size_t>(nf, 0)};
    for (std::size_t f = 0; f < nf; ++f) {
        T best = features(0, f);
        std::size_t arg = 0;
        for (std::size_t t = 1; t < true_length; ++t)
            if (features(t, f) > best) {
                best = features(t, f);
                arg = t;
            }
        r.values[f] = best;
        r.argmax[f] = arg;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Dense layers and the output head

template <typename T>
std::vector<T> dense_forward(std::span<const T> x, const Tensor<T>& W, const Tensor<T>& b, Activation act) {
    if (W.shape[1] != x.size() || W.shape[0] != b.size()) throw NumericError("dense layer dimension mismatch");
    std::vector<T> y(b.data.begin(), b.data.end());
    linalg::matvec_add<T>(W, x, y);
    if (act == Activation::relu)
        for (auto& v : y) v = relu(v);
    return y;
}

/// Returns dx. `y` is the layer output (post-activation).
template <typename T>
std::vector<T> dense_backward(std::span<const T> x, std::span<const T> y, const Tensor<T>& W, Activation act,
                              std::span<const T> dy, Tensor<T>& dW, Tensor<T>& db) {
    std::vector<T> da(dy.begin(), dy.end());
    if (act == Activation::relu)
        for (std::size_t k = 0; k < da.size(); ++k)
            if (y[k] <= T(0)) da[k] = T(0);
    linalg::outer_add<T>(dW, da, x);
    linalg::add<T>(db.data, da);
    std::vector<T> dx(x.size(), T(0));
    linalg::matvec_transposed_add<T>(W, da, dx);
    return dx;
}

template <typename T>
std::vector<T> softmax(std::span<const T> logits) {
    const T top = *std::max_element(logits.begin(), logits.end());
    std::vector<T> p(logits.size());
    T total = T(0);
    for (std::size_t k = 0; k < logits.size(); ++k) {
        p[k] = std::exp(logits[k] - top);
        total += p[k];
    }
    for (auto& v : p) v /= total;
    return p;
}

template <typename T>
T cross_entropy(std::span<const T> probs, std::span<const T> one_hot) {
    T loss = T(0);
    for (std::size_t k = 0; k < probs.size(); ++k)
        if (one_hot[k] != T(0)) loss -= one_hot[k] * std::log(std::max(probs[k], T(1e-12)));
    return loss;
}

/// Cross-entropy of a single true class.
template <typename T>
T cross_entropy(std::span<const T> probs, std::size_t label) {
    return -std::log(std::max(probs[label], T(1e-12)));
}

/// d(cross_entropy(softmax(z), y))/dz = p - y.
template <typename T>
std::vector<T> softmax_cross_entropy_grad(std::span<const T> probs, std::size_t label) {
    std::vector<T> g(probs.begin(), probs.end());
    g[label] -= T(1);
    return g;
}

/// Smallest index attaining the maximum.
template <typename T>
std::size_t predict_class(std::span<const T> probs) {
    return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

}  // namespace phaseclf
