#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "phaseclf/error.hpp"

namespace phaseclf {

/// Dense row-major tensor.
template <typename T>
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<T> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> dims, T fill = T(0))
        : shape(std::move(dims)), data(element_count(shape), fill) {}

    static std::size_t element_count(const std::vector<std::size_t>& dims) {
        return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
    }

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t dim(std::size_t i) const { return shape.at(i); }

    T& operator()(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }

    std::span<T> row(std::size_t r) {
        const std::size_t stride = data.size() / shape[0];
        return {data.data() + r * stride, stride};
    }
    std::span<const T> row(std::size_t r) const {
        const std::size_t stride = data.size() / shape[0];
        return {data.data() + r * stride, stride};
    }

    void fill(T value) { std::fill(data.begin(), data.end(), value); }

    bool all_finite() const {
        for (const T v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool operator==(const Tensor&) const = default;
};

inline std::string shape_string(const std::vector<std::size_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
    return s + "]";
}

namespace linalg {

/// out += W x, W is [rows x cols].
template <typename T>
void matvec_add(const Tensor<T>& W, std::span<const T> x, std::span<T> out) {
    const std::size_t rows = W.shape[0], cols = W.shape[1];
    for (std::size_t r = 0; r < rows; ++r) {
        const T* w = W.data.data() + r * cols;
        T acc = T(0);
        for (std::size_t c = 0; c < cols; ++c) acc += w[c] * x[c];
        out[r] += acc;
    }
}

/// out += W^T g.
template <typename T>
void matvec_transposed_add(const Tensor<T>& W, std::span<const T> g, std::span<T> out) {
    const std::size_t rows = W.shape[0], cols = W.shape[1];
    for (std::size_t r = 0; r < rows; ++r) {
        const T* w = W.data.data() + r * cols;
        const T gr = g[r];
        if (gr == T(0)) continue;
        for (std::size_t c = 0; c < cols; ++c) out[c] += w[c] * gr;
    }
}

/// G += g x^T.
template <typename T>
void outer_add(Tensor<T>& G, std::span<const T> g, std::span<const T> x) {
    const std::size_t rows = G.shape[0], cols = G.shape[1];
    for (std::size_t r = 0; r < rows; ++r) {
        const T gr = g[r];
        if (gr == T(0)) continue;
        T* out = G.data.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) out[c] += gr * x[c];
    }
}

template <typename T>
void add(std::span<T> out, std::span<const T> x) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += x[i];
}

}  // namespace linalg

}  // namespace phaseclf
