#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phaseclf/error.hpp"
#include "phaseclf/model.hpp"
#include "phaseclf/optim.hpp"
#include "phaseclf/rng.hpp"
#include "phaseclf/textprep.hpp"

namespace phaseclf {

/// Encoded corpus: one sequence and one class index per record.
struct EncodedDataset {
    std::vector<SequenceVector> sequences;
    std::vector<std::size_t> labels;
    std::size_t num_classes = 0;

    std::size_t size() const { return sequences.size(); }
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

/// round(num / den) with halves rounded up, in exact integer arithmetic.
inline std::size_t round_half_up_ratio(std::size_t value, std::size_t num, std::size_t den) {
    return (2 * value * num + den) / (2 * den);
}

/// Shuffle 0..n-1, then take test = round(20% of n), val = round(10% of the rest), train = remainder.
inline SplitIndices split_dataset(std::size_t n, std::uint64_t seed) {
    if (n < 10) throw DataError("need at least 10 records to split, got " + std::to_string(n));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));

    const std::size_t n_test = round_half_up_ratio(n, 1, 5);
    const std::size_t n_val = round_half_up_ratio(n - n_test, 1, 10);
    SplitIndices s;
    const auto begin = order.begin();
    s.test.assign(begin, begin + static_cast<std::ptrdiff_t>(n_test));
    s.val.assign(begin + static_cast<std::ptrdiff_t>(n_test), begin + static_cast<std::ptrdiff_t>(n_test + n_val));
    s.train.assign(begin + static_cast<std::ptrdiff_t>(n_test + n_val), order.end());
    std::sort(s.test.begin(), s.test.end());
    std::sort(s.val.begin(), s.val.end());
    std::sort(s.train.begin(), s.train.end());
    if (s.train.empty()) throw DataError("split left no training records");
    return s;
}

/// Reshuffle with a generator seeded by (seed, epoch), then chunk; the last batch may be short.
inline std::vector<std::vector<std::size_t>> make_batches(std::span<const std::size_t> indices, std::size_t batch_size,
                                                          std::uint64_t seed, std::uint64_t epoch) {
    if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
    std::vector<std::size_t> order(indices.begin(), indices.end());
    Rng rng(Rng::derive(seed, epoch));
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t i = 0; i < order.size(); i += batch_size)
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                             order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), i + batch_size)));
    return batches;
}

enum class Precision { f32, f64 };

struct TrainConfig {
    std::size_t epochs = 20;
    std::size_t batch_size = 32;
    std::uint64_t seed = 42;
    AdamHyper adam;
    Precision precision = Precision::f32;
    std::optional<double> clip_norm;
    bool select_best_val = false;

    void validate() const {
        if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
        if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
        if (clip_norm && !(*clip_norm > 0)) throw ConfigError("train.clip_norm must be > 0");
        adam.validate();
    }

    bool operator==(const TrainConfig&) const = default;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0;
    double val_loss = 0;
    double val_accuracy = 0;
};

struct TrainingHistory {
    std::vector<EpochRecord> epochs;

    /// Tab-separated columns with a header row, full double precision.
    std::string to_text() const {
        std::string out = "epoch\ttrain_loss\tval_loss\tval_accuracy\n";
        char buf[128];
        for (const auto& e : epochs) {
            std::snprintf(buf, sizeof buf, "%zu\t%.17g\t%.17g\t%.17g\n", e.epoch, e.train_loss, e.val_loss,
                          e.val_accuracy);
            out += buf;
        }
        return out;
    }
};

struct EvalResult {
    double mean_loss = 0;
    double accuracy = 0;
    std::vector<std::size_t> predictions;
};

/// Mean cross-entropy and argmax accuracy over a set of record indices.
template <typename T>
EvalResult evaluate_on(const ModelSpec& spec, const ParamSet<T>& params, std::span<const std::size_t> indices,
                       const EncodedDataset& data) {
    if (indices.empty()) throw DataError("cannot evaluate on an empty index set");
    EvalResult r;
    r.predictions.reserve(indices.size());
    double loss = 0;
    std::size_t correct = 0;
    for (const std::size_t i : indices) {
        const auto c = model_forward<T>(spec, params, data.sequences.at(i));
        loss += static_cast<double>(cross_entropy<T>(c.probs, data.labels[i]));
        const std::size_t pred = predict_class<T>(c.probs);
        r.predictions.push_back(pred);
        if (pred == data.labels[i]) ++correct;
    }
    r.mean_loss = loss / static_cast<double>(indices.size());
    r.accuracy = static_cast<double>(correct) / static_cast<double>(indices.size());
    return r;
}

template <typename T>
struct TrainResult {
    ParamSet<T> params;
    TrainingHistory history;
    std::size_t selected_epoch = 0;
};

/// Seed used for weight initialization, derived from the run seed.
inline std::uint64_t init_seed(std::uint64_t seed) { return Rng::derive(seed, 0x1417); }

/// Adam training over the train indices with per-epoch validation. Test indices are never passed in.
template <typename T>
TrainResult<T> train_model(const ModelSpec& spec, const EncodedDataset& data, std::span<const std::size_t> train_idx,
                           std::span<const std::size_t> val_idx, const TrainConfig& config,
                           const std::function<void(const EpochRecord&)>& on_epoch = {}) {
    spec.validate();
    config.validate();
    if (train_idx.empty()) throw DataError("no training records");

    TrainResult<T> result{init_params<T>(spec, init_seed(config.seed)), {}, config.epochs};
    auto& params = result.params;
    auto grads = params.zeros_like();
    auto state = AdamState<T>::fresh(params);
    std::optional<ParamSet<T>> best;
    double best_acc = -1;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto batches = make_batches(train_idx, config.batch_size, config.seed, epoch);
        double epoch_loss = 0;
        for (std::size_t b = 0; b < batches.size(); ++b) {
            const auto& batch = batches[b];
            grads.fill(T(0));
            const T scale = T(1) / static_cast<T>(batch.size());
            for (const std::size_t i : batch) {
                const auto cache = model_forward<T>(spec, params, data.sequences[i]);
                const T loss = cross_entropy<T>(cache.probs, data.labels[i]);
                if (!std::isfinite(loss))
                    throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                       std::to_string(b + 1) + ", record " + std::to_string(i));
                epoch_loss += static_cast<double>(loss);
                auto d = softmax_cross_entropy_grad<T>(cache.probs, data.labels[i]);
                for (auto& v : d) v *= scale;
                model_backward<T>(spec, params, cache, d, grads);
            }
            if (config.clip_norm) clip_global_norm(grads, *config.clip_norm);
            adam_step(params, grads, state, config.adam);
        }

        EpochRecord rec{epoch, epoch_loss / static_cast<double>(train_idx.size()), 0, 0};
        if (!val_idx.empty()) {
            const auto v = evaluate_on<T>(spec, params, val_idx, data);
            rec.val_loss = v.mean_loss;
            rec.val_accuracy = v.accuracy;
        }
        result.history.epochs.push_back(rec);
        if (on_epoch) on_epoch(rec);
        if (config.select_best_val && rec.val_accuracy > best_acc) {
            best_acc = rec.val_accuracy;
            best = params;
            result.selected_epoch = epoch;
        }
    }
    if (config.select_best_val && best) result.params = std::move(*best);
    return result;
}

}  // namespace phaseclf
