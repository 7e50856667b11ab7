#pragma once

// End-to-end pipeline steps behind the command-line tool. Output file names under the
// output directory are fixed:
//
//   synth      corpus.csv
//   prepare    vocab.txt  schema.json  prep.json  dataset.tsv  cleaning_stats.json
//   train      (prepare outputs)  model.phclf  history.tsv
//   evaluate   confusion_matrix.csv  summary.json  report.txt
//   compare    comparison.tsv  comparison.txt  and per architecture <arch>/history.tsv, <arch>/report.txt

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "phaseclf/artifacts.hpp"
#include "phaseclf/config.hpp"
#include "phaseclf/eval.hpp"
#include "phaseclf/gradcheck.hpp"
#include "phaseclf/ingest.hpp"
#include "phaseclf/model.hpp"
#include "phaseclf/synth.hpp"
#include "phaseclf/textprep.hpp"
#include "phaseclf/train.hpp"

namespace phaseclf {

namespace files {
inline constexpr const char* corpus = "corpus.csv";
inline constexpr const char* vocab = "vocab.txt";
inline constexpr const char* schema = "schema.json";
inline constexpr const char* prep = "prep.json";
inline constexpr const char* dataset = "dataset.tsv";
inline constexpr const char* cleaning_stats = "cleaning_stats.json";
inline constexpr const char* model = "model.phclf";
inline constexpr const char* history = "history.tsv";
inline constexpr const char* confusion = "confusion_matrix.csv";
inline constexpr const char* summary = "summary.json";
inline constexpr const char* report = "report.txt";
inline constexpr const char* comparison_tsv = "comparison.tsv";
inline constexpr const char* comparison_txt = "comparison.txt";
}  // namespace files

/// Command-line overrides applied on top of the config file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<Architecture> architecture;
    std::optional<std::filesystem::path> out_dir;
};

inline void apply_overrides(RunConfig& config, const Overrides& o) {
    if (o.seed) config.train.seed = *o.seed;
    if (o.architecture) config.model.architecture = *o.architecture;
}

inline std::filesystem::path output_dir(const RunConfig& config, const Overrides& o) {
    return o.out_dir ? *o.out_dir : config.resolve(config.paths.out_dir);
}

// ---------------------------------------------------------------------------
// prepare

struct PreparedData {
    PrepConfig prep;
    LabelSchema schema = LabelSchema::default_schema();
    Vocabulary vocab;
    EncodedDataset dataset;
    CleaningStats stats;
};

/// Narratives and labels -> vocabulary and encoded dataset. Records whose narrative has no
/// tokens left after preprocessing are dropped and counted as empty narratives.
inline PreparedData encode_records(const std::vector<OccurrenceRecord>& records, CleaningStats stats,
                                   const PrepConfig& prep, const LabelSchema& schema) {
    PreparedData out;
    out.prep = prep;
    out.schema = schema;
    std::vector<std::vector<std::string>> tokens;
    std::vector<std::size_t> labels;
    tokens.reserve(records.size());
    for (const auto& r : records) {
        auto t = prepare_tokens(r.narrative, prep);
        if (t.empty()) {
            ++stats.dropped_empty_narrative;
            --stats.retained_count;
            continue;
        }
        tokens.push_back(std::move(t));
        labels.push_back(r.label);
    }
    out.vocab = build_vocabulary(tokens, prep);
    out.dataset.num_classes = schema.size();
    out.dataset.labels = std::move(labels);
    out.dataset.sequences.reserve(tokens.size());
    for (const auto& t : tokens) out.dataset.sequences.push_back(encode_sequence(t, out.vocab, prep.max_len));
    out.stats = stats;
    return out;
}

inline PreparedData prepare_corpus(const RunConfig& config) {
    config.validate_inputs();
    const auto raw = load_corpus(config.resolve(config.paths.corpus).string(), config.ingest);
    auto [records, stats] = clean_corpus(raw, config.schema);
    return encode_records(records, stats, config.prep(), config.schema);
}

inline std::string dataset_to_text(const EncodedDataset& d, std::size_t max_len) {
    std::string out = "# label\tids (unpadded prefix; max_len " + std::to_string(max_len) + ")\n";
    for (std::size_t i = 0; i < d.size(); ++i) {
        out += std::to_string(d.labels[i]);
        out += '\t';
        const auto prefix = d.sequences[i].prefix();
        for (std::size_t t = 0; t < prefix.size(); ++t) {
            if (t) out += ' ';
            out += std::to_string(prefix[t]);
        }
        out += '\n';
    }
    return out;
}

inline void write_prepared(const PreparedData& p, const std::filesystem::path& dir) {
    save_vocabulary(p.vocab, dir / files::vocab);
    write_file_atomic(dir / files::schema, schema_to_json(p.schema).dump(2) + "\n");
    write_file_atomic(dir / files::prep, prep_to_json(p.prep).dump(2) + "\n");
    write_file_atomic(dir / files::dataset, dataset_to_text(p.dataset, p.prep.max_len));
    const Json stats{{"input_count", p.stats.input_count},
                     {"retained_count", p.stats.retained_count},
                     {"dropped_empty_narrative", p.stats.dropped_empty_narrative},
                     {"dropped_unmappable_label", p.stats.dropped_unmappable_label}};
    write_file_atomic(dir / files::cleaning_stats, stats.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// commands

inline int cmd_synth(const RunConfig& config, const Overrides& o, std::ostream& out) {
    auto profile = config.synth;
    if (o.seed) profile.seed = *o.seed;
    const auto records = generate_corpus(profile);
    const auto path = output_dir(config, o) / files::corpus;
    write_file_atomic(path, corpus_to_delimited(records, profile, config.ingest));
    out << "wrote " << records.size() << " records to " << path.string() << "\n";
    return 0;
}

inline int cmd_prepare(const RunConfig& config, const Overrides& o, std::ostream& out) {
    const auto p = prepare_corpus(config);
    const auto dir = output_dir(config, o);
    write_prepared(p, dir);
    out << "input " << p.stats.input_count << ", retained " << p.stats.retained_count << ", dropped (empty) "
        << p.stats.dropped_empty_narrative << ", dropped (label) " << p.stats.dropped_unmappable_label
        << "; vocabulary " << p.vocab.size() << " ids; outputs in " << dir.string() << "\n";
    return 0;
}

struct TrainOutcome {
    ModelArtifact artifact;
    TrainingHistory history;
    SplitIndices splits;
};

/// Split, train and package one model. `log` receives one line per epoch when non-null.
inline TrainOutcome train_artifact(const RunConfig& config, const PreparedData& p, std::ostream* log = nullptr) {
    const auto spec = config.model.spec_for(p.vocab.size(), p.schema.size(), p.prep.max_len);
    spec.validate();
    auto splits = split_dataset(p.dataset.size(), config.train.seed);
    const auto on_epoch = [&](const EpochRecord& e) {
        if (!log) return;
        char buf[160];
        std::snprintf(buf, sizeof buf, "[%s] epoch %zu/%zu  train_loss %.4f  val_loss %.4f  val_acc %.4f\n",
                      to_string(spec.architecture).c_str(), e.epoch, config.train.epochs, e.train_loss, e.val_loss,
                      e.val_accuracy);
        *log << buf << std::flush;
    };

    ModelArtifact a;
    a.spec = spec;
    a.schema = p.schema;
    a.prep = p.prep;
    a.vocabulary_digest = p.vocab.digest();
    a.train_seed = config.train.seed;
    TrainingHistory history;
    if (config.train.precision == Precision::f64) {
        auto r = train_model<double>(spec, p.dataset, splits.train, splits.val, config.train, on_epoch);
        a.params = r.params.cast<float>();
        history = std::move(r.history);
    } else {
        auto r = train_model<float>(spec, p.dataset, splits.train, splits.val, config.train, on_epoch);
        a.params = std::move(r.params);
        history = std::move(r.history);
    }
    return {std::move(a), std::move(history), std::move(splits)};
}

inline int cmd_train(const RunConfig& config, const Overrides& o, std::ostream& out, std::ostream* log = nullptr) {
    RunConfig c = config;
    apply_overrides(c, o);
    const auto p = prepare_corpus(c);
    const auto dir = output_dir(c, o);
    write_prepared(p, dir);
    const auto t = train_artifact(c, p, log);
    save_model(t.artifact, dir / files::model);
    write_file_atomic(dir / files::history, t.history.to_text());
    out << "trained " << display_name(c.model.architecture) << " on " << t.splits.train.size() << " records ("
        << t.splits.val.size() << " validation); model written to " << (dir / files::model).string() << "\n";
    return 0;
}

struct TestEvaluation {
    ConfusionMatrix confusion;
    EvalSummary summary;
};

/// Evaluate an artifact on the test split implied by its training seed.
inline TestEvaluation evaluate_artifact(const ModelArtifact& a, const PreparedData& p) {
    verify_vocabulary(a, p.vocab);
    const auto splits = split_dataset(p.dataset.size(), a.train_seed);
    const auto r = evaluate_on<float>(a.spec, a.params, splits.test, p.dataset);
    std::vector<std::size_t> truth;
    truth.reserve(splits.test.size());
    for (const auto i : splits.test) truth.push_back(p.dataset.labels[i]);
    auto cm = confusion_matrix(truth, r.predictions, a.spec.num_classes);
    auto summary = summarize(cm);
    return {std::move(cm), std::move(summary)};
}

inline void write_evaluation(const TestEvaluation& e, const std::vector<std::string>& labels,
                             const std::filesystem::path& dir) {
    write_file_atomic(dir / files::confusion, e.confusion.to_delimited(labels));
    export_summary(e.summary, labels, dir / files::summary);
    write_file_atomic(dir / files::report, render_report(e.summary, labels));
}

inline int cmd_evaluate(const RunConfig& config, const Overrides& o, const std::filesystem::path& model_path,
                        std::ostream& out) {
    const auto artifact = load_model(model_path);
    RunConfig c = config;
    c.schema = artifact.schema;
    const auto p = prepare_corpus(c);
    const auto e = evaluate_artifact(artifact, p);
    const auto dir = output_dir(c, o);
    write_evaluation(e, artifact.schema.classes(), dir);
    out << render_report(e.summary, artifact.schema.classes());
    return 0;
}

struct Prediction {
    std::size_t class_index = 0;
    std::vector<float> probabilities;
};

inline Prediction predict_text(const ModelArtifact& a, const Vocabulary& vocab, const std::string& text) {
    const auto tokens = prepare_tokens(text, a.prep);
    if (tokens.empty()) throw DataError("narrative has no tokens left after preprocessing: '" + text + "'");
    const auto seq = encode_sequence(tokens, vocab, a.prep.max_len);
    const auto c = model_forward<float>(a.spec, a.params, seq);
    return {predict_class<float>(c.probs), c.probs};
}

/// One line per text: class name, then the probability vector in schema order.
inline int cmd_predict(const std::filesystem::path& model_path, const std::filesystem::path& vocab_path,
                       const std::vector<std::string>& texts, std::ostream& out) {
    const auto artifact = load_model(model_path);
    const auto vocab = load_vocabulary(vocab_path);
    verify_vocabulary(artifact, vocab);
    for (const auto& text : texts) {
        const auto p = predict_text(artifact, vocab, text);
        out << artifact.schema.classes()[p.class_index];
        char buf[32];
        for (const float v : p.probabilities) {
            std::snprintf(buf, sizeof buf, "\t%.6f", static_cast<double>(v));
            out << buf;
        }
        out << "\n";
    }
    return 0;
}

struct ComparisonRow {
    Architecture architecture;
    EvalSummary summary;
};

/// Precision, recall and F1 are support-weighted averages, in percent; accuracy to one decimal.
inline std::string render_comparison(const std::vector<ComparisonRow>& rows) {
    std::string out = "Models  Precision (%)  Recall (%)  F1 (%)  Accuracy (%)\n";
    char buf[160];
    for (const auto& r : rows) {
        const auto pct0 = [](double v) { return std::to_string(static_cast<long long>(std::floor(v * 100 + 0.5 + 1e-9))); };
        const double acc10 = std::floor(r.summary.accuracy * 1000 + 0.5 + 1e-9) / 10;
        std::snprintf(buf, sizeof buf, "%-6s  %13s  %10s  %6s  %12.1f\n", display_name(r.architecture).c_str(),
                      pct0(r.summary.weighted.precision).c_str(), pct0(r.summary.weighted.recall).c_str(),
                      pct0(r.summary.weighted.f1).c_str(), acc10);
        out += buf;
    }
    return out;
}

inline std::string comparison_to_tsv(const std::vector<ComparisonRow>& rows) {
    std::string out = "model\tprecision\trecall\tf1\taccuracy\n";
    char buf[200];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s\t%.17g\t%.17g\t%.17g\t%.17g\n", display_name(r.architecture).c_str(),
                      r.summary.weighted.precision, r.summary.weighted.recall, r.summary.weighted.f1,
                      r.summary.accuracy);
        out += buf;
    }
    return out;
}

/// Train and test every architecture under one seed, in the order LSTM, sRNN, BLSTM, CNN.
inline std::vector<ComparisonRow> run_comparison(const RunConfig& config, const PreparedData& p,
                                                 const std::filesystem::path* dir, std::ostream* log) {
    std::vector<ComparisonRow> rows;
    for (const auto arch : kAllArchitectures) {
        RunConfig c = config;
        c.model.architecture = arch;
        const auto t = train_artifact(c, p, log);
        const auto e = evaluate_artifact(t.artifact, p);
        if (dir) {
            const auto sub = *dir / to_string(arch);
            write_file_atomic(sub / files::history, t.history.to_text());
            write_file_atomic(sub / files::report, render_report(e.summary, p.schema.classes()));
        }
        rows.push_back({arch, e.summary});
    }
    return rows;
}

inline int cmd_compare(const RunConfig& config, const Overrides& o, std::ostream& out, std::ostream* log = nullptr) {
    RunConfig c = config;
    apply_overrides(c, o);
    const auto p = prepare_corpus(c);
    const auto dir = output_dir(c, o);
    write_prepared(p, dir);
    const auto rows = run_comparison(c, p, &dir, log);
    const auto table = render_comparison(rows);
    write_file_atomic(dir / files::comparison_tsv, comparison_to_tsv(rows));
    write_file_atomic(dir / files::comparison_txt, table);
    out << table;
    return 0;
}

inline constexpr double kGradCheckTolerance = 1e-4;

/// Finite-difference check of every architecture at toy size; returns 1 if any exceeds the tolerance.
inline int cmd_gradcheck(std::uint64_t seed, std::ostream& out) {
    bool ok = true;
    char buf[200];
    for (const auto arch : kAllArchitectures) {
        const auto r = toy_gradient_check(arch, seed);
        const bool pass = r.max_relative_error <= kGradCheckTolerance;
        ok = ok && pass;
        std::snprintf(buf, sizeof buf, "%-6s max_rel_error %.3e over %zu parameters (worst: %s[%zu])  %s\n",
                      display_name(arch).c_str(), r.max_relative_error, r.checked, r.worst_parameter.c_str(),
                      r.worst_index, pass ? "ok" : "FAIL");
        out << buf;
    }
    return ok ? 0 : 1;
}

}  // namespace phaseclf
