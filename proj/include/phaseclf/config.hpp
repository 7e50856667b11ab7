#pragma once

// Run configuration as a JSON document. Every key is optional except
// `paths.corpus` and `model.architecture`; unknown keys and type mismatches are
// rejected with the dotted key path.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "phaseclf/error.hpp"
#include "phaseclf/ingest.hpp"
#include "phaseclf/model.hpp"
#include "phaseclf/synth.hpp"
#include "phaseclf/textprep.hpp"
#include "phaseclf/train.hpp"

namespace phaseclf {

using Json = nlohmann::json;

namespace detail {

inline const char* json_type_name(const Json& j) { return j.type_name(); }

/// Walks one JSON object, remembering which keys were read so leftovers can be reported.
class ObjectReader {
public:
    ObjectReader(const Json& object, std::string path) : object_(object), path_(std::move(path)) {
        if (!object_.is_object()) throw ConfigError(where() + ": expected an object, got " + json_type_name(object_));
    }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) const { return object_.contains(key); }

    const Json* get(const std::string& key) {
        used_.insert(key);
        const auto it = object_.find(key);
        return it == object_.end() ? nullptr : &*it;
    }

    const Json& require(const std::string& key) {
        const Json* j = get(key);
        if (!j) throw ConfigError("missing required key: " + key_path(key));
        return *j;
    }

    template <typename T>
    void read(const std::string& key, T& out) {
        if (const Json* j = get(key)) out = convert<T>(*j, key_path(key));
    }

    template <typename T>
    T required(const std::string& key) {
        return convert<T>(require(key), key_path(key));
    }

    std::optional<ObjectReader> child(const std::string& key) {
        const Json* j = get(key);
        if (!j) return std::nullopt;
        return ObjectReader(*j, key_path(key));
    }

    /// Throws on any key that was never read.
    void finish() const {
        for (auto it = object_.begin(); it != object_.end(); ++it)
            if (!used_.contains(it.key())) throw ConfigError("unknown key: " + key_path(it.key()));
    }

    template <typename T>
    static T convert(const Json& j, const std::string& path) {
        const auto mismatch = [&](const char* expected) {
            return ConfigError("type mismatch at " + path + ": expected " + expected + ", got " + json_type_name(j));
        };
        if constexpr (std::is_same_v<T, bool>) {
            if (!j.is_boolean()) throw mismatch("boolean");
            return j.get<bool>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!j.is_number_unsigned()) throw mismatch("non-negative integer");
            return static_cast<T>(j.get<std::uint64_t>());
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!j.is_number()) throw mismatch("number");
            return j.get<T>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!j.is_string()) throw mismatch("string");
            return j.get<std::string>();
        } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
            if (!j.is_array()) throw mismatch("array of strings");
            std::vector<std::string> out;
            for (std::size_t i = 0; i < j.size(); ++i)
                out.push_back(convert<std::string>(j[i], path + "[" + std::to_string(i) + "]"));
            return out;
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            if (!j.is_array()) throw mismatch("array of numbers");
            std::vector<double> out;
            for (std::size_t i = 0; i < j.size(); ++i)
                out.push_back(convert<double>(j[i], path + "[" + std::to_string(i) + "]"));
            return out;
        } else if constexpr (std::is_same_v<T, std::vector<std::vector<std::string>>>) {
            if (!j.is_array()) throw mismatch("array of string arrays");
            std::vector<std::vector<std::string>> out;
            for (std::size_t i = 0; i < j.size(); ++i)
                out.push_back(convert<std::vector<std::string>>(j[i], path + "[" + std::to_string(i) + "]"));
            return out;
        } else if constexpr (std::is_same_v<T, std::map<std::string, std::string>>) {
            if (!j.is_object()) throw mismatch("object of strings");
            std::map<std::string, std::string> out;
            for (auto it = j.begin(); it != j.end(); ++it)
                out[it.key()] = convert<std::string>(it.value(), path + "." + it.key());
            return out;
        } else {
            static_assert(sizeof(T) == 0, "unsupported config value type");
        }
    }

private:
    std::string where() const { return path_.empty() ? "config root" : path_; }

    const Json& object_;
    std::string path_;
    std::set<std::string> used_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// JSON forms shared by the config and the model header

inline Json spec_to_json(const ModelSpec& s) {
    return Json{{"architecture", to_string(s.architecture)},
                {"vocab_size", s.vocab_size},
                {"embed_dim", s.embed_dim},
                {"hidden_dim", s.hidden_dim},
                {"kernel_width", s.kernel_width},
                {"dense_dim", s.dense_dim},
                {"dense_layers", s.dense_layers},
                {"num_classes", s.num_classes},
                {"max_len", s.max_len}};
}

inline Architecture architecture_from(const std::string& name, const std::string& path) {
    if (auto a = parse_architecture(name)) return *a;
    throw ConfigError("invalid value at " + path + ": '" + name + "' (expected srnn, lstm, blstm or cnn)");
}

inline ModelSpec spec_from_json(const Json& j, const std::string& path = "spec") {
    detail::ObjectReader r(j, path);
    ModelSpec s;
    s.architecture = architecture_from(r.required<std::string>("architecture"), r.key_path("architecture"));
    s.vocab_size = r.required<std::size_t>("vocab_size");
    s.embed_dim = r.required<std::size_t>("embed_dim");
    s.hidden_dim = r.required<std::size_t>("hidden_dim");
    s.kernel_width = r.required<std::size_t>("kernel_width");
    s.dense_dim = r.required<std::size_t>("dense_dim");
    s.dense_layers = r.required<std::size_t>("dense_layers");
    s.num_classes = r.required<std::size_t>("num_classes");
    s.max_len = r.required<std::size_t>("max_len");
    r.finish();
    return s;
}

inline Json schema_to_json(const LabelSchema& s) {
    return Json{{"classes", s.classes()},
                {"raw_to_class", s.raw_to_class()},
                {"unknown_class", s.unknown_class()},
                {"drop_unknown", s.drop_unknown()}};
}

inline LabelSchema schema_from_json(const Json& j, const std::string& path = "schema") {
    detail::ObjectReader r(j, path);
    auto classes = r.required<std::vector<std::string>>("classes");
    auto map = r.required<std::map<std::string, std::string>>("raw_to_class");
    auto unknown = r.required<std::string>("unknown_class");
    bool drop = false;
    r.read("drop_unknown", drop);
    r.finish();
    return LabelSchema(std::move(classes), std::move(map), std::move(unknown), drop);
}

/// Full preprocessing settings, including the stop words and strip characters themselves.
inline Json prep_to_json(const PrepConfig& p) {
    return Json{{"max_len", p.max_len},
                {"vocab_size", p.vocab_size},
                {"lemmatize", p.lemmatize},
                {"stoplist", std::vector<std::string>(p.stoplist.begin(), p.stoplist.end())},
                {"strip_chars", p.strip_chars}};
}

inline PrepConfig prep_from_json(const Json& j, const std::string& path = "prep") {
    detail::ObjectReader r(j, path);
    PrepConfig p;
    p.max_len = r.required<std::size_t>("max_len");
    p.vocab_size = r.required<std::size_t>("vocab_size");
    p.lemmatize = r.required<bool>("lemmatize");
    const auto stop = r.required<std::vector<std::string>>("stoplist");
    p.stoplist = {stop.begin(), stop.end()};
    p.strip_chars = r.required<std::vector<std::string>>("strip_chars");
    r.finish();
    p.validate();
    return p;
}

// ---------------------------------------------------------------------------

struct RunPaths {
    std::string corpus;
    std::string stoplist;     // empty: built-in list
    std::string strip_chars;  // empty: ASCII punctuation
    std::string out_dir = "out";

    bool operator==(const RunPaths&) const = default;
};

/// Model hyperparameters from the config; vocab size, class count and length come from the data.
struct ModelConfig {
    Architecture architecture = Architecture::lstm;
    std::size_t embed_dim = 32;
    std::size_t hidden_dim = 32;
    std::size_t kernel_width = 3;
    std::size_t dense_dim = 32;
    std::size_t dense_layers = 1;

    ModelSpec spec_for(std::size_t vocab_size, std::size_t num_classes, std::size_t max_len) const {
        ModelSpec s;
        s.architecture = architecture;
        s.vocab_size = vocab_size;
        s.embed_dim = embed_dim;
        s.hidden_dim = hidden_dim;
        s.kernel_width = kernel_width;
        s.dense_dim = dense_dim;
        s.dense_layers = dense_layers;
        s.num_classes = num_classes;
        s.max_len = max_len;
        return s;
    }

    bool operator==(const ModelConfig&) const = default;
};

struct RunConfig {
    RunPaths paths;
    CsvOptions ingest;
    LabelSchema schema = LabelSchema::default_schema();
    std::size_t max_len = 2000;
    std::size_t vocab_size = 100000;
    bool lemmatize = true;
    ModelConfig model;
    TrainConfig train;
    SynthProfile synth = SynthProfile::defaults();
    std::filesystem::path base_dir;  // directory relative paths resolve against; not serialized

    std::filesystem::path resolve(const std::string& p) const {
        const std::filesystem::path path(p);
        return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
    }

    /// PrepConfig with stop words and strip characters loaded from the configured files.
    PrepConfig prep() const {
        PrepConfig p;
        p.max_len = max_len;
        p.vocab_size = vocab_size;
        p.lemmatize = lemmatize;
        if (!paths.stoplist.empty()) {
            const auto words = load_word_list(resolve(paths.stoplist).string());
            p.stoplist = {words.begin(), words.end()};
        }
        if (!paths.strip_chars.empty()) p.strip_chars = load_word_list(resolve(paths.strip_chars).string());
        p.validate();
        return p;
    }

    /// Every input file the pipeline reads must exist.
    void validate_inputs() const {
        const auto exists = [&](const std::string& p, const char* key) {
            if (!p.empty() && !std::filesystem::exists(resolve(p)))
                throw ConfigError(std::string("file referenced by ") + key + " does not exist: " + resolve(p).string());
        };
        if (paths.corpus.empty()) throw ConfigError("missing required key: paths.corpus");
        exists(paths.corpus, "paths.corpus");
        exists(paths.stoplist, "paths.stoplist");
        exists(paths.strip_chars, "paths.strip_chars");
    }
};

inline Json config_to_json(const RunConfig& c) {
    Json adam{{"lr", c.train.adam.lr},
              {"beta1", c.train.adam.beta1},
              {"beta2", c.train.adam.beta2},
              {"epsilon", c.train.adam.epsilon}};
    return Json{
        {"paths",
         {{"corpus", c.paths.corpus},
          {"stoplist", c.paths.stoplist},
          {"strip_chars", c.paths.strip_chars},
          {"out_dir", c.paths.out_dir}}},
        {"ingest",
         {{"delimiter", std::string(1, c.ingest.delimiter)},
          {"summary_column", c.ingest.summary_column},
          {"label_column", c.ingest.label_column}}},
        {"schema", schema_to_json(c.schema)},
        {"prep", {{"max_len", c.max_len}, {"vocab_size", c.vocab_size}, {"lemmatize", c.lemmatize}}},
        {"model",
         {{"architecture", to_string(c.model.architecture)},
          {"embed_dim", c.model.embed_dim},
          {"hidden_dim", c.model.hidden_dim},
          {"kernel_width", c.model.kernel_width},
          {"dense_dim", c.model.dense_dim},
          {"dense_layers", c.model.dense_layers}}},
        {"train",
         {{"epochs", c.train.epochs},
          {"batch_size", c.train.batch_size},
          {"seed", c.train.seed},
          {"precision", c.train.precision == Precision::f32 ? "float32" : "float64"},
          {"clip_norm", c.train.clip_norm ? Json(*c.train.clip_norm) : Json(nullptr)},
          {"select_best_val", c.train.select_best_val},
          {"adam", adam}}},
        {"synth",
         {{"num_records", c.synth.num_records},
          {"class_proportions", c.synth.class_proportions},
          {"keywords", c.synth.keywords},
          {"raw_labels", c.synth.raw_labels},
          {"background_vocab", c.synth.background_vocab},
          {"min_length", c.synth.min_length},
          {"max_length", c.synth.max_length},
          {"label_noise", c.synth.label_noise},
          {"seed", c.synth.seed}}},
    };
}

inline RunConfig config_from_json(const Json& root) {
    RunConfig c;
    detail::ObjectReader r(root, "");

    auto paths = r.child("paths");
    if (!paths) throw ConfigError("missing required key: paths.corpus");
    c.paths.corpus = paths->required<std::string>("corpus");
    paths->read("stoplist", c.paths.stoplist);
    paths->read("strip_chars", c.paths.strip_chars);
    paths->read("out_dir", c.paths.out_dir);
    paths->finish();

    if (auto in = r.child("ingest")) {
        std::string delim(1, c.ingest.delimiter);
        in->read("delimiter", delim);
        if (delim.size() != 1) throw ConfigError("invalid value at ingest.delimiter: must be a single character");
        c.ingest.delimiter = delim[0];
        in->read("summary_column", c.ingest.summary_column);
        in->read("label_column", c.ingest.label_column);
        in->finish();
    }

    if (const Json* s = r.get("schema")) c.schema = schema_from_json(*s, "schema");

    if (auto p = r.child("prep")) {
        p->read("max_len", c.max_len);
        p->read("vocab_size", c.vocab_size);
        p->read("lemmatize", c.lemmatize);
        p->finish();
        if (c.max_len < 1) throw ConfigError("invalid value at prep.max_len: must be >= 1");
        if (c.vocab_size < 3) throw ConfigError("invalid value at prep.vocab_size: must be >= 3");
    }

    auto m = r.child("model");
    if (!m) throw ConfigError("missing required key: model.architecture");
    c.model.architecture =
        architecture_from(m->required<std::string>("architecture"), m->key_path("architecture"));
    m->read("embed_dim", c.model.embed_dim);
    m->read("hidden_dim", c.model.hidden_dim);
    m->read("kernel_width", c.model.kernel_width);
    m->read("dense_dim", c.model.dense_dim);
    m->read("dense_layers", c.model.dense_layers);
    m->finish();
    for (const auto& [key, value] : {std::pair{"embed_dim", c.model.embed_dim},
                                     std::pair{"hidden_dim", c.model.hidden_dim},
                                     std::pair{"dense_dim", c.model.dense_dim},
                                     std::pair{"kernel_width", c.model.kernel_width}})
        if (value < 1) throw ConfigError(std::string("invalid value at model.") + key + ": must be >= 1");
    if (c.model.kernel_width % 2 == 0) throw ConfigError("invalid value at model.kernel_width: must be odd");

    if (auto t = r.child("train")) {
        t->read("epochs", c.train.epochs);
        t->read("batch_size", c.train.batch_size);
        t->read("seed", c.train.seed);
        std::string precision = "float32";
        t->read("precision", precision);
        if (precision == "float32") c.train.precision = Precision::f32;
        else if (precision == "float64") c.train.precision = Precision::f64;
        else throw ConfigError("invalid value at train.precision: '" + precision + "' (expected float32 or float64)");
        if (const Json* clip = t->get("clip_norm"); clip && !clip->is_null())
            c.train.clip_norm = detail::ObjectReader::convert<double>(*clip, "train.clip_norm");
        t->read("select_best_val", c.train.select_best_val);
        if (auto a = t->child("adam")) {
            a->read("lr", c.train.adam.lr);
            a->read("beta1", c.train.adam.beta1);
            a->read("beta2", c.train.adam.beta2);
            a->read("epsilon", c.train.adam.epsilon);
            a->finish();
        }
        t->finish();
        c.train.validate();
    }

    if (auto s = r.child("synth")) {
        s->read("num_records", c.synth.num_records);
        s->read("class_proportions", c.synth.class_proportions);
        s->read("keywords", c.synth.keywords);
        s->read("raw_labels", c.synth.raw_labels);
        s->read("background_vocab", c.synth.background_vocab);
        s->read("min_length", c.synth.min_length);
        s->read("max_length", c.synth.max_length);
        s->read("label_noise", c.synth.label_noise);
        s->read("seed", c.synth.seed);
        s->finish();
        c.synth.validate();
    }

    r.finish();
    return c;
}

inline RunConfig parse_config(std::string_view text) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(root);
}

inline RunConfig load_config(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    auto c = parse_config(text);
    c.base_dir = std::filesystem::path(path).parent_path();
    return c;
}

inline std::string serialize_config(const RunConfig& c) { return config_to_json(c).dump(2) + "\n"; }

}  // namespace phaseclf
