#pragma once

// Model container layout (all integers little-endian):
//
//   offset 0   8 bytes   magic "PHCLFMDL"
//   offset 8   8 bytes   uint64 header length H
//   offset 16  H bytes   JSON header: format_version, spec, schema, prep, vocabulary_digest,
//                        train_seed, payload_bytes, tensors[{name, shape, offset, bytes}]
//   offset 16+H          payload: float32 IEEE-754 little-endian, row-major, in manifest order;
//                        tensor offsets are relative to the payload start
//
// The header is written with sorted keys and no whitespace, so identical models give identical bytes.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "phaseclf/config.hpp"
#include "phaseclf/error.hpp"
#include "phaseclf/eval.hpp"
#include "phaseclf/model.hpp"
#include "phaseclf/textprep.hpp"

namespace phaseclf {

inline constexpr std::uint64_t kModelFormatVersion = 1;
inline constexpr char kModelMagic[8] = {'P', 'H', 'C', 'L', 'F', 'M', 'D', 'L'};

struct ModelArtifact {
    ModelSpec spec;
    LabelSchema schema = LabelSchema::default_schema();
    PrepConfig prep;
    std::string vocabulary_digest;
    std::uint64_t train_seed = 0;
    ParamSet<float> params;
};

/// Write to a sibling temp file, then rename over the target.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write file: " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw DataError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw DataError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

inline std::uint64_t get_u64(std::string_view in) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[i])) << (8 * i);
    return v;
}

inline void put_f32(std::string& out, float f) {
    const auto bits = std::bit_cast<std::uint32_t>(f);
    for (int i = 0; i < 4; ++i) out += static_cast<char>((bits >> (8 * i)) & 0xff);
}

inline float get_f32(const char* p) {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return std::bit_cast<float>(bits);
}

}  // namespace detail

inline std::string serialize_model(const ModelArtifact& a) {
    check_params(a.spec, a.params);
    Json tensors = Json::array();
    std::uint64_t offset = 0;
    for (std::size_t i = 0; i < a.params.size(); ++i) {
        const auto& t = a.params.tensors()[i];
        if (!t.all_finite()) throw NonFiniteValueError("refusing to save non-finite values in " + a.params.names()[i]);
        const std::uint64_t bytes = 4 * t.size();
        tensors.push_back({{"name", a.params.names()[i]}, {"shape", t.shape}, {"offset", offset}, {"bytes", bytes}});
        offset += bytes;
    }
    const Json header{{"format_version", kModelFormatVersion},
                      {"spec", spec_to_json(a.spec)},
                      {"schema", schema_to_json(a.schema)},
                      {"prep", prep_to_json(a.prep)},
                      {"vocabulary_digest", a.vocabulary_digest},
                      {"train_seed", a.train_seed},
                      {"payload_bytes", offset},
                      {"tensors", tensors}};
    const std::string text = header.dump();

    std::string out(kModelMagic, sizeof kModelMagic);
    detail::put_u64(out, text.size());
    out += text;
    out.reserve(out.size() + offset);
    for (const auto& t : a.params.tensors())
        for (const float v : t.data) detail::put_f32(out, v);
    return out;
}

inline ModelArtifact parse_model(std::string_view bytes) {
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kModelMagic, 8) != 0)
        throw FormatError("not a model file (bad magic)");
    const std::uint64_t header_len = detail::get_u64(bytes.substr(8));
    if (header_len > bytes.size() - 16) throw TruncatedPayloadError("model header is truncated");

    Json header;
    try {
        header = Json::parse(bytes.substr(16, header_len));
    } catch (const Json::parse_error& e) {
        throw FormatError(std::string("model header is not valid JSON: ") + e.what());
    }
    if (!header.is_object() || !header.contains("format_version") || !header["format_version"].is_number_unsigned())
        throw FormatError("model header lacks format_version");
    const auto version = header["format_version"].get<std::uint64_t>();
    if (version != kModelFormatVersion)
        throw VersionMismatchError("model format_version " + std::to_string(version) +
                                   " is not supported (this build reads version " +
                                   std::to_string(kModelFormatVersion) + ")");

    ModelArtifact a;
    try {
        detail::ObjectReader r(header, "header");
        r.get("format_version");
        a.spec = spec_from_json(r.require("spec"), "header.spec");
        a.schema = schema_from_json(r.require("schema"), "header.schema");
        a.prep = prep_from_json(r.require("prep"), "header.prep");
        a.vocabulary_digest = r.required<std::string>("vocabulary_digest");
        a.train_seed = r.required<std::uint64_t>("train_seed");
        const auto payload_bytes = r.required<std::uint64_t>("payload_bytes");
        const Json& tensors = r.require("tensors");
        r.finish();
        a.spec.validate();
        if (a.spec.num_classes != a.schema.size())
            throw FormatError("model spec has " + std::to_string(a.spec.num_classes) + " classes but schema has " +
                              std::to_string(a.schema.size()));

        const std::string_view payload = bytes.substr(16 + header_len);
        if (payload.size() < payload_bytes)
            throw TruncatedPayloadError("model payload is truncated: expected " + std::to_string(payload_bytes) +
                                        " bytes, found " + std::to_string(payload.size()));
        if (payload.size() > payload_bytes)
            throw FormatError("model file has " + std::to_string(payload.size() - payload_bytes) +
                              " unexpected trailing bytes");

        const auto layout = parameter_layout(a.spec);
        if (!tensors.is_array() || tensors.size() != layout.size())
            throw FormatError("tensor manifest does not match the model spec");
        std::uint64_t expected_offset = 0;
        for (std::size_t i = 0; i < layout.size(); ++i) {
            detail::ObjectReader tr(tensors[i], "header.tensors[" + std::to_string(i) + "]");
            const auto name = tr.required<std::string>("name");
            const Json& shape_json = tr.require("shape");
            const auto offset = tr.required<std::uint64_t>("offset");
            const auto nbytes = tr.required<std::uint64_t>("bytes");
            tr.finish();
            std::vector<std::size_t> shape;
            if (!shape_json.is_array()) throw FormatError("tensor " + name + " has a malformed shape");
            for (const auto& d : shape_json) {
                if (!d.is_number_unsigned()) throw FormatError("tensor " + name + " has a malformed shape");
                shape.push_back(d.get<std::size_t>());
            }
            if (name != layout[i].first || shape != layout[i].second)
                throw FormatError("tensor " + std::to_string(i) + " is " + name + shape_string(shape) + ", expected " +
                                  layout[i].first + shape_string(layout[i].second));
            if (offset != expected_offset || nbytes != 4 * Tensor<float>::element_count(shape))
                throw FormatError("tensor " + name + " has inconsistent offset or size");
            if (offset + nbytes > payload.size())
                throw TruncatedPayloadError("tensor " + name + " extends past the end of the payload");

            Tensor<float> t(shape);
            const char* p = payload.data() + offset;
            for (std::size_t j = 0; j < t.size(); ++j) {
                t.data[j] = detail::get_f32(p + 4 * j);
                if (!std::isfinite(t.data[j]))
                    throw NonFiniteValueError("tensor " + name + " holds a non-finite value at element " +
                                              std::to_string(j));
            }
            a.params.add(name, std::move(t));
            expected_offset += nbytes;
        }
        if (expected_offset != payload_bytes) throw FormatError("payload_bytes disagrees with the tensor manifest");
    } catch (const ConfigError& e) {
        throw FormatError(std::string("malformed model header: ") + e.what());
    }
    return a;
}

inline void save_model(const ModelArtifact& artifact, const std::filesystem::path& path) {
    write_file_atomic(path, serialize_model(artifact));
}

inline ModelArtifact load_model(const std::filesystem::path& path) {
    std::string bytes;
    try {
        bytes = read_file(path.string());
    } catch (const DataError&) {
        throw DataError("cannot open model file: " + path.string());
    }
    return parse_model(bytes);
}

/// Throws VocabularyMismatchError unless the vocabulary is the one the model was trained with.
inline void verify_vocabulary(const ModelArtifact& artifact, const Vocabulary& vocab) {
    if (vocab.digest() != artifact.vocabulary_digest)
        throw VocabularyMismatchError("vocabulary digest " + vocab.digest() + " does not match the model's " +
                                      artifact.vocabulary_digest);
    if (vocab.size() != artifact.spec.vocab_size)
        throw VocabularyMismatchError("vocabulary has " + std::to_string(vocab.size()) + " ids, model expects " +
                                      std::to_string(artifact.spec.vocab_size));
}

inline void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path) {
    write_file_atomic(path, vocab.serialize());
}

inline Vocabulary load_vocabulary(const std::filesystem::path& path) {
    return Vocabulary::deserialize(read_file(path.string()));
}

// ---------------------------------------------------------------------------
// Evaluation summary

inline Json summary_to_json(const EvalSummary& s, const std::vector<std::string>& labels) {
    Json per_class = Json::array();
    for (std::size_t k = 0; k < s.per_class.size(); ++k) {
        const auto& c = s.per_class[k];
        per_class.push_back({{"label", labels.at(k)},
                             {"precision", c.precision},
                             {"recall", c.recall},
                             {"f1", c.f1},
                             {"support", c.support}});
    }
    const auto avg = [](const MetricAverages& a) {
        return Json{{"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}};
    };
    return Json{{"per_class", per_class},     {"macro_avg", avg(s.macro)},
                {"weighted_avg", avg(s.weighted)}, {"accuracy", s.accuracy},
                {"total_support", s.total_support}, {"report", render_report(s, labels)}};
}

struct LoadedSummary {
    EvalSummary summary;
    std::vector<std::string> labels;
    std::string report;
};

inline LoadedSummary summary_from_json(const Json& j) {
    LoadedSummary out;
    try {
        const auto avg = [](const Json& a) {
            return MetricAverages{a.at("precision").get<double>(), a.at("recall").get<double>(),
                                  a.at("f1").get<double>()};
        };
        for (const auto& c : j.at("per_class")) {
            out.labels.push_back(c.at("label").get<std::string>());
            out.summary.per_class.push_back({c.at("precision").get<double>(), c.at("recall").get<double>(),
                                             c.at("f1").get<double>(), c.at("support").get<std::uint64_t>()});
        }
        out.summary.macro = avg(j.at("macro_avg"));
        out.summary.weighted = avg(j.at("weighted_avg"));
        out.summary.accuracy = j.at("accuracy").get<double>();
        out.summary.total_support = j.at("total_support").get<std::uint64_t>();
        out.report = j.at("report").get<std::string>();
    } catch (const Json::exception& e) {
        throw DataError(std::string("malformed summary: ") + e.what());
    }
    return out;
}

inline void export_summary(const EvalSummary& summary, const std::vector<std::string>& labels,
                           const std::filesystem::path& path) {
    write_file_atomic(path, summary_to_json(summary, labels).dump(2) + "\n");
}

inline LoadedSummary load_summary(const std::filesystem::path& path) {
    try {
        return summary_from_json(Json::parse(read_file(path.string())));
    } catch (const Json::parse_error& e) {
        throw DataError(std::string("summary is not valid JSON: ") + e.what());
    }
}

}  // namespace phaseclf
