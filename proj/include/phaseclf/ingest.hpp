#pragma once

// Occurrence-report ingestion: delimited-file loading, label canonicalization, corpus cleaning.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phaseclf/error.hpp"

namespace phaseclf {

struct RawRecord {
    std::string summary;
    std::string phase_raw;
    std::size_t source_row = 0;  // physical line where the record starts; header is line 1
};

struct OccurrenceRecord {
    std::string narrative;
    std::size_t label = 0;
};

struct CleaningStats {
    std::size_t input_count = 0;
    std::size_t retained_count = 0;
    std::size_t dropped_empty_narrative = 0;
    std::size_t dropped_unmappable_label = 0;

    bool consistent() const {
        return input_count == retained_count + dropped_empty_narrative + dropped_unmappable_label;
    }
};

struct CsvOptions {
    char delimiter = ',';
    std::string summary_column = "Summary";
    std::string label_column = "PhaseOfFlight";
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace detail

/// One parsed row of a delimited file plus the line it started on.
struct CsvRow {
    std::vector<std::string> fields;
    std::size_t line = 0;
};

/// RFC 4180 style parser: quoted fields may hold delimiters, newlines and doubled quotes.
/// Completely empty lines are skipped. Malformed quoting raises DataError naming the row.
inline std::vector<CsvRow> parse_delimited(std::string_view text, char delimiter = ',') {
    std::vector<CsvRow> rows;
    std::size_t i = 0;
    std::size_t line = 1;
    if (text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;

    const auto fail = [&](std::size_t row_line, const std::string& what) {
        throw DataError("malformed quoting in row starting at line " + std::to_string(row_line) + ": " + what);
    };

    while (i < text.size()) {
        CsvRow row;
        row.line = line;
        std::string field;
        bool any_content = false;
        bool done = false;
        while (!done) {
            if (i < text.size() && text[i] == '"') {
                any_content = true;
                ++i;
                for (;;) {
                    if (i >= text.size()) fail(row.line, "unterminated quoted field");
                    const char c = text[i];
                    if (c == '"') {
                        if (i + 1 < text.size() && text[i + 1] == '"') {
                            field += '"';
                            i += 2;
                            continue;
                        }
                        ++i;
                        break;
                    }
                    if (c == '\n') ++line;
                    field += c;
                    ++i;
                }
                if (i < text.size() && text[i] != delimiter && text[i] != '\n' && text[i] != '\r')
                    fail(row.line, "unexpected character after closing quote");
            } else {
                while (i < text.size() && text[i] != delimiter && text[i] != '\n' && text[i] != '\r') {
                    if (text[i] == '"') fail(row.line, "quote inside unquoted field");
                    field += text[i];
                    ++i;
                }
                if (!field.empty()) any_content = true;
            }
            row.fields.push_back(std::move(field));
            field.clear();
            if (i >= text.size()) {
                done = true;
            } else if (text[i] == delimiter) {
                any_content = true;
                ++i;
            } else {
                if (text[i] == '\r') ++i;
                if (i < text.size() && text[i] == '\n') ++i;
                ++line;
                done = true;
            }
        }
        if (any_content) rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Parse corpus text (header row required). Rows are returned in file order.
inline std::vector<RawRecord> parse_corpus(std::string_view text, const CsvOptions& options = {}) {
    auto rows = parse_delimited(text, options.delimiter);
    if (rows.empty()) throw DataError("corpus has no header row");
    const auto& header = rows.front().fields;
    const auto column = [&](const std::string& name) {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (detail::trim(header[c]) == name) return c;
        throw ConfigError("column not found in header: " + name);
    };
    const std::size_t summary_col = column(options.summary_column);
    const std::size_t label_col = column(options.label_column);
    const std::size_t needed = std::max(summary_col, label_col) + 1;

    std::vector<RawRecord> out;
    out.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        auto& row = rows[r];
        if (row.fields.size() < needed)
            throw DataError("row starting at line " + std::to_string(row.line) + " has " +
                            std::to_string(row.fields.size()) + " fields, expected at least " +
                            std::to_string(needed));
        out.push_back({std::move(row.fields[summary_col]), std::move(row.fields[label_col]), row.line});
    }
    return out;
}

inline std::vector<RawRecord> load_corpus(const std::string& path, const CsvOptions& options = {}) {
    return parse_corpus(read_file(path), options);
}

/// Quote a field for delimited output when it needs it.
inline std::string quote_field(std::string_view field, char delimiter = ',') {
    const bool needs = field.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string_view::npos;
    if (!needs) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

class LabelSchema {
public:
    LabelSchema(std::vector<std::string> classes, std::map<std::string, std::string> raw_to_class,
                std::string unknown_class, bool drop_unknown = false)
        : classes_(std::move(classes)),
          raw_to_class_(std::move(raw_to_class)),
          unknown_class_(std::move(unknown_class)),
          drop_unknown_(drop_unknown) {
        if (classes_.size() < 2) throw ConfigError("label schema needs at least 2 classes");
        for (std::size_t i = 0; i < classes_.size(); ++i)
            for (std::size_t j = i + 1; j < classes_.size(); ++j)
                if (classes_[i] == classes_[j]) throw ConfigError("duplicate class name: " + classes_[i]);
        unknown_index_ = index_of(unknown_class_);
        std::map<std::string, std::size_t> normalized;
        for (const auto& [raw, cls] : raw_to_class_) normalized[normalize_raw(raw)] = index_of(cls);
        lookup_ = std::move(normalized);
    }

    /// Seven classes with identity mappings for the obvious raw labels; everything else is Unknown.
    static LabelSchema default_schema() {
        return LabelSchema({"Approach", "Climb", "Cruise", "Landing", "Manoeuvring/airwork", "Take-off", "Unknown"},
                           {{"approach", "Approach"},
                            {"climb", "Climb"},
                            {"initial climb", "Climb"},
                            {"cruise", "Cruise"},
                            {"landing", "Landing"},
                            {"manoeuvring", "Manoeuvring/airwork"},
                            {"manoeuvring/airwork", "Manoeuvring/airwork"},
                            {"take-off", "Take-off"},
                            {"unknown", "Unknown"}},
                           "Unknown");
    }

    const std::vector<std::string>& classes() const { return classes_; }
    const std::map<std::string, std::string>& raw_to_class() const { return raw_to_class_; }
    const std::string& unknown_class() const { return unknown_class_; }
    std::size_t unknown_index() const { return unknown_index_; }
    std::size_t size() const { return classes_.size(); }
    bool drop_unknown() const { return drop_unknown_; }

    std::size_t index_of(const std::string& name) const {
        const auto it = std::find(classes_.begin(), classes_.end(), name);
        if (it == classes_.end()) throw ConfigError("class not in schema: " + name);
        return static_cast<std::size_t>(it - classes_.begin());
    }

    /// Lower-case and trim; multi-phase labels ("climb; cruise") resolve to the first listed phase.
    static std::string normalize_raw(std::string_view raw) {
        const auto cut = raw.find_first_of(";|,");
        return detail::to_lower(detail::trim(raw.substr(0, cut)));
    }

    std::size_t lookup(std::string_view raw) const {
        const auto it = lookup_.find(normalize_raw(raw));
        return it == lookup_.end() ? unknown_index_ : it->second;
    }

    bool operator==(const LabelSchema& other) const {
        return classes_ == other.classes_ && raw_to_class_ == other.raw_to_class_ &&
               unknown_class_ == other.unknown_class_ && drop_unknown_ == other.drop_unknown_;
    }

private:
    std::vector<std::string> classes_;
    std::map<std::string, std::string> raw_to_class_;
    std::string unknown_class_;
    bool drop_unknown_ = false;
    std::size_t unknown_index_ = 0;
    std::map<std::string, std::size_t> lookup_;
};

inline std::size_t canonicalize_label(std::string_view raw, const LabelSchema& schema) { return schema.lookup(raw); }

inline std::pair<std::vector<OccurrenceRecord>, CleaningStats> clean_corpus(const std::vector<RawRecord>& records,
                                                                            const LabelSchema& schema) {
    std::vector<OccurrenceRecord> kept;
    CleaningStats stats;
    stats.input_count = records.size();
    for (const auto& rec : records) {
        auto narrative = detail::trim(rec.summary);
        if (narrative.empty()) {
            ++stats.dropped_empty_narrative;
            continue;
        }
        const std::size_t label = canonicalize_label(rec.phase_raw, schema);
        if (schema.drop_unknown() && label == schema.unknown_index()) {
            ++stats.dropped_unmappable_label;
            continue;
        }
        kept.push_back({std::move(narrative), label});
    }
    stats.retained_count = kept.size();
    return {std::move(kept), stats};
}

}  // namespace phaseclf
