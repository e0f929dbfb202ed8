#pragma once

// Corpus loading: plain-text documents, CSV record batches, and
// ground-truth files, validated into immutable in-memory structures.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "genai/error.hpp"
#include "genai/species.hpp"

namespace genai {

enum class Origin { DigitalText, OcrText };

struct SourceDocument {
    std::string id;
    std::string text;
    std::string language = "en";
    Origin origin = Origin::DigitalText;
    std::map<std::string, std::string> metadata;
};

struct RecordBatch {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::string source;

    std::optional<std::size_t> column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        return std::nullopt;
    }
};

struct MissingColumn : Error {
    explicit MissingColumn(const std::string& name) : Error("missing required column: " + name), column(name) {}
    std::string column;
};

struct RaggedRow : Error {
    RaggedRow(std::size_t line, std::size_t got, std::size_t want)
        : Error("ragged CSV row at line " + std::to_string(line) + ": " + std::to_string(got) +
                " cells, expected " + std::to_string(want)),
          line(line) {}
    std::size_t line;
};

struct CsvParseError : Error {
    using Error::Error;
};

/// Returns the byte offset of the first invalid UTF-8 sequence, or nullopt if valid.
inline std::optional<std::size_t> find_invalid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = s[i];
        std::size_t len;
        unsigned cp_min;
        if (c < 0x80) { ++i; continue; }
        else if ((c & 0xe0) == 0xc0) { len = 2; cp_min = 0x80; }
        else if ((c & 0xf0) == 0xe0) { len = 3; cp_min = 0x800; }
        else if ((c & 0xf8) == 0xf0) { len = 4; cp_min = 0x10000; }
        else return i;
        if (i + len > s.size()) return i;
        unsigned cp = c & (0xff >> (len + 1));
        for (std::size_t k = 1; k < len; ++k) {
            unsigned char cc = s[i + k];
            if ((cc & 0xc0) != 0x80) return i;
            cp = (cp << 6) | (cc & 0x3f);
        }
        if (cp < cp_min || cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) return i;
        i += len;
    }
    return std::nullopt;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileMissing(path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Loads one UTF-8 text file as a document. The byte content is never altered.
inline SourceDocument load_text_document(const std::filesystem::path& path, std::string id,
                                         std::string language = "en",
                                         Origin origin = Origin::DigitalText) {
    SourceDocument doc;
    doc.text = read_file(path);
    if (auto bad = find_invalid_utf8(doc.text)) throw EncodingError(path.string(), *bad);
    doc.id = std::move(id);
    doc.language = language.empty() ? "en" : std::move(language);
    doc.origin = origin;
    return doc;
}

namespace detail {

// RFC-4180-style row scanner: comma delimiter, double-quote quoting,
// quoted cells may contain commas, quotes (doubled) and newlines.
// Returns rows of cells; `text` must end at a record boundary.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string cell;
    bool in_quotes = false;
    bool cell_started = false;
    std::size_t i = 0;
    auto end_cell = [&] {
        row.push_back(std::move(cell));
        cell.clear();
        cell_started = false;
    };
    auto end_row = [&] {
        end_cell();
        rows.push_back(std::move(row));
        row.clear();
    };
    while (i < text.size()) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') { cell.push_back('"'); i += 2; continue; }
                in_quotes = false;
                ++i;
            } else {
                cell.push_back(c);
                ++i;
            }
        } else if (c == '"' && !cell_started) {
            in_quotes = true;
            cell_started = true;
            ++i;
        } else if (c == ',') {
            end_cell();
            ++i;
        } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
            end_row();
            i += 2;
        } else if (c == '\n') {
            end_row();
            ++i;
        } else {
            cell.push_back(c);
            cell_started = true;
            ++i;
        }
    }
    if (in_quotes) throw CsvParseError("unterminated quoted cell");
    if (cell_started || !row.empty()) end_row();
    return rows;
}

inline std::string csv_escape(const std::string& cell) {
    if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace detail

/// Loads a CSV file with a header row, checking required columns and rectangularity.
inline RecordBatch load_csv_records(const std::filesystem::path& path,
                                    const std::vector<std::string>& required_columns = {}) {
    std::string text = read_file(path);
    auto rows = detail::parse_csv(text);
    if (rows.empty()) throw CsvParseError("empty CSV: " + path.string());
    RecordBatch batch;
    batch.source = path.string();
    batch.columns = rows.front();
    for (const auto& col : required_columns)
        if (!batch.column_index(col)) throw MissingColumn(col);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != batch.columns.size())
            throw RaggedRow(r + 1, rows[r].size(), batch.columns.size());
        batch.rows.push_back(std::move(rows[r]));
    }
    return batch;
}

/// Serializes a batch back to CSV text (header + rows).
inline std::string serialize_csv(const RecordBatch& batch) {
    std::string out;
    auto write_row = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out.push_back(',');
            out += detail::csv_escape(row[i]);
        }
        out.push_back('\n');
    };
    write_row(batch.columns);
    for (const auto& row : batch.rows) write_row(row);
    return out;
}

enum class GroundTruthKind { SpeciesSet, HtaRecord, NaicsLabel };

struct ParseError : Error {
    using Error::Error;
};

struct KindMismatch : Error {
    using Error::Error;
};

struct GroundTruth {
    GroundTruthKind kind;
    // species-set: doc id -> list of name strings
    std::map<std::string, std::vector<std::string>> species_sets;
    // naics-label: record id -> 4-digit code
    std::map<std::string, std::string> naics_labels;
    // hta-record: doc id -> field -> value (null allowed)
    std::map<std::string, std::map<std::string, std::optional<std::string>>> hta_records;
};

namespace detail {
// The 14 HTA extraction fields; kept here so ground-truth validation does not
// depend on the task plugin header.
inline const std::vector<std::string>& hta_field_names() {
    static const std::vector<std::string> names = {
        "hta_id", "assessment_type", "internal_identifier", "inn", "brand_name",
        "assessment_date", "indication", "final_recommendation", "comparator",
        "relative_effectiveness_outcome", "cost_effectiveness_outcome",
        "budget_impact_outcome", "managed_entry_agreements", "clinical_restrictions"};
    return names;
}
}  // namespace detail

inline GroundTruth load_ground_truth(const std::filesystem::path& path, GroundTruthKind kind) {
    std::string text = read_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("ground truth " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw ParseError("ground truth must be a JSON object keyed by id");
    GroundTruth gt;
    gt.kind = kind;
    for (auto& [key, value] : j.items()) {
        switch (kind) {
        case GroundTruthKind::SpeciesSet: {
            if (!value.is_array()) throw KindMismatch("species-set entries must be arrays: " + key);
            std::vector<std::string> names;
            for (const auto& v : value) {
                if (!v.is_string()) throw KindMismatch("species name must be a string: " + key);
                std::string name = v.get<std::string>();
                try {
                    parse_species_name(name);
                } catch (const UnparseableName& e) {
                    throw ParseError(std::string("ground truth ") + path.string() + ": " + e.what());
                }
                names.push_back(std::move(name));
            }
            gt.species_sets[key] = std::move(names);
            break;
        }
        case GroundTruthKind::NaicsLabel: {
            if (!value.is_string()) throw KindMismatch("naics label must be a string: " + key);
            std::string code = value.get<std::string>();
            if (code.size() != 4 || code.find_first_not_of("0123456789") != std::string::npos)
                throw ParseError("naics code must be 4 digits: " + code);
            gt.naics_labels[key] = code;
            break;
        }
        case GroundTruthKind::HtaRecord: {
            if (!value.is_object()) throw KindMismatch("hta-record entries must be objects: " + key);
            const auto& fields = detail::hta_field_names();
            if (value.size() != fields.size())
                throw ParseError("hta record " + key + " must carry exactly " +
                                 std::to_string(fields.size()) + " fields, got " +
                                 std::to_string(value.size()));
            std::map<std::string, std::optional<std::string>> rec;
            for (const auto& f : fields) {
                if (!value.contains(f)) throw ParseError("hta record " + key + " missing field " + f);
                const auto& v = value.at(f);
                if (v.is_null()) rec[f] = std::nullopt;
                else if (v.is_string()) rec[f] = v.get<std::string>();
                else throw ParseError("hta field " + f + " must be string or null");
            }
            gt.hta_records[key] = std::move(rec);
            break;
        }
        }
    }
    return gt;
}

}  // namespace genai
