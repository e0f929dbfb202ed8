#pragma once

// Post-processing: recover the JSON payload from a possibly chatty completion
// and validate it against the task schema. No repair is attempted; malformed
// output is a counted failure, not something to paper over.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "genai/error.hpp"

namespace genai {

struct NoJsonFound : Error {
    NoJsonFound() : Error("no JSON value found in completion") {}
};

struct MalformedJson : Error {
    explicit MalformedJson(std::size_t position)
        : Error("malformed JSON starting at byte " + std::to_string(position)), position(position) {}
    std::size_t position;
};

struct ExtractedJson {
    nlohmann::json value;
    std::size_t position = 0;       // byte offset of the value in the raw text
    bool multiple_candidates = false;  // further balanced values followed
};

namespace detail {

// Returns one past the end of the balanced value opening at `start`, or npos
// if it never closes. String-aware: braces inside JSON strings do not count.
inline std::size_t find_balanced_end(std::string_view text, std::size_t start) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = start; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
        } else if (c == '"') {
            in_string = true;
        } else if (c == '{' || c == '[') {
            ++depth;
        } else if (c == '}' || c == ']') {
            --depth;
            if (depth == 0) return i + 1;
            if (depth < 0) return std::string_view::npos;
        }
    }
    return std::string_view::npos;
}

}  // namespace detail

/// Scans for the first balanced JSON object or array and parses it strictly.
/// Extra candidates after the first are flagged, never an error.
inline ExtractedJson extract_json_value(std::string_view raw_text) {
    for (std::size_t i = 0; i < raw_text.size(); ++i) {
        char c = raw_text[i];
        if (c != '{' && c != '[') continue;
        std::size_t end = detail::find_balanced_end(raw_text, i);
        if (end == std::string_view::npos) continue;
        std::string_view span = raw_text.substr(i, end - i);
        nlohmann::json value = nlohmann::json::parse(span, nullptr, /*allow_exceptions=*/false);
        if (value.is_discarded()) throw MalformedJson(i);
        ExtractedJson out;
        out.value = std::move(value);
        out.position = i;
        // look ahead for another balanced value (first candidate still wins)
        for (std::size_t j = end; j < raw_text.size(); ++j) {
            if (raw_text[j] != '{' && raw_text[j] != '[') continue;
            if (detail::find_balanced_end(raw_text, j) != std::string_view::npos) {
                out.multiple_candidates = true;
                break;
            }
        }
        return out;
    }
    throw NoJsonFound();
}

enum class FieldKind { String, StringOrNull };

enum class SchemaShape { ArrayOfObjects, SingleObject };

struct TaskSchema {
    std::string name;
    SchemaShape shape = SchemaShape::ArrayOfObjects;
    std::vector<std::pair<std::string, FieldKind>> fields;
    std::set<std::string> required;

    std::optional<FieldKind> kind_of(const std::string& field) const {
        for (const auto& [name, kind] : fields)
            if (name == field) return kind;
        return std::nullopt;
    }

    nlohmann::json to_json() const {
        nlohmann::json jf = nlohmann::json::array();
        for (const auto& [fname, kind] : fields)
            jf.push_back({{"name", fname},
                          {"kind", kind == FieldKind::String ? "string" : "string-or-null"}});
        return {{"name", name},
                {"shape", shape == SchemaShape::ArrayOfObjects ? "array-of-objects" : "single-object"},
                {"fields", jf},
                {"required", required}};
    }
};

struct ShapeMismatch : Error {
    using Error::Error;
};

struct MissingField : Error {
    MissingField(const std::string& name, std::size_t record_index)
        : Error("missing field '" + name + "' in record " + std::to_string(record_index)),
          field(name), record_index(record_index) {}
    std::string field;
    std::size_t record_index;
};

struct UnknownField : Error {
    explicit UnknownField(const std::string& name) : Error("unknown field: " + name), field(name) {}
    std::string field;
};

struct WrongKind : Error {
    explicit WrongKind(const std::string& name)
        : Error("field '" + name + "' has the wrong kind"), field(name) {}
    std::string field;
};

/// One validated record: field name -> value (nullopt for JSON null).
using Record = std::map<std::string, std::optional<std::string>>;

/// Validates a parsed JSON value against the schema and returns typed records.
/// Total: either every record validates or a specific error is thrown.
inline std::vector<Record> validate_records(const nlohmann::json& value, const TaskSchema& schema) {
    std::vector<const nlohmann::json*> objects;
    if (schema.shape == SchemaShape::ArrayOfObjects) {
        if (!value.is_array()) throw ShapeMismatch("expected an array of objects");
        for (const auto& item : value) {
            if (!item.is_object()) throw ShapeMismatch("array element is not an object");
            objects.push_back(&item);
        }
    } else {
        if (!value.is_object()) throw ShapeMismatch("expected a single object");
        objects.push_back(&value);
    }

    std::vector<Record> records;
    records.reserve(objects.size());
    for (std::size_t idx = 0; idx < objects.size(); ++idx) {
        const auto& obj = *objects[idx];
        Record rec;
        for (const auto& [key, v] : obj.items()) {
            auto kind = schema.kind_of(key);
            if (!kind) throw UnknownField(key);
            if (v.is_null()) {
                if (*kind != FieldKind::StringOrNull) throw WrongKind(key);
                rec[key] = std::nullopt;
            } else if (v.is_string()) {
                rec[key] = v.get<std::string>();
            } else {
                throw WrongKind(key);
            }
        }
        for (const auto& req : schema.required)
            if (!rec.count(req)) throw MissingField(req, idx);
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace genai
