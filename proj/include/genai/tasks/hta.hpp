#pragma once

// HTA reimbursement-document extraction: the 14-field schema, per-field
// run-consistency comparison, translation-pass trigger, and date
// normalization.

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "genai/extraction.hpp"
#include "genai/ingest.hpp"

namespace genai {

using HtaRecord = std::map<std::string, std::optional<std::string>>;

inline const std::vector<std::string>& hta_field_names() { return detail::hta_field_names(); }

/// Free-text fields eligible for the translation second pass.
inline const std::vector<std::string>& hta_translation_field_policy() {
    static const std::vector<std::string> fields = {
        "indication", "final_recommendation", "comparator", "relative_effectiveness_outcome",
        "cost_effectiveness_outcome", "budget_impact_outcome", "managed_entry_agreements",
        "clinical_restrictions"};
    return fields;
}

/// Single-object schema over the 14 fields, all string-or-null, all required.
inline TaskSchema hta_schema() {
    TaskSchema schema;
    schema.name = "hta";
    schema.shape = SchemaShape::SingleObject;
    for (const auto& f : hta_field_names()) {
        schema.fields.emplace_back(f, FieldKind::StringOrNull);
        schema.required.insert(f);
    }
    return schema;
}

inline bool needs_translation_pass(const std::string& doc_language) { return doc_language != "en"; }

enum class FieldStatus { Consistent, NormalizedConsistent, Divergent };

inline std::string to_string(FieldStatus s) {
    switch (s) {
    case FieldStatus::Consistent: return "consistent";
    case FieldStatus::NormalizedConsistent: return "normalized-consistent";
    default: return "divergent";
    }
}

struct FieldConsistencyReport {
    std::string field;
    FieldStatus status = FieldStatus::Consistent;
    double similarity = 1.0;  // pairwise-minimum Jaccard over word tokens
    std::vector<std::optional<std::string>> values;  // per run
};

namespace hta_detail {

inline std::string normalize(const std::string& s) {
    std::string out;
    bool pending_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    while (!out.empty() && (out.back() == '.' || out.back() == '!' || out.back() == '?'))
        out.pop_back();
    return out;
}

inline std::set<std::string> word_tokens(const std::string& s) {
    std::set<std::string> out;
    std::string cur;
    for (char c : normalize(s) + " ") {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.insert(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    return out;
}

inline double jaccard(const std::string& a, const std::string& b) {
    auto ta = word_tokens(a), tb = word_tokens(b);
    if (ta.empty() && tb.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& t : ta) inter += tb.count(t);
    std::size_t uni = ta.size() + tb.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace hta_detail

/// Per-field comparison of the same document's record across N >= 2 runs.
/// No semantic judgment: divergent fields carry a similarity score and are
/// left for human review.
inline std::vector<FieldConsistencyReport> compare_runs(const std::vector<HtaRecord>& records) {
    if (records.size() < 2) throw Error("compare_runs requires at least 2 runs");
    std::vector<FieldConsistencyReport> reports;
    for (const auto& field : hta_field_names()) {
        FieldConsistencyReport rep;
        rep.field = field;
        for (const auto& rec : records) {
            auto it = rec.find(field);
            rep.values.push_back(it == rec.end() ? std::nullopt : it->second);
        }
        bool all_equal = std::all_of(rep.values.begin(), rep.values.end(),
                                     [&](const auto& v) { return v == rep.values.front(); });
        if (all_equal) {
            rep.status = FieldStatus::Consistent;
            rep.similarity = 1.0;
        } else {
            auto norm = [](const std::optional<std::string>& v) {
                return v ? hta_detail::normalize(*v) : std::string("\x01null");
            };
            bool norm_equal = std::all_of(rep.values.begin(), rep.values.end(), [&](const auto& v) {
                return norm(v) == norm(rep.values.front());
            });
            if (norm_equal) {
                rep.status = FieldStatus::NormalizedConsistent;
                rep.similarity = 1.0;
            } else {
                rep.status = FieldStatus::Divergent;
                double min_sim = 1.0;
                for (std::size_t i = 0; i < rep.values.size(); ++i) {
                    for (std::size_t j = i + 1; j < rep.values.size(); ++j) {
                        const auto& a = rep.values[i];
                        const auto& b = rep.values[j];
                        double sim;
                        if (!a && !b) sim = 1.0;
                        else if (!a || !b) sim = 0.0;
                        else sim = hta_detail::jaccard(*a, *b);
                        min_sim = std::min(min_sim, sim);
                    }
                }
                rep.similarity = min_sim;
            }
        }
        reports.push_back(std::move(rep));
    }
    return reports;
}

struct NormalizedDate {
    std::string value;       // ISO-8601 when normalized, else the verbatim input
    bool normalized = false;
};

namespace hta_detail {

inline std::optional<int> month_from_name(std::string name) {
    static const std::vector<std::string> months = {"january", "february", "march",     "april",
                                                    "may",     "june",     "july",      "august",
                                                    "september", "october", "november", "december"};
    for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (std::size_t i = 0; i < months.size(); ++i)
        if (months[i].compare(0, name.size(), name) == 0 && name.size() >= 3) return int(i) + 1;
    return std::nullopt;
}

inline bool plausible(int y, int m, int d) {
    return y >= 1900 && y <= 2100 && m >= 1 && m <= 12 && d >= 1 && d <= 31;
}

inline std::string iso(int y, int m, int d) {
    char buf[11];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

}  // namespace hta_detail

/// Normalizes day-month-year, month-day-year, ISO, and textual-month dates to
/// ISO-8601. Unparseable dates stay verbatim with normalized=false.
inline NormalizedDate normalize_assessment_date(const std::string& text) {
    using namespace hta_detail;
    // split into alphanumeric parts
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text + " ") {
        if (std::isalnum(static_cast<unsigned char>(c))) cur.push_back(c);
        else {
            if (!cur.empty()) parts.push_back(cur);
            cur.clear();
        }
    }
    auto as_num = [](const std::string& s) -> std::optional<int> {
        if (s.empty() || s.size() > 4) return std::nullopt;
        for (char c : s)
            if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        return std::stoi(s);
    };
    if (parts.size() == 3) {
        auto a = as_num(parts[0]), b = as_num(parts[1]), c = as_num(parts[2]);
        if (a && b && c) {
            if (parts[0].size() == 4 && plausible(*a, *b, *c)) return {iso(*a, *b, *c), true};  // Y-M-D
            if (parts[2].size() == 4) {
                // day-month-year unless only month-day-year is plausible
                if (*a > 12 && plausible(*c, *b, *a)) return {iso(*c, *b, *a), true};
                if (*b > 12 && plausible(*c, *a, *b)) return {iso(*c, *a, *b), true};
                if (plausible(*c, *b, *a)) return {iso(*c, *b, *a), true};
            }
        } else if (c && parts[2].size() == 4) {
            if (auto m = month_from_name(parts[1]); m && a && plausible(*c, *m, *a))
                return {iso(*c, *m, *a), true};  // "12 November 2012"
            if (auto m = month_from_name(parts[0]); m && b && plausible(*c, *m, *b))
                return {iso(*c, *m, *b), true};  // "November 12, 2012"
        }
    }
    return {text, false};
}

}  // namespace genai
