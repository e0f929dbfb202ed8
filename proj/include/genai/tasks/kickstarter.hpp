#pragma once

// Kickstarter NAICS assignment support: the pinned 2017 4-digit code table,
// code validation, staggered two-rater assignment, and pairwise agreement.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "genai/ingest.hpp"

namespace genai {

struct WrongGranularity : Error {
    explicit WrongGranularity(const std::string& code)
        : Error("NAICS code must be 4 digits: '" + code + "'") {}
};

struct UnknownCode : Error {
    explicit UnknownCode(const std::string& code) : Error("unknown NAICS code: " + code) {}
};

struct TooFewRaters : Error {
    TooFewRaters() : Error("staggered assignment needs at least 2 raters") {}
};

class NaicsTable {
public:
    static NaicsTable load(const std::filesystem::path& csv_path) {
        auto batch = load_csv_records(csv_path, {"code", "title"});
        NaicsTable table;
        auto code_col = *batch.column_index("code");
        auto title_col = *batch.column_index("title");
        for (const auto& row : batch.rows) {
            const std::string& code = row[code_col];
            if (code.size() != 4 || code.find_first_not_of("0123456789") != std::string::npos)
                throw ParseError("invalid NAICS code in table: '" + code + "'");
            if (!table.entries_.emplace(code, row[title_col]).second)
                throw ParseError("duplicate NAICS code in table: " + code);
        }
        return table;
    }

    std::size_t size() const { return entries_.size(); }
    bool contains(const std::string& code) const { return entries_.count(code) > 0; }

    const std::string& title(const std::string& code) const {
        auto it = entries_.find(code);
        if (it == entries_.end()) throw UnknownCode(code);
        return it->second;
    }

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

/// Throws WrongGranularity or UnknownCode when the code is not a valid entry.
inline void validate_naics(const std::string& code, const NaicsTable& table) {
    if (code.size() != 4 || code.find_first_not_of("0123456789") != std::string::npos)
        throw WrongGranularity(code);
    if (!table.contains(code)) throw UnknownCode(code);
}

struct RaterAssignment {
    std::map<std::string, std::pair<std::string, std::string>> raters_for_project;
    std::map<std::string, std::vector<std::string>> projects_for_rater;
};

/// Deterministic staggered assignment: project i (in sorted order) goes to
/// raters (i mod R) and (i+1 mod R), so adjacent rater subsets overlap and
/// every project has exactly two distinct raters.
inline RaterAssignment assign_raters(std::vector<std::string> project_ids,
                                     const std::vector<std::string>& rater_ids) {
    if (rater_ids.size() < 2) throw TooFewRaters();
    std::sort(project_ids.begin(), project_ids.end());
    RaterAssignment out;
    const std::size_t r = rater_ids.size();
    for (std::size_t i = 0; i < project_ids.size(); ++i) {
        const std::string& first = rater_ids[i % r];
        const std::string& second = rater_ids[(i + 1) % r];
        out.raters_for_project[project_ids[i]] = {first, second};
        out.projects_for_rater[first].push_back(project_ids[i]);
        out.projects_for_rater[second].push_back(project_ids[i]);
    }
    return out;
}

struct Rating {
    std::string project_id;
    std::string rater_id;  // human label or "genai"
    std::string code;      // validated 4-digit code
};

struct PairAgreement {
    std::size_t shared = 0;
    std::size_t matched = 0;         // exact 4-digit matches (the headline number)
    std::size_t sector_matched = 0;  // 2-digit sector matches, diagnostic only
    double fraction = 0.0;
};

/// Exact-match agreement over every unordered rater pair's shared projects.
/// Pairs with no shared project are omitted.
inline std::map<std::pair<std::string, std::string>, PairAgreement> pairwise_agreement(
    const std::vector<Rating>& ratings) {
    // project -> rater -> code (a rater's later rating of the same project wins)
    std::map<std::string, std::map<std::string, std::string>> by_project;
    for (const auto& r : ratings) by_project[r.project_id][r.rater_id] = r.code;

    std::map<std::pair<std::string, std::string>, PairAgreement> out;
    for (const auto& [project, codes] : by_project) {
        for (auto a = codes.begin(); a != codes.end(); ++a) {
            for (auto b = std::next(a); b != codes.end(); ++b) {
                auto& agg = out[{a->first, b->first}];
                ++agg.shared;
                if (a->second == b->second) ++agg.matched;
                if (a->second.substr(0, 2) == b->second.substr(0, 2)) ++agg.sector_matched;
            }
        }
    }
    for (auto& [_, agg] : out)
        agg.fraction = static_cast<double>(agg.matched) / static_cast<double>(agg.shared);
    return out;
}

/// Loads ratings from a CSV with columns project_id,rater_id,code, validating
/// every code against the table.
inline std::vector<Rating> load_ratings(const std::filesystem::path& path, const NaicsTable& table) {
    auto batch = load_csv_records(path, {"project_id", "rater_id", "code"});
    auto p = *batch.column_index("project_id");
    auto r = *batch.column_index("rater_id");
    auto c = *batch.column_index("code");
    std::vector<Rating> ratings;
    for (const auto& row : batch.rows) {
        validate_naics(row[c], table);
        ratings.push_back({row[p], row[r], row[c]});
    }
    return ratings;
}

}  // namespace genai
