#pragma once

// Task-agnostic reliability metrics: set accuracy against ground truth,
// multi-run consistency with majority vote, and character error rate.

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "genai/error.hpp"

namespace genai {

struct SetMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double accuracy = 0.0;  // |matched| / |predicted ∪ truth|
    std::size_t matched = 0;
    bool precision_undefined = false;  // empty predicted set with nonempty truth
};

/// Greedy unique matching of predicted items against truth items under the
/// task-supplied equivalence predicate.
template <typename T, typename Matcher>
SetMetrics set_metrics(const std::vector<T>& predicted, const std::vector<T>& truth,
                       Matcher&& matches) {
    std::vector<bool> truth_used(truth.size(), false);
    std::size_t matched = 0;
    for (const auto& p : predicted) {
        for (std::size_t t = 0; t < truth.size(); ++t) {
            if (!truth_used[t] && matches(p, truth[t])) {
                truth_used[t] = true;
                ++matched;
                break;
            }
        }
    }
    SetMetrics m;
    m.matched = matched;
    std::size_t union_size = predicted.size() + truth.size() - matched;
    if (predicted.empty()) {
        m.precision = 0.0;
        m.precision_undefined = !truth.empty();
    } else {
        m.precision = static_cast<double>(matched) / static_cast<double>(predicted.size());
    }
    m.recall = truth.empty() ? 1.0 : static_cast<double>(matched) / static_cast<double>(truth.size());
    m.accuracy = union_size == 0 ? 1.0 : static_cast<double>(matched) / static_cast<double>(union_size);
    return m;
}

struct ConsistencyReport {
    std::vector<std::string> values;  // one per run
    double agreement = 0.0;           // fraction of runs matching the modal value
    std::string majority;             // modal value; lexicographically smallest on ties
    bool tie = false;
};

/// Modal agreement across runs of the same value. Requires >= 2 runs.
inline ConsistencyReport consistency(const std::vector<std::string>& values_across_runs) {
    if (values_across_runs.size() < 2) throw Error("consistency requires at least 2 runs");
    std::map<std::string, std::size_t> counts;
    for (const auto& v : values_across_runs) ++counts[v];
    std::size_t best = 0;
    for (const auto& [_, n] : counts) best = std::max(best, n);
    ConsistencyReport r;
    r.values = values_across_runs;
    std::size_t at_best = 0;
    for (const auto& [v, n] : counts) {
        if (n == best) {
            if (at_best == 0) r.majority = v;  // map iterates in lexicographic order
            ++at_best;
        }
    }
    r.tie = at_best > 1;
    r.agreement = static_cast<double>(best) / static_cast<double>(values_across_runs.size());
    return r;
}

struct EmptyReference : Error {
    EmptyReference() : Error("character error rate requires a nonempty reference") {}
};

/// Levenshtein edit distance (unit costs) via the two-row DP.
inline std::size_t levenshtein_distance(const std::string& a, const std::string& b) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

/// distance(candidate, reference) / length(reference). Not symmetric; can exceed 1.
inline double character_error_rate(const std::string& candidate, const std::string& reference) {
    if (reference.empty()) throw EmptyReference();
    return static_cast<double>(levenshtein_distance(candidate, reference)) /
           static_cast<double>(reference.size());
}

}  // namespace genai
