#pragma once

// Seedlist extraction support: divergence classification between an extracted
// species name and its reference (consistent / harmless author variant /
// OCR residual / erroneous), and author-tolerant page scoring.

#include <optional>
#include <string>
#include <vector>

#include "genai/eval.hpp"
#include "genai/species.hpp"

namespace genai {

enum class DiffCategory { Consistent, HarmlessAuthorVariant, OcrResidual, Erroneous };

enum class DiffSub { Substitution, Inclusion, Exclusion };

inline std::string to_string(DiffCategory c) {
    switch (c) {
    case DiffCategory::Consistent: return "consistent";
    case DiffCategory::HarmlessAuthorVariant: return "harmless-author-variant";
    case DiffCategory::OcrResidual: return "ocr-residual";
    default: return "erroneous";
    }
}

inline std::string to_string(DiffSub s) {
    switch (s) {
    case DiffSub::Substitution: return "substitution";
    case DiffSub::Inclusion: return "inclusion";
    default: return "exclusion";
    }
}

struct DiffClass {
    DiffCategory category = DiffCategory::Consistent;
    std::optional<DiffSub> sub;  // present iff category == Erroneous
    std::string detail;
};

namespace seedlist_detail {

inline bool tokens_equivalent(const std::string& a, const std::string& b) {
    if (a == b) return true;
    // author abbreviation/expansion, including parenthesized basionym groups
    if (species_detail::starts_upper(a) && species_detail::starts_upper(b))
        return authors_equivalent(a, b);
    return false;
}

// Longest common subsequence alignment over name tokens; equivalence allows
// author abbreviation variants.
inline std::vector<std::pair<int, int>> align_tokens(const std::vector<std::string>& cand,
                                                     const std::vector<std::string>& ref) {
    const std::size_t n = cand.size(), m = ref.size();
    std::vector<std::vector<int>> dp(n + 1, std::vector<int>(m + 1, 0));
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = m; j-- > 0;) {
            if (tokens_equivalent(cand[i], ref[j])) dp[i][j] = dp[i + 1][j + 1] + 1;
            else dp[i][j] = std::max(dp[i + 1][j], dp[i][j + 1]);
        }
    }
    std::vector<std::pair<int, int>> pairs;
    std::size_t i = 0, j = 0;
    while (i < n && j < m) {
        if (tokens_equivalent(cand[i], ref[j])) pairs.emplace_back(int(i++), int(j++));
        else if (dp[i + 1][j] >= dp[i][j + 1]) ++i;
        else ++j;
    }
    return pairs;
}

}  // namespace seedlist_detail

/// Classifies the divergence of an extracted name from its reference.
/// Unmatched candidate text that occurs verbatim in the raw OCR source is an
/// OCR residual rather than a model error.
inline DiffClass classify_name_diff(const std::string& candidate, const std::string& reference,
                                    const std::optional<std::string>& raw_source_text = std::nullopt) {
    using namespace seedlist_detail;
    auto cand = species_detail::tokenize(candidate);
    auto ref = species_detail::tokenize(reference);
    auto pairs = align_tokens(cand, ref);

    bool harmless = false;
    bool ocr = false;
    bool any_substitution = false, any_inclusion = false, any_exclusion = false;
    std::string detail;
    auto note = [&](const std::string& s) {
        if (!detail.empty()) detail += "; ";
        detail += s;
    };
    auto in_source = [&](const std::string& tok) {
        return raw_source_text && raw_source_text->find(tok) != std::string::npos;
    };

    for (const auto& [ci, ri] : pairs) {
        if (cand[ci] != ref[ri]) {
            harmless = true;
            note("author variant '" + cand[ci] + "' ~ '" + ref[ri] + "'");
        }
    }

    // walk the gaps between aligned pairs
    std::size_t pc = 0, pr = 0;
    auto process_gap = [&](std::size_t ce, std::size_t re) {
        std::vector<std::string> extra(cand.begin() + pc, cand.begin() + ce);
        std::vector<std::string> missing(ref.begin() + pr, ref.begin() + re);
        std::size_t paired = std::min(extra.size(), missing.size());
        for (std::size_t k = 0; k < paired; ++k) {
            if (in_source(extra[k])) {
                ocr = true;
                note("OCR residual '" + extra[k] + "' for '" + missing[k] + "'");
            } else {
                any_substitution = true;
                note("substitution '" + extra[k] + "' for '" + missing[k] + "'");
            }
        }
        for (std::size_t k = paired; k < extra.size(); ++k) {
            if (in_source(extra[k])) {
                ocr = true;
                note("OCR residual '" + extra[k] + "'");
            } else {
                any_inclusion = true;
                note("inclusion of '" + extra[k] + "'");
            }
        }
        for (std::size_t k = paired; k < missing.size(); ++k) {
            any_exclusion = true;
            note("exclusion of '" + missing[k] + "'");
        }
    };
    for (const auto& [ci, ri] : pairs) {
        process_gap(ci, ri);
        pc = ci + 1;
        pr = ri + 1;
    }
    process_gap(cand.size(), ref.size());

    DiffClass result;
    result.detail = detail;
    if (any_substitution || any_inclusion || any_exclusion) {
        result.category = DiffCategory::Erroneous;
        if (any_substitution) result.sub = DiffSub::Substitution;
        else if (any_inclusion) result.sub = DiffSub::Inclusion;
        else result.sub = DiffSub::Exclusion;
    } else if (ocr) {
        result.category = DiffCategory::OcrResidual;
    } else if (harmless) {
        result.category = DiffCategory::HarmlessAuthorVariant;
    } else {
        result.category = DiffCategory::Consistent;
    }
    return result;
}

/// Author-tolerant name equality used for page scoring.
inline bool species_names_match(const SpeciesName& a, const SpeciesName& b) {
    auto opt_eq = [](const std::optional<std::string>& x, const std::optional<std::string>& y) {
        return x == y;
    };
    auto authors_eq = [](const std::optional<std::string>& x, const std::optional<std::string>& y) {
        if (!x && !y) return true;
        if (!x || !y) return false;
        return authors_equivalent(*x, *y);
    };
    return a.genus == b.genus && a.epithet == b.epithet && opt_eq(a.subspecies, b.subspecies) &&
           opt_eq(a.variety, b.variety) && opt_eq(a.form, b.form) && opt_eq(a.cultivar, b.cultivar) &&
           opt_eq(a.synonym, b.synonym) && authors_eq(a.basionym_authors, b.basionym_authors) &&
           authors_eq(a.authors, b.authors);
}

/// Precision / recall / accuracy of an extracted page against ground truth,
/// with greedy unique matching under author tolerance.
inline SetMetrics score_page(const std::vector<SpeciesName>& extracted,
                             const std::vector<SpeciesName>& truth) {
    return set_metrics(extracted, truth, species_names_match);
}

}  // namespace genai
