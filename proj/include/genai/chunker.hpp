#pragma once

// Token estimation and boundary-aware chunk planning. Chunks partition the
// document text exactly (joining them restores the original bytes) and every
// chunk fits the effective input budget.

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "genai/error.hpp"
#include "genai/ingest.hpp"

namespace genai {

struct TokenEstimatorConfig {
    double chars_per_token = 4.0;
    double safety_margin = 0.10;  // in [0,1)
};

struct Budget {
    long max_input_tokens = 0;
    long max_output_tokens = 0;
    long instruction_tokens = 0;       // reserved for the prompt template
    long per_record_output_tokens = 0; // expected output cost per record
};

enum class Boundary { Line, BlankLine, CsvRow };

struct Chunk {
    std::string doc_id;
    std::size_t index = 0;
    std::string text;
    std::size_t char_begin = 0;
    std::size_t char_end = 0;
    long estimated_tokens = 0;
    std::size_t record_count_estimate = 0;
};

struct ChunkPlan {
    std::string doc_id;
    std::vector<Chunk> chunks;
};

struct OversizedUnit : Error {
    OversizedUnit(const std::string& doc_id, std::size_t position)
        : Error("boundary unit in document '" + doc_id + "' at char " + std::to_string(position) +
                " exceeds the input budget on its own"),
          doc_id(doc_id), position(position) {}
    std::string doc_id;
    std::size_t position;
};

struct OutputBudgetExceeded : Error {
    OutputBudgetExceeded(long needed, long allowed)
        : Error("expected output of " + std::to_string(needed) + " tokens exceeds limit of " +
                std::to_string(allowed)),
          needed(needed), allowed(allowed) {}
    long needed;
    long allowed;
};

/// ceil(char_count / chars_per_token); monotone in text length.
inline long estimate_tokens(std::string_view text, const TokenEstimatorConfig& cfg = {}) {
    if (text.empty()) return 0;
    return static_cast<long>(std::ceil(static_cast<double>(text.size()) / cfg.chars_per_token));
}

/// Largest token count a chunk may carry after reserving instruction tokens
/// and applying the safety margin.
inline long effective_input_budget(const Budget& budget, const TokenEstimatorConfig& cfg) {
    double room = static_cast<double>(budget.max_input_tokens - budget.instruction_tokens);
    return static_cast<long>(std::floor(room * (1.0 - cfg.safety_margin)));
}

namespace detail {

// Splits `text` into units ending at (and including) the boundary delimiter,
// so that concatenating the units reproduces the text exactly.
inline std::vector<std::string_view> split_units(std::string_view text, Boundary boundary) {
    std::vector<std::string_view> units;
    if (text.empty()) return units;
    switch (boundary) {
    case Boundary::Line: {
        std::size_t start = 0;
        for (std::size_t i = 0; i < text.size(); ++i) {
            if (text[i] == '\n') {
                units.push_back(text.substr(start, i + 1 - start));
                start = i + 1;
            }
        }
        if (start < text.size()) units.push_back(text.substr(start));
        break;
    }
    case Boundary::BlankLine: {
        // A unit is a paragraph plus the run of blank lines that follows it.
        std::size_t start = 0;
        std::size_t i = 0;
        while (i < text.size()) {
            // find "\n\n" (possibly with \r)
            if (text[i] == '\n') {
                std::size_t j = i + 1;
                bool blank = false;
                while (j < text.size() && (text[j] == '\n' || text[j] == '\r')) {
                    if (text[j] == '\n') blank = true;
                    ++j;
                }
                if (blank) {
                    units.push_back(text.substr(start, j - start));
                    start = j;
                    i = j;
                    continue;
                }
            }
            ++i;
        }
        if (start < text.size()) units.push_back(text.substr(start));
        break;
    }
    case Boundary::CsvRow: {
        // Quote-aware row splitting so quoted newlines never become boundaries.
        std::size_t start = 0;
        bool in_quotes = false;
        for (std::size_t i = 0; i < text.size(); ++i) {
            char c = text[i];
            if (c == '"') in_quotes = !in_quotes;
            else if (c == '\n' && !in_quotes) {
                units.push_back(text.substr(start, i + 1 - start));
                start = i + 1;
            }
        }
        if (start < text.size()) units.push_back(text.substr(start));
        break;
    }
    }
    return units;
}

}  // namespace detail

/// Packs boundary units greedily into chunks within the effective budget.
/// Throws OversizedUnit if a single unit cannot fit on its own.
inline ChunkPlan plan_chunks(const SourceDocument& document, const Budget& budget,
                             const TokenEstimatorConfig& cfg, Boundary boundary) {
    ChunkPlan plan;
    plan.doc_id = document.id;
    if (document.text.empty()) return plan;

    const long limit = effective_input_budget(budget, cfg);
    auto units = detail::split_units(document.text, boundary);

    std::size_t chunk_begin = 0;
    std::size_t chunk_len = 0;
    std::size_t chunk_records = 0;
    auto flush = [&] {
        if (chunk_len == 0) return;
        Chunk c;
        c.doc_id = document.id;
        c.index = plan.chunks.size();
        c.char_begin = chunk_begin;
        c.char_end = chunk_begin + chunk_len;
        c.text = document.text.substr(chunk_begin, chunk_len);
        c.estimated_tokens = estimate_tokens(c.text, cfg);
        c.record_count_estimate = chunk_records;
        plan.chunks.push_back(std::move(c));
        chunk_begin += chunk_len;
        chunk_len = 0;
        chunk_records = 0;
    };

    std::size_t pos = 0;
    for (auto unit : units) {
        if (estimate_tokens(unit, cfg) > limit) throw OversizedUnit(document.id, pos);
        std::string_view grown(document.text.data() + chunk_begin, chunk_len + unit.size());
        if (chunk_len > 0 && estimate_tokens(grown, cfg) > limit) flush();
        chunk_len += unit.size();
        ++chunk_records;
        pos += unit.size();
    }
    flush();
    return plan;
}

/// Checks that the chunk's expected output fits max_output_tokens.
inline void check_output_budget(const Chunk& chunk, const Budget& budget) {
    long needed = static_cast<long>(chunk.record_count_estimate) * budget.per_record_output_tokens;
    if (needed > budget.max_output_tokens) throw OutputBudgetExceeded(needed, budget.max_output_tokens);
}

}  // namespace genai
