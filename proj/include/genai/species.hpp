#pragma once

// Structured botanical names: grammar-based parsing of "Genus epithet
// [subsp./var./f. ...] ['Cultivar'] [(basionym)] [authors] [= synonym]"
// strings, canonical formatting, and author-abbreviation equivalence.

#include <algorithm>
#include <cctype>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "genai/error.hpp"

namespace genai {

struct SpeciesName {
    std::string genus;
    std::string epithet;  // empty when incomplete
    std::optional<std::string> subspecies;
    std::optional<std::string> variety;
    std::optional<std::string> form;
    std::optional<std::string> cultivar;           // without quotes
    std::optional<std::string> basionym_authors;   // with parentheses, e.g. "(L.)"
    std::optional<std::string> authors;
    std::optional<std::string> synonym;
    std::vector<std::string> extras;  // verbatim tokens outside the grammar, e.g. "(NG)"
    bool incomplete = false;          // epithet absent (exclusion-damaged candidate)

    bool operator==(const SpeciesName&) const = default;
};

struct UnparseableName : Error {
    explicit UnparseableName(const std::string& text) : Error("unparseable species name: " + text) {}
};

namespace species_detail {

inline bool starts_upper(const std::string& tok) {
    for (char c : tok) {
        if (c == '(' || c == ')' || static_cast<unsigned char>(c) >= 0x80) continue;
        return std::isupper(static_cast<unsigned char>(c));
    }
    return false;
}

inline bool starts_lower(const std::string& tok) {
    for (char c : tok) {
        if (static_cast<unsigned char>(c) >= 0x80) continue;  // e.g. leading hybrid sign
        return std::islower(static_cast<unsigned char>(c));
    }
    return false;
}

inline bool is_quote(char c) { return c == '\'' || c == '"'; }

/// Whitespace tokenizer keeping quoted phrases and parenthesized groups
/// together as single tokens.
inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> raw;
    std::istringstream in(text);
    std::string t;
    while (in >> t) raw.push_back(t);

    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        std::string tok = raw[i];
        if (is_quote(tok.front()) && !(tok.size() > 1 && is_quote(tok.back()))) {
            char q = tok.front();
            while (i + 1 < raw.size() && tok.back() != q) tok += " " + raw[++i];
        } else if (tok.front() == '(' && tok.find(')') == std::string::npos) {
            while (i + 1 < raw.size() && tok.find(')') == std::string::npos) tok += " " + raw[++i];
        }
        tokens.push_back(std::move(tok));
    }
    return tokens;
}

inline bool is_rank_marker(const std::string& tok) {
    return tok == "subsp." || tok == "ssp." || tok == "var." || tok == "subvar." || tok == "f.";
}

}  // namespace species_detail

/// True when the two author strings differ only by abbreviation/expansion:
/// same token count and each pair equal or one a prefix (>= 2 chars) of the
/// other after stripping periods, parentheses and case.
inline bool authors_equivalent(const std::string& a, const std::string& b) {
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : s) {
            if (std::isspace(static_cast<unsigned char>(c)) || c == '&') {
                if (!cur.empty()) out.push_back(cur);
                cur.clear();
            } else if (c == '.' || c == '(' || c == ')') {
                continue;
            } else {
                cur.push_back(std::tolower(static_cast<unsigned char>(c)));
            }
        }
        if (!cur.empty()) out.push_back(cur);
        return out;
    };
    auto ta = split(a), tb = split(b);
    if (ta.size() != tb.size()) return false;
    for (std::size_t i = 0; i < ta.size(); ++i) {
        const std::string& x = ta[i];
        const std::string& y = tb[i];
        if (x == y) continue;
        const std::string& shorter = x.size() < y.size() ? x : y;
        const std::string& longer = x.size() < y.size() ? y : x;
        if (shorter.size() < 2 || longer.compare(0, shorter.size(), shorter) != 0) return false;
    }
    return true;
}

/// Parses a species name string. The leftmost capitalized token is the genus;
/// a rank marker directly after it means the epithet was dropped and the
/// result is flagged incomplete.
inline SpeciesName parse_species_name(const std::string& text) {
    using namespace species_detail;
    auto tokens = tokenize(text);
    if (tokens.empty()) throw UnparseableName(text);

    SpeciesName name;
    std::size_t i = 0;
    // genus: leftmost capitalized token
    while (i < tokens.size() && !starts_upper(tokens[i])) ++i;
    if (i == tokens.size() || tokens[i].front() == '(') throw UnparseableName(text);
    name.genus = tokens[i++];

    bool epithet_done = false;
    std::vector<std::string> author_tokens;
    for (; i < tokens.size(); ++i) {
        const std::string& tok = tokens[i];
        if (tok.front() == '=' || (tok.size() >= 2 && tok[0] == '(' && tok[1] == '=')) {
            // trailing synonym group: "= Genus epithet ..." or "(= ...)"
            std::string syn;
            for (std::size_t k = i; k < tokens.size(); ++k) {
                if (k > i) syn += " ";
                syn += tokens[k];
            }
            while (!syn.empty() && (syn.front() == '(' || syn.front() == '=' || syn.front() == ' '))
                syn.erase(syn.begin());
            while (!syn.empty() && syn.back() == ')') syn.pop_back();
            name.synonym = syn;
            break;
        }
        if (is_rank_marker(tok) && i + 1 < tokens.size() && starts_lower(tokens[i + 1])) {
            const std::string& value = tokens[++i];
            if (tok == "var." || tok == "subvar.") name.variety = value;
            else if (tok == "f.") name.form = value;
            else name.subspecies = value;
            epithet_done = true;
            continue;
        }
        if (!epithet_done && starts_lower(tok)) {
            name.epithet = tok;
            // "cf." / "aff." qualifiers and a bare hybrid sign attach to the next token
            if ((tok == "cf." || tok == "aff." || tok == "\xc3\x97") && i + 1 < tokens.size())
                name.epithet += " " + tokens[++i];
            epithet_done = true;
            continue;
        }
        if (is_quote(tok.front())) {
            std::string c = tok;
            if (!c.empty() && is_quote(c.front())) c.erase(c.begin());
            if (!c.empty() && is_quote(c.back())) c.pop_back();
            name.cultivar = c;
            epithet_done = true;
            continue;
        }
        if (tok.front() == '(') {
            if (!name.basionym_authors && author_tokens.empty()) name.basionym_authors = tok;
            else name.extras.push_back(tok);
            epithet_done = true;
            continue;
        }
        if (starts_upper(tok)) {
            author_tokens.push_back(tok);
            epithet_done = true;
            continue;
        }
        if (tok == "&" || tok == "ex" || tok == "et") {
            if (!author_tokens.empty()) { author_tokens.push_back(tok); continue; }
        }
        name.extras.push_back(tok);
        epithet_done = true;
    }
    if (!author_tokens.empty()) {
        std::string joined;
        for (std::size_t k = 0; k < author_tokens.size(); ++k) {
            if (k) joined += " ";
            joined += author_tokens[k];
        }
        name.authors = joined;
    }
    if (name.epithet.empty()) name.incomplete = true;
    return name;
}

/// Canonical rendering:
/// "Genus epithet [subsp. x] [var. y] [f. z] ['Cultivar'] [(basionym)] [authors]".
inline std::string format_species_name(const SpeciesName& name) {
    std::string out = name.genus;
    if (!name.epithet.empty()) out += " " + name.epithet;
    if (name.subspecies) out += " subsp. " + *name.subspecies;
    if (name.variety) out += " var. " + *name.variety;
    if (name.form) out += " f. " + *name.form;
    if (name.cultivar) out += " '" + *name.cultivar + "'";
    if (name.basionym_authors) out += " " + *name.basionym_authors;
    if (name.authors) out += " " + *name.authors;
    for (const auto& e : name.extras) out += " " + e;
    if (name.synonym) out += " = " + *name.synonym;
    return out;
}

}  // namespace genai
