#pragma once

// Prompt templates: UTF-8 text with {name} placeholders, doubled braces as
// escapes. Rendering is verbatim substitution, nothing else.

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "genai/digest.hpp"
#include "genai/error.hpp"
#include "genai/ingest.hpp"

namespace genai {

struct MissingBinding : Error {
    explicit MissingBinding(const std::string& name) : Error("missing binding: " + name), name(name) {}
    std::string name;
};

struct UnknownPlaceholder : Error {
    explicit UnknownPlaceholder(const std::string& name)
        : Error("unknown placeholder: " + name), name(name) {}
    std::string name;
};

struct TemplateError : Error {
    using Error::Error;
};

using Bindings = std::map<std::string, std::string>;

class PromptTemplate {
public:
    PromptTemplate() = default;

    static PromptTemplate from_string(std::string name, std::string body) {
        PromptTemplate t;
        t.name_ = std::move(name);
        t.body_ = std::move(body);
        t.parse();
        return t;
    }

    static PromptTemplate from_file(const std::filesystem::path& path) {
        return from_string(path.stem().string(), read_file(path));
    }

    const std::string& name() const { return name_; }
    const std::string& body() const { return body_; }
    const std::set<std::string>& required_placeholders() const { return placeholders_; }
    std::string hash() const { return sha256_hex(body_); }

    /// Substitutes bindings into the body. Every required placeholder must be
    /// bound; bindings for names not in the template are rejected.
    std::string render(const Bindings& bindings) const {
        for (const auto& [key, _] : bindings)
            if (!placeholders_.count(key)) throw UnknownPlaceholder(key);
        for (const auto& name : placeholders_)
            if (!bindings.count(name)) throw MissingBinding(name);

        std::string out;
        out.reserve(body_.size());
        for (std::size_t i = 0; i < body_.size(); ++i) {
            char c = body_[i];
            if (c == '{') {
                if (i + 1 < body_.size() && body_[i + 1] == '{') { out.push_back('{'); ++i; continue; }
                std::size_t close = body_.find('}', i);
                std::string name = body_.substr(i + 1, close - i - 1);
                out += bindings.at(name);
                i = close;
            } else if (c == '}') {
                if (i + 1 < body_.size() && body_[i + 1] == '}') ++i;
                out.push_back('}');
            } else {
                out.push_back(c);
            }
        }
        return out;
    }

private:
    void parse() {
        std::map<std::string, int> counts;
        for (std::size_t i = 0; i < body_.size(); ++i) {
            char c = body_[i];
            if (c == '{') {
                if (i + 1 < body_.size() && body_[i + 1] == '{') { ++i; continue; }
                std::size_t close = body_.find('}', i);
                if (close == std::string::npos)
                    throw TemplateError("unterminated placeholder in template " + name_);
                std::string name = body_.substr(i + 1, close - i - 1);
                if (name.empty() || name.find('{') != std::string::npos)
                    throw TemplateError("malformed placeholder in template " + name_);
                ++counts[name];
                i = close;
            } else if (c == '}') {
                if (i + 1 < body_.size() && body_[i + 1] == '}') ++i;
            }
        }
        for (const auto& [name, n] : counts) {
            if (n != 1)
                throw TemplateError("placeholder {" + name + "} occurs " + std::to_string(n) +
                                    " times in template " + name_ + "; required exactly once");
            placeholders_.insert(name);
        }
    }

    std::string name_;
    std::string body_;
    std::set<std::string> placeholders_;
};

/// Inputs for the translation second pass over one extracted record.
struct TranslationBindings {
    std::vector<std::pair<std::string, std::string>> fields;  // name -> current value
    std::string target_language;

    bool empty() const { return fields.empty(); }
};

/// Selects the free-text fields to translate. English documents need no
/// second pass; for any other language the policy's fields with non-empty
/// values are returned with target language "en".
inline TranslationBindings translation_bindings(
    const std::map<std::string, std::optional<std::string>>& record,
    const std::string& doc_language, const std::vector<std::string>& field_policy) {
    TranslationBindings out;
    if (doc_language == "en") return out;
    out.target_language = "en";
    for (const auto& field : field_policy) {
        auto it = record.find(field);
        if (it != record.end() && it->second.has_value() && !it->second->empty())
            out.fields.emplace_back(field, *it->second);
    }
    return out;
}

}  // namespace genai
