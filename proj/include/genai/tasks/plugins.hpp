#pragma once

// The three shipped task plugins wired into the pipeline: seedlist species
// extraction, HTA data-point extraction with a translation second pass, and
// Kickstarter NAICS assignment.

#include <memory>
#include <string>

#include "genai/pipeline.hpp"
#include "genai/tasks/hta.hpp"
#include "genai/tasks/kickstarter.hpp"
#include "genai/tasks/seedlist.hpp"

namespace genai {

inline TaskSchema seedlist_schema() {
    TaskSchema schema;
    schema.name = "seedlist";
    schema.shape = SchemaShape::ArrayOfObjects;
    schema.fields = {{"genus", FieldKind::String},
                     {"epithet", FieldKind::StringOrNull},
                     {"subspecies", FieldKind::StringOrNull},
                     {"variety", FieldKind::StringOrNull},
                     {"form", FieldKind::StringOrNull},
                     {"cultivar", FieldKind::StringOrNull},
                     {"basionym_authors", FieldKind::StringOrNull},
                     {"authors", FieldKind::StringOrNull},
                     {"synonym", FieldKind::StringOrNull}};
    schema.required = {"genus"};
    return schema;
}

inline TaskSchema kickstarter_schema() {
    TaskSchema schema;
    schema.name = "kickstarter";
    schema.shape = SchemaShape::ArrayOfObjects;
    schema.fields = {{"name", FieldKind::String}, {"naics_code", FieldKind::String}};
    schema.required = {"naics_code"};
    return schema;
}

class SeedlistTask : public Task {
public:
    explicit SeedlistTask(PromptTemplate tmpl) : template_(std::move(tmpl)) {}

    std::string name() const override { return "seedlist"; }
    TaskSchema schema() const override { return seedlist_schema(); }
    const PromptTemplate& prompt_template() const override { return template_; }
    Boundary boundary() const override { return Boundary::BlankLine; }

private:
    PromptTemplate template_;
};

/// Converts a validated seedlist record into a structured name.
inline SpeciesName species_from_record(const Record& rec) {
    SpeciesName name;
    auto get = [&](const char* key) -> std::optional<std::string> {
        auto it = rec.find(key);
        if (it == rec.end() || !it->second) return std::nullopt;
        return it->second;
    };
    name.genus = get("genus").value_or("");
    name.epithet = get("epithet").value_or("");
    name.subspecies = get("subspecies");
    name.variety = get("variety");
    name.form = get("form");
    name.cultivar = get("cultivar");
    name.basionym_authors = get("basionym_authors");
    name.authors = get("authors");
    name.synonym = get("synonym");
    name.incomplete = name.epithet.empty();
    return name;
}

class HtaTask : public Task {
public:
    HtaTask(PromptTemplate extract, PromptTemplate translate)
        : template_(std::move(extract)), translate_(std::move(translate)) {}

    std::string name() const override { return "hta"; }
    TaskSchema schema() const override { return hta_schema(); }
    const PromptTemplate& prompt_template() const override { return template_; }
    Boundary boundary() const override { return Boundary::BlankLine; }

    std::vector<Record> second_pass(std::vector<Record> records, const SourceDocument& doc,
                                    const SecondPassCompleter& complete) const override {
        if (!needs_translation_pass(doc.language)) return records;
        for (auto& rec : records) {
            auto bindings = translation_bindings(rec, doc.language, hta_translation_field_policy());
            if (bindings.empty()) continue;
            nlohmann::json fields;
            for (const auto& [field, value] : bindings.fields) fields[field] = value;
            std::string prompt = translate_.render(
                {{"fields", fields.dump(2)}, {"target_language", bindings.target_language}});
            ModelResponse resp = complete(prompt);
            auto translated = extract_json_value(resp.text).value;
            if (!translated.is_object()) throw ShapeMismatch("translation pass must return an object");
            for (const auto& [field, _] : bindings.fields) {
                if (translated.contains(field) && translated.at(field).is_string())
                    rec[field] = translated.at(field).get<std::string>();
            }
        }
        return records;
    }

private:
    PromptTemplate template_;
    PromptTemplate translate_;
};

class KickstarterTask : public Task {
public:
    explicit KickstarterTask(PromptTemplate tmpl) : template_(std::move(tmpl)) {}

    std::string name() const override { return "kickstarter"; }
    TaskSchema schema() const override { return kickstarter_schema(); }
    const PromptTemplate& prompt_template() const override { return template_; }
    Boundary boundary() const override { return Boundary::CsvRow; }

private:
    PromptTemplate template_;
};

}  // namespace genai
