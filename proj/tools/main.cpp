// Command-line front end: runs extraction tasks over corpora through the
// live/replay/record adapters and evaluates the results.
//
// Exit codes: 0 success, 1 run completed with chunk failures, 2 usage or
// configuration errors. The last stdout line is always a JSON summary.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "genai/cassette.hpp"
#include "genai/eval.hpp"
#include "genai/http_adapter.hpp"
#include "genai/pipeline.hpp"
#include "genai/tasks/plugins.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void emit_summary(const json& j) { std::cout << j.dump() << std::endl; }

genai::PromptTemplate template_from_config(const genai::PipelineConfig& config,
                                           const std::string& name) {
    auto it = config.templates.find(name);
    if (it == config.templates.end())
        throw genai::ConfigError("config has no template named '" + name + "'");
    return genai::PromptTemplate::from_file(it->second);
}

std::unique_ptr<genai::Task> make_task(const std::string& task_name,
                                       const genai::PipelineConfig& config) {
    if (task_name == "seedlist")
        return std::make_unique<genai::SeedlistTask>(template_from_config(config, "seedlist"));
    if (task_name == "hta")
        return std::make_unique<genai::HtaTask>(template_from_config(config, "hta"),
                                                template_from_config(config, "hta_translate"));
    if (task_name == "kickstarter")
        return std::make_unique<genai::KickstarterTask>(template_from_config(config, "kickstarter"));
    throw genai::ConfigError("unknown task: " + task_name);
}

std::shared_ptr<genai::CompletionAdapter> make_adapter(const genai::PipelineConfig& config) {
    switch (config.mode) {
    case genai::AdapterMode::Replay: {
        if (!fs::is_directory(config.cassette_dir))
            throw genai::ConfigError("replay mode requires the cassette directory to exist: " +
                                     config.cassette_dir);
        auto store = std::make_shared<genai::CassetteStore>(config.cassette_dir);
        return std::make_shared<genai::ReplayAdapter>(store);
    }
    case genai::AdapterMode::Record: {
        auto store = std::make_shared<genai::CassetteStore>(config.cassette_dir);
        auto live = std::make_shared<genai::HttpAdapter>(config.endpoint);
        return std::make_shared<genai::RecordingAdapter>(live, store);
    }
    default:
        return std::make_shared<genai::HttpAdapter>(config.endpoint);
    }
}

int cmd_run(const std::string& task_name, const std::string& config_path,
            const std::vector<std::string>& corpus_paths, int runs, const std::string& mode,
            const std::string& runs_root, const std::string& run_id, const std::string& language) {
    auto config = genai::load_config(config_path);
    if (!mode.empty()) config.mode = genai::adapter_mode_from_string(mode);
    if (auto diags = genai::validate_config(config); !diags.empty()) {
        for (const auto& d : diags) std::cerr << "config: " << d << "\n";
        return 2;
    }
    if (runs < 1) throw genai::ConfigError("--runs must be >= 1");

    std::vector<genai::SourceDocument> corpus;
    for (const auto& p : corpus_paths)
        corpus.push_back(genai::load_text_document(p, fs::path(p).stem().string(), language));

    auto task = make_task(task_name, config);
    auto adapter = make_adapter(config);

    std::vector<std::string> run_ids;
    std::size_t total_records = 0, total_failures = 0;
    for (int i = 1; i <= runs; ++i) {
        std::string id = runs == 1 ? run_id : run_id + "-" + std::to_string(i);
        auto [result, manifest] = genai::run_task(corpus, *task, *adapter, config, id);
        genai::write_run(runs_root, result, manifest);
        run_ids.push_back(id);
        total_records += result.records.size();
        total_failures += result.failures.size();
    }

    int exit_code = total_failures == 0 ? 0 : 1;
    emit_summary({{"command", "run"},
                  {"task", task_name},
                  {"run_ids", run_ids},
                  {"records", total_records},
                  {"failures", total_failures},
                  {"runs_root", runs_root},
                  {"exit", exit_code}});
    return exit_code;
}

int cmd_validate_config(const std::string& config_path) {
    auto config = genai::load_config(config_path);
    auto diags = genai::validate_config(config);
    if (!diags.empty()) {
        for (const auto& d : diags) std::cerr << "config: " << d << "\n";
        emit_summary({{"command", "validate-config"}, {"ok", false}, {"diagnostics", diags}});
        return 2;
    }
    emit_summary({{"command", "validate-config"}, {"ok", true}});
    return 0;
}

std::map<std::string, std::vector<genai::Record>> records_by_doc(const genai::RunResult& run) {
    std::map<std::string, std::vector<genai::Record>> out;
    for (const auto& r : run.records) out[r.doc_id].push_back(r.fields);
    return out;
}

void write_eval(const fs::path& run_dir, const std::string& name, const json& report) {
    fs::create_directories(run_dir / "eval");
    std::ofstream out(run_dir / "eval" / (name + ".json"));
    out << report.dump(2) << "\n";
}

int cmd_eval_accuracy(const std::string& task_name, const std::string& run_dir,
                      const std::string& truth_path) {
    auto run = genai::load_run_result(run_dir);
    json report = {{"run_id", run.run_id}, {"task", task_name}, {"documents", json::array()}};
    double min_accuracy = 1.0;

    if (task_name == "seedlist") {
        auto truth = genai::load_ground_truth(truth_path, genai::GroundTruthKind::SpeciesSet);
        for (const auto& [doc_id, recs] : records_by_doc(run)) {
            std::vector<genai::SpeciesName> extracted;
            for (const auto& r : recs) extracted.push_back(genai::species_from_record(r));
            std::vector<genai::SpeciesName> expected;
            auto it = truth.species_sets.find(doc_id);
            if (it != truth.species_sets.end())
                for (const auto& s : it->second) expected.push_back(genai::parse_species_name(s));
            auto m = genai::score_page(extracted, expected);
            min_accuracy = std::min(min_accuracy, m.accuracy);
            report["documents"].push_back({{"doc_id", doc_id},
                                           {"precision", m.precision},
                                           {"recall", m.recall},
                                           {"accuracy", m.accuracy},
                                           {"matched", m.matched},
                                           {"precision_undefined", m.precision_undefined}});
        }
    } else if (task_name == "kickstarter") {
        auto truth = genai::load_ground_truth(truth_path, genai::GroundTruthKind::NaicsLabel);
        std::size_t scored = 0, correct = 0;
        for (const auto& r : run.records) {
            auto name = r.fields.find("name");
            auto code = r.fields.find("naics_code");
            if (name == r.fields.end() || !name->second || code == r.fields.end() || !code->second)
                continue;
            auto it = truth.naics_labels.find(*name->second);
            if (it == truth.naics_labels.end()) continue;
            ++scored;
            if (it->second == *code->second) ++correct;
        }
        double acc = scored == 0 ? 0.0 : double(correct) / double(scored);
        min_accuracy = acc;
        report["scored"] = scored;
        report["correct"] = correct;
        report["accuracy"] = acc;
    } else if (task_name == "hta") {
        auto truth = genai::load_ground_truth(truth_path, genai::GroundTruthKind::HtaRecord);
        for (const auto& [doc_id, recs] : records_by_doc(run)) {
            auto it = truth.hta_records.find(doc_id);
            if (it == truth.hta_records.end() || recs.empty()) continue;
            std::size_t correct = 0;
            const auto& fields = genai::hta_field_names();
            for (const auto& f : fields) {
                auto got = recs.front().find(f);
                auto want = it->second.find(f);
                if (got != recs.front().end() && want != it->second.end() &&
                    got->second == want->second)
                    ++correct;
            }
            double acc = double(correct) / double(fields.size());
            min_accuracy = std::min(min_accuracy, acc);
            report["documents"].push_back(
                {{"doc_id", doc_id}, {"correct_fields", correct}, {"accuracy", acc}});
        }
    } else {
        throw genai::ConfigError("unknown task: " + task_name);
    }

    write_eval(run_dir, "accuracy", report);
    emit_summary({{"command", "eval-accuracy"},
                  {"task", task_name},
                  {"run_dir", run_dir},
                  {"min_accuracy", min_accuracy}});
    return 0;
}

int cmd_eval_consistency(const std::vector<std::string>& run_dirs) {
    if (run_dirs.size() < 2) throw genai::ConfigError("eval-consistency needs at least 2 run dirs");
    // canonical per-record value keyed by (doc_id, chunk_index, position)
    std::vector<std::map<std::string, std::string>> per_run;
    for (const auto& dir : run_dirs) {
        auto run = genai::load_run_result(dir);
        std::map<std::string, std::string> values;
        for (const auto& r : run.records) {
            std::string key = r.doc_id + "#" + std::to_string(r.chunk_index) + "#" +
                              std::to_string(r.position);
            json fields;
            for (const auto& [k, v] : r.fields) fields[k] = v ? json(*v) : json();
            values[key] = fields.dump();
        }
        per_run.push_back(std::move(values));
    }
    std::map<std::string, bool> keys;
    for (const auto& run : per_run)
        for (const auto& [k, _] : run) keys[k] = true;

    json records = json::array();
    double sum = 0.0;
    bool all_consistent = true;
    for (const auto& [key, _] : keys) {
        std::vector<std::string> values;
        for (const auto& run : per_run) {
            auto it = run.find(key);
            values.push_back(it == run.end() ? std::string("<absent>") : it->second);
        }
        auto rep = genai::consistency(values);
        sum += rep.agreement;
        if (rep.agreement < 1.0) all_consistent = false;
        records.push_back({{"key", key}, {"agreement", rep.agreement}, {"tie", rep.tie}});
    }
    double mean = keys.empty() ? 1.0 : sum / double(keys.size());
    json report = {{"run_dirs", run_dirs},
                   {"records", records},
                   {"mean_agreement", mean},
                   {"all_consistent", all_consistent}};
    write_eval(run_dirs.front(), "consistency", report);
    emit_summary({{"command", "eval-consistency"},
                  {"records", keys.size()},
                  {"mean_agreement", mean},
                  {"all_consistent", all_consistent}});
    return 0;
}

int cmd_diff_seedlist(const std::vector<std::string>& run_dirs, const std::string& ocr_path) {
    if (run_dirs.size() < 2) throw genai::ConfigError("diff-seedlist needs at least 2 run dirs");
    std::optional<std::string> source;
    if (!ocr_path.empty()) source = genai::read_file(ocr_path);

    auto formatted = [](const genai::RunResult& run) {
        std::map<std::string, std::string> out;
        for (const auto& r : run.records) {
            std::string key = r.doc_id + "#" + std::to_string(r.chunk_index) + "#" +
                              std::to_string(r.position);
            out[key] = genai::format_species_name(genai::species_from_record(r.fields));
        }
        return out;
    };
    auto reference = formatted(genai::load_run_result(run_dirs.front()));

    std::map<std::string, std::size_t> counts;
    json diffs = json::array();
    for (std::size_t i = 1; i < run_dirs.size(); ++i) {
        auto candidate = formatted(genai::load_run_result(run_dirs[i]));
        for (const auto& [key, ref_name] : reference) {
            auto it = candidate.find(key);
            if (it == candidate.end()) continue;
            auto diff = genai::classify_name_diff(it->second, ref_name, source);
            std::string label = to_string(diff.category);
            if (diff.sub) label += ":" + to_string(*diff.sub);
            ++counts[label];
            if (diff.category != genai::DiffCategory::Consistent)
                diffs.push_back({{"run_dir", run_dirs[i]},
                                 {"key", key},
                                 {"candidate", it->second},
                                 {"reference", ref_name},
                                 {"class", label},
                                 {"detail", diff.detail}});
        }
    }
    json report = {{"reference", run_dirs.front()}, {"counts", counts}, {"diffs", diffs}};
    write_eval(run_dirs.front(), "diff", report);
    emit_summary({{"command", "diff-seedlist"}, {"counts", counts}});
    return 0;
}

int cmd_agree(const std::string& ratings_path, const std::string& table_path) {
    auto table = genai::NaicsTable::load(table_path);
    auto ratings = genai::load_ratings(ratings_path, table);
    auto pairs = genai::pairwise_agreement(ratings);
    json report = json::array();
    char line[256];
    for (const auto& [who, agg] : pairs) {
        std::snprintf(line, sizeof(line), "%s,%s,%zu,%zu,%.3f", who.first.c_str(),
                      who.second.c_str(), agg.shared, agg.matched, agg.fraction);
        std::cout << line << "\n";
        report.push_back({{"rater_a", who.first},
                          {"rater_b", who.second},
                          {"shared", agg.shared},
                          {"matched", agg.matched},
                          {"sector_matched", agg.sector_matched},
                          {"fraction", agg.fraction}});
    }
    emit_summary({{"command", "agree"}, {"pairs", report}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LLM research-data-processing harness"};
    app.require_subcommand(1);

    std::string task_name, config_path, mode, runs_root = "runs", run_id = "run";
    std::string language = "en", truth_path, run_dir, ocr_path, ratings_path, table_path;
    std::vector<std::string> corpus_paths, run_dirs;
    int runs = 1;

    auto* run = app.add_subcommand("run", "Run a task over a corpus");
    run->add_option("--task", task_name, "seedlist | hta | kickstarter")->required();
    run->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
    run->add_option("--corpus", corpus_paths, "input text files")
        ->required()
        ->check(CLI::ExistingFile);
    run->add_option("--runs", runs, "number of repeated runs");
    run->add_option("--mode", mode)->check(CLI::IsMember({"live", "replay", "record"}));
    run->add_option("--runs-root", runs_root);
    run->add_option("--run-id", run_id);
    run->add_option("--language", language, "corpus language code");

    auto* vc = app.add_subcommand("validate-config", "Check a config file");
    vc->add_option("--config", config_path)->required()->check(CLI::ExistingFile);

    auto* ea = app.add_subcommand("eval-accuracy", "Score a run against ground truth");
    ea->add_option("--task", task_name)->required();
    ea->add_option("--run", run_dir)->required()->check(CLI::ExistingDirectory);
    ea->add_option("--truth", truth_path)->required()->check(CLI::ExistingFile);

    auto* ec = app.add_subcommand("eval-consistency", "Compare repeated runs");
    ec->add_option("--runs", run_dirs)->required()->check(CLI::ExistingDirectory);

    auto* ds = app.add_subcommand("diff-seedlist", "Classify name divergences between runs");
    ds->add_option("--runs", run_dirs)->required()->check(CLI::ExistingDirectory);
    ds->add_option("--ocr", ocr_path)->check(CLI::ExistingFile);

    auto* ag = app.add_subcommand("agree", "Pairwise interrater agreement from a ratings CSV");
    ag->add_option("--ratings", ratings_path)->required()->check(CLI::ExistingFile);
    ag->add_option("--table", table_path)->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;  // --help exits 0; every parse failure is a usage error
    }

    try {
        if (run->parsed())
            return cmd_run(task_name, config_path, corpus_paths, runs, mode, runs_root, run_id,
                           language);
        if (vc->parsed()) return cmd_validate_config(config_path);
        if (ea->parsed()) return cmd_eval_accuracy(task_name, run_dir, truth_path);
        if (ec->parsed()) return cmd_eval_consistency(run_dirs);
        if (ds->parsed()) return cmd_diff_seedlist(run_dirs, ocr_path);
        if (ag->parsed()) return cmd_agree(ratings_path, table_path);
    } catch (const genai::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
