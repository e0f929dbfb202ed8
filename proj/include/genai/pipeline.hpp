#pragma once

// End-to-end orchestration of the chunk / prompt / complete / extract /
// validate loop over a corpus, with a reproducibility manifest and repeated
// runs for consistency measurement. Workers process chunks concurrently but
// merging is canonical-order, so concurrency never changes the output.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "genai/chunker.hpp"
#include "genai/extraction.hpp"
#include "genai/ingest.hpp"
#include "genai/prompting.hpp"
#include "genai/provider.hpp"

namespace genai {

struct ConfigError : Error {
    using Error::Error;
};

enum class AdapterMode { Live, Replay, Record };

inline std::string to_string(AdapterMode m) {
    switch (m) {
    case AdapterMode::Live: return "live";
    case AdapterMode::Replay: return "replay";
    default: return "record";
    }
}

inline AdapterMode adapter_mode_from_string(const std::string& s) {
    if (s == "live") return AdapterMode::Live;
    if (s == "replay") return AdapterMode::Replay;
    if (s == "record") return AdapterMode::Record;
    throw ConfigError("unknown adapter mode: " + s);
}

struct PipelineConfig {
    std::string model_id = "claude-3-opus-20240229";
    double temperature = 0.0;
    bool allow_nonzero_temperature = false;
    Budget budget{100000, 4096, 500, 50};
    TokenEstimatorConfig estimator;
    RetryPolicy retry;
    RateBudget rate{100000, 60};
    AdapterMode mode = AdapterMode::Replay;
    std::string cassette_dir = "cassettes";
    std::map<std::string, std::string> templates;  // template name -> file path
    int workers = 1;
    EndpointConfig endpoint;
};

inline nlohmann::json to_json(const PipelineConfig& c) {
    return {
        {"model_id", c.model_id},
        {"temperature", c.temperature},
        {"allow_nonzero_temperature", c.allow_nonzero_temperature},
        {"budget",
         {{"max_input_tokens", c.budget.max_input_tokens},
          {"max_output_tokens", c.budget.max_output_tokens},
          {"instruction_tokens", c.budget.instruction_tokens},
          {"per_record_output_tokens", c.budget.per_record_output_tokens}}},
        {"estimator",
         {{"chars_per_token", c.estimator.chars_per_token},
          {"safety_margin", c.estimator.safety_margin}}},
        {"retry",
         {{"max_attempts", c.retry.max_attempts},
          {"initial_backoff_ms", c.retry.initial_backoff.count()},
          {"backoff_multiplier", c.retry.backoff_multiplier}}},
        {"rate",
         {{"tokens_per_minute", c.rate.tokens_per_minute},
          {"requests_per_minute", c.rate.requests_per_minute}}},
        {"mode", to_string(c.mode)},
        {"cassette_dir", c.cassette_dir},
        {"templates", c.templates},
        {"workers", c.workers},
        {"endpoint",
         {{"url", c.endpoint.url},
          {"path", c.endpoint.path},
          {"auth_header", c.endpoint.auth_header},
          {"api_key_env", c.endpoint.api_key_env},
          {"timeout_seconds", c.endpoint.timeout_seconds}}}};
}

inline PipelineConfig config_from_json(const nlohmann::json& j) {
    PipelineConfig c;
    c.model_id = j.value("model_id", c.model_id);
    c.temperature = j.value("temperature", c.temperature);
    c.allow_nonzero_temperature = j.value("allow_nonzero_temperature", false);
    if (j.contains("budget")) {
        const auto& b = j.at("budget");
        c.budget.max_input_tokens = b.value("max_input_tokens", c.budget.max_input_tokens);
        c.budget.max_output_tokens = b.value("max_output_tokens", c.budget.max_output_tokens);
        c.budget.instruction_tokens = b.value("instruction_tokens", c.budget.instruction_tokens);
        c.budget.per_record_output_tokens =
            b.value("per_record_output_tokens", c.budget.per_record_output_tokens);
    }
    if (j.contains("estimator")) {
        const auto& e = j.at("estimator");
        c.estimator.chars_per_token = e.value("chars_per_token", c.estimator.chars_per_token);
        c.estimator.safety_margin = e.value("safety_margin", c.estimator.safety_margin);
    }
    if (j.contains("retry")) {
        const auto& r = j.at("retry");
        c.retry.max_attempts = r.value("max_attempts", c.retry.max_attempts);
        c.retry.initial_backoff = std::chrono::milliseconds(
            r.value("initial_backoff_ms", c.retry.initial_backoff.count()));
        c.retry.backoff_multiplier = r.value("backoff_multiplier", c.retry.backoff_multiplier);
    }
    if (j.contains("rate")) {
        const auto& r = j.at("rate");
        c.rate.tokens_per_minute = r.value("tokens_per_minute", c.rate.tokens_per_minute);
        c.rate.requests_per_minute = r.value("requests_per_minute", c.rate.requests_per_minute);
    }
    if (j.contains("mode")) c.mode = adapter_mode_from_string(j.at("mode").get<std::string>());
    c.cassette_dir = j.value("cassette_dir", c.cassette_dir);
    if (j.contains("templates")) c.templates = j.at("templates").get<std::map<std::string, std::string>>();
    c.workers = j.value("workers", c.workers);
    if (j.contains("endpoint")) {
        const auto& e = j.at("endpoint");
        c.endpoint.url = e.value("url", c.endpoint.url);
        c.endpoint.path = e.value("path", c.endpoint.path);
        c.endpoint.auth_header = e.value("auth_header", c.endpoint.auth_header);
        c.endpoint.api_key_env = e.value("api_key_env", c.endpoint.api_key_env);
        c.endpoint.timeout_seconds = e.value("timeout_seconds", c.endpoint.timeout_seconds);
    }
    return c;
}

/// Returns human-readable diagnostics; empty means the config is valid.
inline std::vector<std::string> validate_config(const PipelineConfig& c) {
    std::vector<std::string> diags;
    if (c.temperature < 0.0 || c.temperature > 2.0)
        diags.push_back("temperature must be in [0,2]");
    if (c.temperature > 0.0 && !c.allow_nonzero_temperature)
        diags.push_back("temperature is pinned to 0 for reproducible data processing; "
                        "set allow_nonzero_temperature to override");
    if (c.budget.max_input_tokens <= 0) diags.push_back("max_input_tokens must be positive");
    if (c.budget.max_output_tokens <= 0) diags.push_back("max_output_tokens must be positive");
    if (c.budget.instruction_tokens < 0) diags.push_back("instruction_tokens must be nonnegative");
    if (c.budget.instruction_tokens >= c.budget.max_input_tokens)
        diags.push_back("instruction_tokens must be smaller than max_input_tokens");
    if (c.budget.per_record_output_tokens <= 0)
        diags.push_back("per_record_output_tokens must be positive");
    if (c.estimator.chars_per_token <= 0) diags.push_back("chars_per_token must be positive");
    if (c.estimator.safety_margin < 0 || c.estimator.safety_margin >= 1)
        diags.push_back("safety_margin must be in [0,1)");
    if (c.retry.max_attempts <= 0) diags.push_back("max_attempts must be positive");
    if (c.retry.backoff_multiplier < 1.0) diags.push_back("backoff_multiplier must be >= 1");
    if (c.rate.tokens_per_minute <= 0) diags.push_back("tokens_per_minute must be positive");
    if (c.rate.requests_per_minute <= 0) diags.push_back("requests_per_minute must be positive");
    if (c.workers <= 0) diags.push_back("workers must be positive");
    for (const auto& [name, path] : c.templates)
        if (!std::filesystem::exists(path))
            diags.push_back("template '" + name + "' not found at " + path);
    return diags;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
    nlohmann::json j = nlohmann::json::parse(read_file(path), nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw ConfigError("config is not valid JSON: " + path.string());
    return config_from_json(j);
}

enum class ChunkResultKind { Ok, MalformedOutput, RetriesExhausted, OutputBudgetExceeded };

inline std::string to_string(ChunkResultKind k) {
    switch (k) {
    case ChunkResultKind::Ok: return "ok";
    case ChunkResultKind::MalformedOutput: return "malformed-output";
    case ChunkResultKind::RetriesExhausted: return "retries-exhausted";
    default: return "output-budget-exceeded";
    }
}

struct ManifestEntry {
    std::string doc_id;
    std::size_t chunk_index = 0;
    std::string phase = "extract";  // or "translate"
    std::string cache_key;
    int attempts = 0;
    ChunkResultKind outcome = ChunkResultKind::Ok;
    std::string message;
};

struct RunManifest {
    std::string run_id;
    std::string task_name;
    std::string model_id;
    double temperature = 0.0;
    std::string template_hash;
    std::string config_hash;
    std::vector<ManifestEntry> entries;
    std::string started_at;
    std::string finished_at;
};

struct RecordEntry {
    std::string doc_id;
    std::size_t chunk_index = 0;
    std::size_t position = 0;  // within the chunk
    Record fields;
};

struct FailureEntry {
    std::string doc_id;
    std::size_t chunk_index = 0;
    ChunkResultKind outcome = ChunkResultKind::MalformedOutput;
    std::string message;
};

struct RunResult {
    std::string run_id;
    std::vector<RecordEntry> records;
    std::vector<FailureEntry> failures;

    /// Canonical serialization of the merged records (identical across
    /// deterministic replays of the same cassettes).
    nlohmann::json records_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : records) {
            nlohmann::json fields;
            for (const auto& [k, v] : r.fields) fields[k] = v ? nlohmann::json(*v) : nlohmann::json();
            arr.push_back({{"doc_id", r.doc_id},
                           {"chunk_index", r.chunk_index},
                           {"position", r.position},
                           {"fields", fields}});
        }
        return arr;
    }
};

/// Canonical merge: stable order by (doc_id, chunk index, in-chunk position).
/// No dedup — duplicates are an evaluation concern.
inline std::vector<RecordEntry> merge_chunk_outputs(std::vector<RecordEntry> records) {
    std::stable_sort(records.begin(), records.end(), [](const RecordEntry& a, const RecordEntry& b) {
        return std::tie(a.doc_id, a.chunk_index, a.position) <
               std::tie(b.doc_id, b.chunk_index, b.position);
    });
    return records;
}

/// Hook handed to task plugins for second-pass completions (e.g. translation).
/// Calls go through the same rate-limit / retry / cassette stack as the main
/// extraction call and are logged in the manifest.
using SecondPassCompleter = std::function<ModelResponse(const std::string& prompt)>;

/// A task plugin: schema, chunk boundary, prompt construction, and an
/// optional second pass over validated records. Must be stateless/reentrant.
class Task {
public:
    virtual ~Task() = default;
    virtual std::string name() const = 0;
    virtual TaskSchema schema() const = 0;
    virtual const PromptTemplate& prompt_template() const = 0;
    virtual Boundary boundary() const { return Boundary::BlankLine; }
    virtual Bindings chunk_bindings(const Chunk& chunk) const { return {{"data", chunk.text}}; }
    virtual std::vector<Record> second_pass(std::vector<Record> records, const SourceDocument&,
                                            const SecondPassCompleter&) const {
        return records;
    }
};

namespace pipeline_detail {

struct ChunkJob {
    const SourceDocument* doc;
    Chunk chunk;
};

struct ChunkResult {
    std::vector<RecordEntry> records;
    std::optional<FailureEntry> failure;
    std::vector<ManifestEntry> manifest_entries;
};

}  // namespace pipeline_detail

/// Runs the full loop over the corpus. Failed chunks become failure entries,
/// never silent drops; provider-level auth failures and replay misses are
/// corpus-level and propagate.
inline std::pair<RunResult, RunManifest> run_task(const std::vector<SourceDocument>& corpus,
                                                  const Task& task, CompletionAdapter& adapter,
                                                  const PipelineConfig& config,
                                                  const std::string& run_id,
                                                  const Sleeper& sleep = default_sleeper) {
    {
        auto diags = validate_config(config);
        if (!diags.empty()) throw ConfigError("invalid config: " + diags.front());
    }

    RunManifest manifest;
    manifest.run_id = run_id;
    manifest.task_name = task.name();
    manifest.model_id = config.model_id;
    manifest.temperature = config.temperature;
    manifest.template_hash = task.prompt_template().hash();
    manifest.config_hash = sha256_hex(to_json(config).dump());
    manifest.started_at = "";

    std::vector<pipeline_detail::ChunkJob> jobs;
    for (const auto& doc : corpus) {
        auto plan = plan_chunks(doc, config.budget, config.estimator, task.boundary());
        for (auto& chunk : plan.chunks) jobs.push_back({&doc, std::move(chunk)});
    }

    RateLimiter limiter(config.rate);
    const bool throttle = config.mode != AdapterMode::Replay;

    auto run_job = [&](const pipeline_detail::ChunkJob& job) {
        pipeline_detail::ChunkResult result;
        const auto& chunk = job.chunk;
        ManifestEntry entry;
        entry.doc_id = chunk.doc_id;
        entry.chunk_index = chunk.index;

        auto fail = [&](ChunkResultKind kind, const std::string& message) {
            entry.outcome = kind;
            entry.message = message;
            result.manifest_entries.push_back(entry);
            result.failure = FailureEntry{chunk.doc_id, chunk.index, kind, message};
        };

        try {
            check_output_budget(chunk, config.budget);
        } catch (const OutputBudgetExceeded& e) {
            fail(ChunkResultKind::OutputBudgetExceeded, e.what());
            return result;
        }

        ModelRequest request;
        request.model_id = config.model_id;
        request.temperature = config.temperature;
        request.max_output_tokens = config.budget.max_output_tokens;
        request.prompt = task.prompt_template().render(task.chunk_bindings(chunk));
        entry.cache_key = cache_key(request);

        auto throttled_complete = [&](const ModelRequest& req) {
            if (throttle) limiter.acquire(estimate_tokens(req.prompt, config.estimator), sleep);
            return complete_with_retry(adapter, req, config.retry, sleep);
        };

        try {
            CompletionOutcome outcome = throttled_complete(request);
            entry.attempts = outcome.attempts;
            if (outcome.response.stop_reason == StopReason::Length)
                throw Error("completion truncated at the output token limit");
            if (outcome.response.stop_reason == StopReason::Error)
                throw Error("provider reported an error stop reason");
            auto extracted = extract_json_value(outcome.response.text);
            auto records = validate_records(extracted.value, task.schema());

            SecondPassCompleter completer = [&](const std::string& prompt) {
                ModelRequest second = request;
                second.prompt = prompt;
                ManifestEntry tentry = entry;
                tentry.phase = "translate";
                tentry.cache_key = cache_key(second);
                auto out = throttled_complete(second);
                tentry.attempts = out.attempts;
                result.manifest_entries.push_back(tentry);
                return out.response;
            };
            records = task.second_pass(std::move(records), *job.doc, completer);

            for (std::size_t pos = 0; pos < records.size(); ++pos)
                result.records.push_back({chunk.doc_id, chunk.index, pos, std::move(records[pos])});
            entry.outcome = ChunkResultKind::Ok;
            result.manifest_entries.push_back(entry);
        } catch (const RetriesExhausted& e) {
            fail(ChunkResultKind::RetriesExhausted, e.what());
        } catch (const ProviderError&) {
            throw;  // corpus-level: auth errors and replay misses abort the run
        } catch (const Error& e) {
            fail(ChunkResultKind::MalformedOutput, e.what());
        }
        return result;
    };

    std::vector<pipeline_detail::ChunkResult> results(jobs.size());
    const int workers = std::max(1, std::min<int>(config.workers, static_cast<int>(jobs.size())));
    if (workers <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = run_job(jobs[i]);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= jobs.size()) return;
                    try {
                        results[i] = run_job(jobs[i]);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    RunResult run;
    run.run_id = run_id;
    for (auto& r : results) {
        for (auto& rec : r.records) run.records.push_back(std::move(rec));
        if (r.failure) run.failures.push_back(*r.failure);
        for (auto& e : r.manifest_entries) manifest.entries.push_back(std::move(e));
    }
    run.records = merge_chunk_outputs(std::move(run.records));
    std::stable_sort(run.failures.begin(), run.failures.end(),
                     [](const FailureEntry& a, const FailureEntry& b) {
                         return std::tie(a.doc_id, a.chunk_index) < std::tie(b.doc_id, b.chunk_index);
                     });
    std::stable_sort(manifest.entries.begin(), manifest.entries.end(),
                     [](const ManifestEntry& a, const ManifestEntry& b) {
                         return std::tie(a.doc_id, a.chunk_index, a.phase) <
                                std::tie(b.doc_id, b.chunk_index, b.phase);
                     });
    return {std::move(run), std::move(manifest)};
}

/// N independent executions with fresh run ids, in order.
inline std::vector<RunResult> run_repeated(const std::vector<SourceDocument>& corpus, const Task& task,
                                           CompletionAdapter& adapter, const PipelineConfig& config,
                                           int n, const std::string& run_id_prefix = "run",
                                           const Sleeper& sleep = default_sleeper) {
    if (n < 1) throw ConfigError("run count must be >= 1");
    std::vector<RunResult> out;
    for (int i = 1; i <= n; ++i) {
        auto [result, manifest] =
            run_task(corpus, task, adapter, config, run_id_prefix + "-" + std::to_string(i), sleep);
        out.push_back(std::move(result));
    }
    return out;
}

inline nlohmann::json to_json(const RunManifest& m) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : m.entries)
        entries.push_back({{"doc_id", e.doc_id},
                           {"chunk_index", e.chunk_index},
                           {"phase", e.phase},
                           {"cache_key", e.cache_key},
                           {"attempts", e.attempts},
                           {"outcome", to_string(e.outcome)},
                           {"message", e.message}});
    return {{"run_id", m.run_id},
            {"task", m.task_name},
            {"model_id", m.model_id},
            {"temperature", m.temperature},
            {"template_hash", m.template_hash},
            {"config_hash", m.config_hash},
            {"started_at", m.started_at},
            {"finished_at", m.finished_at},
            {"chunks", entries}};
}

inline nlohmann::json to_json(const RunResult& r) {
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : r.failures)
        failures.push_back({{"doc_id", f.doc_id},
                            {"chunk_index", f.chunk_index},
                            {"outcome", to_string(f.outcome)},
                            {"message", f.message}});
    return {{"run_id", r.run_id}, {"records", r.records_json()}, {"failures", failures}};
}

/// Writes result.json and manifest.json under <runs_root>/<run_id>/.
inline std::filesystem::path write_run(const std::filesystem::path& runs_root, const RunResult& result,
                                       const RunManifest& manifest) {
    auto dir = runs_root / result.run_id;
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "result.json");
        out << to_json(result).dump(2) << "\n";
    }
    {
        std::ofstream out(dir / "manifest.json");
        out << to_json(manifest).dump(2) << "\n";
    }
    return dir;
}

inline RunResult load_run_result(const std::filesystem::path& run_dir) {
    nlohmann::json j = nlohmann::json::parse(read_file(run_dir / "result.json"));
    RunResult r;
    r.run_id = j.at("run_id").get<std::string>();
    for (const auto& item : j.at("records")) {
        RecordEntry e;
        e.doc_id = item.at("doc_id").get<std::string>();
        e.chunk_index = item.at("chunk_index").get<std::size_t>();
        e.position = item.at("position").get<std::size_t>();
        for (const auto& [k, v] : item.at("fields").items())
            e.fields[k] = v.is_null() ? std::nullopt : std::optional<std::string>(v.get<std::string>());
        r.records.push_back(std::move(e));
    }
    for (const auto& item : j.at("failures")) {
        FailureEntry f;
        f.doc_id = item.at("doc_id").get<std::string>();
        f.chunk_index = item.at("chunk_index").get<std::size_t>();
        f.message = item.at("message").get<std::string>();
        r.failures.push_back(std::move(f));
    }
    return r;
}

}  // namespace genai
