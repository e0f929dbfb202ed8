#pragma once

// Record/replay cassettes: one JSON file per request digest under
// cassettes/<first2hex>/<key>.json. Replay is a first-class adapter so that
// recorded runs stay reproducible after the live model is gone.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "genai/provider.hpp"

namespace genai {

class CassetteStore {
public:
    explicit CassetteStore(std::filesystem::path root) : root_(std::move(root)) {}

    const std::filesystem::path& root() const { return root_; }

    std::filesystem::path path_for(const std::string& key) const {
        return root_ / key.substr(0, 2) / (key + ".json");
    }

    std::optional<ModelResponse> load(const std::string& key) const {
        auto path = path_for(key);
        std::ifstream in(path);
        if (!in) return std::nullopt;
        nlohmann::json j = nlohmann::json::parse(in);
        const auto& r = j.at("response");
        ModelResponse resp;
        resp.text = r.at("text").get<std::string>();
        resp.input_tokens = r.at("input_tokens").get<long>();
        resp.output_tokens = r.at("output_tokens").get<long>();
        resp.stop_reason = stop_reason_from_string(r.at("stop_reason").get<std::string>());
        return resp;
    }

    void save(const ModelRequest& request, const ModelResponse& response) {
        std::string key = cache_key(request);
        auto path = path_for(key);
        std::lock_guard lock(write_mutex_);
        std::filesystem::create_directories(path.parent_path());
        nlohmann::json j = {
            {"request",
             {{"model_id", request.model_id},
              {"temperature", request.temperature},
              {"max_output_tokens", request.max_output_tokens},
              {"prompt", request.prompt}}},
            {"response",
             {{"text", response.text},
              {"input_tokens", response.input_tokens},
              {"output_tokens", response.output_tokens},
              {"stop_reason", to_string(response.stop_reason)}}},
            {"recorded_at", now_iso8601()}};
        std::ofstream out(path);
        out << j.dump(2) << "\n";
    }

    static std::string now_iso8601() {
        auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char buf[32];
        std::tm tm{};
        gmtime_r(&t, &tm);
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }

private:
    std::filesystem::path root_;
    std::mutex write_mutex_;  // concurrent reads are lock-free; recording is single-writer
};

/// Deterministic adapter: answers only from recorded fixtures, never falls
/// through to a live endpoint.
class ReplayAdapter : public CompletionAdapter {
public:
    explicit ReplayAdapter(std::shared_ptr<CassetteStore> store) : store_(std::move(store)) {}

    ModelResponse complete(const ModelRequest& request) override {
        std::string key = cache_key(request);
        if (auto resp = store_->load(key)) return *resp;
        throw ProviderError(ProviderErrorClass::ReplayMiss, "no cassette for key " + key);
    }

private:
    std::shared_ptr<CassetteStore> store_;
};

/// Pass-through adapter that records every (request, response) pair.
class RecordingAdapter : public CompletionAdapter {
public:
    RecordingAdapter(std::shared_ptr<CompletionAdapter> inner, std::shared_ptr<CassetteStore> store)
        : inner_(std::move(inner)), store_(std::move(store)) {}

    ModelResponse complete(const ModelRequest& request) override {
        ModelResponse resp = inner_->complete(request);
        store_->save(request, resp);
        return resp;
    }

private:
    std::shared_ptr<CompletionAdapter> inner_;
    std::shared_ptr<CassetteStore> store_;
};

}  // namespace genai
