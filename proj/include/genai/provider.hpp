#pragma once

// Provider-neutral completion contract: request/response types, the adapter
// interface, request digests, retry with backoff, and a rolling-window token
// and request rate limiter.

#include <chrono>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "genai/digest.hpp"
#include "genai/error.hpp"

namespace genai {

struct ModelRequest {
    std::string model_id;
    double temperature = 0.0;  // in [0,2]; the pipeline refuses >0 without an override
    long max_output_tokens = 1;
    std::string prompt;
};

enum class StopReason { Complete, Length, Error };

inline std::string to_string(StopReason r) {
    switch (r) {
    case StopReason::Complete: return "complete";
    case StopReason::Length: return "length";
    default: return "error";
    }
}

inline StopReason stop_reason_from_string(const std::string& s) {
    if (s == "complete") return StopReason::Complete;
    if (s == "length") return StopReason::Length;
    return StopReason::Error;
}

struct ModelResponse {
    std::string text;
    long input_tokens = 0;
    long output_tokens = 0;
    StopReason stop_reason = StopReason::Complete;
};

enum class ProviderErrorClass { Timeout, RateLimited, ServerError, AuthError, ReplayMiss };

inline std::string to_string(ProviderErrorClass c) {
    switch (c) {
    case ProviderErrorClass::Timeout: return "timeout";
    case ProviderErrorClass::RateLimited: return "rate-limited";
    case ProviderErrorClass::ServerError: return "server-error";
    case ProviderErrorClass::AuthError: return "auth-error";
    default: return "replay-miss";
    }
}

struct ProviderError : Error {
    ProviderError(ProviderErrorClass kind, const std::string& what)
        : Error(to_string(kind) + ": " + what), kind(kind) {}
    ProviderErrorClass kind;
};

struct EndpointConfig {
    std::string url = "http://localhost:8080";  // scheme + host[:port]
    std::string path = "/v1/messages";
    std::string auth_header = "x-api-key";
    std::string api_key_env = "GENAI_API_KEY";
    int timeout_seconds = 120;
};

/// The completion interface implemented by live, replay and scripted adapters.
/// Must be safe to call from multiple workers concurrently.
class CompletionAdapter {
public:
    virtual ~CompletionAdapter() = default;
    virtual ModelResponse complete(const ModelRequest& request) = 0;
};

/// Collision-resistant digest over the request fields, lowercase hex.
inline std::string cache_key(const ModelRequest& request) {
    nlohmann::json canonical = {{"model_id", request.model_id},
                                {"temperature", request.temperature},
                                {"max_output_tokens", request.max_output_tokens},
                                {"prompt", request.prompt}};
    return sha256_hex(canonical.dump());
}

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds initial_backoff{1000};
    double backoff_multiplier = 2.0;  // >= 1, so the backoff sequence is nondecreasing
    std::set<ProviderErrorClass> retryable = {ProviderErrorClass::Timeout,
                                              ProviderErrorClass::RateLimited,
                                              ProviderErrorClass::ServerError};
};

struct RetriesExhausted : Error {
    RetriesExhausted(ProviderErrorClass last, int attempts)
        : Error("retries exhausted after " + std::to_string(attempts) +
                " attempts; last error: " + to_string(last)),
          last_error(last), attempts(attempts) {}
    ProviderErrorClass last_error;
    int attempts;
};

struct CompletionOutcome {
    ModelResponse response;
    int attempts = 0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline void default_sleeper(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

/// Calls the adapter up to max_attempts times, sleeping the backoff between
/// attempts. Non-retryable errors propagate immediately.
inline CompletionOutcome complete_with_retry(CompletionAdapter& adapter, const ModelRequest& request,
                                             const RetryPolicy& policy,
                                             const Sleeper& sleep = default_sleeper) {
    auto backoff = policy.initial_backoff;
    for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
        try {
            return {adapter.complete(request), attempt};
        } catch (const ProviderError& e) {
            if (!policy.retryable.count(e.kind)) throw;
            if (attempt == policy.max_attempts) throw RetriesExhausted(e.kind, attempt);
            sleep(backoff);
            backoff = std::chrono::milliseconds(
                static_cast<long long>(backoff.count() * policy.backoff_multiplier));
        }
    }
    throw RetriesExhausted(ProviderErrorClass::ServerError, policy.max_attempts);  // unreachable
}

struct RateBudget {
    long tokens_per_minute = 0;
    long requests_per_minute = 0;
};

struct Unadmittable : Error {
    Unadmittable(long tokens, long budget)
        : Error("request of " + std::to_string(tokens) + " tokens exceeds the whole per-minute budget of " +
                std::to_string(budget)) {}
};

struct Admission {
    bool admitted = false;
    std::chrono::milliseconds wait{0};  // minimal wait restoring feasibility
};

/// Sliding 60-second window limiter over both tokens and request count.
/// Internally synchronized; one instance is shared by all workers.
class RateLimiter {
public:
    using TimePoint = std::chrono::steady_clock::time_point;

    explicit RateLimiter(RateBudget budget) : budget_(budget) {}

    /// Admits and records the request if both window budgets allow it now;
    /// otherwise returns the minimal wait after which admission is feasible.
    Admission admit(long request_tokens, TimePoint now) {
        if (request_tokens > budget_.tokens_per_minute)
            throw Unadmittable(request_tokens, budget_.tokens_per_minute);
        std::lock_guard lock(mutex_);
        evict(now);
        long tokens_in_window = window_tokens_;
        long count_in_window = static_cast<long>(window_.size());
        if (tokens_in_window + request_tokens <= budget_.tokens_per_minute &&
            count_in_window + 1 <= budget_.requests_per_minute) {
            window_.push_back({now, request_tokens});
            window_tokens_ += request_tokens;
            return {true, std::chrono::milliseconds(0)};
        }
        // Walk expiries until both constraints would be satisfied.
        long tokens = tokens_in_window;
        long count = count_in_window;
        for (const auto& entry : window_) {
            tokens -= entry.tokens;
            count -= 1;
            if (tokens + request_tokens <= budget_.tokens_per_minute &&
                count + 1 <= budget_.requests_per_minute) {
                auto ready = entry.when + kWindow;
                auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(ready - now);
                if (wait.count() < 1) wait = std::chrono::milliseconds(1);
                return {false, wait};
            }
        }
        return {false, kWindowMs};  // only reachable with a zero request budget
    }

    /// Blocking convenience: waits (via the sleeper) until admitted.
    void acquire(long request_tokens, const Sleeper& sleep = default_sleeper) {
        for (;;) {
            auto result = admit(request_tokens, std::chrono::steady_clock::now());
            if (result.admitted) return;
            sleep(result.wait);
        }
    }

private:
    static constexpr auto kWindow = std::chrono::seconds(60);
    static constexpr auto kWindowMs = std::chrono::milliseconds(60000);

    struct Entry {
        TimePoint when;
        long tokens;
    };

    void evict(TimePoint now) {
        while (!window_.empty() && window_.front().when + kWindow <= now) {
            window_tokens_ -= window_.front().tokens;
            window_.pop_front();
        }
    }

    RateBudget budget_;
    std::deque<Entry> window_;
    long window_tokens_ = 0;
    std::mutex mutex_;
};

}  // namespace genai
