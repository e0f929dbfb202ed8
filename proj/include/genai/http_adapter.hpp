#pragma once

// Live adapter for a messages-style HTTP JSON completion API.
// Request body: {model, max_tokens, temperature, messages:[{role:"user", content: prompt}]}.
// Response body: {content:[{type:"text", text}], usage:{input_tokens, output_tokens}, stop_reason}.

#include <cstdlib>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "genai/provider.hpp"

namespace genai {

class HttpAdapter : public CompletionAdapter {
public:
    explicit HttpAdapter(EndpointConfig config) : config_(std::move(config)) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        api_key_ = key ? key : "";
    }

    ModelResponse complete(const ModelRequest& request) override {
        nlohmann::json body = {
            {"model", request.model_id},
            {"max_tokens", request.max_output_tokens},
            {"temperature", request.temperature},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})}};

        httplib::Client client(config_.url);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        client.set_read_timeout(config_.timeout_seconds, 0);
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace(config_.auth_header, api_key_);

        auto res = client.Post(config_.path, headers, body.dump(), "application/json");
        if (!res)
            throw ProviderError(ProviderErrorClass::Timeout,
                                "no response from " + config_.url + ": " + httplib::to_string(res.error()));
        if (res->status == 401 || res->status == 403)
            throw ProviderError(ProviderErrorClass::AuthError, "HTTP " + std::to_string(res->status));
        if (res->status == 429)
            throw ProviderError(ProviderErrorClass::RateLimited, "HTTP 429");
        if (res->status == 408)
            throw ProviderError(ProviderErrorClass::Timeout, "HTTP 408");
        if (res->status >= 500)
            throw ProviderError(ProviderErrorClass::ServerError, "HTTP " + std::to_string(res->status));
        if (res->status != 200)
            throw ProviderError(ProviderErrorClass::ServerError,
                                "unexpected HTTP " + std::to_string(res->status));

        nlohmann::json j = nlohmann::json::parse(res->body, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded())
            throw ProviderError(ProviderErrorClass::ServerError, "response body is not JSON");
        return parse_response(j);
    }

    static ModelResponse parse_response(const nlohmann::json& j) {
        ModelResponse resp;
        try {
            for (const auto& block : j.at("content"))
                if (block.value("type", "text") == "text") resp.text += block.at("text").get<std::string>();
            resp.input_tokens = j.at("usage").at("input_tokens").get<long>();
            resp.output_tokens = j.at("usage").at("output_tokens").get<long>();
            std::string stop = j.value("stop_reason", "end_turn");
            if (stop == "end_turn" || stop == "stop_sequence" || stop == "complete")
                resp.stop_reason = StopReason::Complete;
            else if (stop == "max_tokens" || stop == "length")
                resp.stop_reason = StopReason::Length;
            else
                resp.stop_reason = StopReason::Error;
        } catch (const nlohmann::json::exception& e) {
            throw ProviderError(ProviderErrorClass::ServerError,
                                std::string("response missing required fields: ") + e.what());
        }
        return resp;
    }

private:
    EndpointConfig config_;
    std::string api_key_;
};

}  // namespace genai
