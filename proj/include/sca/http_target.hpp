#pragma once

#include <chrono>
#include <cstdlib>
#include <memory>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "sca/target.hpp"
#include "sca/util.hpp"

namespace sca {

// Adapter for chat-completions style HTTP services. One user message per
// request; bearer auth read from the environment variable named in the
// config. Transient failures (connect errors, 429, 5xx) are retried with
// exponential backoff; exhausted retries surface as finish_reason=error.
class HttpTarget : public Target {
public:
    explicit HttpTarget(TargetConfig config)
        : config_(std::move(config)), limiter_(config_.requests_per_minute) {
        validate(config_);
        if (!config_.auth_env.empty()) {
            const char* token = std::getenv(config_.auth_env.c_str());
            if (token == nullptr || *token == '\0') {
                throw ConfigError("auth environment variable not set: " +
                                  config_.auth_env);
            }
            auth_token_ = token;
        }
    }

    ModelResponse send(const GenerationRequest& request) override {
        validate(request);
        if (!request.logit_bias.empty() && !config_.supports_logit_bias) {
            throw ConfigError("target does not support logit bias");
        }
        nlohmann::json body;
        body["model"] = config_.model;
        body["messages"] = nlohmann::json::array(
            {{{"role", "user"}, {"content", request.prompt}}});
        body["max_tokens"] = request.max_tokens;
        body["temperature"] = request.temperature;
        if (!request.logit_bias.empty()) {
            nlohmann::json bias = nlohmann::json::object();
            for (const auto& [id, value] : request.logit_bias) {
                bias[std::to_string(id)] = value;
            }
            body["logit_bias"] = std::move(bias);
        }
        if (request.sampling_seed) {
            body["seed"] = *request.sampling_seed;
        }
        const std::string payload = body.dump();

        std::string last_error = "no attempt made";
        const auto start = std::chrono::steady_clock::now();
        for (int attempt = 0; attempt <= config_.retries; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(
                    config_.backoff_ms * (1LL << (attempt - 1))));
            }
            limiter_.acquire();
            httplib::Client client(config_.base_url);
            client.set_connection_timeout(30, 0);
            client.set_read_timeout(120, 0);
            httplib::Headers headers;
            if (!auth_token_.empty()) {
                headers.emplace("Authorization", "Bearer " + auth_token_);
            }
            const httplib::Result result =
                client.Post("/v1/chat/completions", headers, payload, "application/json");
            if (!result) {
                last_error = "connection failed: " + httplib::to_string(result.error());
                continue;
            }
            if (result->status == 429 || result->status >= 500) {
                last_error = "http status " + std::to_string(result->status);
                continue;
            }
            if (result->status != 200) {
                return error_response("http status " + std::to_string(result->status) +
                                          ": " + result->body,
                                      start);
            }
            return parse_response(result->body, start);
        }
        return error_response("retries exhausted: " + last_error, start);
    }

    const TargetConfig& config() const override { return config_; }

    // Without vocabulary access, SCA-LB defaults to the first 130 ids, the
    // control/byte block of byte-fallback tokenizers.
    std::vector<int32_t> default_bias_ids() const override {
        std::vector<int32_t> ids(130);
        for (int32_t i = 0; i < 130; ++i) {
            ids[i] = i;
        }
        return ids;
    }

private:
    static int64_t elapsed_ms(std::chrono::steady_clock::time_point start) {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - start)
            .count();
    }

    static ModelResponse error_response(std::string diagnostic,
                                        std::chrono::steady_clock::time_point start) {
        ModelResponse r;
        r.finish_reason = FinishReason::error;
        r.text = std::move(diagnostic);
        r.latency_ms = elapsed_ms(start);
        return r;
    }

    static ModelResponse parse_response(const std::string& body,
                                        std::chrono::steady_clock::time_point start) {
        const nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
        if (j.is_discarded()) {
            return error_response("unparseable response body", start);
        }
        ModelResponse r;
        try {
            const auto& choice = j.at("choices").at(0);
            r.text = choice.at("message").at("content").get<std::string>();
            const std::string reason = choice.value("finish_reason", "stop");
            if (reason == "stop") {
                r.finish_reason = FinishReason::stop;
            } else if (reason == "length") {
                r.finish_reason = FinishReason::length;
            } else {
                r.finish_reason = FinishReason::error;
            }
            if (j.contains("usage")) {
                r.token_count = j["usage"].value("completion_tokens", 0);
            }
        } catch (const nlohmann::json::exception& e) {
            return error_response(std::string("malformed response: ") + e.what(), start);
        }
        r.latency_ms = elapsed_ms(start);
        return r;
    }

    TargetConfig config_;
    std::string auth_token_;
    RateLimiter limiter_;
};

}  // namespace sca
