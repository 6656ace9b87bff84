#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "sca/rng.hpp"
#include "sca/util.hpp"

namespace sca {

struct GenerationRequest {
    std::string prompt;
    int max_tokens = 1024;
    double temperature = 1.0;
    std::map<int32_t, double> logit_bias;
    std::optional<uint64_t> sampling_seed;
};

inline void validate(const GenerationRequest& req) {
    if (req.max_tokens < 1) {
        throw ConfigError("max_tokens must be >= 1");
    }
    if (req.temperature < 0.0) {
        throw ConfigError("temperature must be non-negative");
    }
    for (const auto& [id, bias] : req.logit_bias) {
        if (!std::isfinite(bias)) {
            throw ConfigError("logit bias for token " + std::to_string(id) +
                              " is not finite");
        }
    }
}

enum class FinishReason { stop, length, error };

inline std::string_view finish_reason_name(FinishReason r) {
    switch (r) {
        case FinishReason::stop: return "stop";
        case FinishReason::length: return "length";
        case FinishReason::error: return "error";
    }
    return "error";
}

inline FinishReason finish_reason_from_name(std::string_view name) {
    if (name == "stop") return FinishReason::stop;
    if (name == "length") return FinishReason::length;
    return FinishReason::error;
}

struct ModelResponse {
    std::string text;
    int token_count = 0;
    FinishReason finish_reason = FinishReason::stop;
    int64_t latency_ms = 0;
    // Per-step full log-probability distributions (index = token id).
    // Backends that cannot provide them leave this empty.
    std::vector<std::vector<double>> token_logprobs;
};

enum class TargetKind { http, mock };

struct MockModelParams {
    std::filesystem::path corpus_path;
    std::filesystem::path canaries_path;  // optional
    int context_order = 3;
    double p_mem = 0.9;
    double special_boost = 2.0;
    uint64_t model_seed = 1;
};

struct TargetConfig {
    TargetKind kind = TargetKind::mock;
    std::string base_url;        // http: e.g. "http://localhost:8080"
    std::string model = "mock-memorizer";
    std::string auth_env;        // name of the env var holding the bearer token
    int requests_per_minute = 600;
    int max_in_flight = 4;
    int retries = 2;
    int backoff_ms = 200;
    bool supports_logit_bias = true;
    MockModelParams mock;
};

inline void validate(const TargetConfig& cfg) {
    if (cfg.requests_per_minute <= 0) {
        throw ConfigError("requests_per_minute must be > 0");
    }
    if (cfg.max_in_flight < 1) {
        throw ConfigError("max_in_flight must be >= 1");
    }
    if (cfg.kind == TargetKind::http && cfg.base_url.empty()) {
        throw ConfigError("http target requires base_url");
    }
}

// Backend-agnostic model endpoint. Implementations must be safe for
// concurrent send() up to the configured in-flight bound.
class Target {
public:
    virtual ~Target() = default;
    virtual ModelResponse send(const GenerationRequest& request) = 0;
    virtual const TargetConfig& config() const = 0;
    // Candidate ids for SCA-LB when the caller does not name them explicitly.
    virtual std::vector<int32_t> default_bias_ids() const = 0;
};

// One uniformly random bias per token id, deterministic in the seed.
inline std::map<int32_t, double> build_logit_bias(std::span<const int32_t> token_ids,
                                                  double low, double high,
                                                  uint64_t seed) {
    if (low > high) {
        throw ConfigError("bias range low must be <= high");
    }
    std::map<int32_t, double> bias;
    Rng rng(derive_seed(seed, "logit_bias"));
    for (const int32_t id : token_ids) {
        if (!bias.emplace(id, rng.uniform_real(low, high)).second) {
            throw ConfigError("duplicate token id in bias list: " + std::to_string(id));
        }
    }
    return bias;
}

// Sliding-window limiter: at most `limit` acquisitions in any 60 s window.
// Clock and sleep are injectable so the window invariant is testable without
// wall time.
class RateLimiter {
public:
    using NowFn = std::function<int64_t()>;           // milliseconds
    using SleepFn = std::function<void(int64_t)>;     // milliseconds

    explicit RateLimiter(int limit_per_minute, NowFn now = {}, SleepFn sleep = {})
        : limit_(limit_per_minute),
          now_(now ? std::move(now) : default_now),
          sleep_(sleep ? std::move(sleep) : default_sleep) {
        if (limit_ <= 0) {
            throw ConfigError("rate limit must be > 0");
        }
    }

    // Blocks until a slot is free, then records the dispatch.
    void acquire() {
        for (;;) {
            int64_t wait = 0;
            {
                std::lock_guard<std::mutex> lock(mu_);
                const int64_t now = now_();
                trim(now);
                if (static_cast<int>(window_.size()) < limit_) {
                    window_.push_back(now);
                    return;
                }
                wait = window_.front() + kWindowMs - now;
            }
            sleep_(std::max<int64_t>(wait, 1));
        }
    }

private:
    static constexpr int64_t kWindowMs = 60'000;

    static int64_t default_now() {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now().time_since_epoch())
            .count();
    }
    static void default_sleep(int64_t ms) {
        std::this_thread::sleep_for(std::chrono::milliseconds(ms));
    }

    void trim(int64_t now) {
        while (!window_.empty() && window_.front() <= now - kWindowMs) {
            window_.pop_front();
        }
    }

    int limit_;
    NowFn now_;
    SleepFn sleep_;
    std::mutex mu_;
    std::deque<int64_t> window_;
};

}  // namespace sca
