#include <chrono>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include "repoforge/backends.hpp"
#include "repoforge/errors.hpp"

#include "httplib.h"
#include "json.hpp"

namespace repoforge {

ScoreResult make_score_result(double total_logprob, std::uint64_t token_count) {
    ScoreResult r;
    r.total_logprob = total_logprob;
    r.token_count = token_count == 0 ? 1 : token_count;
    r.ppl = std::exp(-r.total_logprob / static_cast<double>(r.token_count));
    return r;
}

void apply_env(HttpBackendConfig& cfg, const std::string& env_prefix) {
    auto get = [&](const char* suffix) -> const char* {
        return std::getenv((env_prefix + suffix).c_str());
    };
    if (const char* v = get("_URL")) cfg.base_url = v;
    if (const char* v = get("_KEY")) cfg.api_key = v;
    if (const char* v = get("_MODEL")) cfg.model = v;
}

namespace {

using nlohmann::json;

std::string with_retries(const HttpBackendConfig& cfg, const std::string& path,
                         const std::string& body) {
    auto sleep_fn = cfg.retry.sleep;
    if (!sleep_fn) {
        sleep_fn = [](double s) {
            std::this_thread::sleep_for(std::chrono::duration<double>(s));
        };
    }
    std::mt19937_64 rng(cfg.retry.jitter_seed);
    std::uniform_real_distribution<double> jitter(0.0, 0.5);

    std::string last_error;
    for (int attempt = 0; attempt < cfg.retry.attempts; ++attempt) {
        if (attempt > 0) {
            double base = attempt - 1 < static_cast<int>(cfg.retry.backoff_seconds.size())
                              ? cfg.retry.backoff_seconds[attempt - 1]
                              : cfg.retry.backoff_seconds.back();
            sleep_fn(base + jitter(rng));
        }
        httplib::Client client(cfg.base_url);
        client.set_read_timeout(std::chrono::duration<double>(cfg.timeout_seconds));
        client.set_connection_timeout(std::chrono::duration<double>(cfg.timeout_seconds));
        httplib::Headers headers;
        if (!cfg.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg.api_key);

        auto res = client.Post(path, headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;  // retryable
        }
        if (res->status == 401 || res->status == 403) {
            throw BackendError("authentication failed (" + std::to_string(res->status) + ")");
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "status " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw BackendError("unexpected status " + std::to_string(res->status) + ": " +
                               res->body);
        }
        return res->body;
    }
    throw BackendError("request failed after " + std::to_string(cfg.retry.attempts) +
                           " attempts: " + last_error,
                       /*retryable=*/true);
}

class HttpGenerationBackend : public GenerationBackend {
public:
    explicit HttpGenerationBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {}

    std::string generate(const GenerationRequest& req) override {
        json messages = json::array();
        for (const auto& [role, text] : req.messages) {
            messages.push_back({{"role", role}, {"content", text}});
        }
        json body = {{"model", cfg_.model},
                     {"messages", messages},
                     {"temperature", req.temperature},
                     {"max_tokens", req.max_output_tokens},
                     {"seed", req.seed}};
        auto response = with_retries(cfg_, "/v1/chat/completions", body.dump());
        auto j = json::parse(response);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    }

private:
    HttpBackendConfig cfg_;
};

class HttpScoringBackend : public ScoringBackend {
public:
    explicit HttpScoringBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {}

    ScoreResult score(const ScoreRequest& req) override {
        if (req.target.empty()) throw BackendError("score target must be non-empty");
        json body = {{"model", cfg_.model},
                     {"prompt", req.context + req.target},
                     {"max_tokens", 0},
                     {"echo", true},
                     {"logprobs", 0}};
        auto response = with_retries(cfg_, "/v1/completions", body.dump());
        auto j = json::parse(response);
        const auto& lp = j.at("choices").at(0).at("logprobs");
        const auto& offsets = lp.at("text_offset");
        const auto& logprobs = lp.at("token_logprobs");

        // Sum logprobs for tokens whose text begins inside the target span.
        const auto boundary = req.context.size();
        double total = 0.0;
        std::uint64_t count = 0;
        for (std::size_t i = 0; i < offsets.size(); ++i) {
            if (offsets[i].get<std::size_t>() < boundary) continue;
            if (logprobs[i].is_null()) continue;  // first token has no logprob
            total += logprobs[i].get<double>();
            ++count;
        }
        if (count == 0) throw BackendError("no scored tokens in target span");
        return make_score_result(total, count);
    }

private:
    HttpBackendConfig cfg_;
};

}  // namespace

std::unique_ptr<GenerationBackend> make_http_generation_backend(HttpBackendConfig cfg) {
    return std::make_unique<HttpGenerationBackend>(std::move(cfg));
}

std::unique_ptr<ScoringBackend> make_http_scoring_backend(HttpBackendConfig cfg) {
    return std::make_unique<HttpScoringBackend>(std::move(cfg));
}

}  // namespace repoforge
