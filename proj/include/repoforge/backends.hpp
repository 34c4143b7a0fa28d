#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace repoforge {

struct GenerationRequest {
    std::vector<std::pair<std::string, std::string>> messages;  // (role, text)
    double temperature = 0.7;
    int max_output_tokens = 8192;
    std::uint64_t seed = 0;
};

struct ScoreRequest {
    std::string context;
    std::string target;  // must be non-empty
};

struct ScoreResult {
    double total_logprob = 0.0;  // <= 0
    std::uint64_t token_count = 1;
    double ppl = 1.0;  // exp(-total_logprob / token_count)
};

ScoreResult make_score_result(double total_logprob, std::uint64_t token_count);

class GenerationBackend {
public:
    virtual ~GenerationBackend() = default;
    virtual std::string generate(const GenerationRequest& req) = 0;
};

class ScoringBackend {
public:
    virtual ~ScoringBackend() = default;
    virtual ScoreResult score(const ScoreRequest& req) = 0;
};

struct RetryPolicy {
    int attempts = 3;
    std::vector<double> backoff_seconds = {1.0, 4.0, 16.0};
    std::uint64_t jitter_seed = 0;
    // Injectable for tests; defaults to a real sleep.
    std::function<void(double)> sleep;
};

struct HttpBackendConfig {
    std::string base_url;   // e.g. http://host:port
    std::string api_key;
    std::string model;
    double timeout_seconds = 120.0;
    RetryPolicy retry;
};

/// OpenAI-compatible chat-completions client.
std::unique_ptr<GenerationBackend> make_http_generation_backend(HttpBackendConfig cfg);

/// Completions-with-logprobs client: scores the target tokens conditioned
/// on the context by echoing the concatenated prompt.
std::unique_ptr<ScoringBackend> make_http_scoring_backend(HttpBackendConfig cfg);

/// Reads REPOFORGE_GEN_URL / REPOFORGE_GEN_KEY / REPOFORGE_GEN_MODEL
/// (or the REPOFORGE_SCORE_* triple) into a config, env overriding cfg.
void apply_env(HttpBackendConfig& cfg, const std::string& env_prefix);

}  // namespace repoforge
