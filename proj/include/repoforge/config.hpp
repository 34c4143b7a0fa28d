#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "repoforge/backends.hpp"
#include "repoforge/corpus.hpp"
#include "repoforge/cot_search.hpp"
#include "repoforge/repo_ingest.hpp"
#include "repoforge/simulation.hpp"

#include "json.hpp"

namespace repoforge {

struct BackendSlotConfig {
    std::string kind;  // gen: "mock" | "scripted-file" | "http"; score: "ngram" | "uniform" | "overlap" | "http"
    HttpBackendConfig http;
    double uniform_logprob = -0.6931471805599453;  // -ln 2
    bool hallucinate = true;
};

struct Config {
    std::filesystem::path repos_root;
    std::filesystem::path out_dir;
    FilterConfig filter;
    SimulationConfig simulate;
    SearchConfig search;
    MixtureSpec mixture;
    BackendSlotConfig gen_backend{.kind = "mock"};
    BackendSlotConfig score_backend{.kind = "ngram"};
    int max_inflight = 4;
    std::uint64_t seed = 0;
    int jobs = 1;
    bool optimize_cot = true;
};

/// Parse and validate a config file. Throws ConfigError whose message
/// names the offending key path.
Config load_config(const std::filesystem::path& path);
Config config_from_json(const nlohmann::ordered_json& j);

std::unique_ptr<GenerationBackend> make_generation_backend(const BackendSlotConfig& cfg,
                                                           std::uint64_t seed);
std::unique_ptr<ScoringBackend> make_scoring_backend(const BackendSlotConfig& cfg);

}  // namespace repoforge
