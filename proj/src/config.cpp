#include "repoforge/config.hpp"

#include <fstream>

#include "repoforge/errors.hpp"
#include "repoforge/mock_backends.hpp"

namespace repoforge {

using nlohmann::ordered_json;

namespace {

template <typename T>
T get_or(const ordered_json& j, const std::string& key, T fallback, const std::string& path) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("invalid value at " + path + "." + key);
    }
}

BackendSlotConfig parse_backend(const ordered_json& j, const std::string& path,
                                const std::string& fallback_kind) {
    BackendSlotConfig cfg;
    cfg.kind = get_or<std::string>(j, "kind", fallback_kind, path);
    cfg.http.base_url = get_or<std::string>(j, "url", "", path);
    cfg.http.api_key = get_or<std::string>(j, "api_key", "", path);
    cfg.http.model = get_or<std::string>(j, "model", "", path);
    cfg.uniform_logprob = get_or<double>(j, "logprob", cfg.uniform_logprob, path);
    cfg.hallucinate = get_or<bool>(j, "hallucinate", cfg.hallucinate, path);
    return cfg;
}

}  // namespace

Config config_from_json(const ordered_json& j) {
    Config cfg;
    if (j.contains("repos")) {
        cfg.repos_root = get_or<std::string>(j.at("repos"), "root", "", "repos");
    }
    cfg.out_dir = get_or<std::string>(j, "out_dir", "out", "");
    cfg.seed = get_or<std::uint64_t>(j, "seed", 0, "");
    cfg.jobs = get_or<int>(j, "jobs", 1, "");
    if (cfg.jobs < 1) throw ConfigError("invalid value at jobs: must be >= 1");
    cfg.optimize_cot = get_or<bool>(j, "optimize_cot", true, "");

    if (j.contains("filter")) {
        const auto& f = j.at("filter");
        cfg.filter.min_files = get_or<int>(f, "min_files", cfg.filter.min_files, "filter");
        cfg.filter.max_files = get_or<int>(f, "max_files", cfg.filter.max_files, "filter");
        cfg.filter.min_total_bytes =
            get_or<std::uint64_t>(f, "min_total_bytes", cfg.filter.min_total_bytes, "filter");
        cfg.filter.max_total_bytes =
            get_or<std::uint64_t>(f, "max_total_bytes", cfg.filter.max_total_bytes, "filter");
        if (f.contains("include_extensions")) {
            cfg.filter.include_extensions.clear();
            for (const auto& e : f.at("include_extensions")) {
                cfg.filter.include_extensions.insert(e.get<std::string>());
            }
        }
        if (cfg.filter.min_files > cfg.filter.max_files) {
            throw ConfigError("invalid value at filter.min_files: exceeds filter.max_files");
        }
        if (cfg.filter.min_total_bytes > cfg.filter.max_total_bytes) {
            throw ConfigError(
                "invalid value at filter.min_total_bytes: exceeds filter.max_total_bytes");
        }
    }

    if (j.contains("simulate")) {
        const auto& s = j.at("simulate");
        cfg.simulate.max_prompt_retries =
            get_or<int>(s, "max_prompt_retries", cfg.simulate.max_prompt_retries, "simulate");
        cfg.simulate.temperature =
            get_or<double>(s, "temperature", cfg.simulate.temperature, "simulate");
        cfg.simulate.max_read_calls_per_file = get_or<int>(
            s, "max_read_calls_per_file", cfg.simulate.max_read_calls_per_file, "simulate");
        if (cfg.simulate.max_prompt_retries < 1) {
            throw ConfigError("invalid value at simulate.max_prompt_retries: must be >= 1");
        }
    }

    if (j.contains("search")) {
        const auto& s = j.at("search");
        cfg.search.k = get_or<int>(s, "k", cfg.search.k, "search");
        cfg.search.rounds = get_or<int>(s, "rounds", cfg.search.rounds, "search");
        if (cfg.search.k < 1) throw ConfigError("invalid value at search.k: must be >= 1");
        if (cfg.search.rounds < 1) {
            throw ConfigError("invalid value at search.rounds: must be >= 1");
        }
    }

    if (j.contains("mixture")) {
        const auto& m = j.at("mixture");
        cfg.mixture.total_token_budget =
            get_or<std::uint64_t>(m, "total_token_budget", 0, "mixture");
        if (m.contains("sources")) {
            for (const auto& s : m.at("sources")) {
                MixtureSource src;
                src.name = get_or<std::string>(s, "name", "", "mixture.sources[]");
                src.path = get_or<std::string>(s, "path", "", "mixture.sources[]");
                src.share = get_or<double>(s, "share", 0.0, "mixture.sources[]");
                cfg.mixture.sources.push_back(std::move(src));
            }
        }
    }

    if (j.contains("backends")) {
        const auto& b = j.at("backends");
        if (b.contains("gen")) cfg.gen_backend = parse_backend(b.at("gen"), "backends.gen", "mock");
        if (b.contains("score")) {
            cfg.score_backend = parse_backend(b.at("score"), "backends.score", "ngram");
        }
        cfg.max_inflight = get_or<int>(b, "max_inflight", cfg.max_inflight, "backends");
    }

    cfg.simulate.seed = cfg.seed;
    cfg.search.seed = cfg.seed;
    cfg.mixture.seed = cfg.seed;
    return cfg;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    auto j = ordered_json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + path.string());
    return config_from_json(j);
}

std::unique_ptr<GenerationBackend> make_generation_backend(const BackendSlotConfig& cfg,
                                                           std::uint64_t seed) {
    if (cfg.kind == "mock") {
        SimulatedDeveloperOptions opts;
        opts.hallucinate = cfg.hallucinate;
        return make_simulated_developer_backend(opts);
    }
    if (cfg.kind == "http") {
        HttpBackendConfig http = cfg.http;
        http.retry.jitter_seed = seed;
        apply_env(http, "REPOFORGE_GEN");
        if (http.base_url.empty()) {
            throw ConfigError("invalid value at backends.gen.url: required for kind=http");
        }
        return make_http_generation_backend(std::move(http));
    }
    throw ConfigError("invalid value at backends.gen.kind: " + cfg.kind);
}

std::unique_ptr<ScoringBackend> make_scoring_backend(const BackendSlotConfig& cfg) {
    if (cfg.kind == "ngram") return make_char_ngram_scorer();
    if (cfg.kind == "uniform") return make_uniform_scorer(cfg.uniform_logprob);
    if (cfg.kind == "overlap") return make_identifier_overlap_scorer();
    if (cfg.kind == "http") {
        HttpBackendConfig http = cfg.http;
        apply_env(http, "REPOFORGE_SCORE");
        if (http.base_url.empty()) {
            throw ConfigError("invalid value at backends.score.url: required for kind=http");
        }
        return make_http_scoring_backend(std::move(http));
    }
    throw ConfigError("invalid value at backends.score.kind: " + cfg.kind);
}

}  // namespace repoforge
