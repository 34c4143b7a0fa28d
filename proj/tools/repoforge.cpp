#include <filesystem>
#include <fstream>
#include <iostream>

#include "repoforge/config.hpp"
#include "repoforge/cot_search.hpp"
#include "repoforge/errors.hpp"
#include "repoforge/pipeline.hpp"
#include "repoforge/static_analysis.hpp"

#include "CLI11.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace repoforge;

namespace {

std::ofstream g_log_file;
std::ostream* g_log = &std::cerr;

void log_json(const ordered_json& j) { (*g_log) << j.dump() << "\n"; }

Config load_or_default(const std::string& config_path) {
    if (config_path.empty()) return Config{};
    return load_config(config_path);
}

int cmd_analyze(const std::string& root, const std::string& config_path,
                const std::string& out_path) {
    Config cfg = load_or_default(config_path);
    std::ostream* out = &std::cout;
    std::ofstream out_file;
    if (!out_path.empty()) {
        out_file.open(out_path, std::ios::binary);
        if (!out_file) throw IoError("cannot open " + out_path);
        out = &out_file;
    }
    int accepted = 0;
    for (const auto& repo_root : discover_repos(root)) {
        std::vector<ScanWarning> warnings;
        auto snap = scan_repository(repo_root, cfg.filter, &warnings);
        for (const auto& w : warnings) {
            log_json({{"repo_id", snap.repo_id},
                      {"kind", "scan_warning"},
                      {"path", w.path},
                      {"reason", w.reason}});
        }
        auto decision = filter_snapshot(snap, cfg.filter);
        if (!decision.accepted) {
            log_json({{"repo_id", snap.repo_id},
                      {"kind", "filter_reject"},
                      {"reason", decision.reason}});
            continue;
        }
        std::vector<AnalysisWarning> analysis_warnings;
        auto analysis = analyze_repo(snap, &analysis_warnings);
        for (const auto& w : analysis_warnings) {
            log_json({{"repo_id", snap.repo_id},
                      {"kind", "analysis_warning"},
                      {"path", w.path},
                      {"reason", w.reason}});
        }
        (*out) << analysis_to_json(analysis).dump() << "\n";
        ++accepted;
    }
    return accepted > 0 ? 0 : 1;
}

int cmd_simulate(const std::string& analysis_path, const std::string& backend_name,
                 std::uint64_t seed, const std::string& out_path,
                 const std::string& config_path) {
    Config cfg = load_or_default(config_path);
    if (!backend_name.empty()) cfg.gen_backend.kind = backend_name;
    cfg.seed = seed;
    cfg.simulate.seed = seed;
    auto backend = make_generation_backend(cfg.gen_backend, seed);

    std::ifstream in(analysis_path, std::ios::binary);
    if (!in) throw IoError("cannot open " + analysis_path);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot open " + out_path);

    int ok = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto analysis = analysis_from_json(ordered_json::parse(line));
        try {
            auto snap = scan_repository(analysis.root, cfg.filter);
            snap.repo_id = analysis.repo_id;
            SimulationConfig sim = cfg.simulate;
            sim.seed = seed ^ std::hash<std::string>{}(analysis.repo_id);
            auto traj = synthesize_repo_trajectory(snap, analysis, *backend, sim);
            out << trajectory_to_json(traj).dump() << "\n";
            ++ok;
        } catch (const std::exception& e) {
            log_json({{"repo_id", analysis.repo_id},
                      {"kind", "simulation_failure"},
                      {"reason", e.what()}});
        }
    }
    return ok > 0 ? 0 : 1;
}

int cmd_optimize(const std::string& in_path, const std::string& out_path,
                 const std::string& trace_path, int k, int rounds, std::uint64_t seed,
                 const std::string& gen_name, const std::string& score_name,
                 const std::string& config_path) {
    Config cfg = load_or_default(config_path);
    if (!gen_name.empty()) cfg.gen_backend.kind = gen_name;
    if (!score_name.empty()) cfg.score_backend.kind = score_name;
    cfg.search.k = k;
    cfg.search.rounds = rounds;
    cfg.search.seed = seed;

    auto gen = make_generation_backend(cfg.gen_backend, seed);
    auto scorer = make_scoring_backend(cfg.score_backend);

    auto trajectories = read_trajectories(in_path);
    std::ofstream trace_out;
    if (!trace_path.empty()) trace_out.open(trace_path, std::ios::binary);
    std::vector<Trajectory> optimized;
    for (const auto& t : trajectories) {
        auto [opt, trace] = search_optimize(t, *gen, *scorer, cfg.search);
        if (trace_out.is_open()) {
            for (const auto& e : trace) trace_out << trace_entry_to_json(e).dump() << "\n";
        }
        optimized.push_back(std::move(opt));
    }
    write_trajectories(optimized, out_path);
    return 0;
}

int cmd_flatten(const std::string& in_path, const std::string& out_path) {
    auto trajectories = read_trajectories(in_path);
    std::vector<FlattenedDocument> docs;
    for (const auto& t : trajectories) docs.push_back(flatten(t));
    emit_jsonl(docs, out_path);
    return 0;
}

int cmd_mix(const std::string& config_path, const std::string& out_path,
            const std::string& manifest_path, std::uint64_t seed) {
    Config cfg = load_config(config_path);
    cfg.mixture.seed = seed;
    auto [mixed, manifest] = mix_corpus(cfg.mixture);
    emit_jsonl(mixed, out_path);
    if (!manifest_path.empty()) {
        std::ofstream(manifest_path, std::ios::binary) << manifest.to_json().dump(2) << "\n";
    } else {
        std::cout << manifest.to_json().dump(2) << "\n";
    }
    return 0;
}

int cmd_stats(const std::string& in_path, const std::string& out_path) {
    auto dist = corpus_stats(in_path);
    if (out_path.empty()) {
        std::cout << dist.to_json().dump(2) << "\n";
    } else {
        std::ofstream(out_path, std::ios::binary) << dist.to_json().dump(2) << "\n";
    }
    return 0;
}

int cmd_run(const std::string& config_path, std::uint64_t seed, bool seed_set, int jobs) {
    Config cfg = load_config(config_path);
    if (seed_set) {
        cfg.seed = seed;
        cfg.simulate.seed = seed;
        cfg.search.seed = seed;
        cfg.mixture.seed = seed;
    }
    if (jobs > 0) cfg.jobs = jobs;
    auto record = run_pipeline(cfg);
    for (const auto& r : record.repos) {
        log_json({{"repo_id", r.repo_id},
                  {"status", r.status},
                  {"stage", r.stage},
                  {"detail", r.detail}});
    }
    std::cout << record.to_json().dump(2) << "\n";
    return record.ok_count() > 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"repoforge: synthesize agentic development trajectories from repositories"};
    app.require_subcommand(1);

    std::string config_path, log_path;
    std::uint64_t seed = 0;
    int jobs = 0;
    app.add_option("--config", config_path, "Structured JSON config file")->configurable(false);
    auto* seed_opt = app.add_option("--seed", seed, "Seed for all seeded stages");
    app.add_option("--jobs", jobs, "Worker cap for parallel stages");
    app.add_option("--log", log_path, "Write line-delimited JSON logs here instead of stderr");

    auto* analyze = app.add_subcommand("analyze", "Scan, filter and statically analyze repos");
    std::string root, out_path;
    analyze->add_option("--root", root, "Directory of repositories")->required();
    analyze->add_option("--out", out_path, "Analysis JSONL output (default stdout)");

    auto* simulate = app.add_subcommand("simulate", "Simulate agent trajectories");
    std::string analysis_path, backend_name, traj_out;
    simulate->add_option("--analysis", analysis_path, "Analysis JSONL")->required();
    simulate->add_option("--backend", backend_name, "Generation backend name");
    simulate->add_option("--out", traj_out, "Trajectory JSONL output")->required();

    auto* optimize = app.add_subcommand("optimize", "Perplexity-guided CoT search");
    std::string opt_in, opt_out, trace_path, gen_name, score_name;
    int k = 2, rounds = 3;
    optimize->add_option("--in", opt_in)->required();
    optimize->add_option("--out", opt_out)->required();
    optimize->add_option("--trace", trace_path, "Search trace JSONL");
    optimize->add_option("--k", k, "Candidates per CoT step");
    optimize->add_option("--rounds", rounds, "Search rounds");
    optimize->add_option("--gen-backend", gen_name);
    optimize->add_option("--score-backend", score_name);

    auto* flatten_cmd = app.add_subcommand("flatten", "Flatten trajectories into documents");
    std::string flat_in, flat_out;
    flatten_cmd->add_option("--in", flat_in)->required();
    flatten_cmd->add_option("--out", flat_out)->required();

    auto* mix = app.add_subcommand("mix", "Compose the corpus mixture");
    std::string mix_out, manifest_path;
    mix->add_option("--out", mix_out)->required();
    mix->add_option("--manifest", manifest_path);

    auto* stats = app.add_subcommand("stats", "Token distribution of a corpus");
    std::string stats_in, stats_out;
    stats->add_option("--in", stats_in)->required();
    stats->add_option("--out", stats_out);

    auto* run = app.add_subcommand("run", "Full pipeline end to end");

    // Let --config/--seed/--jobs/--log appear after the subcommand too.
    for (auto* sub : {analyze, simulate, optimize, flatten_cmd, mix, stats, run}) {
        sub->fallthrough();
    }

    CLI11_PARSE(app, argc, argv);

    if (!log_path.empty()) {
        g_log_file.open(log_path, std::ios::binary);
        if (g_log_file) g_log = &g_log_file;
    }

    try {
        if (*analyze) return cmd_analyze(root, config_path, out_path);
        if (*simulate) return cmd_simulate(analysis_path, backend_name, seed, traj_out, config_path);
        if (*optimize) {
            return cmd_optimize(opt_in, opt_out, trace_path, k, rounds, seed, gen_name,
                                score_name, config_path);
        }
        if (*flatten_cmd) return cmd_flatten(flat_in, flat_out);
        if (*mix) return cmd_mix(config_path, mix_out, manifest_path, seed);
        if (*stats) return cmd_stats(stats_in, stats_out);
        if (*run) return cmd_run(config_path, seed, seed_opt->count() > 0, jobs);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
