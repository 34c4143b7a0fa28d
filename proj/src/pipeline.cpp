#include "repoforge/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <random>
#include <thread>

#include "repoforge/cot_search.hpp"
#include "repoforge/errors.hpp"
#include "repoforge/static_analysis.hpp"

namespace fs = std::filesystem;

namespace repoforge {

using nlohmann::ordered_json;

int PipelineRunRecord::ok_count() const {
    int n = 0;
    for (const auto& r : repos) {
        if (r.status == "ok") ++n;
    }
    return n;
}

ordered_json PipelineRunRecord::to_json(bool include_timings) const {
    ordered_json j;
    auto list = ordered_json::array();
    for (const auto& r : repos) {
        ordered_json e;
        e["repo_id"] = r.repo_id;
        e["status"] = r.status;
        e["stage"] = r.stage;
        e["detail"] = r.detail;
        if (include_timings) e["seconds"] = r.seconds;
        list.push_back(std::move(e));
    }
    j["repos"] = std::move(list);
    ordered_json outs;
    for (const auto& [k, v] : outputs) outs[k] = v;
    j["outputs"] = std::move(outs);
    return j;
}

std::vector<fs::path> discover_repos(const fs::path& root) {
    std::vector<fs::path> repos;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(root, ec)) {
        if (entry.is_directory()) repos.push_back(entry.path());
    }
    if (ec) throw IoError("cannot list " + root.string() + ": " + ec.message());
    if (repos.empty()) repos.push_back(root);
    std::sort(repos.begin(), repos.end());
    return repos;
}

std::vector<Trajectory> read_trajectories(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::vector<Trajectory> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(trajectory_from_json(ordered_json::parse(line)));
    }
    return out;
}

void write_trajectories(const std::vector<Trajectory>& trajectories, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    for (const auto& t : trajectories) out << trajectory_to_json(t).dump() << "\n";
}

namespace {

struct RepoWork {
    std::string repo_id;
    RepoSnapshot snapshot;
    RepoAnalysis analysis;
};

std::string substitute_out_dir(std::string path, const fs::path& out_dir) {
    const std::string placeholder = "{out_dir}";
    auto pos = path.find(placeholder);
    if (pos != std::string::npos) {
        path.replace(pos, placeholder.size(), out_dir.string());
    }
    return path;
}

void append_jsonl(const fs::path& path, const ordered_json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    out << j.dump() << "\n";
}

}  // namespace

PipelineRunRecord run_pipeline(const Config& cfg) {
    PipelineRunRecord record;
    fs::create_directories(cfg.out_dir);
    const fs::path analysis_path = cfg.out_dir / "analysis.jsonl";
    const fs::path traj_path = cfg.out_dir / "trajectories.traj.jsonl";
    const fs::path optimized_path = cfg.out_dir / "optimized.traj.jsonl";
    const fs::path trace_path = cfg.out_dir / "search_trace.jsonl";
    const fs::path docs_path = cfg.out_dir / "docs.jsonl";
    const fs::path corpus_path = cfg.out_dir / "corpus.jsonl";
    const fs::path manifest_path = cfg.out_dir / "manifest.json";
    const fs::path stats_path = cfg.out_dir / "stats.json";
    const fs::path failures_path = cfg.out_dir / "failures.jsonl";
    std::ofstream(failures_path, std::ios::trunc);  // reset per run

    auto repos = discover_repos(cfg.repos_root);

    // Stage 1: ingest + analyze.
    std::vector<RepoWork> accepted;
    {
        std::ofstream analysis_out(analysis_path, std::ios::binary);
        for (const auto& root : repos) {
            RepoStatus status;
            status.repo_id = root.filename().string();
            auto t0 = std::chrono::steady_clock::now();
            try {
                std::vector<ScanWarning> warnings;
                auto snap = scan_repository(root, cfg.filter, &warnings);
                for (const auto& w : warnings) {
                    append_jsonl(failures_path, {{"repo_id", status.repo_id},
                                                 {"kind", "scan_warning"},
                                                 {"path", w.path},
                                                 {"reason", w.reason}});
                }
                auto decision = filter_snapshot(snap, cfg.filter);
                if (!decision.accepted) {
                    status.status = "discarded";
                    status.stage = "repo-ingest";
                    status.detail = decision.reason;
                } else {
                    std::vector<AnalysisWarning> analysis_warnings;
                    auto analysis = analyze_repo(snap, &analysis_warnings);
                    bool fatal = false;
                    for (const auto& w : analysis_warnings) {
                        append_jsonl(failures_path, {{"repo_id", status.repo_id},
                                                     {"kind", "analysis_warning"},
                                                     {"path", w.path},
                                                     {"reason", w.reason}});
                        fatal = true;
                    }
                    if (fatal) {
                        status.status = "failed";
                        status.stage = "static-analysis";
                        status.detail = analysis_warnings[0].path + ": " +
                                        analysis_warnings[0].reason;
                    } else {
                        analysis_out << analysis_to_json(analysis).dump() << "\n";
                        accepted.push_back({status.repo_id, std::move(snap), std::move(analysis)});
                        status.status = "ok";
                    }
                }
            } catch (const std::exception& e) {
                status.status = "failed";
                status.stage = "repo-ingest";
                status.detail = e.what();
            }
            status.seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            record.repos.push_back(std::move(status));
        }
    }

    // Stage 2: simulate (bounded worker pool, deterministic output order).
    std::vector<std::optional<Trajectory>> results(accepted.size());
    std::vector<std::pair<std::string, std::string>> sim_failures(accepted.size());
    {
        std::atomic<std::size_t> next{0};
        int jobs = std::max(1, std::min(cfg.jobs, static_cast<int>(accepted.size())));
        auto worker = [&] {
            auto backend = make_generation_backend(cfg.gen_backend, cfg.seed);
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= accepted.size()) break;
                SimulationConfig sim = cfg.simulate;
                sim.seed = cfg.seed ^ std::hash<std::string>{}(accepted[i].repo_id);
                try {
                    results[i] = synthesize_repo_trajectory(accepted[i].snapshot,
                                                            accepted[i].analysis, *backend, sim);
                } catch (const std::exception& e) {
                    sim_failures[i] = {"simulation", e.what()};
                }
            }
        };
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::vector<Trajectory> trajectories;
    for (std::size_t i = 0; i < accepted.size(); ++i) {
        if (results[i]) {
            trajectories.push_back(std::move(*results[i]));
            continue;
        }
        for (auto& r : record.repos) {
            if (r.repo_id == accepted[i].repo_id) {
                r.status = "failed";
                r.stage = sim_failures[i].first;
                r.detail = sim_failures[i].second;
            }
        }
        append_jsonl(failures_path, {{"repo_id", accepted[i].repo_id},
                                     {"kind", "simulation_failure"},
                                     {"reason", sim_failures[i].second}});
    }
    write_trajectories(trajectories, traj_path);

    // Stage 3: CoT search optimization.
    if (cfg.optimize_cot) {
        auto gen = make_generation_backend(cfg.gen_backend, cfg.seed);
        auto scorer = make_scoring_backend(cfg.score_backend);
        std::ofstream trace_out(trace_path, std::ios::binary);
        std::vector<Trajectory> optimized;
        for (const auto& t : trajectories) {
            auto [opt, trace] = search_optimize(t, *gen, *scorer, cfg.search);
            for (const auto& e : trace) trace_out << trace_entry_to_json(e).dump() << "\n";
            optimized.push_back(std::move(opt));
        }
        trajectories = std::move(optimized);
        write_trajectories(trajectories, optimized_path);
    } else {
        write_trajectories(trajectories, optimized_path);
    }

    // Stage 4: flatten.
    std::vector<FlattenedDocument> docs;
    for (const auto& t : trajectories) docs.push_back(flatten(t));
    emit_jsonl(docs, docs_path);

    // Stage 5: mix.
    MixtureSpec spec = cfg.mixture;
    if (spec.sources.empty()) {
        // No mixture configured: the corpus is the trajectory docs alone.
        MixtureSource src;
        src.name = "trajectories";
        src.path = docs_path.string();
        src.share = 1.0;
        spec.sources.push_back(std::move(src));
        std::uint64_t total = 0;
        for (const auto& d : docs) total += d.approx_tokens;
        spec.total_token_budget = total;
    } else {
        for (auto& src : spec.sources) src.path = substitute_out_dir(src.path, cfg.out_dir);
    }
    try {
        auto [mixed, manifest] = mix_corpus(spec);
        emit_jsonl(mixed, corpus_path);
        std::ofstream(manifest_path, std::ios::binary) << manifest.to_json().dump(2) << "\n";
    } catch (const std::exception& e) {
        append_jsonl(failures_path, {{"kind", "mix_failure"}, {"reason", e.what()}});
        emit_jsonl({}, corpus_path);
        std::ofstream(manifest_path, std::ios::binary) << "{}\n";
    }

    // Stage 6: stats.
    auto stats = corpus_stats(corpus_path);
    std::ofstream(stats_path, std::ios::binary) << stats.to_json().dump(2) << "\n";

    record.outputs = {{"analysis", analysis_path.string()},
                      {"trajectories", traj_path.string()},
                      {"optimized", optimized_path.string()},
                      {"search_trace", trace_path.string()},
                      {"docs", docs_path.string()},
                      {"corpus", corpus_path.string()},
                      {"manifest", manifest_path.string()},
                      {"stats", stats_path.string()},
                      {"failures", failures_path.string()}};

    std::ofstream(cfg.out_dir / "run_record.json", std::ios::binary)
        << record.to_json().dump(2) << "\n";
    return record;
}

}  // namespace repoforge
