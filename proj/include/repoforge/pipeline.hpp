#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "repoforge/config.hpp"
#include "repoforge/trajectory.hpp"

#include "json.hpp"

namespace repoforge {

struct RepoStatus {
    std::string repo_id;
    std::string status;  // "ok" | "discarded" | "failed"
    std::string stage;   // stage that discarded/failed the repo
    std::string detail;
    double seconds = 0.0;
};

struct PipelineRunRecord {
    std::vector<RepoStatus> repos;  // every input repo exactly once
    std::map<std::string, std::string> outputs;  // artifact name -> path
    int ok_count() const;
    nlohmann::ordered_json to_json(bool include_timings = true) const;
};

/// Immediate subdirectories of `root` are the repositories; when there are
/// none, `root` itself is treated as a single repository.
std::vector<std::filesystem::path> discover_repos(const std::filesystem::path& root);

/// Executes analyze -> simulate -> optimize -> flatten -> mix -> stats,
/// communicating between stages only through files under cfg.out_dir.
/// Per-repo failures are recorded, never fatal to the batch.
PipelineRunRecord run_pipeline(const Config& cfg);

std::vector<Trajectory> read_trajectories(const std::filesystem::path& path);
void write_trajectories(const std::vector<Trajectory>& trajectories,
                        const std::filesystem::path& path);

}  // namespace repoforge
