#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "repoforge/backends.hpp"
#include "repoforge/static_analysis.hpp"
#include "repoforge/trajectory.hpp"

namespace repoforge {

struct SimulationConfig {
    int max_prompt_retries = 3;
    double temperature = 0.7;
    std::uint64_t seed = 0;
    int max_read_calls_per_file = 8;
};

struct GroundingReport {
    int reads_corrected = 0;
    int writes_corrected = 0;
    // (reader file, read file) where the read target comes later in the
    // implementation order than the reader.
    std::vector<std::pair<std::string, std::string>> forward_reads;
};

/// Pulls the first well-formed JSON array out of model text, stripping
/// markdown fences. Throws SimulationError when none is found.
nlohmann::ordered_json extract_json_array(const std::string& text);

Trajectory simulate_main_agent(const RepoSnapshot& snap, const RepoAnalysis& analysis,
                               GenerationBackend& backend, const SimulationConfig& cfg);

Trajectory simulate_sub_agent(const std::map<std::string, std::string>& task_args,
                              const RepoSnapshot& snap, const RepoAnalysis& analysis,
                              GenerationBackend& backend, const SimulationConfig& cfg);

/// Replace Read observations and Write contents with the snapshot's actual
/// bytes; flips provenance on every corrected step. The implementation
/// order, when given, is used to record forward reads.
std::pair<Trajectory, GroundingReport> ground_trajectory(
    const Trajectory& t, const RepoSnapshot& snap,
    const ImplementationOrder* order = nullptr);

/// Full per-repo synthesis: main agent, then one grounded and validated sub
/// trajectory nested into each delegation.
Trajectory synthesize_repo_trajectory(const RepoSnapshot& snap, const RepoAnalysis& analysis,
                                      GenerationBackend& backend, const SimulationConfig& cfg);

}  // namespace repoforge
