#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "repoforge/backends.hpp"
#include "repoforge/trajectory.hpp"

#include "json.hpp"

namespace repoforge {

struct CoTStep {
    int index = 0;              // position in the chain
    std::string text;           // the thought block
    std::size_t traj_step = 0;  // owning Think step in the trajectory
    int ordinal = 0;            // block position within that Think step
};

struct CoTChain {
    std::vector<CoTStep> steps;
    std::string target;          // ground-truth code the chain must explain
    std::string context_prefix;  // trajectory text preceding the first Think
};

struct SearchConfig {
    int k = 2;       // candidates per step
    int rounds = 3;  // search-and-replace rounds
    std::uint64_t seed = 0;
    int max_candidate_retries = 3;
};

struct SearchTraceEntry {
    std::string repo_id;
    std::string target_file;
    int round = 0;
    int step = 0;
    double original_ppl = 0.0;
    std::vector<double> candidate_ppls;
    std::optional<int> accepted;  // index into candidate_ppls
    bool skipped = false;
};

using SearchTrace = std::vector<SearchTraceEntry>;

/// Split a grounded Sub trajectory's Think steps into a chain at blank-line
/// boundaries. Throws SimulationError when the trajectory has no Think steps.
CoTChain decompose_cot(const Trajectory& t);

/// Phrases whose presence disqualifies a refinement candidate.
const std::vector<std::string>& refinement_denylist();

/// Up to k refinement candidates for chain step i; fewer on persistent
/// extraction failures. `salt` differentiates rounds for seeding.
std::vector<std::string> propose_refinements(const CoTChain& chain, int i,
                                             GenerationBackend& backend, const SearchConfig& cfg,
                                             std::uint64_t salt = 0);

/// exp(-mean per-token logprob) of the chain's target given prefix + steps.
double score_chain(const CoTChain& chain, ScoringBackend& scorer);

/// Greedy perplexity-guided refinement of one Sub trajectory's chain.
std::pair<Trajectory, SearchTrace> search_optimize_sub(const Trajectory& sub,
                                                       GenerationBackend& gen,
                                                       ScoringBackend& scorer,
                                                       const SearchConfig& cfg);

/// Optimizes every nested Sub trajectory of a Main trajectory (or the
/// trajectory itself when it is a Sub).
std::pair<Trajectory, SearchTrace> search_optimize(const Trajectory& t, GenerationBackend& gen,
                                                   ScoringBackend& scorer,
                                                   const SearchConfig& cfg);

nlohmann::ordered_json trace_entry_to_json(const SearchTraceEntry& e);

}  // namespace repoforge
