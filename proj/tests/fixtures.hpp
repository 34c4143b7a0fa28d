#pragma once

// Shared fixtures: the two-file calculator repo, its hand-encoded trajectory,
// and generators for synthetic repos, DAGs and nested trajectories.

#include <algorithm>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "repoforge/repo_ingest.hpp"
#include "repoforge/static_analysis.hpp"
#include "repoforge/trajectory.hpp"

namespace fixtures {

using namespace repoforge;

inline const std::string kOperationsSrc = "def add(a, b):\n    return a + b\n";
inline const std::string kMainSrc =
    "from operations import add\n\nresult = add(2, 3)\nprint(result)\n";

inline RepoSnapshot make_snapshot(std::map<std::string, std::string> files,
                                  const std::string& repo_id = "fixture") {
    RepoSnapshot snap;
    snap.repo_id = repo_id;
    for (auto& [p, c] : files) {
        snap.total_bytes += c.size();
        snap.files.emplace(p, std::move(c));
    }
    return snap;
}

inline RepoSnapshot calc_snapshot() {
    return make_snapshot({{"operations.py", kOperationsSrc}, {"main.py", kMainSrc}}, "calc");
}

inline TrajectoryStep think(std::string text) {
    return {Role::Agent, StepKind::Think, std::move(text), std::nullopt, Provenance::Generated,
            nullptr};
}

inline TrajectoryStep observation(std::string text,
                                  Provenance prov = Provenance::Generated) {
    return {Role::ToolResponse, StepKind::Observation, std::move(text), std::nullopt, prov,
            nullptr};
}

inline TrajectoryStep action(Tool tool, std::map<std::string, std::string> args,
                             std::shared_ptr<Trajectory> sub = nullptr) {
    ToolCall call;
    call.tool = tool;
    call.arguments = std::move(args);
    return {Role::Agent, StepKind::Action, "", std::move(call), Provenance::Generated,
            std::move(sub)};
}

inline std::map<std::string, std::string> delegation_args(const std::string& path) {
    std::string base = path;
    auto slash = base.find_last_of('/');
    if (slash != std::string::npos) base = base.substr(slash + 1);
    return {{"requirement_for_repo", "Create a simple calculator project in Python."},
            {"tree_structure", "main.py\noperations.py\n"},
            {"file_name", base},
            {"file_path", path},
            {"requirement", "Create '" + path + "'."}};
}

// Script rows of the calculator walkthrough fixture, used across the suite.
inline const std::string kRow0 =
    "Create a simple calculator project in Python. It should include a file for arithmetic "
    "operations and a main script to run a demonstration.";
inline const std::string kRow1 =
    "The project requires a calculator. It needs a file for core logic, operations.py, and a "
    "main file to run it, main.py. The latter depends on the former, so I must create "
    "operations.py first. The plan is: 1. Create operations.py. 2. Create main.py.";
inline const std::string kRow5 =
    "Sub-agent finished task for operations.py. The file has been generated.";
inline const std::string kRow6 = "Now proceeding to the next step in my plan.";
inline const std::string kRow8 =
    "I need to create main.py. This file must import the add function from operations.py. To "
    "ensure correctness, I should first read the content of operations.py.";
inline const std::string kRow11 =
    "Okay, I have the content of operations.py. Now I can write main.py. I will import add, "
    "call it with 2 and 3, and print the output.";
inline const std::string kRow14 =
    "Sub-agent finished task for main.py. All files in the plan have been generated. The "
    "project is complete.";

// The sub trajectory for main.py (rows 8-13), already byte-exact against
// calc_snapshot() so grounding it is a fixed point.
inline Trajectory calc_sub_trajectory() {
    Trajectory t;
    t.agent = AgentKind::Sub;
    t.repo_id = "calc";
    t.target_file = "main.py";
    t.steps.push_back({Role::System, StepKind::SystemPrompt, "You are a code generator.",
                       std::nullopt, Provenance::Generated, nullptr});
    t.steps.push_back({Role::User, StepKind::TaskBrief, "Create 'main.py' that uses the add function.",
                       std::nullopt, Provenance::Generated, nullptr});
    t.steps.push_back(think(kRow8));
    t.steps.push_back(action(Tool::Read, {{"file_to_read", "operations.py"}}));
    t.steps.push_back(observation(kOperationsSrc, Provenance::Grounded));
    t.steps.push_back(think(kRow11));
    t.steps.push_back(action(Tool::Write, {{"file_path", "main.py"}, {"content", kMainSrc}}));
    t.steps.push_back(observation(
        "Successfully wrote " + std::to_string(kMainSrc.size()) + " bytes to main.py.",
        Provenance::Grounded));
    return t;
}

// The full calculator trajectory: rows 0-14 with the main.py delegation
// carrying its nested sub trajectory.
inline Trajectory calc_trajectory() {
    Trajectory t;
    t.agent = AgentKind::Main;
    t.repo_id = "calc";
    t.steps.push_back({Role::System, StepKind::SystemPrompt, "You are the main agent.",
                       std::nullopt, Provenance::Generated, nullptr});
    t.steps.push_back({Role::User, StepKind::TaskBrief, kRow0, std::nullopt,
                       Provenance::Generated, nullptr});
    t.steps.push_back(think(kRow1));
    t.steps.push_back(action(Tool::CallSubAgent, delegation_args("operations.py")));
    t.steps.push_back(observation(kRow5, Provenance::Grounded));
    t.steps.push_back(think(kRow6));
    t.steps.push_back(action(Tool::CallSubAgent, delegation_args("main.py"),
                             std::make_shared<Trajectory>(calc_sub_trajectory())));
    t.steps.push_back(observation("main.py has been generated successfully",
                                  Provenance::Grounded));
    t.steps.push_back(think(kRow14));
    return t;
}

// ---------------------------------------------------------------------------
// Synthetic repository generation, shared by the graph-oracle tests.

struct SyntheticImport {
    std::string statement;   // the literal source line
    int relative_level = 0;  // dots on from-imports
    std::string module;      // dotted module, without leading dots
    std::vector<std::string> names;  // from-import names, empty for plain import
    bool is_from = false;
};

struct SyntheticFile {
    std::string path;
    std::vector<SyntheticImport> imports;
    std::string source;
};

struct SyntheticRepo {
    RepoSnapshot snapshot;
    std::vector<SyntheticFile> files;
};

inline std::string module_of(const std::string& path) {
    std::string p = path;
    if (p.size() > 3 && p.substr(p.size() - 3) == ".py") p = p.substr(0, p.size() - 3);
    const std::string init = "/__init__";
    if (p.size() > init.size() && p.substr(p.size() - init.size()) == init) {
        p = p.substr(0, p.size() - init.size());
    }
    std::replace(p.begin(), p.end(), '/', '.');
    return p;
}

inline SyntheticRepo make_synthetic_repo(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::vector<std::string> pool = {"alpha.py",          "beta.py",  "gamma.py",
                                           "delta.py",          "util/__init__.py",
                                           "util/helpers.py"};
    std::uniform_int_distribution<int> count_d(2, 6);
    int n = count_d(rng);
    std::vector<std::string> chosen = pool;
    std::shuffle(chosen.begin(), chosen.end(), rng);
    chosen.resize(n);
    // Packages need their __init__ to be importable as util.helpers.
    bool has_helpers = std::count(chosen.begin(), chosen.end(), "util/helpers.py") > 0;
    bool has_init = std::count(chosen.begin(), chosen.end(), "util/__init__.py") > 0;
    if (has_helpers && !has_init) chosen.push_back("util/__init__.py");
    std::sort(chosen.begin(), chosen.end());

    const std::vector<std::string> externals = {"os", "sys", "json", "collections"};

    SyntheticRepo repo;
    int fn_counter = 0;
    for (const auto& path : chosen) {
        SyntheticFile file;
        file.path = path;
        std::uniform_int_distribution<int> imports_d(0, 3);
        int k = imports_d(rng);
        for (int i = 0; i < k; ++i) {
            SyntheticImport imp;
            std::uniform_int_distribution<int> kind_d(0, 3);
            int kind = kind_d(rng);
            if (kind == 0) {
                imp.module = externals[rng() % externals.size()];
                imp.statement = "import " + imp.module;
            } else {
                const auto& target = chosen[rng() % chosen.size()];
                std::string mod = module_of(target);
                if (kind == 1) {
                    imp.module = mod;
                    imp.statement = "import " + mod;
                } else if (kind == 2) {
                    imp.module = mod;
                    imp.statement = "import " + mod + " as dep" + std::to_string(i);
                } else {
                    imp.is_from = true;
                    imp.module = mod;
                    imp.names = {"value"};
                    imp.statement = "from " + mod + " import value";
                }
            }
            file.imports.push_back(std::move(imp));
        }
        std::string src;
        for (const auto& imp : file.imports) src += imp.statement + "\n";
        src += "\n\nvalue = " + std::to_string(fn_counter) + "\n\n\ndef fn_" +
               std::to_string(fn_counter) + "(a, b):\n    return a + b\n";
        ++fn_counter;
        file.source = src;
        repo.snapshot.files[path] = src;
        repo.snapshot.total_bytes += src.size();
        repo.files.push_back(std::move(file));
    }
    repo.snapshot.repo_id = "synth" + std::to_string(seed);
    return repo;
}

// Independent import resolver: the brute-force oracle the graph is checked
// against. Written from the stated resolution rules, not from the library.
inline std::set<std::pair<std::string, std::string>> oracle_edges(const SyntheticRepo& repo) {
    auto resolves = [&](const std::string& dotted) -> std::string {
        std::string base = dotted;
        std::replace(base.begin(), base.end(), '.', '/');
        if (repo.snapshot.files.count(base + ".py")) return base + ".py";
        if (repo.snapshot.files.count(base + "/__init__.py")) return base + "/__init__.py";
        return "";
    };
    std::set<std::pair<std::string, std::string>> edges;
    for (const auto& file : repo.files) {
        for (const auto& imp : file.imports) {
            std::set<std::string> targets;
            if (!imp.is_from) {
                auto t = resolves(imp.module);
                if (!t.empty()) targets.insert(t);
            } else {
                auto t = resolves(imp.module);
                if (!t.empty()) targets.insert(t);
                for (const auto& name : imp.names) {
                    auto t2 = resolves(imp.module + "." + name);
                    if (!t2.empty()) targets.insert(t2);
                }
            }
            for (const auto& t : targets) {
                if (t != file.path) edges.emplace(file.path, t);
            }
        }
    }
    return edges;
}

// ---------------------------------------------------------------------------
// Random DAGs for order-planning tests.

struct RandomDag {
    std::vector<std::string> nodes;  // sorted
    std::vector<std::pair<std::string, std::string>> edges;  // dependent -> dependee
};

inline RandomDag make_random_dag(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> n_d(1, 10);
    int n = n_d(rng);
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.push_back("node_" + std::string(1, char('a' + i)) + ".py");
    // Random topological ranks; edges always point from higher rank to lower.
    std::vector<std::string> ranked = names;
    std::shuffle(ranked.begin(), ranked.end(), rng);
    RandomDag dag;
    dag.nodes = names;
    std::set<std::pair<std::string, std::string>> edges;
    std::uniform_int_distribution<int> edge_count_d(0, 2 * n);
    int m = edge_count_d(rng);
    for (int e = 0; e < m && n > 1; ++e) {
        int i = static_cast<int>(rng() % n);
        int j = static_cast<int>(rng() % n);
        if (i == j) continue;
        if (i < j) std::swap(i, j);  // ranked[i] depends on ranked[j]
        edges.emplace(ranked[i], ranked[j]);
    }
    dag.edges.assign(edges.begin(), edges.end());
    return dag;
}

// Independent ordering oracle: Kahn's algorithm always choosing the
// lexicographically smallest node whose dependees are all placed.
inline std::vector<std::string> oracle_order(const RandomDag& dag) {
    std::vector<std::string> order;
    std::set<std::string> placed;
    std::set<std::string> pending(dag.nodes.begin(), dag.nodes.end());
    while (!pending.empty()) {
        bool progressed = false;
        for (const auto& node : pending) {  // std::set iterates in sorted order
            bool ready = true;
            for (const auto& [a, b] : dag.edges) {
                if (a == node && !placed.count(b)) {
                    ready = false;
                    break;
                }
            }
            if (ready) {
                order.push_back(node);
                placed.insert(node);
                pending.erase(node);
                progressed = true;
                break;
            }
        }
        if (!progressed) break;  // cycle; callers only pass DAGs
    }
    return order;
}

// ---------------------------------------------------------------------------
// Random nested trajectories for flattening and grounding tests.

inline Trajectory random_sub_trajectory(std::mt19937_64& rng, const RepoSnapshot& snap,
                                        const std::string& target, bool corrupt) {
    Trajectory t;
    t.agent = AgentKind::Sub;
    t.repo_id = snap.repo_id;
    t.target_file = target;
    t.steps.push_back({Role::System, StepKind::SystemPrompt, "sub system prompt", std::nullopt,
                       Provenance::Generated, nullptr});
    t.steps.push_back({Role::User, StepKind::TaskBrief, "create " + target, std::nullopt,
                       Provenance::Generated, nullptr});
    auto paths = snap.paths();
    std::uniform_int_distribution<int> reads_d(0, 2);
    int reads = reads_d(rng);
    for (int i = 0; i < reads; ++i) {
        const auto& p = paths[rng() % paths.size()];
        t.steps.push_back(think("considering " + p + " before writing " + target + "."));
        t.steps.push_back(action(Tool::Read, {{"file_to_read", p}}));
        std::string obs = snap.bytes_of(p);
        if (corrupt && rng() % 2 == 0) obs = "# hallucinated summary of " + p + "\n";
        t.steps.push_back(observation(obs));
    }
    t.steps.push_back(think("now writing " + target + "."));
    std::string content = snap.bytes_of(target);
    if (corrupt && rng() % 2 == 0) content += "# trailing guess\n";
    t.steps.push_back(action(Tool::Write, {{"file_path", target}, {"content", content}}));
    t.steps.push_back(observation("Successfully wrote " +
                                  std::to_string(snap.bytes_of(target).size()) + " bytes to " +
                                  target + "."));
    return t;
}

inline Trajectory random_main_trajectory(std::uint64_t seed, const RepoSnapshot& snap,
                                         bool corrupt) {
    std::mt19937_64 rng(seed);
    Trajectory t;
    t.agent = AgentKind::Main;
    t.repo_id = snap.repo_id;
    t.steps.push_back({Role::System, StepKind::SystemPrompt, "main system prompt", std::nullopt,
                       Provenance::Generated, nullptr});
    t.steps.push_back({Role::User, StepKind::TaskBrief, "build the project", std::nullopt,
                       Provenance::Generated, nullptr});
    for (const auto& path : snap.paths()) {
        t.steps.push_back(think("delegating " + path + "."));
        t.steps.push_back(
            action(Tool::CallSubAgent, delegation_args(path),
                   std::make_shared<Trajectory>(random_sub_trajectory(rng, snap, path, corrupt))));
        t.steps.push_back(observation(path + " has been generated successfully"));
    }
    t.steps.push_back(think("all files are done."));
    return t;
}

}  // namespace fixtures
