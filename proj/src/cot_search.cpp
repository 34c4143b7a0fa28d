#include "repoforge/cot_search.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "repoforge/errors.hpp"
#include "repoforge/prompts.hpp"

namespace repoforge {

namespace {

// Split on exact "\n\n" delimiters, keeping empty pieces so the join
// reconstructs the original text byte-for-byte.
std::vector<std::string> split_blocks(const std::string& text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = text.find("\n\n", pos);
        if (next == std::string::npos) {
            out.push_back(text.substr(pos));
            break;
        }
        out.push_back(text.substr(pos, next - pos));
        pos = next + 2;
    }
    return out;
}

std::string join_nonempty(const std::vector<CoTStep>& steps) {
    std::string out;
    for (const auto& s : steps) {
        if (s.text.empty()) continue;
        if (!out.empty()) out += "\n\n";
        out += s.text;
    }
    return out;
}

std::string find_target(const Trajectory& t) {
    for (const auto& step : t.steps) {
        if (step.kind == StepKind::Action && step.tool_call &&
            step.tool_call->tool == Tool::Write) {
            return step.tool_call->arguments.at("content");
        }
    }
    return "";
}

}  // namespace

CoTChain decompose_cot(const Trajectory& t) {
    CoTChain chain;
    chain.target = find_target(t);

    bool seen_think = false;
    std::string prefix;
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        const auto& step = t.steps[i];
        if (step.kind == StepKind::Think) {
            seen_think = true;
            int ordinal = 0;
            for (auto& block : split_blocks(step.content)) {
                CoTStep cs;
                cs.index = static_cast<int>(chain.steps.size());
                cs.text = block;
                cs.traj_step = i;
                cs.ordinal = ordinal++;
                chain.steps.push_back(std::move(cs));
            }
        } else if (!seen_think) {
            if (!prefix.empty()) prefix += "\n\n";
            prefix += step.content;
        }
    }
    chain.context_prefix = prefix;
    if (chain.steps.empty()) {
        throw SimulationError("trajectory has no Think steps to decompose");
    }
    if (chain.target.empty()) {
        throw SimulationError("trajectory has no Write action; nothing to optimize against");
    }
    return chain;
}

const std::vector<std::string>& refinement_denylist() {
    static const std::vector<std::string> deny = {
        "In this refinement",  "Correcting the previous step", "Here is the better reasoning",
        "Let's refine this",   "Reference Code",               "Provided Solution",
        "Ground Truth",
    };
    return deny;
}

std::vector<std::string> propose_refinements(const CoTChain& chain, int i,
                                             GenerationBackend& backend, const SearchConfig& cfg,
                                             std::uint64_t salt) {
    std::string context = chain.context_prefix;
    std::string steps_text = join_nonempty(chain.steps);
    if (!steps_text.empty()) {
        if (!context.empty()) context += "\n\n";
        context += steps_text;
    }
    std::string prompt =
        prompts::build_refinement_prompt(chain.target, context, chain.steps[i].text);

    std::vector<std::string> candidates;
    for (int j = 0; j < cfg.k; ++j) {
        std::optional<std::string> candidate;
        for (int attempt = 0; attempt < cfg.max_candidate_retries; ++attempt) {
            GenerationRequest req;
            req.messages.emplace_back("user", prompt);
            req.seed = cfg.seed ^ (salt * 1000003ull) ^
                       (static_cast<std::uint64_t>(i) * 9176ull + static_cast<std::uint64_t>(j) * 31ull +
                        static_cast<std::uint64_t>(attempt) * 131071ull + 1ull);
            std::string text;
            try {
                text = backend.generate(req);
            } catch (const BackendError&) {
                continue;
            }
            std::string refined = prompts::extract_between(text, "<refine>", "</refine>");
            while (!refined.empty() && refined.back() == '\n') refined.pop_back();
            if (refined.empty()) continue;
            bool denied = false;
            for (const auto& phrase : refinement_denylist()) {
                if (refined.find(phrase) != std::string::npos) {
                    denied = true;
                    break;
                }
            }
            if (denied) continue;
            candidate = std::move(refined);
            break;
        }
        if (candidate) candidates.push_back(std::move(*candidate));
    }
    return candidates;
}

double score_chain(const CoTChain& chain, ScoringBackend& scorer) {
    ScoreRequest req;
    req.context = chain.context_prefix;
    std::string steps_text = join_nonempty(chain.steps);
    if (!steps_text.empty()) {
        if (!req.context.empty()) req.context += "\n\n";
        req.context += steps_text;
    }
    req.target = chain.target;
    return scorer.score(req).ppl;
}

std::pair<Trajectory, SearchTrace> search_optimize_sub(const Trajectory& sub,
                                                       GenerationBackend& gen,
                                                       ScoringBackend& scorer,
                                                       const SearchConfig& cfg) {
    SearchTrace trace;
    CoTChain chain;
    try {
        chain = decompose_cot(sub);
    } catch (const SimulationError&) {
        return {sub, trace};  // nothing to optimize
    }

    const std::string target_file = sub.target_file ? *sub.target_file : "";
    double current_ppl = score_chain(chain, scorer);

    for (int round = 0; round < cfg.rounds; ++round) {
        for (int i = 0; i < static_cast<int>(chain.steps.size()); ++i) {
            SearchTraceEntry entry;
            entry.repo_id = sub.repo_id;
            entry.target_file = target_file;
            entry.round = round;
            entry.step = i;
            entry.original_ppl = current_ppl;

            if (chain.steps[i].text.empty()) {
                entry.skipped = true;
                trace.push_back(std::move(entry));
                continue;
            }

            std::vector<std::string> candidates;
            try {
                candidates = propose_refinements(chain, i, gen, cfg,
                                                 static_cast<std::uint64_t>(round) + 1);
            } catch (const BackendError&) {
                candidates.clear();
            }
            if (candidates.empty()) {
                entry.skipped = true;
                trace.push_back(std::move(entry));
                continue;
            }

            double best_ppl = current_ppl;
            int best_idx = -1;
            std::string original = chain.steps[i].text;
            for (std::size_t c = 0; c < candidates.size(); ++c) {
                chain.steps[i].text = candidates[c];
                double ppl;
                try {
                    ppl = score_chain(chain, scorer);
                } catch (const BackendError&) {
                    chain.steps[i].text = original;
                    entry.skipped = true;
                    break;
                }
                entry.candidate_ppls.push_back(ppl);
                if (ppl < best_ppl) {  // strictly lower; ties keep the original
                    best_ppl = ppl;
                    best_idx = static_cast<int>(c);
                }
            }
            if (entry.skipped) {
                chain.steps[i].text = original;
                trace.push_back(std::move(entry));
                continue;
            }
            if (best_idx >= 0) {
                chain.steps[i].text = candidates[best_idx];
                current_ppl = best_ppl;
                entry.accepted = best_idx;
            } else {
                chain.steps[i].text = original;
            }
            trace.push_back(std::move(entry));
        }
    }

    // Splice refined texts back at their recorded locations.
    Trajectory out = sub;
    std::map<std::size_t, std::vector<const CoTStep*>> by_step;
    for (const auto& s : chain.steps) by_step[s.traj_step].push_back(&s);
    for (auto& [traj_step, blocks] : by_step) {
        std::string rebuilt;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            if (b) rebuilt += "\n\n";
            rebuilt += blocks[b]->text;
        }
        out.steps[traj_step].content = std::move(rebuilt);
    }
    return {std::move(out), std::move(trace)};
}

std::pair<Trajectory, SearchTrace> search_optimize(const Trajectory& t, GenerationBackend& gen,
                                                   ScoringBackend& scorer,
                                                   const SearchConfig& cfg) {
    if (t.agent == AgentKind::Sub) {
        return search_optimize_sub(t, gen, scorer, cfg);
    }
    Trajectory out = t;
    SearchTrace trace;
    for (auto& step : out.steps) {
        if (!step.sub_trajectory) continue;
        auto [optimized, sub_trace] = search_optimize_sub(*step.sub_trajectory, gen, scorer, cfg);
        step.sub_trajectory = std::make_shared<Trajectory>(std::move(optimized));
        for (auto& e : sub_trace) trace.push_back(std::move(e));
    }
    return {std::move(out), std::move(trace)};
}

nlohmann::ordered_json trace_entry_to_json(const SearchTraceEntry& e) {
    nlohmann::ordered_json j;
    j["repo_id"] = e.repo_id;
    j["target_file"] = e.target_file;
    j["round"] = e.round;
    j["step"] = e.step;
    j["original_ppl"] = e.original_ppl;
    j["candidate_ppls"] = e.candidate_ppls;
    j["accepted"] = e.accepted ? nlohmann::ordered_json(*e.accepted)
                               : nlohmann::ordered_json(nullptr);
    j["skipped"] = e.skipped;
    return j;
}

}  // namespace repoforge
