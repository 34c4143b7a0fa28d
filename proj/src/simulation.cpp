#include "repoforge/simulation.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "repoforge/errors.hpp"
#include "repoforge/prompts.hpp"

namespace repoforge {

using nlohmann::ordered_json;

nlohmann::ordered_json extract_json_array(const std::string& text) {
    // Strip fenced blocks down to their bodies, then scan for the first
    // balanced JSON array that actually parses.
    std::string s = text;
    std::size_t fence = s.find("```");
    if (fence != std::string::npos) {
        std::size_t body = s.find('\n', fence);
        std::size_t close = s.find("```", body == std::string::npos ? fence + 3 : body);
        if (body != std::string::npos && close != std::string::npos) {
            s = s.substr(body + 1, close - body - 1);
        }
    }
    std::size_t start = s.find('[');
    while (start != std::string::npos) {
        int depth = 0;
        bool in_string = false;
        for (std::size_t i = start; i < s.size(); ++i) {
            char c = s[i];
            if (in_string) {
                if (c == '\\') ++i;
                else if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            else if (c == '[' || c == '{') ++depth;
            else if (c == ']' || c == '}') {
                --depth;
                if (depth == 0) {
                    auto candidate = s.substr(start, i - start + 1);
                    auto parsed = ordered_json::parse(candidate, nullptr, false);
                    if (parsed.is_array()) return parsed;
                    break;
                }
            }
        }
        start = s.find('[', start + 1);
    }
    throw SimulationError("no well-formed JSON array in model output");
}

namespace {

std::string generate_with_retries(GenerationBackend& backend, GenerationRequest req,
                                  const SimulationConfig& cfg, ordered_json& memory_out) {
    std::string last_error;
    for (int attempt = 0; attempt < cfg.max_prompt_retries; ++attempt) {
        if (attempt > 0) {
            GenerationRequest retry = req;
            retry.messages.emplace_back(
                "user", "The previous reply was unusable (" + last_error +
                            "). Return strictly a JSON list in the requested format.");
            retry.seed = req.seed + static_cast<std::uint64_t>(attempt);
            req = std::move(retry);
        }
        std::string text;
        try {
            text = backend.generate(req);
        } catch (const BackendError& e) {
            last_error = e.what();
            if (!e.retryable && attempt + 1 >= cfg.max_prompt_retries) throw;
            continue;
        }
        try {
            memory_out = extract_json_array(text);
            return text;
        } catch (const SimulationError& e) {
            last_error = e.what();
        }
    }
    throw SimulationError("model output unparsable after " +
                          std::to_string(cfg.max_prompt_retries) + " attempts: " + last_error);
}

Tool tool_from_memory_name(const std::string& name) {
    if (name == "code_generator") return Tool::CallSubAgent;
    if (name == "read") return Tool::Read;
    if (name == "write") return Tool::Write;
    if (name == "final_answer") return Tool::FinalAnswer;
    throw SimulationError("unknown tool in memory: " + name);
}

// Converts one appendix-format memory list into trajectory steps.
// Main-agent memories get their tool responses replaced by the fixed
// sub-agent return string; sub-agent memories keep model observations.
std::vector<TrajectoryStep> steps_from_memory(const ordered_json& memory, AgentKind agent) {
    std::vector<TrajectoryStep> steps;
    for (const auto& entry : memory) {
        std::string role = entry.value("role", "");
        std::string content = entry.value("content", "");
        if (role == "system_prompt") {
            steps.push_back({Role::System, StepKind::SystemPrompt, content, std::nullopt,
                             Provenance::Generated, nullptr});
        } else if (role == "user") {
            steps.push_back({Role::User, StepKind::TaskBrief, content, std::nullopt,
                             Provenance::Generated, nullptr});
        } else if (role == "gpt") {
            if (!content.empty()) {
                steps.push_back({Role::Agent, StepKind::Think, content, std::nullopt,
                                 Provenance::Generated, nullptr});
            }
            if (entry.contains("tool-call") && !entry.at("tool-call").is_null()) {
                const auto& call = entry.at("tool-call");
                ToolCall tc;
                tc.tool = tool_from_memory_name(call.value("function_name", ""));
                for (const auto& [k, v] : call.at("arguments").items()) {
                    tc.arguments[k] = v.is_string() ? v.get<std::string>() : v.dump();
                }
                steps.push_back({Role::Agent, StepKind::Action, "", std::move(tc),
                                 Provenance::Generated, nullptr});
            }
        } else if (role == "tool-response") {
            if (agent == AgentKind::Main) continue;  // synthesized by the pipeline instead
            steps.push_back({Role::ToolResponse, StepKind::Observation, content, std::nullopt,
                             Provenance::Generated, nullptr});
        } else {
            throw SimulationError("unknown memory role: " + role);
        }
    }
    return steps;
}

}  // namespace

Trajectory simulate_main_agent(const RepoSnapshot& snap, const RepoAnalysis& analysis,
                               GenerationBackend& backend, const SimulationConfig& cfg) {
    GenerationRequest req;
    req.messages.emplace_back("user", prompts::build_main_agent_prompt(snap, analysis));
    req.temperature = cfg.temperature;
    req.seed = cfg.seed;

    ordered_json memory;
    generate_with_retries(backend, req, cfg, memory);

    Trajectory t;
    t.agent = AgentKind::Main;
    t.repo_id = snap.repo_id;
    t.steps = steps_from_memory(memory, AgentKind::Main);

    // Synthesize the success observation after every delegation.
    std::vector<TrajectoryStep> steps;
    std::vector<std::string> called;
    for (auto& step : t.steps) {
        bool is_call = step.kind == StepKind::Action && step.tool_call &&
                       step.tool_call->tool == Tool::CallSubAgent;
        std::string path;
        if (is_call) {
            path = step.tool_call->arguments.count("file_path")
                       ? step.tool_call->arguments.at("file_path")
                       : "";
            called.push_back(path);
        }
        steps.push_back(std::move(step));
        if (is_call) {
            steps.push_back({Role::ToolResponse, StepKind::Observation,
                             prompts::sub_agent_return(path), std::nullopt, Provenance::Grounded,
                             nullptr});
        }
    }
    t.steps = std::move(steps);

    if (called != analysis.order.files) {
        throw SimulationError("main agent did not delegate every file in implementation order");
    }
    auto report = validate_trajectory(t);
    if (!report.ok()) {
        throw SimulationError("main trajectory invalid: " + report.violations[0].message);
    }
    return t;
}

Trajectory simulate_sub_agent(const std::map<std::string, std::string>& task_args,
                              const RepoSnapshot& snap, const RepoAnalysis& analysis,
                              GenerationBackend& backend, const SimulationConfig& cfg) {
    auto it = task_args.find("file_path");
    if (it == task_args.end() || !snap.contains(it->second)) {
        throw SimulationError("sub-agent task file_path missing from snapshot");
    }
    const std::string& target = it->second;

    // Dependencies of the target, as the appendix supplies them: the files
    // the target imports, in graph edge order.
    std::vector<std::pair<std::string, std::string>> related;
    std::set<std::string> seen;
    for (const auto& [a, b] : analysis.graph.edges) {
        if (a == target && seen.insert(b).second) related.emplace_back(b, snap.bytes_of(b));
    }

    ordered_json args;
    for (const auto& [k, v] : task_args) args[k] = v;

    GenerationRequest req;
    req.messages.emplace_back(
        "user", prompts::build_sub_agent_prompt(args, snap.bytes_of(target), related));
    req.temperature = cfg.temperature;
    req.seed = cfg.seed ^ (std::hash<std::string>{}(target) | 1);

    ordered_json memory;
    generate_with_retries(backend, req, cfg, memory);

    Trajectory t;
    t.agent = AgentKind::Sub;
    t.repo_id = snap.repo_id;
    t.target_file = target;
    t.steps = steps_from_memory(memory, AgentKind::Sub);

    int reads = 0;
    for (const auto& step : t.steps) {
        if (step.kind == StepKind::Action && step.tool_call &&
            step.tool_call->tool == Tool::Read) {
            ++reads;
        }
    }
    if (reads > cfg.max_read_calls_per_file) {
        throw SimulationError("sub agent exceeded max_read_calls_per_file");
    }
    auto report = validate_trajectory(t);
    if (!report.ok()) {
        throw SimulationError("sub trajectory invalid: " + report.violations[0].message);
    }
    return t;
}

namespace {

void ground_steps(std::vector<TrajectoryStep>& steps, const RepoSnapshot& snap,
                  const ImplementationOrder* order, const std::string& reader_file,
                  GroundingReport& report) {
    std::map<std::string, std::size_t> rank;
    if (order) {
        for (std::size_t i = 0; i < order->files.size(); ++i) rank[order->files[i]] = i;
    }

    for (std::size_t i = 0; i < steps.size(); ++i) {
        auto& step = steps[i];
        if (step.kind != StepKind::Action || !step.tool_call) {
            if (step.sub_trajectory) {
                // handled by the caller at the action that owns it
            }
            continue;
        }
        auto& call = *step.tool_call;
        if (call.tool == Tool::Read) {
            const std::string& path = call.arguments.count("file_to_read")
                                          ? call.arguments.at("file_to_read")
                                          : "";
            if (!snap.contains(path)) {
                throw GroundingError("read of a path absent from the snapshot: " + path);
            }
            // locate the matching observation
            for (std::size_t k = i + 1; k < steps.size(); ++k) {
                if (steps[k].kind == StepKind::Action) break;
                if (steps[k].kind == StepKind::Observation) {
                    if (steps[k].content != snap.bytes_of(path)) {
                        steps[k].content = snap.bytes_of(path);
                        steps[k].provenance = Provenance::Grounded;
                        ++report.reads_corrected;
                    }
                    break;
                }
            }
            if (order && !reader_file.empty() && rank.count(path) && rank.count(reader_file) &&
                rank.at(path) > rank.at(reader_file)) {
                report.forward_reads.emplace_back(reader_file, path);
            }
        } else if (call.tool == Tool::Write) {
            const std::string& path =
                call.arguments.count("file_path") ? call.arguments.at("file_path") : "";
            if (!snap.contains(path)) {
                throw GroundingError("write to a path absent from the snapshot: " + path);
            }
            const std::string& truth = snap.bytes_of(path);
            if (call.arguments.at("content") != truth) {
                call.arguments["content"] = truth;
                step.provenance = Provenance::Grounded;
                ++report.writes_corrected;
            }
            std::string canonical = "Successfully wrote " + std::to_string(truth.size()) +
                                    " bytes to " + path + ".";
            for (std::size_t k = i + 1; k < steps.size(); ++k) {
                if (steps[k].kind == StepKind::Action) break;
                if (steps[k].kind == StepKind::Observation) {
                    if (steps[k].content != canonical) {
                        steps[k].content = canonical;
                        steps[k].provenance = Provenance::Grounded;
                        ++report.writes_corrected;
                    }
                    break;
                }
            }
        }
        // CallSubAgent and FinalAnswer carry nothing to ground.
    }
}

}  // namespace

std::pair<Trajectory, GroundingReport> ground_trajectory(const Trajectory& t,
                                                         const RepoSnapshot& snap,
                                                         const ImplementationOrder* order) {
    Trajectory out = t;
    GroundingReport report;
    std::string reader = out.target_file ? *out.target_file : "";
    ground_steps(out.steps, snap, order, reader, report);
    for (auto& step : out.steps) {
        if (step.sub_trajectory) {
            auto [sub, sub_report] = ground_trajectory(*step.sub_trajectory, snap, order);
            step.sub_trajectory = std::make_shared<Trajectory>(std::move(sub));
            report.reads_corrected += sub_report.reads_corrected;
            report.writes_corrected += sub_report.writes_corrected;
            for (auto& fr : sub_report.forward_reads) report.forward_reads.push_back(fr);
        }
    }
    return {std::move(out), std::move(report)};
}

Trajectory synthesize_repo_trajectory(const RepoSnapshot& snap, const RepoAnalysis& analysis,
                                      GenerationBackend& backend, const SimulationConfig& cfg) {
    Trajectory main = simulate_main_agent(snap, analysis, backend, cfg);

    for (auto& step : main.steps) {
        if (step.kind != StepKind::Action || !step.tool_call ||
            step.tool_call->tool != Tool::CallSubAgent) {
            continue;
        }
        Trajectory sub =
            simulate_sub_agent(step.tool_call->arguments, snap, analysis, backend, cfg);
        auto [grounded, report] = ground_trajectory(sub, snap, &analysis.order);
        auto validation = validate_trajectory(grounded);
        if (!validation.ok()) {
            throw SimulationError("grounded sub trajectory invalid: " +
                                  validation.violations[0].message);
        }
        step.sub_trajectory = std::make_shared<Trajectory>(std::move(grounded));
    }

    auto validation = validate_trajectory(main);
    if (!validation.ok()) {
        throw SimulationError("repo trajectory invalid: " + validation.violations[0].message);
    }
    return main;
}

}  // namespace repoforge
