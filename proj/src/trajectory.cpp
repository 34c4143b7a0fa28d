#include "repoforge/trajectory.hpp"

#include <algorithm>

#include "repoforge/errors.hpp"

namespace repoforge {

std::string to_string(Tool t) {
    switch (t) {
        case Tool::Read: return "read";
        case Tool::Write: return "write";
        case Tool::CallSubAgent: return "call_sub_agent";
        case Tool::FinalAnswer: return "final_answer";
    }
    return "?";
}

std::string to_string(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Agent: return "agent";
        case Role::ToolResponse: return "tool_response";
    }
    return "?";
}

std::string to_string(StepKind k) {
    switch (k) {
        case StepKind::Think: return "think";
        case StepKind::Action: return "action";
        case StepKind::Observation: return "observation";
        case StepKind::TaskBrief: return "task_brief";
        case StepKind::SystemPrompt: return "system_prompt";
    }
    return "?";
}

std::string to_string(Provenance p) {
    return p == Provenance::Generated ? "generated" : "grounded";
}

std::string to_string(AgentKind a) { return a == AgentKind::Main ? "main" : "sub"; }

namespace {

template <typename E>
E enum_from_string(const std::string& s, std::initializer_list<std::pair<const char*, E>> table,
                   const char* what) {
    for (const auto& [name, value] : table) {
        if (s == name) return value;
    }
    throw ConfigError(std::string("unknown ") + what + ": " + s);
}

Tool tool_from_string(const std::string& s) {
    return enum_from_string<Tool>(s,
                                  {{"read", Tool::Read},
                                   {"write", Tool::Write},
                                   {"call_sub_agent", Tool::CallSubAgent},
                                   {"final_answer", Tool::FinalAnswer}},
                                  "tool");
}

Role role_from_string(const std::string& s) {
    return enum_from_string<Role>(s,
                                  {{"system", Role::System},
                                   {"user", Role::User},
                                   {"agent", Role::Agent},
                                   {"tool_response", Role::ToolResponse}},
                                  "role");
}

StepKind kind_from_string(const std::string& s) {
    return enum_from_string<StepKind>(s,
                                      {{"think", StepKind::Think},
                                       {"action", StepKind::Action},
                                       {"observation", StepKind::Observation},
                                       {"task_brief", StepKind::TaskBrief},
                                       {"system_prompt", StepKind::SystemPrompt}},
                                      "step kind");
}

Provenance provenance_from_string(const std::string& s) {
    return enum_from_string<Provenance>(
        s, {{"generated", Provenance::Generated}, {"grounded", Provenance::Grounded}},
        "provenance");
}

AgentKind agent_from_string(const std::string& s) {
    return enum_from_string<AgentKind>(s, {{"main", AgentKind::Main}, {"sub", AgentKind::Sub}},
                                       "agent kind");
}

}  // namespace

const std::vector<std::string>& ToolCall::schema_keys(Tool t) {
    static const std::vector<std::string> read_keys = {"file_to_read"};
    static const std::vector<std::string> write_keys = {"content", "file_path"};
    static const std::vector<std::string> sub_keys = {"file_name", "file_path", "requirement",
                                                      "requirement_for_repo", "tree_structure"};
    static const std::vector<std::string> final_keys = {"answer"};
    switch (t) {
        case Tool::Read: return read_keys;
        case Tool::Write: return write_keys;
        case Tool::CallSubAgent: return sub_keys;
        case Tool::FinalAnswer: return final_keys;
    }
    return read_keys;
}

ValidationReport validate_trajectory(const Trajectory& t) {
    ValidationReport report;
    auto add = [&](std::size_t i, std::string msg) {
        report.violations.push_back({i, std::move(msg)});
    };

    if (t.steps.size() < 2) {
        add(0, "trajectory must start with a system prompt and a task brief");
    } else {
        if (t.steps[0].kind != StepKind::SystemPrompt) add(0, "first step must be system_prompt");
        if (t.steps[1].kind != StepKind::TaskBrief) add(1, "second step must be task_brief");
    }

    int writes_to_target = 0;
    std::optional<std::size_t> open_action;  // awaiting its observation
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        const auto& step = t.steps[i];

        if (step.kind == StepKind::Action) {
            if (!step.tool_call) {
                add(i, "action step missing tool_call");
            } else {
                const auto& keys = ToolCall::schema_keys(step.tool_call->tool);
                std::vector<std::string> have;
                for (const auto& [k, _] : step.tool_call->arguments) have.push_back(k);
                if (have != keys) {
                    add(i, "tool_call arguments do not match the " +
                               to_string(step.tool_call->tool) + " schema");
                }
                if (step.tool_call->tool == Tool::Write && t.agent == AgentKind::Sub &&
                    t.target_file &&
                    step.tool_call->arguments.count("file_path") &&
                    step.tool_call->arguments.at("file_path") == *t.target_file) {
                    ++writes_to_target;
                }
            }
            if (step.sub_trajectory &&
                (!step.tool_call || step.tool_call->tool != Tool::CallSubAgent)) {
                add(i, "sub_trajectory present on a non-call_sub_agent action");
            }
            if (open_action) {
                add(i, "previous action at step " + std::to_string(*open_action) +
                           " has no observation");
            }
            open_action = i;
        } else {
            if (step.tool_call) add(i, to_string(step.kind) + " step carries a tool_call");
            if (step.sub_trajectory) add(i, "sub_trajectory outside an action step");
            if (step.kind == StepKind::Observation) {
                if (step.role != Role::ToolResponse) {
                    add(i, "observation step must have role tool_response");
                }
                if (!open_action) {
                    add(i, "observation with no preceding action");
                } else {
                    open_action.reset();
                }
            }
        }

        if (step.sub_trajectory) {
            auto nested = validate_trajectory(*step.sub_trajectory);
            for (auto& v : nested.violations) {
                add(i, "nested: " + v.message + " (sub step " + std::to_string(v.step_index) + ")");
            }
        }
    }

    if (t.agent == AgentKind::Sub && t.target_file && writes_to_target != 1) {
        add(t.steps.size(), "sub trajectory must contain exactly one write to " + *t.target_file +
                                " (found " + std::to_string(writes_to_target) + ")");
    }
    if (t.agent == AgentKind::Main && t.target_file) {
        add(0, "main trajectory must not carry a target_file");
    }
    return report;
}

nlohmann::ordered_json trajectory_to_json(const Trajectory& t) {
    nlohmann::ordered_json j;
    j["agent"] = to_string(t.agent);
    auto steps = nlohmann::ordered_json::array();
    for (const auto& step : t.steps) {
        nlohmann::ordered_json js;
        js["role"] = to_string(step.role);
        js["kind"] = to_string(step.kind);
        js["content"] = step.content;
        if (step.tool_call) {
            nlohmann::ordered_json call;
            call["tool"] = to_string(step.tool_call->tool);
            nlohmann::ordered_json args;  // std::map keeps keys sorted
            for (const auto& [k, v] : step.tool_call->arguments) args[k] = v;
            call["arguments"] = std::move(args);
            js["tool_call"] = std::move(call);
        } else {
            js["tool_call"] = nullptr;
        }
        js["provenance"] = to_string(step.provenance);
        js["sub_trajectory"] =
            step.sub_trajectory ? trajectory_to_json(*step.sub_trajectory) : nlohmann::ordered_json(nullptr);
        steps.push_back(std::move(js));
    }
    j["steps"] = std::move(steps);
    j["target_file"] = t.target_file ? nlohmann::ordered_json(*t.target_file)
                                     : nlohmann::ordered_json(nullptr);
    j["repo_id"] = t.repo_id;
    return j;
}

Trajectory trajectory_from_json(const nlohmann::ordered_json& j) {
    Trajectory t;
    t.agent = agent_from_string(j.at("agent").get<std::string>());
    for (const auto& js : j.at("steps")) {
        TrajectoryStep step;
        step.role = role_from_string(js.at("role").get<std::string>());
        step.kind = kind_from_string(js.at("kind").get<std::string>());
        step.content = js.at("content").get<std::string>();
        if (!js.at("tool_call").is_null()) {
            ToolCall call;
            call.tool = tool_from_string(js.at("tool_call").at("tool").get<std::string>());
            for (const auto& [k, v] : js.at("tool_call").at("arguments").items()) {
                call.arguments[k] = v.get<std::string>();
            }
            step.tool_call = std::move(call);
        }
        step.provenance = provenance_from_string(js.at("provenance").get<std::string>());
        if (!js.at("sub_trajectory").is_null()) {
            step.sub_trajectory =
                std::make_shared<Trajectory>(trajectory_from_json(js.at("sub_trajectory")));
        }
        t.steps.push_back(std::move(step));
    }
    if (!j.at("target_file").is_null()) t.target_file = j.at("target_file").get<std::string>();
    t.repo_id = j.at("repo_id").get<std::string>();
    return t;
}

}  // namespace repoforge
