#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace repoforge {

enum class Tool { Read, Write, CallSubAgent, FinalAnswer };
enum class Role { System, User, Agent, ToolResponse };
enum class StepKind { Think, Action, Observation, TaskBrief, SystemPrompt };
enum class Provenance { Generated, Grounded };
enum class AgentKind { Main, Sub };

std::string to_string(Tool t);
std::string to_string(Role r);
std::string to_string(StepKind k);
std::string to_string(Provenance p);
std::string to_string(AgentKind a);

struct ToolCall {
    Tool tool = Tool::Read;
    std::map<std::string, std::string> arguments;

    /// The exact argument keys each tool's schema requires.
    static const std::vector<std::string>& schema_keys(Tool t);
};

struct Trajectory;

struct TrajectoryStep {
    Role role = Role::Agent;
    StepKind kind = StepKind::Think;
    std::string content;
    std::optional<ToolCall> tool_call;
    Provenance provenance = Provenance::Generated;
    std::shared_ptr<Trajectory> sub_trajectory;  // only on CallSubAgent actions
};

struct Trajectory {
    AgentKind agent = AgentKind::Main;
    std::vector<TrajectoryStep> steps;
    std::optional<std::string> target_file;  // Sub only
    std::string repo_id;
};

struct Violation {
    std::size_t step_index;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

/// Checks every schema invariant; total, never throws.
ValidationReport validate_trajectory(const Trajectory& t);

nlohmann::ordered_json trajectory_to_json(const Trajectory& t);
Trajectory trajectory_from_json(const nlohmann::ordered_json& j);

}  // namespace repoforge
