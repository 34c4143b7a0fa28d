#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "repoforge/trajectory.hpp"

#include "fixtures.hpp"

using namespace repoforge;

TEST_CASE("the calculator trajectory validates cleanly") {
    auto t = fixtures::calc_trajectory();
    auto report = validate_trajectory(t);
    for (const auto& v : report.violations) {
        INFO(v.step_index, ": ", v.message);
        CHECK(false);
    }
    CHECK(report.ok());
}

TEST_CASE("a think step carrying a tool_call is a violation at that index") {
    auto t = fixtures::calc_trajectory();
    ToolCall call;
    call.tool = Tool::Read;
    call.arguments = {{"file_to_read", "operations.py"}};
    t.steps[2].tool_call = call;  // row-1 think
    auto report = validate_trajectory(t);
    REQUIRE_FALSE(report.ok());
    bool found = false;
    for (const auto& v : report.violations) {
        if (v.step_index == 2 && v.message.find("tool_call") != std::string::npos) found = true;
    }
    CHECK(found);
}

TEST_CASE("dropping an internal observation reports exactly that violation") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        auto repo = fixtures::make_synthetic_repo(200 + trial);
        auto t = fixtures::random_main_trajectory(rng(), repo.snapshot, false);
        REQUIRE(validate_trajectory(t).ok());

        // Find the nested sub with a read, then drop its read observation so
        // two actions become adjacent.
        bool mutated = false;
        for (auto& step : t.steps) {
            if (!step.sub_trajectory) continue;
            auto sub = std::make_shared<Trajectory>(*step.sub_trajectory);
            for (std::size_t i = 0; i + 1 < sub->steps.size(); ++i) {
                if (sub->steps[i].kind == StepKind::Observation &&
                    sub->steps[i + 1].kind != StepKind::Observation &&
                    i + 1 < sub->steps.size() - 1) {
                    sub->steps.erase(sub->steps.begin() + static_cast<long>(i));
                    mutated = true;
                    break;
                }
            }
            if (mutated) {
                step.sub_trajectory = sub;
                break;
            }
        }
        if (!mutated) continue;  // trajectory had only trailing observations

        auto report = validate_trajectory(t);
        REQUIRE_FALSE(report.ok());
        for (const auto& v : report.violations) {
            CHECK(v.message.find("observation") != std::string::npos);
        }
    }
}

TEST_CASE("schema keys are enforced exactly") {
    auto t = fixtures::calc_sub_trajectory();
    t.steps[3].tool_call->arguments["extra"] = "nope";
    auto report = validate_trajectory(t);
    REQUIRE_FALSE(report.ok());
    CHECK(report.violations[0].message.find("schema") != std::string::npos);

    auto t2 = fixtures::calc_sub_trajectory();
    t2.steps[6].tool_call->arguments.erase("content");
    CHECK_FALSE(validate_trajectory(t2).ok());
}

TEST_CASE("sub trajectory must write its target exactly once") {
    auto t = fixtures::calc_sub_trajectory();
    t.steps[6].tool_call->arguments["file_path"] = "other.py";
    auto report = validate_trajectory(t);
    REQUIRE_FALSE(report.ok());
    bool found = false;
    for (const auto& v : report.violations) {
        if (v.message.find("exactly one write") != std::string::npos) found = true;
    }
    CHECK(found);
}

TEST_CASE("main trajectory must not carry a target_file") {
    auto t = fixtures::calc_trajectory();
    t.target_file = "main.py";
    CHECK_FALSE(validate_trajectory(t).ok());
}

TEST_CASE("first two steps must be system prompt then task brief") {
    auto t = fixtures::calc_trajectory();
    std::swap(t.steps[0], t.steps[1]);
    auto report = validate_trajectory(t);
    REQUIRE(report.violations.size() >= 2);
}

TEST_CASE("nested violations are surfaced with the nested prefix") {
    auto t = fixtures::calc_trajectory();
    auto sub = std::make_shared<Trajectory>(*t.steps[6].sub_trajectory);
    sub->steps[2].tool_call = ToolCall{Tool::Read, {{"file_to_read", "x"}}};
    t.steps[6].sub_trajectory = sub;
    auto report = validate_trajectory(t);
    REQUIRE_FALSE(report.ok());
    CHECK(report.violations[0].message.rfind("nested:", 0) == 0);
}

TEST_CASE("serialization round-trip is byte-identical") {
    auto t = fixtures::calc_trajectory();
    auto j = trajectory_to_json(t);
    auto decoded = trajectory_from_json(j);
    auto j2 = trajectory_to_json(decoded);
    CHECK(j.dump() == j2.dump());

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto repo = fixtures::make_synthetic_repo(seed);
        auto traj = fixtures::random_main_trajectory(seed, repo.snapshot, true);
        auto encoded = trajectory_to_json(traj).dump();
        CHECK(trajectory_to_json(trajectory_from_json(
                  nlohmann::ordered_json::parse(encoded))).dump() == encoded);
    }
}

TEST_CASE("tool spellings round-trip through json") {
    auto t = fixtures::calc_trajectory();
    auto j = trajectory_to_json(t);
    CHECK(j["steps"][3]["tool_call"]["tool"] == "call_sub_agent");
    CHECK(j["agent"] == "main");
    CHECK(j["steps"][4]["kind"] == "observation");
    CHECK(j["steps"][4]["role"] == "tool_response");
    CHECK(j["steps"][4]["provenance"] == "grounded");
}
