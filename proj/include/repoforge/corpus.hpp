#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "repoforge/trajectory.hpp"

#include "json.hpp"

namespace repoforge {

enum class RoleTag { System, User, AssistantThink, AssistantAction, ToolResponseTag };

std::string to_string(RoleTag tag);
RoleTag role_tag_from_string(const std::string& s);

struct Segment {
    RoleTag role_tag = RoleTag::System;
    std::string text;
    bool trainable = true;  // false exactly on tool_response segments
    AgentKind agent = AgentKind::Main;
};

struct FlattenedDocument {
    std::string repo_id;
    std::vector<Segment> segments;
    std::uint64_t approx_tokens = 0;

    /// Canonical text: segments joined as "<|{role_tag}|>\n{text}\n".
    std::string canonical_text() const;
};

struct FlattenOptions {
    bool keep_sub_system_prompt = true;
};

struct MaskSummary {
    std::uint64_t trainable_chars = 0;
    std::uint64_t masked_chars = 0;
    std::uint64_t masked_segment_count = 0;
};

struct MixtureSource {
    std::string name;
    std::string path;
    double share = 0.0;  // fraction of total tokens
};

struct MixtureSpec {
    std::vector<MixtureSource> sources;
    std::uint64_t total_token_budget = 0;
    std::uint64_t seed = 0;
};

struct SourceManifest {
    std::string name;
    std::uint64_t target_tokens = 0;
    std::uint64_t achieved_tokens = 0;
    std::uint64_t documents = 0;
};

struct CorpusManifest {
    std::vector<SourceManifest> sources;
    std::uint64_t total_tokens = 0;
    std::uint64_t total_documents = 0;
    nlohmann::ordered_json to_json() const;
};

/// Depth-first flattening: a delegation's segments are immediately followed
/// by its whole nested trajectory. Throws ConfigError on invalid trajectories.
FlattenedDocument flatten(const Trajectory& t, const FlattenOptions& opts = {});

MaskSummary compute_mask_summary(const FlattenedDocument& d);

nlohmann::ordered_json document_to_json(const FlattenedDocument& d);
FlattenedDocument document_from_json(const nlohmann::ordered_json& j);

void emit_jsonl(const std::vector<FlattenedDocument>& docs, const std::filesystem::path& path);
std::vector<FlattenedDocument> read_jsonl(const std::filesystem::path& path);

std::pair<std::vector<FlattenedDocument>, CorpusManifest> mix_corpus(const MixtureSpec& spec);

struct TokenDistribution {
    // category key: "main_think", "main_action", "main_response",
    //               "sub_think", "sub_action", "sub_response"
    std::map<std::string, std::uint64_t> by_category;
    std::map<std::string, std::uint64_t> tokens_per_repo;
    std::uint64_t total_tokens = 0;
    std::uint64_t documents = 0;
    nlohmann::ordered_json to_json() const;
};

TokenDistribution corpus_stats(const std::filesystem::path& corpus_jsonl);

}  // namespace repoforge
