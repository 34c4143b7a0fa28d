#pragma once

#include <string>
#include <vector>

#include "repoforge/static_analysis.hpp"

#include "json.hpp"

namespace repoforge::prompts {

// Section delimiters shared by the prompt builders and the simulated
// backend that parses them back out.
inline constexpr const char* kRepoCodeBegin = "<<<REPO_CODE>>>";
inline constexpr const char* kRepoCodeEnd = "<<<END_REPO_CODE>>>";
inline constexpr const char* kFileTreeBegin = "<<<FILE_TREE>>>";
inline constexpr const char* kFileTreeEnd = "<<<END_FILE_TREE>>>";
inline constexpr const char* kOrderBegin = "<<<IMPLEMENTATION_ORDER>>>";
inline constexpr const char* kOrderEnd = "<<<END_IMPLEMENTATION_ORDER>>>";
inline constexpr const char* kTaskArgsBegin = "<<<TASK_ARGS>>>";
inline constexpr const char* kTaskArgsEnd = "<<<END_TASK_ARGS>>>";
inline constexpr const char* kGoldenBegin = "<<<GOLDEN_SOURCE>>>";
inline constexpr const char* kGoldenEnd = "<<<END_GOLDEN_SOURCE>>>";
inline constexpr const char* kRelatedBegin = "<<<RELATED_FILES>>>";
inline constexpr const char* kRelatedEnd = "<<<END_RELATED_FILES>>>";
inline constexpr const char* kReferenceBegin = "<<<REFERENCE_CODE>>>";
inline constexpr const char* kReferenceEnd = "<<<END_REFERENCE_CODE>>>";
inline constexpr const char* kContextBegin = "<<<REASONING_CONTEXT>>>";
inline constexpr const char* kContextEnd = "<<<END_REASONING_CONTEXT>>>";
inline constexpr const char* kFileMarker = "--- file: ";

/// The fixed sub-agent completion message injected as the Main agent's
/// observation for a finished delegation.
std::string sub_agent_return(const std::string& file_path);

/// Render "--- file: <path> ---\n<content>\n" blocks.
std::string render_file_blocks(const std::vector<std::pair<std::string, std::string>>& files);

std::string build_main_agent_prompt(const RepoSnapshot& snap, const RepoAnalysis& analysis);

std::string build_sub_agent_prompt(const nlohmann::ordered_json& task_args,
                                   const std::string& golden_source,
                                   const std::vector<std::pair<std::string, std::string>>& related);

std::string build_refinement_prompt(const std::string& reference_code,
                                    const std::string& reasoning_context,
                                    const std::string& target_block);

/// Extract the text between two markers; empty string when absent.
std::string extract_between(const std::string& text, const std::string& begin,
                            const std::string& end);

/// Parse "--- file: p ---" blocks back into (path, content) pairs.
std::vector<std::pair<std::string, std::string>> parse_file_blocks(const std::string& text);

/// The sub-agent system prompt (tool contract shown to the simulated agent).
std::string sub_agent_system_prompt();
std::string main_agent_system_prompt();

}  // namespace repoforge::prompts
