#include "repoforge/prompts.hpp"

#include <sstream>

namespace repoforge::prompts {

std::string sub_agent_return(const std::string& file_path) {
    return file_path + " has been generated successfully";
}

std::string render_file_blocks(const std::vector<std::pair<std::string, std::string>>& files) {
    std::ostringstream out;
    for (const auto& [path, content] : files) {
        out << kFileMarker << path << " ---\n" << content;
        if (content.empty() || content.back() != '\n') out << "\n";
    }
    return out.str();
}

std::vector<std::pair<std::string, std::string>> parse_file_blocks(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> out;
    const std::string marker = kFileMarker;
    std::size_t pos = text.find(marker);
    while (pos != std::string::npos) {
        std::size_t name_start = pos + marker.size();
        std::size_t name_end = text.find(" ---\n", name_start);
        if (name_end == std::string::npos) break;
        std::string path = text.substr(name_start, name_end - name_start);
        std::size_t body_start = name_end + 5;
        std::size_t next = text.find(marker, body_start);
        std::string body = text.substr(
            body_start, next == std::string::npos ? std::string::npos : next - body_start);
        out.emplace_back(std::move(path), std::move(body));
        pos = next;
    }
    return out;
}

std::string extract_between(const std::string& text, const std::string& begin,
                            const std::string& end) {
    auto b = text.find(begin);
    if (b == std::string::npos) return "";
    b += begin.size();
    if (b < text.size() && text[b] == '\n') ++b;
    auto e = text.find(end, b);
    if (e == std::string::npos) return "";
    return text.substr(b, e - b);
}

std::string main_agent_system_prompt() {
    return "You are a helpful assistant acting as the main agent of a software project. "
           "You plan the repository implementation and delegate each file to a sub-agent.\n"
           "Tool usage:\n"
           "  Arguments of sub-agent: {requirement_for_repo, tree_structure, file_name, "
           "file_path, requirement}\n"
           "  Return of sub-agent: {file_path} has been generated successfully";
}

std::string sub_agent_system_prompt() {
    return "You are 'code_generator', an expert software engineer.\n"
           "Your goal is to implement robust, production-ready code from a given requirement.\n\n"
           "Workflows:\n"
           "1. ANALYZE the file requirement and its place in the repo structure.\n"
           "2. IDENTIFY dependencies. If you need to use external classes/functions, use the "
           "`read` tool to check their definitions first.\n"
           "3. PLAN the implementation details (class structure, methods, logic).\n"
           "4. WRITE the code using the `write` tool.\n\n"
           "Tools:\n"
           "- read(file_to_read): Returns the definition/signature of a file. Usage: When you "
           "need to understand how to invoke another module.\n"
           "- write(file_path, content): Writes the code to the file system.\n"
           "- final_answer(answer): Reports completion.";
}

std::string build_main_agent_prompt(const RepoSnapshot& snap, const RepoAnalysis& analysis) {
    std::ostringstream out;
    out << "A github repo:\n" << kRepoCodeBegin << "\n";
    std::vector<std::pair<std::string, std::string>> files(snap.files.begin(), snap.files.end());
    out << render_file_blocks(files);
    out << kRepoCodeEnd << "\n\n";

    out << "The tree structure of repo:\n" << kFileTreeBegin << "\n";
    out << analysis.tree.render();
    out << kFileTreeEnd << "\n\n";

    out << "The implementation order of files:\n" << kOrderBegin << "\n";
    for (std::size_t i = 0; i < analysis.order.files.size(); ++i) {
        out << (i + 1) << ". " << analysis.order.files[i] << "\n";
    }
    out << kOrderEnd << "\n\n";

    out << "Given the repo code and the tree structure of the repo, I want to use it to "
           "construct multi-agent synthetic data. The main agent needs to generate the "
           "implementation plan for the repo based on the detailed requirement document of the "
           "repo provided by the user, including the tree structure of the repo and the "
           "implementation order of files. It will also call sub-agents to realize the code "
           "generation of each file.\n\n"
           "Return strictly a JSON list representing the memory of the main agent. Entries use "
           "the roles system_prompt, user, gpt and tool-response; gpt entries may carry a "
           "\"tool-call\" object with function_name \"code_generator\" and arguments "
           "{requirement_for_repo, tree_structure, file_name, file_path, requirement}.\n"
           "The user entry is a detailed requirement document for the repo, but DO NOT mention "
           "implementation details of the repo.\n"
           "The memory of the main agent should cover the planning of all the files in the "
           "repo, and call code_generator to generate all these files in the implementation "
           "order given above.";
    return out.str();
}

std::string build_sub_agent_prompt(const nlohmann::ordered_json& task_args,
                                   const std::string& golden_source,
                                   const std::vector<std::pair<std::string, std::string>>& related) {
    std::string file_name = task_args.value("file_name", "");
    std::ostringstream out;
    out << "I have a GitHub repo, and I want to use it to construct multi-agent synthetic "
           "data. Your task is to generate a JSON list representing the simulated sub-agent's "
           "memory. This memory should chronicle the step-by-step thought process of creating "
           "a specific file from scratch, based on a user's requirement.\n\n"
           "Crucially, you are simulating the *creation* process, not explaining or "
           "refactoring existing code. The agent you are simulating does not have access to "
           "the final source code at the beginning; it must figure out how to write it.\n\n"
           "Entries use the roles system_prompt, user, gpt and tool-response; gpt entries may "
           "carry a \"tool-call\" object with function_name \"read\" (arguments "
           "{file_to_read}), \"write\" (arguments {file_path, content}) or \"final_answer\" "
           "(arguments {answer}).\n\n";

    out << "*   **Information to construct the user prompt:**\n"
        << kTaskArgsBegin << "\n"
        << task_args.dump(2) << "\n"
        << kTaskArgsEnd << "\n\n";

    out << "*   **The Golden Source Code for `" << file_name
        << "` (The Goal):** This is the target code the simulated agent should ultimately "
           "produce. You must not assume the agent has seen this code beforehand. Use it as "
           "the \"ground truth\" to form a plausible thinking path that leads to this exact "
           "implementation.\n"
        << kGoldenBegin << "\n"
        << golden_source;
    if (golden_source.empty() || golden_source.back() != '\n') out << "\n";
    out << kGoldenEnd << "\n\n";

    out << "*   **Source code of related files (Dependencies):** This is the content the "
           "agent will see when it uses the `read` tool on other files.\n"
        << kRelatedBegin << "\n"
        << render_file_blocks(related) << kRelatedEnd << "\n\n";

    out << "### CRITICAL INSTRUCTION: THOUGHT PROCESS DIVERSITY\n"
           "The content fields in the gpt turns must contain highly intelligent, specific, "
           "and varied thought processes. Mention the actual class names, variable names, or "
           "function names found in the target source as part of the reasoning and planning.\n\n"
           "# Output Format\n"
           "Return strictly a JSON list representing the memory.";
    return out.str();
}

std::string build_refinement_prompt(const std::string& reference_code,
                                    const std::string& reasoning_context,
                                    const std::string& target_block) {
    std::ostringstream out;
    out << "You are an expert software engineer. Your task is to simulate the human reasoning "
           "process required to solve a programming problem.\n\n"
           "**The Goal:**\n"
           "You need to rewrite a specific part of a reasoning chain (the \"Target Block\"). "
           "The goal is to make the reasoning logic more precise, detailed, and aligned with "
           "the correct solution, WITHOUT breaking the narrative flow.\n\n"
           "**Input Data:**\n"
           "1. **Reference Source Code:** (The correct answer, for your understanding ONLY)\n"
        << kReferenceBegin << "\n"
        << reference_code;
    if (reference_code.empty() || reference_code.back() != '\n') out << "\n";
    out << kReferenceEnd << "\n\n"
        << "2. **Full Reasoning Context:** (The story so far)\n"
        << kContextBegin << "\n"
        << reasoning_context;
    if (reasoning_context.empty() || reasoning_context.back() != '\n') out << "\n";
    out << kContextEnd << "\n\n"
        << "3. **Target Block to Rewrite:** (The weak step needs replacing)\n"
        << "<replace>\n"
        << target_block;
    if (target_block.empty() || target_block.back() != '\n') out << "\n";
    out << "</replace>\n\n"
        << "**CRITICAL INSTRUCTIONS:**\n"
           "1. The \"Time Travel\" Rule: act as if you are solving this problem for the first "
           "time. Do not mention \"Reference Code\", \"Provided Solution\", or \"Ground "
           "Truth\".\n"
           "2. The \"Invisible Stitch\" Rule: your output will be copy-pasted directly into "
           "the original text to replace the old block. Never use phrases like \"In this "
           "refinement...\", \"Correcting the previous step...\", \"Here is the better "
           "reasoning...\", or \"Let's refine this\".\n"
           "3. Tone & Style: first-person singular, present tense, technical and deductive.\n\n"
           "Now, generate the replacement block.\n\n"
           "<think>\n[Your analysis of the gap between the reasoning and the code]\n</think>\n\n"
           "<refine>\n[The seamless, first-person reasoning stream ONLY]\n</refine>";
    return out.str();
}

}  // namespace repoforge::prompts
