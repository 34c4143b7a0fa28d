#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "repoforge/repo_ingest.hpp"

#include "json.hpp"

namespace repoforge {

struct FileTreeNode {
    std::string name;
    bool is_file = false;
    std::vector<FileTreeNode> children;  // sorted by name, dirs and files mixed
};

struct FileTree {
    FileTreeNode root;  // name = "."
    std::string render() const;  // deterministic indented listing
    std::vector<std::string> leaves() const;
};

struct ImportReference {
    std::string module;                 // dotted module string as written
    std::optional<std::string> target;  // repo file it resolves to, nullopt = external
    int line = 0;
};

struct DependencyGraph {
    std::vector<std::string> nodes;                            // sorted
    std::vector<std::pair<std::string, std::string>> edges;    // dependent -> dependee, sorted
    std::vector<std::string> unresolved;                       // external module strings, sorted unique
};

struct MethodSig {
    std::string name;
    std::vector<std::string> params;
    bool has_docstring = false;
};

struct ClassSig {
    std::string name;
    std::vector<MethodSig> methods;
    bool has_docstring = false;
};

struct FileSkeleton {
    std::string path;
    std::vector<ClassSig> classes;
    std::vector<MethodSig> functions;
    std::string module_docstring;
};

struct ImplementationOrder {
    std::vector<std::string> files;  // dependees before dependents
    std::vector<std::vector<std::string>> cycle_groups;  // SCCs of size > 1
};

struct RepoAnalysis {
    std::string repo_id;
    std::string root;
    FileTree tree;
    DependencyGraph graph;
    std::vector<FileSkeleton> skeletons;  // ordered by path
    ImplementationOrder order;
};

FileTree build_file_tree(const RepoSnapshot& snap);

/// Parses import statements from one file and resolves them against the
/// snapshot's file set. Throws AnalysisError on unparsable source.
std::vector<ImportReference> extract_imports(const std::string& path, const std::string& source,
                                             const RepoSnapshot& snap);

struct AnalysisWarning {
    std::string path;
    std::string reason;
};

DependencyGraph build_dependency_graph(const RepoSnapshot& snap,
                                       std::vector<AnalysisWarning>* warnings = nullptr);

FileSkeleton extract_skeleton(const std::string& path, const std::string& source);

ImplementationOrder plan_order(const DependencyGraph& graph);

RepoAnalysis analyze_repo(const RepoSnapshot& snap,
                          std::vector<AnalysisWarning>* warnings = nullptr);

nlohmann::ordered_json analysis_to_json(const RepoAnalysis& a);
RepoAnalysis analysis_from_json(const nlohmann::ordered_json& j);

}  // namespace repoforge
