#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace repoforge {

/// Immutable capture of a repository's files; the ground-truth terminal
/// state everything downstream is checked against.
struct RepoSnapshot {
    std::string repo_id;
    std::filesystem::path root;
    // repo-relative path (normalized, '/'-separated) -> byte content
    std::map<std::string, std::string> files;
    std::uint64_t total_bytes = 0;

    std::size_t file_count() const { return files.size(); }
    bool contains(const std::string& path) const { return files.count(path) != 0; }
    const std::string& bytes_of(const std::string& path) const;
    std::vector<std::string> paths() const;
};

struct FilterConfig {
    int min_files = 2;
    int max_files = 64;
    std::uint64_t min_total_bytes = 1024;
    std::uint64_t max_total_bytes = 262144;
    std::set<std::string> include_extensions = {"py"};
};

struct ScanWarning {
    std::string path;
    std::string reason;
};

struct FilterDecision {
    bool accepted = false;
    std::string reason;  // violated bound when rejected, empty when accepted
};

/// Normalize to forward slashes with no '.'/'..' segments. Returns nullopt
/// for paths that escape the root.
std::optional<std::string> normalize_rel_path(const std::filesystem::path& rel);

RepoSnapshot scan_repository(const std::filesystem::path& root, const FilterConfig& cfg,
                             std::vector<ScanWarning>* warnings = nullptr);

FilterDecision filter_snapshot(const RepoSnapshot& snap, const FilterConfig& cfg);

}  // namespace repoforge
