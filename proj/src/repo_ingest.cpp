#include "repoforge/repo_ingest.hpp"

#include <algorithm>
#include <fstream>

#include "repoforge/errors.hpp"

namespace fs = std::filesystem;

namespace repoforge {

namespace {

bool is_valid_utf8(const std::string& s) {
    std::size_t i = 0;
    const auto n = s.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        std::size_t extra;
        if (c < 0x80) {
            extra = 0;
        } else if ((c & 0xE0) == 0xC0) {
            extra = 1;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
        } else if ((c & 0xF8) == 0xF0) {
            extra = 3;
        } else {
            return false;
        }
        if (i + extra >= n) return false;
        for (std::size_t k = 1; k <= extra; ++k) {
            if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
        }
        i += extra + 1;
    }
    return true;
}

std::string extension_of(const std::string& path) {
    auto slash = path.find_last_of('/');
    auto base = slash == std::string::npos ? path : path.substr(slash + 1);
    auto dot = base.find_last_of('.');
    if (dot == std::string::npos || dot == 0) return "";
    return base.substr(dot + 1);
}

}  // namespace

const std::string& RepoSnapshot::bytes_of(const std::string& path) const {
    auto it = files.find(path);
    if (it == files.end()) throw IoError("no such file in snapshot: " + path);
    return it->second;
}

std::vector<std::string> RepoSnapshot::paths() const {
    std::vector<std::string> out;
    out.reserve(files.size());
    for (const auto& [p, _] : files) out.push_back(p);
    return out;
}

std::optional<std::string> normalize_rel_path(const fs::path& rel) {
    std::vector<std::string> parts;
    for (const auto& part : rel) {
        auto s = part.generic_string();
        if (s.empty() || s == ".") continue;
        if (s == "..") {
            if (parts.empty()) return std::nullopt;
            parts.pop_back();
            continue;
        }
        parts.push_back(s);
    }
    if (parts.empty()) return std::nullopt;
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += '/';
        out += parts[i];
    }
    return out;
}

RepoSnapshot scan_repository(const fs::path& root, const FilterConfig& cfg,
                             std::vector<ScanWarning>* warnings) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw IoError("not a readable directory: " + root.string());
    }

    auto warn = [&](std::string path, std::string reason) {
        if (warnings) warnings->push_back({std::move(path), std::move(reason)});
    };

    RepoSnapshot snap;
    snap.repo_id = root.filename().string();
    snap.root = root;

    fs::recursive_directory_iterator it(
        root, fs::directory_options::skip_permission_denied, ec);
    if (ec) throw IoError("cannot iterate " + root.string() + ": " + ec.message());

    for (auto end = fs::recursive_directory_iterator(); it != end; it.increment(ec)) {
        if (ec) {
            warn(root.string(), "iteration error: " + ec.message());
            break;
        }
        const auto& entry = *it;
        if (entry.is_symlink(ec)) {
            // Symlinks (and thus any cycles they could form) are skipped.
            warn(entry.path().string(), "symlink skipped");
            if (entry.is_directory(ec)) it.disable_recursion_pending();
            continue;
        }
        if (!entry.is_regular_file(ec)) continue;

        auto rel = fs::relative(entry.path(), root, ec);
        if (ec) continue;
        auto normalized = normalize_rel_path(rel);
        if (!normalized) continue;
        if (!cfg.include_extensions.count(extension_of(*normalized))) continue;

        std::ifstream in(entry.path(), std::ios::binary);
        if (!in) {
            warn(*normalized, "unreadable");
            continue;
        }
        std::string content((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
        if (!is_valid_utf8(content)) {
            warn(*normalized, "not valid UTF-8, excluded");
            continue;
        }
        snap.total_bytes += content.size();
        snap.files.emplace(std::move(*normalized), std::move(content));
    }
    return snap;
}

FilterDecision filter_snapshot(const RepoSnapshot& snap, const FilterConfig& cfg) {
    const auto n = static_cast<long long>(snap.file_count());
    if (n < cfg.min_files) return {false, "too few files"};
    if (n > cfg.max_files) return {false, "too many files"};
    if (snap.total_bytes < cfg.min_total_bytes) return {false, "too few bytes"};
    if (snap.total_bytes > cfg.max_total_bytes) return {false, "too many bytes"};
    return {true, ""};
}

}  // namespace repoforge
