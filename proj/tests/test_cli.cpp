#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "repoforge/config.hpp"
#include "repoforge/errors.hpp"
#include "repoforge/pipeline.hpp"

#include "fixtures.hpp"

namespace fs = std::filesystem;
using namespace repoforge;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("rf_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << content;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// Two small repos that pass a relaxed filter.
void write_repos(const fs::path& root) {
    write_file(root / "calc" / "operations.py", fixtures::kOperationsSrc);
    write_file(root / "calc" / "main.py", fixtures::kMainSrc);
    write_file(root / "shapes" / "geometry.py",
               "def area(w, h):\n    return w * h\n\n\ndef perimeter(w, h):\n"
               "    return 2 * (w + h)\n");
    write_file(root / "shapes" / "report.py",
               "from geometry import area\n\nprint(area(3, 4))\n");
}

Config base_config(const fs::path& repos_root, const fs::path& out_dir) {
    nlohmann::ordered_json j = {
        {"repos", {{"root", repos_root.string()}}},
        {"out_dir", out_dir.string()},
        {"seed", 21},
        {"jobs", 2},
        {"filter", {{"min_total_bytes", 1}}},
        {"backends", {{"gen", {{"kind", "mock"}}}, {"score", {{"kind", "overlap"}}}}},
    };
    return config_from_json(j);
}

int run_cli(const std::string& args) {
    std::string bin = fs::exists("./repoforge") ? "./repoforge" : "repoforge";
    int rc = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("config validation names the offending key") {
    try {
        config_from_json({{"jobs", 0}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("jobs") != std::string::npos);
    }
    try {
        config_from_json({{"search", {{"k", 0}}}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("search.k") != std::string::npos);
    }
    CHECK_THROWS_AS(load_config("/nonexistent/rf.json"), ConfigError);
}

TEST_CASE("config defaults survive a minimal document") {
    auto cfg = config_from_json(nlohmann::ordered_json::object());
    CHECK(cfg.search.k == 2);
    CHECK(cfg.search.rounds == 3);
    CHECK(cfg.gen_backend.kind == "mock");
    CHECK(cfg.score_backend.kind == "ngram");
    CHECK(cfg.optimize_cot);

    auto seeded = config_from_json({{"seed", 77}});
    CHECK(seeded.simulate.seed == 77);
    CHECK(seeded.search.seed == 77);
    CHECK(seeded.mixture.seed == 77);
}

TEST_CASE("repo discovery lists subdirectories or falls back to the root") {
    TempDir dir;
    fs::create_directories(dir.path / "b_repo");
    fs::create_directories(dir.path / "a_repo");
    auto repos = discover_repos(dir.path);
    REQUIRE(repos.size() == 2);
    CHECK(repos[0].filename() == "a_repo");

    TempDir flat;
    write_file(flat.path / "x.py", "x = 1\n");
    auto self = discover_repos(flat.path);
    REQUIRE(self.size() == 1);
    CHECK(self[0] == flat.path);
}

TEST_CASE("the pipeline produces every artifact for healthy repos") {
    TempDir dir;
    write_repos(dir.path / "repos");
    auto cfg = base_config(dir.path / "repos", dir.path / "out");

    auto record = run_pipeline(cfg);
    CHECK(record.ok_count() == 2);
    for (const char* name : {"analysis", "trajectories", "optimized", "search_trace", "docs",
                             "corpus", "manifest", "stats", "failures"}) {
        REQUIRE(record.outputs.count(name) == 1);
        CHECK(fs::exists(record.outputs.at(name)));
    }
    CHECK(fs::exists(dir.path / "out" / "run_record.json"));

    auto corpus = read_jsonl(record.outputs.at("corpus"));
    CHECK(corpus.size() == 2);
    auto trajectories = read_trajectories(record.outputs.at("optimized"));
    REQUIRE(trajectories.size() == 2);
    for (const auto& t : trajectories) CHECK(validate_trajectory(t).ok());

    auto stats = nlohmann::ordered_json::parse(slurp(record.outputs.at("stats")));
    CHECK(stats.at("documents") == 2);
    CHECK(stats.at("total_tokens").get<std::uint64_t>() > 0);
}

TEST_CASE("an unparsable source fails that repo at static analysis only") {
    TempDir dir;
    write_repos(dir.path / "repos");
    write_file(dir.path / "repos" / "broken" / "a.py", "s = 'unterminated\n");
    write_file(dir.path / "repos" / "broken" / "b.py", "x = 1\n");
    auto cfg = base_config(dir.path / "repos", dir.path / "out");

    auto record = run_pipeline(cfg);
    CHECK(record.ok_count() == 2);
    bool found = false;
    for (const auto& r : record.repos) {
        if (r.repo_id == "broken") {
            found = true;
            CHECK(r.status == "failed");
            CHECK(r.stage == "static-analysis");
        }
    }
    CHECK(found);
    CHECK(slurp(dir.path / "out" / "failures.jsonl").find("broken") != std::string::npos);
}

TEST_CASE("an empty root yields a discarded repo and no corpus") {
    TempDir dir;
    fs::create_directories(dir.path / "repos");
    auto cfg = base_config(dir.path / "repos", dir.path / "out");
    auto record = run_pipeline(cfg);
    CHECK(record.ok_count() == 0);
    REQUIRE(record.repos.size() == 1);
    CHECK(record.repos[0].status == "discarded");
}

TEST_CASE("two runs with the same seed produce identical corpora") {
    TempDir dir;
    write_repos(dir.path / "repos");
    auto cfg1 = base_config(dir.path / "repos", dir.path / "out1");
    auto cfg2 = base_config(dir.path / "repos", dir.path / "out2");

    run_pipeline(cfg1);
    run_pipeline(cfg2);
    CHECK(slurp(dir.path / "out1" / "corpus.jsonl") == slurp(dir.path / "out2" / "corpus.jsonl"));
    CHECK(slurp(dir.path / "out1" / "manifest.json") == slurp(dir.path / "out2" / "manifest.json"));
}

TEST_CASE("cli exits 2 on config errors and 0 on a healthy run") {
    TempDir dir;
    write_repos(dir.path / "repos");

    auto bad = dir.path / "bad.json";
    write_file(bad, "{\"jobs\": 0}");
    CHECK(run_cli("run --config " + bad.string()) == 2);

    nlohmann::ordered_json j = {
        {"repos", {{"root", (dir.path / "repos").string()}}},
        {"out_dir", (dir.path / "out").string()},
        {"seed", 4},
        {"filter", {{"min_total_bytes", 1}}},
        {"backends", {{"gen", {{"kind", "mock"}}}, {"score", {{"kind", "overlap"}}}}},
    };
    auto good = dir.path / "good.json";
    write_file(good, j.dump());
    CHECK(run_cli("run --config " + good.string()) == 0);
    CHECK(fs::exists(dir.path / "out" / "corpus.jsonl"));
    CHECK(fs::exists(dir.path / "out" / "run_record.json"));
}

TEST_CASE("cli analyze fails when nothing is accepted") {
    TempDir dir;
    fs::create_directories(dir.path / "repos");
    int rc = run_cli("analyze --root " + (dir.path / "repos").string() + " --out " +
                     (dir.path / "a.jsonl").string());
    CHECK(rc != 0);

    write_repos(dir.path / "repos");
    // Default filter wants 1024 bytes; pass a config relaxing it.
    nlohmann::ordered_json j = {{"filter", {{"min_total_bytes", 1}}}};
    auto cfg = dir.path / "cfg.json";
    write_file(cfg, j.dump());
    rc = run_cli("analyze --config " + cfg.string() + " --root " +
                 (dir.path / "repos").string() + " --out " + (dir.path / "a.jsonl").string());
    CHECK(rc == 0);
    CHECK(fs::exists(dir.path / "a.jsonl"));
}
