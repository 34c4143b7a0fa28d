#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>
#include <sstream>

#include "repoforge/errors.hpp"
#include "repoforge/pysrc.hpp"
#include "repoforge/static_analysis.hpp"

#include "fixtures.hpp"

using namespace repoforge;

TEST_CASE("file tree leaves equal snapshot paths, rendering is stable") {
    auto snap = fixtures::calc_snapshot();
    auto tree = build_file_tree(snap);
    CHECK(tree.leaves() == snap.paths());
    CHECK(tree.render() == build_file_tree(snap).render());
    CHECK(tree.render() == "main.py\noperations.py\n");
}

TEST_CASE("empty snapshot gives an empty tree") {
    RepoSnapshot snap;
    auto tree = build_file_tree(snap);
    CHECK(tree.leaves().empty());
    CHECK(tree.render().empty());
}

TEST_CASE("nested tree checked against path-split reconstruction") {
    auto snap = fixtures::make_snapshot({{"a/b/c.py", "x = 1\n"}, {"a/d.py", "y = 2\n"}});
    auto tree = build_file_tree(snap);
    CHECK(tree.leaves() == snap.paths());

    // Reconstruct the rendering from the sorted path list alone.
    CHECK(tree.render() == "a/\n    b/\n        c.py\n    d.py\n");
}

TEST_CASE("calculator import resolves to an edge") {
    auto snap = fixtures::calc_snapshot();
    auto refs = extract_imports("main.py", snap.bytes_of("main.py"), snap);
    REQUIRE(refs.size() == 1);
    CHECK(refs[0].module == "operations");
    CHECK(refs[0].target == "operations.py");
}

TEST_CASE("no imports yields no references") {
    auto snap = fixtures::calc_snapshot();
    auto refs = extract_imports("operations.py", snap.bytes_of("operations.py"), snap);
    CHECK(refs.empty());
}

TEST_CASE("stdlib imports stay external") {
    auto snap = fixtures::make_snapshot({{"a.py", "import os\nimport sys\nimport json\n"},
                                         {"b.py", "x = 1\n"}});
    // Hand-listed stdlib modules none of which exist in the repo.
    for (const auto& ref : extract_imports("a.py", snap.bytes_of("a.py"), snap)) {
        CHECK_FALSE(ref.target.has_value());
    }
    auto graph = build_dependency_graph(snap);
    CHECK(graph.edges.empty());
    CHECK(graph.unresolved == std::vector<std::string>{"json", "os", "sys"});
}

TEST_CASE("relative imports resolve against the importing package") {
    auto snap = fixtures::make_snapshot({{"pkg/__init__.py", ""},
                                         {"pkg/core.py", "from . import util\n"},
                                         {"pkg/util.py", "from .core import thing\n"}});
    auto refs = extract_imports("pkg/core.py", snap.bytes_of("pkg/core.py"), snap);
    REQUIRE(refs.size() >= 1);
    bool found = false;
    for (const auto& r : refs) {
        if (r.target == std::optional<std::string>("pkg/util.py")) found = true;
    }
    CHECK(found);

    auto back = extract_imports("pkg/util.py", snap.bytes_of("pkg/util.py"), snap);
    REQUIRE(back.size() == 1);
    CHECK(back[0].target == "pkg/core.py");
    CHECK(back[0].module == ".core");
}

TEST_CASE("dependency graph equals the brute-force oracle on synthetic repos") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto repo = fixtures::make_synthetic_repo(seed);
        auto graph = build_dependency_graph(repo.snapshot);

        std::set<std::pair<std::string, std::string>> got(graph.edges.begin(),
                                                          graph.edges.end());
        CHECK(got == fixtures::oracle_edges(repo));
        CHECK(graph.nodes == repo.snapshot.paths());
    }
}

TEST_CASE("unparsable file is skipped with a warning, nodes keep it") {
    auto snap = fixtures::make_snapshot(
        {{"ok.py", "import bad\n"}, {"bad.py", "s = 'unterminated\n"}});
    std::vector<AnalysisWarning> warnings;
    auto graph = build_dependency_graph(snap, &warnings);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].path == "bad.py");
    CHECK(graph.nodes == std::vector<std::string>{"bad.py", "ok.py"});
    CHECK(graph.edges ==
          std::vector<std::pair<std::string, std::string>>{{"ok.py", "bad.py"}});
}

TEST_CASE("skeleton captures the calculator function") {
    auto sk = extract_skeleton("operations.py", fixtures::kOperationsSrc);
    REQUIRE(sk.functions.size() == 1);
    CHECK(sk.functions[0].name == "add");
    CHECK(sk.functions[0].params == std::vector<std::string>{"a", "b"});
    CHECK(sk.classes.empty());
}

TEST_CASE("empty file gives an empty skeleton") {
    auto sk = extract_skeleton("empty.py", "");
    CHECK(sk.functions.empty());
    CHECK(sk.classes.empty());
    CHECK(sk.module_docstring.empty());
}

TEST_CASE("class methods cross-checked by an independent line scanner") {
    const std::string src =
        "\"\"\"Module docs.\"\"\"\n"
        "\n"
        "class Stack:\n"
        "    \"\"\"LIFO container.\"\"\"\n"
        "\n"
        "    def __init__(self):\n"
        "        self.items = []\n"
        "\n"
        "    def push(self, item):\n"
        "        self.items.append(item)\n"
        "\n"
        "    def pop(self):\n"
        "        \"\"\"Remove and return the top item.\"\"\"\n"
        "        return self.items.pop()\n"
        "\n"
        "def top_level(x, y=1, *args, **kwargs):\n"
        "    return x\n";

    auto sk = extract_skeleton("stack.py", src);
    REQUIRE(sk.classes.size() == 1);
    CHECK(sk.classes[0].name == "Stack");
    CHECK(sk.classes[0].has_docstring);
    REQUIRE(sk.classes[0].methods.size() == 3);
    CHECK(sk.classes[0].methods[2].name == "pop");
    CHECK(sk.classes[0].methods[2].has_docstring);
    CHECK_FALSE(sk.classes[0].methods[0].has_docstring);
    REQUIRE(sk.functions.size() == 1);
    CHECK(sk.functions[0].params ==
          std::vector<std::string>{"x", "y", "*args", "**kwargs"});
    CHECK_FALSE(sk.module_docstring.empty());

    // Independent extractor: scan raw lines for def/class headers.
    std::vector<std::string> names;
    std::istringstream in(src);
    std::string line;
    while (std::getline(in, line)) {
        auto pos = line.find_first_not_of(' ');
        if (pos == std::string::npos) continue;
        auto body = line.substr(pos);
        for (const std::string& kw : {std::string("def "), std::string("class ")}) {
            if (body.rfind(kw, 0) == 0) {
                auto rest = body.substr(kw.size());
                std::string name;
                for (char c : rest) {
                    if (isalnum(static_cast<unsigned char>(c)) || c == '_') name += c;
                    else break;
                }
                names.push_back(name);
            }
        }
    }
    std::vector<std::string> extracted;
    for (const auto& c : sk.classes) {
        extracted.push_back(c.name);
        for (const auto& m : c.methods) extracted.push_back(m.name);
    }
    for (const auto& f : sk.functions) extracted.push_back(f.name);
    std::sort(names.begin(), names.end());
    std::sort(extracted.begin(), extracted.end());
    CHECK(extracted == names);
}

TEST_CASE("every skeleton name is a substring of its source") {
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
        auto repo = fixtures::make_synthetic_repo(seed);
        for (const auto& [path, src] : repo.snapshot.files) {
            auto sk = extract_skeleton(path, src);
            for (const auto& f : sk.functions) {
                CHECK(src.find(f.name) != std::string::npos);
            }
            for (const auto& c : sk.classes) {
                CHECK(src.find(c.name) != std::string::npos);
                for (const auto& m : c.methods) CHECK(src.find(m.name) != std::string::npos);
            }
        }
    }
}

TEST_CASE("calculator order puts operations before main") {
    auto snap = fixtures::calc_snapshot();
    auto analysis = analyze_repo(snap);
    CHECK(analysis.order.files == std::vector<std::string>{"operations.py", "main.py"});
    CHECK(analysis.order.cycle_groups.empty());
}

TEST_CASE("tie-break is lexicographic when there are no edges") {
    DependencyGraph g;
    g.nodes = {"a.py", "b.py"};
    auto order = plan_order(g);
    CHECK(order.files == std::vector<std::string>{"a.py", "b.py"});
}

TEST_CASE("plan order matches the lexicographic Kahn oracle on random DAGs") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto dag = fixtures::make_random_dag(seed);
        DependencyGraph g;
        g.nodes = dag.nodes;
        g.edges = dag.edges;
        auto order = plan_order(g);
        CHECK(order.files == fixtures::oracle_order(dag));
        CHECK(order.cycle_groups.empty());

        // Every edge constraint holds: dependee before dependent.
        std::map<std::string, std::size_t> idx;
        for (std::size_t i = 0; i < order.files.size(); ++i) idx[order.files[i]] = i;
        for (const auto& [a, b] : dag.edges) CHECK(idx.at(b) < idx.at(a));
    }
}

TEST_CASE("cycles go into cycle groups in lexicographic order") {
    DependencyGraph g;
    g.nodes = {"a.py", "b.py", "c.py"};
    g.edges = {{"a.py", "b.py"}, {"b.py", "a.py"}, {"c.py", "a.py"}};
    auto order = plan_order(g);
    REQUIRE(order.cycle_groups.size() == 1);
    CHECK(order.cycle_groups[0] == std::vector<std::string>{"a.py", "b.py"});
    CHECK(order.files.back() == "c.py");
    CHECK(order.files.size() == 3);
}

TEST_CASE("analysis JSON round-trips") {
    auto snap = fixtures::calc_snapshot();
    auto analysis = analyze_repo(snap);
    auto j = analysis_to_json(analysis);
    auto back = analysis_from_json(j);
    CHECK(analysis_to_json(back) == j);
    CHECK(back.order.files == analysis.order.files);
    CHECK(back.graph.edges == analysis.graph.edges);
    CHECK(back.tree.render() == analysis.tree.render());
}

TEST_CASE("logical lines join brackets and continuations") {
    auto lines = pysrc::logical_lines("t.py",
                                      "x = (1 +\n     2)\n"
                                      "y = 1 + \\\n    2\n"
                                      "# comment only\n"
                                      "z = 'has # no comment'\n");
    REQUIRE(lines.size() == 3);
    CHECK(lines[0].text.rfind("x = (1 +", 0) == 0);
    CHECK(lines[0].text.back() == ')');
    CHECK(lines[1].text.rfind("y = 1 +", 0) == 0);
    CHECK(lines[1].text.back() == '2');
    CHECK(lines[2].text == "z = ''");
}

TEST_CASE("unterminated string raises an analysis error with position") {
    try {
        pysrc::logical_lines("bad.py", "a = 1\ns = 'oops\n");
        FAIL("expected AnalysisError");
    } catch (const AnalysisError& e) {
        CHECK(e.path == "bad.py");
        CHECK(e.line == 2);
    }
}

TEST_CASE("imports inside functions and conditionals are collected") {
    const std::string src =
        "def loader():\n"
        "    import json\n"
        "    return json\n"
        "\n"
        "if True:\n"
        "    from os import path\n";
    auto structure = pysrc::parse_module("t.py", src);
    REQUIRE(structure.imports.size() == 2);
    CHECK(structure.imports[0].module == "json");
    CHECK(structure.imports[1].module == "os");
    CHECK(structure.imports[1].names == std::vector<std::string>{"path"});
}

TEST_CASE("star imports are reported") {
    auto structure = pysrc::parse_module("t.py", "from helpers import *\n");
    REQUIRE(structure.imports.size() == 1);
    CHECK(structure.imports[0].names == std::vector<std::string>{"*"});
}
