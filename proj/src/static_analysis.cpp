#include "repoforge/static_analysis.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "repoforge/errors.hpp"
#include "repoforge/pysrc.hpp"

namespace repoforge {

namespace {

std::vector<std::string> split_path(const std::string& p) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : p) {
        if (c == '/') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

void render_node(const FileTreeNode& node, int depth, std::ostringstream& out) {
    for (const auto& child : node.children) {
        for (int i = 0; i < depth; ++i) out << "    ";
        out << child.name;
        if (!child.is_file) out << "/";
        out << "\n";
        render_node(child, depth + 1, out);
    }
}

void collect_leaves(const FileTreeNode& node, const std::string& prefix,
                    std::vector<std::string>& out) {
    for (const auto& child : node.children) {
        std::string path = prefix.empty() ? child.name : prefix + "/" + child.name;
        if (child.is_file) out.push_back(path);
        else collect_leaves(child, path, out);
    }
}

// Joins dotted module parts into candidate repo paths: p.q -> p/q.py, p/q/__init__.py
std::vector<std::string> module_candidates(const std::vector<std::string>& parts) {
    if (parts.empty()) return {};
    std::string base;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) base += '/';
        base += parts[i];
    }
    return {base + ".py", base + "/__init__.py"};
}

std::vector<std::string> dotted_parts(const std::string& mod) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : mod) {
        if (c == '.') {
            if (!cur.empty()) parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) parts.push_back(cur);
    return parts;
}

std::optional<std::string> resolve_candidates(const std::vector<std::string>& candidates,
                                              const RepoSnapshot& snap) {
    for (const auto& c : candidates) {
        if (snap.contains(c)) return c;
    }
    return std::nullopt;
}

}  // namespace

std::string FileTree::render() const {
    std::ostringstream out;
    render_node(root, 0, out);
    return out.str();
}

std::vector<std::string> FileTree::leaves() const {
    std::vector<std::string> out;
    collect_leaves(root, "", out);
    std::sort(out.begin(), out.end());
    return out;
}

FileTree build_file_tree(const RepoSnapshot& snap) {
    FileTree tree;
    tree.root.name = ".";
    for (const auto& [path, _] : snap.files) {
        FileTreeNode* node = &tree.root;
        auto parts = split_path(path);
        for (std::size_t i = 0; i < parts.size(); ++i) {
            bool leaf = i + 1 == parts.size();
            auto it = std::find_if(node->children.begin(), node->children.end(),
                                   [&](const FileTreeNode& n) {
                                       return n.name == parts[i] && n.is_file == leaf;
                                   });
            if (it == node->children.end()) {
                FileTreeNode child;
                child.name = parts[i];
                child.is_file = leaf;
                auto pos = std::upper_bound(
                    node->children.begin(), node->children.end(), child,
                    [](const FileTreeNode& a, const FileTreeNode& b) { return a.name < b.name; });
                it = node->children.insert(pos, std::move(child));
            }
            node = &*it;
        }
    }
    return tree;
}

std::vector<ImportReference> extract_imports(const std::string& path, const std::string& source,
                                             const RepoSnapshot& snap) {
    auto structure = pysrc::parse_module(path, source);
    std::vector<ImportReference> refs;

    auto importer_parts = split_path(path);
    importer_parts.pop_back();  // package directory of the importing file

    for (const auto& imp : structure.imports) {
        ImportReference ref;
        ref.line = imp.line;

        std::vector<std::string> base_parts;
        if (imp.relative_level > 0) {
            // level 1 = current package, each extra dot climbs one package
            base_parts = importer_parts;
            for (int i = 1; i < imp.relative_level; ++i) {
                if (base_parts.empty()) break;
                base_parts.pop_back();
            }
            ref.module = std::string(imp.relative_level, '.') + imp.module;
        } else {
            ref.module = imp.module;
        }

        auto mod_parts = base_parts;
        for (auto& p : dotted_parts(imp.module)) mod_parts.push_back(p);

        if (imp.is_from) {
            // Resolve the module itself, and each imported name as a submodule.
            std::set<std::string> targets;
            if (auto t = resolve_candidates(module_candidates(mod_parts), snap)) {
                targets.insert(*t);
            }
            for (const auto& name : imp.names) {
                if (name == "*") continue;
                auto sub = mod_parts;
                for (auto& p : dotted_parts(name)) sub.push_back(p);
                if (auto t = resolve_candidates(module_candidates(sub), snap)) {
                    targets.insert(*t);
                }
            }
            if (targets.empty()) {
                ref.target = std::nullopt;
                refs.push_back(ref);
            } else {
                for (const auto& t : targets) {
                    ImportReference r = ref;
                    r.target = t;
                    refs.push_back(std::move(r));
                }
            }
        } else {
            ref.target = resolve_candidates(module_candidates(mod_parts), snap);
            refs.push_back(std::move(ref));
        }
    }
    return refs;
}

DependencyGraph build_dependency_graph(const RepoSnapshot& snap,
                                       std::vector<AnalysisWarning>* warnings) {
    DependencyGraph g;
    std::set<std::pair<std::string, std::string>> edges;
    std::set<std::string> unresolved;

    for (const auto& [path, source] : snap.files) {
        g.nodes.push_back(path);
        std::vector<ImportReference> refs;
        try {
            refs = extract_imports(path, source, snap);
        } catch (const AnalysisError& e) {
            if (warnings) warnings->push_back({path, e.what()});
            continue;
        }
        for (const auto& ref : refs) {
            if (ref.target) {
                if (*ref.target != path) edges.emplace(path, *ref.target);
            } else {
                unresolved.insert(ref.module);
            }
        }
    }
    g.edges.assign(edges.begin(), edges.end());
    g.unresolved.assign(unresolved.begin(), unresolved.end());
    return g;
}

FileSkeleton extract_skeleton(const std::string& path, const std::string& source) {
    auto structure = pysrc::parse_module(path, source);
    FileSkeleton sk;
    sk.path = path;
    sk.module_docstring = structure.module_docstring;
    for (const auto& fn : structure.functions) {
        sk.functions.push_back({fn.name, fn.params, fn.has_docstring});
    }
    for (const auto& cls : structure.classes) {
        ClassSig sig;
        sig.name = cls.name;
        sig.has_docstring = cls.has_docstring;
        for (const auto& m : cls.methods) {
            sig.methods.push_back({m.name, m.params, m.has_docstring});
        }
        sk.classes.push_back(std::move(sig));
    }
    return sk;
}

ImplementationOrder plan_order(const DependencyGraph& graph) {
    const auto& nodes = graph.nodes;
    const int n = static_cast<int>(nodes.size());
    std::map<std::string, int> index_of;
    for (int i = 0; i < n; ++i) index_of[nodes[i]] = i;

    // adjacency: dependent -> dependee
    std::vector<std::vector<int>> out_edges(n);
    for (const auto& [a, b] : graph.edges) {
        out_edges[index_of.at(a)].push_back(index_of.at(b));
    }

    // Tarjan SCC (iterative).
    std::vector<int> comp(n, -1), low(n, -1), num(n, -1);
    std::vector<int> stack;
    std::vector<bool> on_stack(n, false);
    int counter = 0, comp_count = 0;

    std::function<void(int)> tarjan = [&](int v) {
        num[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
        for (int w : out_edges[v]) {
            if (num[w] == -1) {
                tarjan(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], num[w]);
            }
        }
        if (low[v] == num[v]) {
            while (true) {
                int w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                comp[w] = comp_count;
                if (w == v) break;
            }
            ++comp_count;
        }
    };
    for (int v = 0; v < n; ++v) {
        if (num[v] == -1) tarjan(v);
    }

    // Condensation: component a depends on component b when any member does.
    std::vector<std::set<int>> comp_deps(comp_count);
    std::vector<std::vector<int>> members(comp_count);
    for (int v = 0; v < n; ++v) members[comp[v]].push_back(v);
    for (int v = 0; v < n; ++v) {
        for (int w : out_edges[v]) {
            if (comp[v] != comp[w]) comp_deps[comp[v]].insert(comp[w]);
        }
    }

    // Kahn over the condensation, emitting dependees first; among ready
    // components pick the one whose lexicographically smallest member is
    // smallest, so ties are broken by path order.
    std::vector<std::string> rep(comp_count);
    for (int c = 0; c < comp_count; ++c) {
        std::sort(members[c].begin(), members[c].end(),
                  [&](int a, int b) { return nodes[a] < nodes[b]; });
        rep[c] = nodes[members[c].front()];
    }
    std::vector<int> remaining_deps(comp_count);
    for (int c = 0; c < comp_count; ++c) remaining_deps[c] = static_cast<int>(comp_deps[c].size());
    std::vector<std::vector<int>> dependents(comp_count);
    for (int c = 0; c < comp_count; ++c) {
        for (int d : comp_deps[c]) dependents[d].push_back(c);
    }

    std::set<std::pair<std::string, int>> ready;
    for (int c = 0; c < comp_count; ++c) {
        if (remaining_deps[c] == 0) ready.emplace(rep[c], c);
    }

    ImplementationOrder order;
    while (!ready.empty()) {
        auto [_, c] = *ready.begin();
        ready.erase(ready.begin());
        for (int v : members[c]) order.files.push_back(nodes[v]);
        if (members[c].size() > 1) {
            std::vector<std::string> group;
            for (int v : members[c]) group.push_back(nodes[v]);
            order.cycle_groups.push_back(std::move(group));
        }
        for (int d : dependents[c]) {
            if (--remaining_deps[d] == 0) ready.emplace(rep[d], d);
        }
    }
    return order;
}

RepoAnalysis analyze_repo(const RepoSnapshot& snap, std::vector<AnalysisWarning>* warnings) {
    RepoAnalysis a;
    a.repo_id = snap.repo_id;
    a.root = snap.root.string();
    a.tree = build_file_tree(snap);
    a.graph = build_dependency_graph(snap, warnings);
    for (const auto& [path, source] : snap.files) {
        try {
            a.skeletons.push_back(extract_skeleton(path, source));
        } catch (const AnalysisError& e) {
            if (warnings) warnings->push_back({path, e.what()});
            FileSkeleton empty;
            empty.path = path;
            a.skeletons.push_back(std::move(empty));
        }
    }
    a.order = plan_order(a.graph);
    return a;
}

namespace {

nlohmann::ordered_json tree_to_json(const FileTreeNode& node) {
    nlohmann::ordered_json j;
    j["name"] = node.name;
    j["is_file"] = node.is_file;
    auto children = nlohmann::ordered_json::array();
    for (const auto& c : node.children) children.push_back(tree_to_json(c));
    j["children"] = std::move(children);
    return j;
}

FileTreeNode tree_from_json(const nlohmann::ordered_json& j) {
    FileTreeNode node;
    node.name = j.at("name").get<std::string>();
    node.is_file = j.at("is_file").get<bool>();
    for (const auto& c : j.at("children")) node.children.push_back(tree_from_json(c));
    return node;
}

nlohmann::ordered_json sig_to_json(const MethodSig& m) {
    return {{"name", m.name}, {"params", m.params}, {"has_docstring", m.has_docstring}};
}

MethodSig sig_from_json(const nlohmann::ordered_json& j) {
    return {j.at("name").get<std::string>(), j.at("params").get<std::vector<std::string>>(),
            j.at("has_docstring").get<bool>()};
}

}  // namespace

nlohmann::ordered_json analysis_to_json(const RepoAnalysis& a) {
    nlohmann::ordered_json j;
    j["repo_id"] = a.repo_id;
    j["root"] = a.root;
    j["tree"] = tree_to_json(a.tree.root);
    j["tree_rendering"] = a.tree.render();
    auto edges = nlohmann::ordered_json::array();
    for (const auto& [x, y] : a.graph.edges) edges.push_back({x, y});
    j["graph"] = {{"nodes", a.graph.nodes}, {"edges", edges}, {"unresolved", a.graph.unresolved}};
    auto skels = nlohmann::ordered_json::array();
    for (const auto& sk : a.skeletons) {
        nlohmann::ordered_json js;
        js["path"] = sk.path;
        auto classes = nlohmann::ordered_json::array();
        for (const auto& c : sk.classes) {
            auto methods = nlohmann::ordered_json::array();
            for (const auto& m : c.methods) methods.push_back(sig_to_json(m));
            classes.push_back({{"name", c.name},
                               {"methods", methods},
                               {"has_docstring", c.has_docstring}});
        }
        js["classes"] = std::move(classes);
        auto fns = nlohmann::ordered_json::array();
        for (const auto& f : sk.functions) fns.push_back(sig_to_json(f));
        js["functions"] = std::move(fns);
        js["module_docstring"] = sk.module_docstring;
        skels.push_back(std::move(js));
    }
    j["skeletons"] = std::move(skels);
    j["order"] = {{"files", a.order.files}, {"cycle_groups", a.order.cycle_groups}};
    return j;
}

RepoAnalysis analysis_from_json(const nlohmann::ordered_json& j) {
    RepoAnalysis a;
    a.repo_id = j.at("repo_id").get<std::string>();
    a.root = j.at("root").get<std::string>();
    a.tree.root = tree_from_json(j.at("tree"));
    a.graph.nodes = j.at("graph").at("nodes").get<std::vector<std::string>>();
    for (const auto& e : j.at("graph").at("edges")) {
        a.graph.edges.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
    }
    a.graph.unresolved = j.at("graph").at("unresolved").get<std::vector<std::string>>();
    for (const auto& js : j.at("skeletons")) {
        FileSkeleton sk;
        sk.path = js.at("path").get<std::string>();
        for (const auto& c : js.at("classes")) {
            ClassSig cls;
            cls.name = c.at("name").get<std::string>();
            cls.has_docstring = c.at("has_docstring").get<bool>();
            for (const auto& m : c.at("methods")) cls.methods.push_back(sig_from_json(m));
            sk.classes.push_back(std::move(cls));
        }
        for (const auto& f : js.at("functions")) sk.functions.push_back(sig_from_json(f));
        sk.module_docstring = js.at("module_docstring").get<std::string>();
        a.skeletons.push_back(std::move(sk));
    }
    a.order.files = j.at("order").at("files").get<std::vector<std::string>>();
    a.order.cycle_groups =
        j.at("order").at("cycle_groups").get<std::vector<std::vector<std::string>>>();
    return a;
}

}  // namespace repoforge
