#include "repoforge/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "repoforge/errors.hpp"
#include "repoforge/token_count.hpp"

namespace repoforge {

using nlohmann::ordered_json;

std::string to_string(RoleTag tag) {
    switch (tag) {
        case RoleTag::System: return "system";
        case RoleTag::User: return "user";
        case RoleTag::AssistantThink: return "assistant_think";
        case RoleTag::AssistantAction: return "assistant_action";
        case RoleTag::ToolResponseTag: return "tool_response";
    }
    return "?";
}

RoleTag role_tag_from_string(const std::string& s) {
    if (s == "system") return RoleTag::System;
    if (s == "user") return RoleTag::User;
    if (s == "assistant_think") return RoleTag::AssistantThink;
    if (s == "assistant_action") return RoleTag::AssistantAction;
    if (s == "tool_response") return RoleTag::ToolResponseTag;
    throw ConfigError("unknown role_tag: " + s);
}

std::string FlattenedDocument::canonical_text() const {
    std::string out;
    for (const auto& seg : segments) {
        out += "<|" + to_string(seg.role_tag) + "|>\n" + seg.text + "\n";
    }
    return out;
}

namespace {

std::string render_action(const TrajectoryStep& step) {
    const auto& call = *step.tool_call;
    std::string out;
    if (!step.content.empty()) out = step.content + "\n";
    out += to_string(call.tool) + "(";
    bool first = true;
    for (const auto& [k, v] : call.arguments) {
        if (!first) out += ", ";
        first = false;
        out += k + "=" + ordered_json(v).dump();
    }
    out += ")";
    return out;
}

void flatten_into(const Trajectory& t, const FlattenOptions& opts, bool is_root,
                  std::vector<Segment>& segments) {
    for (const auto& step : t.steps) {
        Segment seg;
        seg.agent = t.agent;
        switch (step.kind) {
            case StepKind::SystemPrompt:
                if (!is_root && !opts.keep_sub_system_prompt) continue;
                seg.role_tag = RoleTag::System;
                seg.text = step.content;
                break;
            case StepKind::TaskBrief:
                seg.role_tag = RoleTag::User;
                seg.text = step.content;
                break;
            case StepKind::Think:
                seg.role_tag = RoleTag::AssistantThink;
                seg.text = step.content;
                break;
            case StepKind::Action:
                seg.role_tag = RoleTag::AssistantAction;
                seg.text = render_action(step);
                break;
            case StepKind::Observation:
                seg.role_tag = RoleTag::ToolResponseTag;
                seg.text = step.content;
                seg.trainable = false;
                break;
        }
        segments.push_back(std::move(seg));
        if (step.sub_trajectory) {
            flatten_into(*step.sub_trajectory, opts, false, segments);
        }
    }
}

}  // namespace

FlattenedDocument flatten(const Trajectory& t, const FlattenOptions& opts) {
    auto report = validate_trajectory(t);
    if (!report.ok()) {
        throw ConfigError("refusing to flatten an invalid trajectory: " +
                          report.violations[0].message);
    }
    FlattenedDocument doc;
    doc.repo_id = t.repo_id;
    flatten_into(t, opts, true, doc.segments);
    doc.approx_tokens = approx_token_count(doc.canonical_text());
    return doc;
}

MaskSummary compute_mask_summary(const FlattenedDocument& d) {
    MaskSummary m;
    for (const auto& seg : d.segments) {
        if (seg.trainable) {
            m.trainable_chars += seg.text.size();
        } else {
            m.masked_chars += seg.text.size();
            ++m.masked_segment_count;
        }
    }
    return m;
}

ordered_json document_to_json(const FlattenedDocument& d) {
    ordered_json j;
    j["repo_id"] = d.repo_id;
    auto segments = ordered_json::array();
    for (const auto& seg : d.segments) {
        segments.push_back({{"role_tag", to_string(seg.role_tag)},
                            {"text", seg.text},
                            {"trainable", seg.trainable},
                            {"agent", to_string(seg.agent)}});
    }
    j["segments"] = std::move(segments);
    j["approx_tokens"] = d.approx_tokens;
    return j;
}

FlattenedDocument document_from_json(const ordered_json& j) {
    FlattenedDocument d;
    d.repo_id = j.at("repo_id").get<std::string>();
    for (const auto& js : j.at("segments")) {
        Segment seg;
        seg.role_tag = role_tag_from_string(js.at("role_tag").get<std::string>());
        seg.text = js.at("text").get<std::string>();
        seg.trainable = js.at("trainable").get<bool>();
        seg.agent = js.value("agent", "main") == "sub" ? AgentKind::Sub : AgentKind::Main;
        d.segments.push_back(std::move(seg));
    }
    d.approx_tokens = j.at("approx_tokens").get<std::uint64_t>();
    return d;
}

void emit_jsonl(const std::vector<FlattenedDocument>& docs, const std::filesystem::path& path) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        for (const auto& d : docs) {
            out << document_to_json(d).dump() << "\n";
        }
        if (!out) {
            out.close();
            std::filesystem::remove(tmp);
            throw IoError("write failed: " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

std::vector<FlattenedDocument> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::vector<FlattenedDocument> docs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto parsed = ordered_json::parse(line, nullptr, false);
        if (parsed.is_discarded()) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": malformed JSON");
        }
        docs.push_back(document_from_json(parsed));
    }
    return docs;
}

std::pair<std::vector<FlattenedDocument>, CorpusManifest> mix_corpus(const MixtureSpec& spec) {
    double share_sum = 0.0;
    for (const auto& src : spec.sources) share_sum += src.share;
    if (std::abs(share_sum - 1.0) > 1e-9) {
        throw ConfigError("mixture shares must sum to 1 (got " + std::to_string(share_sum) + ")");
    }

    std::vector<FlattenedDocument> mixed;
    CorpusManifest manifest;

    for (const auto& src : spec.sources) {
        auto docs = read_jsonl(src.path);
        auto target = static_cast<std::uint64_t>(src.share * static_cast<double>(spec.total_token_budget));

        // Seeded per-source draw order.
        std::vector<std::size_t> idx(docs.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::seed_seq seq{spec.seed, static_cast<std::uint64_t>(std::hash<std::string>{}(src.name))};
        std::mt19937_64 rng(seq);
        std::shuffle(idx.begin(), idx.end(), rng);

        SourceManifest sm;
        sm.name = src.name;
        sm.target_tokens = target;
        for (std::size_t pos = 0; pos < idx.size() && sm.achieved_tokens < target; ++pos) {
            auto& doc = docs[idx[pos]];
            std::uint64_t tokens =
                doc.approx_tokens > 0 ? doc.approx_tokens : approx_token_count(doc.canonical_text());
            sm.achieved_tokens += tokens;
            ++sm.documents;
            mixed.push_back(std::move(doc));
        }
        if (sm.achieved_tokens < target) {
            throw ConfigError("source '" + src.name + "' exhausted: " +
                              std::to_string(sm.achieved_tokens) + " of " +
                              std::to_string(target) + " target tokens");
        }
        manifest.total_tokens += sm.achieved_tokens;
        manifest.total_documents += sm.documents;
        manifest.sources.push_back(std::move(sm));
    }

    std::mt19937_64 rng(spec.seed);
    std::shuffle(mixed.begin(), mixed.end(), rng);
    return {std::move(mixed), std::move(manifest)};
}

ordered_json CorpusManifest::to_json() const {
    ordered_json j;
    auto srcs = ordered_json::array();
    for (const auto& s : sources) {
        double achieved_share =
            total_tokens == 0 ? 0.0
                              : static_cast<double>(s.achieved_tokens) / static_cast<double>(total_tokens);
        srcs.push_back({{"name", s.name},
                        {"target_tokens", s.target_tokens},
                        {"achieved_tokens", s.achieved_tokens},
                        {"achieved_share", achieved_share},
                        {"documents", s.documents}});
    }
    j["sources"] = std::move(srcs);
    j["total_tokens"] = total_tokens;
    j["total_documents"] = total_documents;
    return j;
}

TokenDistribution corpus_stats(const std::filesystem::path& corpus_jsonl) {
    TokenDistribution dist;
    for (const char* key : {"main_think", "main_action", "main_response", "sub_think",
                            "sub_action", "sub_response"}) {
        dist.by_category[key] = 0;
    }

    for (const auto& doc : read_jsonl(corpus_jsonl)) {
        std::uint64_t doc_tokens = 0;
        for (const auto& seg : doc.segments) {
            std::string agent = seg.agent == AgentKind::Main ? "main" : "sub";
            // system and user prompts count toward the thinking context
            std::string cls;
            switch (seg.role_tag) {
                case RoleTag::System:
                case RoleTag::User:
                case RoleTag::AssistantThink: cls = "think"; break;
                case RoleTag::AssistantAction: cls = "action"; break;
                case RoleTag::ToolResponseTag: cls = "response"; break;
            }
            auto tokens = approx_token_count(seg.text);
            dist.by_category[agent + "_" + cls] += tokens;
            doc_tokens += tokens;
        }
        dist.tokens_per_repo[doc.repo_id] += doc_tokens;
        dist.total_tokens += doc_tokens;
        ++dist.documents;
    }
    return dist;
}

ordered_json TokenDistribution::to_json() const {
    ordered_json j;
    ordered_json cats;
    for (const auto& [k, v] : by_category) cats[k] = v;
    j["by_category"] = std::move(cats);
    ordered_json repos;
    for (const auto& [k, v] : tokens_per_repo) repos[k] = v;
    j["tokens_per_repo"] = std::move(repos);
    j["total_tokens"] = total_tokens;
    j["documents"] = documents;
    return j;
}

}  // namespace repoforge
