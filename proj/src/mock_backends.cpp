#include "repoforge/mock_backends.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "repoforge/errors.hpp"
#include "repoforge/prompts.hpp"
#include "repoforge/token_count.hpp"

#include "json.hpp"

namespace repoforge {

using nlohmann::ordered_json;

ScriptedGenerationBackend::ScriptedGenerationBackend(std::vector<std::string> responses) {
    for (auto& r : responses) queue_.push_back(std::move(r));
}

void ScriptedGenerationBackend::push(std::string response) {
    std::lock_guard lock(mu_);
    queue_.push_back(std::move(response));
}

std::string ScriptedGenerationBackend::generate(const GenerationRequest& req) {
    std::lock_guard lock(mu_);
    ++calls_;
    requests_.push_back(req);
    if (queue_.empty()) throw BackendError("scripted backend exhausted");
    auto out = std::move(queue_.front());
    queue_.pop_front();
    return out;
}

std::vector<std::string> extract_identifiers(const std::string& text) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string ident;
            while (i < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) {
                ident += text[i++];
            }
            if (ident.size() >= 2 && seen.insert(ident).second) out.push_back(ident);
        } else {
            ++i;
        }
    }
    return out;
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string join_prompt(const GenerationRequest& req) {
    std::string all;
    for (const auto& [role, text] : req.messages) {
        all += text;
        all += '\n';
    }
    return all;
}

const char* pick(std::mt19937_64& rng, std::initializer_list<const char*> options) {
    std::uniform_int_distribution<std::size_t> d(0, options.size() - 1);
    return *(options.begin() + d(rng));
}

class SimulatedDeveloperBackend : public GenerationBackend {
public:
    explicit SimulatedDeveloperBackend(SimulatedDeveloperOptions opts) : opts_(opts) {}

    std::string generate(const GenerationRequest& req) override {
        std::string prompt = join_prompt(req);
        std::mt19937_64 rng(fnv1a(prompt) ^ req.seed);
        if (prompt.find("<replace>") != std::string::npos) {
            return refine(prompt, rng);
        }
        if (prompt.find(prompts::kGoldenBegin) != std::string::npos) {
            return sub_agent_memory(prompt, rng);
        }
        if (prompt.find(prompts::kOrderBegin) != std::string::npos) {
            return main_agent_memory(prompt, rng);
        }
        throw BackendError("simulated developer backend got an unrecognized prompt");
    }

private:
    SimulatedDeveloperOptions opts_;

    // Drop the final line and append a vague tail so grounding has work to do.
    std::string garble(const std::string& content) const {
        if (!opts_.hallucinate) return content;
        auto cut = content.find_last_not_of('\n');
        if (cut != std::string::npos) {
            auto prev = content.rfind('\n', cut);
            if (prev != std::string::npos && prev > 0) {
                return content.substr(0, prev) + "\n# ...\n";
            }
        }
        return content + "# ...\n";
    }

    std::string main_agent_memory(const std::string& prompt, std::mt19937_64& rng) const {
        std::string order_text =
            prompts::extract_between(prompt, prompts::kOrderBegin, prompts::kOrderEnd);
        std::string tree =
            prompts::extract_between(prompt, prompts::kFileTreeBegin, prompts::kFileTreeEnd);

        std::vector<std::string> order;
        std::istringstream lines(order_text);
        std::string line;
        while (std::getline(lines, line)) {
            auto dot = line.find(". ");
            if (dot != std::string::npos) order.push_back(line.substr(dot + 2));
        }
        if (order.empty()) throw BackendError("no implementation order in prompt");

        std::ostringstream req_doc;
        req_doc << pick(rng, {"Create a Python project", "Build a small Python application",
                              "Develop a Python package"})
                << " consisting of " << order.size()
                << (order.size() == 1 ? " module" : " modules")
                << ". It should provide the functionality implied by the following layout, "
                   "with a clear separation of concerns between the files:\n"
                << tree;

        std::string requirement_for_repo = req_doc.str();

        ordered_json memory = ordered_json::array();
        memory.push_back({{"role", "system_prompt"},
                          {"content", prompts::main_agent_system_prompt()}});
        memory.push_back({{"role", "user"}, {"content", requirement_for_repo}});

        for (std::size_t i = 0; i < order.size(); ++i) {
            const auto& path = order[i];
            std::ostringstream think;
            if (i == 0) {
                think << "The project layout is:\n"
                      << tree << "The implementation order, respecting dependencies, is: ";
                for (std::size_t k = 0; k < order.size(); ++k) {
                    if (k) think << ", then ";
                    think << order[k];
                }
                think << ". "
                      << pick(rng, {"I start with", "The first file to create is",
                                    "I begin by delegating"})
                      << " " << path << ".";
            } else {
                think << pick(rng, {"Now proceeding to the next step in my plan: ",
                                    "That file is done; the next one in order is ",
                                    "Moving on to "})
                      << path << ".";
            }
            std::string base = path;
            auto slash = base.find_last_of('/');
            if (slash != std::string::npos) base = base.substr(slash + 1);
            ordered_json call = {
                {"function_name", "code_generator"},
                {"arguments",
                 {{"requirement_for_repo", requirement_for_repo},
                  {"tree_structure", tree},
                  {"file_name", base},
                  {"file_path", path},
                  {"requirement", "Implement " + path + " so that it fulfils its role in the "
                                  "project layout and interoperates with the other modules."}}}};
            memory.push_back({{"role", "gpt"}, {"content", think.str()}, {"tool-call", call}});
            memory.push_back({{"role", "tool-response"},
                              {"content", prompts::sub_agent_return(path)}});
        }
        memory.push_back(
            {{"role", "gpt"},
             {"content", "All files in the plan have been generated. The project is complete."}});
        return memory.dump(2);
    }

    std::string sub_agent_memory(const std::string& prompt, std::mt19937_64& rng) const {
        auto args_text =
            prompts::extract_between(prompt, prompts::kTaskArgsBegin, prompts::kTaskArgsEnd);
        auto golden =
            prompts::extract_between(prompt, prompts::kGoldenBegin, prompts::kGoldenEnd);
        auto related_text =
            prompts::extract_between(prompt, prompts::kRelatedBegin, prompts::kRelatedEnd);
        auto related = prompts::parse_file_blocks(related_text);
        ordered_json args = ordered_json::parse(args_text);
        std::string file_path = args.value("file_path", "");

        auto idents = extract_identifiers(golden);

        ordered_json memory = ordered_json::array();
        memory.push_back(
            {{"role", "system_prompt"}, {"content", prompts::sub_agent_system_prompt()}});
        memory.push_back({{"role", "user"}, {"content", args.dump(2)}});

        for (const auto& [dep_path, dep_content] : related) {
            std::ostringstream think;
            think << "I need to create " << file_path << ". "
                  << pick(rng, {"This file depends on", "It must interoperate with",
                                "Before writing it I should inspect"})
                  << " " << dep_path
                  << ", so I will read it first to check the exact names and signatures.";
            memory.push_back({{"role", "gpt"},
                              {"content", think.str()},
                              {"tool-call",
                               {{"function_name", "read"},
                                {"arguments", {{"file_to_read", dep_path}}}}}});
            memory.push_back({{"role", "tool-response"}, {"content", garble(dep_content)}});
        }

        std::ostringstream think;
        think << pick(rng, {"Okay, I have the context I need. ",
                            "I now have everything required. ",
                            "With the dependencies understood, "})
              << "I will write " << file_path << " now";
        if (!idents.empty()) {
            think << ", defining ";
            for (std::size_t i = 0; i < std::min<std::size_t>(3, idents.size()); ++i) {
                if (i) think << ", ";
                think << idents[i];
            }
        }
        think << " so that the stated requirement is satisfied.";
        memory.push_back({{"role", "gpt"},
                          {"content", think.str()},
                          {"tool-call",
                           {{"function_name", "write"},
                            {"arguments",
                             {{"file_path", file_path}, {"content", garble(golden)}}}}}});
        memory.push_back({{"role", "tool-response"},
                          {"content", "Successfully wrote " + std::to_string(golden.size()) +
                                          " bytes to " + file_path + "."}});
        return memory.dump(2);
    }

    std::string refine(const std::string& prompt, std::mt19937_64& rng) const {
        auto reference =
            prompts::extract_between(prompt, prompts::kReferenceBegin, prompts::kReferenceEnd);
        auto context =
            prompts::extract_between(prompt, prompts::kContextBegin, prompts::kContextEnd);
        auto block = prompts::extract_between(prompt, "<replace>", "</replace>");
        while (!block.empty() && block.back() == '\n') block.pop_back();

        // Elaborate on identifiers from the reference that the reasoning has
        // not mentioned yet, so each accepted refinement adds information.
        auto candidates = extract_identifiers(reference);
        std::set<std::string> known;
        for (const auto& id : extract_identifiers(context)) known.insert(id);
        std::vector<std::string> fresh;
        for (const auto& id : candidates) {
            if (!known.count(id)) fresh.push_back(id);
        }
        std::shuffle(fresh.begin(), fresh.end(), rng);

        std::ostringstream refined;
        refined << block;
        int added = 0;
        for (const auto& id : fresh) {
            if (added >= opts_.refine_identifiers) break;
            refined << "\n"
                    << pick(rng, {"I also need to handle ", "Specifically, I will use ",
                                  "A key element here is "})
                    << id
                    << pick(rng, {", making sure its behaviour matches the requirement.",
                                  " and keep its interface consistent with the rest of the "
                                  "file.",
                                  ", which the implementation relies on."});
            ++added;
        }

        std::ostringstream out;
        out << "<think>\nThe original step is vague; tying it to the concrete names in the "
               "implementation makes the reasoning more predictive.\n</think>\n\n"
            << "<refine>\n"
            << refined.str() << "\n</refine>";
        return out.str();
    }
};

class UniformScorer : public ScoringBackend {
public:
    explicit UniformScorer(double lp) : lp_(lp) {}
    ScoreResult score(const ScoreRequest& req) override {
        if (req.target.empty()) throw BackendError("score target must be non-empty");
        std::uint64_t count = std::max<std::uint64_t>(1, approx_token_count(req.target));
        return make_score_result(lp_ * static_cast<double>(count), count);
    }

private:
    double lp_;
};

class CharNgramScorer : public ScoringBackend {
public:
    ScoreResult score(const ScoreRequest& req) override {
        if (req.target.empty()) throw BackendError("score target must be non-empty");
        const std::string corpus = req.context + req.target;

        std::unordered_map<std::string, std::uint64_t> tri, bi;
        for (std::size_t i = 0; i + 2 < corpus.size(); ++i) {
            tri[corpus.substr(i, 3)]++;
            bi[corpus.substr(i, 2)]++;
        }
        if (corpus.size() >= 2) bi[corpus.substr(corpus.size() - 2, 2)]++;

        constexpr double kAlphabet = 256.0;
        double total = 0.0;
        std::uint64_t count = 0;
        // History for the first target char comes from the context tail.
        std::string text = req.context.size() >= 2
                               ? req.context.substr(req.context.size() - 2) + req.target
                               : req.context + req.target;
        std::size_t start = text.size() - req.target.size();
        for (std::size_t i = start; i < text.size(); ++i) {
            double p;
            if (i >= 2) {
                std::string h = text.substr(i - 2, 2);
                std::string t = text.substr(i - 2, 3);
                auto tri_it = tri.find(t);
                auto bi_it = bi.find(h);
                double num = 1.0 + (tri_it == tri.end() ? 0.0 : tri_it->second);
                double den = kAlphabet + (bi_it == bi.end() ? 0.0 : bi_it->second);
                p = num / den;
            } else {
                p = 1.0 / kAlphabet;
            }
            total += std::log(p);
            ++count;
        }
        return make_score_result(total, count);
    }
};

class IdentifierOverlapScorer : public ScoringBackend {
public:
    ScoreResult score(const ScoreRequest& req) override {
        if (req.target.empty()) throw BackendError("score target must be non-empty");
        auto target_ids = extract_identifiers(req.target);
        std::set<std::string> context_ids;
        for (auto& id : extract_identifiers(req.context)) context_ids.insert(id);
        std::size_t covered = 0;
        for (const auto& id : target_ids) {
            if (context_ids.count(id)) ++covered;
        }
        double overlap = target_ids.empty()
                             ? 1.0
                             : static_cast<double>(covered) / static_cast<double>(target_ids.size());
        double per_token = -(2.0 - overlap);
        std::uint64_t count = std::max<std::uint64_t>(1, approx_token_count(req.target));
        return make_score_result(per_token * static_cast<double>(count), count);
    }
};

}  // namespace

std::unique_ptr<GenerationBackend> make_simulated_developer_backend(
    SimulatedDeveloperOptions opts) {
    return std::make_unique<SimulatedDeveloperBackend>(opts);
}

std::unique_ptr<ScoringBackend> make_uniform_scorer(double per_token_logprob) {
    return std::make_unique<UniformScorer>(per_token_logprob);
}

std::unique_ptr<ScoringBackend> make_char_ngram_scorer() {
    return std::make_unique<CharNgramScorer>();
}

std::unique_ptr<ScoringBackend> make_identifier_overlap_scorer() {
    return std::make_unique<IdentifierOverlapScorer>();
}

}  // namespace repoforge
