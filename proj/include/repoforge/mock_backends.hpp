#pragma once

#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "repoforge/backends.hpp"

namespace repoforge {

/// Replays a fixed queue of responses; throws when the queue runs dry.
class ScriptedGenerationBackend : public GenerationBackend {
public:
    explicit ScriptedGenerationBackend(std::vector<std::string> responses = {});
    void push(std::string response);
    std::string generate(const GenerationRequest& req) override;
    std::size_t calls() const { return calls_; }
    const std::vector<GenerationRequest>& requests() const { return requests_; }

private:
    std::mutex mu_;
    std::deque<std::string> queue_;
    std::size_t calls_ = 0;
    std::vector<GenerationRequest> requests_;
};

struct SimulatedDeveloperOptions {
    // When set, read observations and written code in the simulated memory
    // are deliberately imperfect so grounding has something to correct.
    bool hallucinate = true;
    // Number of identifiers a refinement elaborates on per candidate.
    int refine_identifiers = 2;
};

/// Fully deterministic stand-in for the remote model: recognizes the main
/// agent, sub-agent and CoT-refinement prompts and answers each in the
/// expected output format. Pure function of (request, seed).
std::unique_ptr<GenerationBackend> make_simulated_developer_backend(
    SimulatedDeveloperOptions opts = {});

/// Assigns the same log-probability to every target token.
std::unique_ptr<ScoringBackend> make_uniform_scorer(double per_token_logprob);

/// Character trigram model with add-one smoothing, trained on
/// context + target, scoring the target characters.
std::unique_ptr<ScoringBackend> make_char_ngram_scorer();

/// Perplexity falls as more of the target's identifiers appear in the
/// context; the hill the search tests climb.
std::unique_ptr<ScoringBackend> make_identifier_overlap_scorer();

/// Identifier tokens (letter/underscore start, length >= 2) in `text`.
std::vector<std::string> extract_identifiers(const std::string& text);

}  // namespace repoforge
