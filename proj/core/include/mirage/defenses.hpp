#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "mirage/llmclient.hpp"

namespace mirage::defenses {

// Anything that can assign a log probability to each token of a text.
class LanguageModel {
public:
    virtual ~LanguageModel() = default;
    virtual std::vector<double> token_logprobs(const std::string& text) = 0;
};

// Word n-gram model with add-one smoothing; the offline perplexity backend.
// Tokens are whitespace-split, lowercased, with leading and trailing ASCII
// punctuation stripped. Out-of-vocabulary query words map to a shared
// unknown symbol, so the event space has size vocab_size() + 1.
class NgramLm : public LanguageModel {
public:
    explicit NgramLm(int order = 2);

    // Counts n-grams per line; line starts reset the context window.
    void train(const std::string& text);
    static NgramLm from_file(const std::string& path, int order = 2);
    // Assigns exactly -ln(V) to every token regardless of content.
    static NgramLm uniform(const std::vector<std::string>& vocab);

    std::size_t vocab_size() const { return vocab_.size(); }
    std::vector<double> token_logprobs(const std::string& text) override;

private:
    int order_;
    bool uniform_ = false;
    std::unordered_set<std::string> vocab_;
    std::unordered_map<std::string, long> gram_counts_;
    std::unordered_map<std::string, long> context_counts_;
};

// Scores the text as a forced continuation of an empty prompt through an
// endpoint that exposes token logprobs.
class ApiLm : public LanguageModel {
public:
    ApiLm(llm::Client& client, llm::ModelEndpoint endpoint)
        : client_(client), endpoint_(std::move(endpoint)) {}

    std::vector<double> token_logprobs(const std::string& text) override;

private:
    llm::Client& client_;
    llm::ModelEndpoint endpoint_;
};

// exp(-mean token logprob). Throws EmptyText when the text has no tokens.
double perplexity(const std::string& text, LanguageModel& lm);

// Maximum perplexity observed on benign inputs; the filter's threshold.
double calibrate_threshold(const std::vector<double>& original_perplexities);

struct PerplexityVerdict {
    std::string text_ref;
    double perplexity = 0.0;
    double threshold = 0.0;
    bool passed = false;

    nlohmann::ordered_json to_json() const;
};

struct FilterOutcome {
    std::vector<PerplexityVerdict> verdicts;
    double pass_rate = 0.0;
};

FilterOutcome filter_inputs(const std::vector<std::string>& texts,
                            LanguageModel& lm, double threshold);

// System preamble asking the model to flag confusing or unanswerable parts
// of the question before answering; the question itself is untouched.
std::vector<llm::Message> honest_wrap(const std::string& question,
                                      const std::string& preamble);
// Bundled preamble text, overridable via MIRAGE_HONESTY_PREAMBLE.
std::string default_honesty_preamble();

// Messages-transformer hook; retrieval-style defenses plug in here.
class PromptDefense {
public:
    virtual ~PromptDefense() = default;
    virtual std::vector<llm::Message> wrap(const std::string& question) = 0;
    virtual std::string_view name() const = 0;
};

class NoDefense : public PromptDefense {
public:
    std::vector<llm::Message> wrap(const std::string& question) override;
    std::string_view name() const override { return "none"; }
};

class HonestDefense : public PromptDefense {
public:
    explicit HonestDefense(std::string preamble) : preamble_(std::move(preamble)) {}
    std::vector<llm::Message> wrap(const std::string& question) override;
    std::string_view name() const override { return "honest"; }

private:
    std::string preamble_;
};

struct DebateConfig {
    int n_agents = 1;
    int n_rounds = 1;
    std::vector<llm::ModelEndpoint> agent_endpoints;

    // Throws InvalidConfig unless n_agents >= 1, n_rounds >= 1, and
    // agent_endpoints has exactly n_agents entries.
    void validate() const;
};

struct DebateResult {
    std::string answer;
    // transcript[round][agent]; the closing consensus turn is not a round.
    std::vector<std::vector<std::string>> transcript;

    nlohmann::ordered_json to_json() const;
};

// Round 1: independent answers. Rounds 2..R: each agent sees the peers'
// latest answers and revises. With two or more agents a closing turn asks
// agent 0 to state the consensus answer; a lone agent's last answer stands,
// so n_agents=1, n_rounds=1 collapses to a direct chat call.
DebateResult multi_agent_debate(const std::string& question,
                                const DebateConfig& config, llm::Client& client,
                                const llm::DecodingConfig& decoding);

}  // namespace mirage::defenses
