#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mirage/llmclient.hpp"

namespace mirage::evaluator {

enum class JudgeKind { hallucination, logicality, quality };

std::string_view judge_kind_name(JudgeKind kind);
JudgeKind judge_kind_from_name(std::string_view name);

struct JudgeScore {
    JudgeKind kind = JudgeKind::hallucination;
    double score = 0.0;  // always within [0,10]
    std::string reason;
    std::string raw;

    nlohmann::ordered_json to_json() const;
};

// Rendered judge prompts; placeholders filled verbatim into the evaluation
// templates.
std::string hallucination_prompt(const std::string& question,
                                 const std::string& answer,
                                 const std::string& evidence);
std::string logicality_prompt(const std::string& question,
                              const std::string& answer);
std::string quality_prompt(const std::string& paragraph);

// First JSON object extracted from raw (prose and fences tolerated, trailing
// commas stripped on a retry); every field in required_fields must be
// present; the score field parses from number or numeric string and must lie
// in [0,10].
std::pair<double, nlohmann::json> parse_judge_json(
    const std::string& raw, const std::vector<std::string>& required_fields,
    const std::string& score_field);

// Attempts per judgement before JudgeParseError.
constexpr int kJudgeAttempts = 3;

// Higher = more hallucinated. Evidence entries are joined with "; ".
JudgeScore judge_hallucination(
    const std::string& question, const std::string& answer,
    const std::vector<std::string>& evidence, llm::Client& client,
    const llm::ModelEndpoint& judge_endpoint,
    const llm::DecodingConfig& decoding = llm::DecodingConfig::greedy_default());

// Higher = more logical (the template text reads contradictorily; scores are
// interpreted higher-is-more-logical throughout).
JudgeScore judge_logicality(
    const std::string& question, const std::string& answer, llm::Client& client,
    const llm::ModelEndpoint& judge_endpoint,
    const llm::DecodingConfig& decoding = llm::DecodingConfig::greedy_default());

JudgeScore judge_quality(
    const std::string& paragraph, llm::Client& client,
    const llm::ModelEndpoint& judge_endpoint,
    const llm::DecodingConfig& decoding = llm::DecodingConfig::greedy_default());

struct SimilarityScore {
    double value = 0.0;  // cosine, in [-1,1]
    std::string embedder;

    nlohmann::ordered_json to_json() const;
};

double cosine_similarity(const std::vector<double>& a,
                         const std::vector<double>& b);

SimilarityScore semantic_similarity(const std::string& a, const std::string& b,
                                    llm::Client& client,
                                    const llm::ModelEndpoint& embed_endpoint);

struct McItem {
    std::string question;
    std::vector<std::string> options;
    int correct_index = 0;

    void validate() const;
};

enum class McMode { logprob, label };

McMode mc_mode_from_name(std::string_view name);

// Label-mode instruction appended after the lettered options.
inline constexpr std::string_view kMcLabelInstruction =
    "Answer with the single letter of the correct option.";

int mc_choose(const McItem& item, const llm::ModelEndpoint& target_endpoint,
              llm::Client& client, McMode mode,
              const llm::DecodingConfig& decoding =
                  llm::DecodingConfig::greedy_default());

double mc_accuracy(const std::vector<std::pair<int, int>>& choices);

double label_to_score(JudgeKind kind, const std::string& label);

}  // namespace mirage::evaluator
