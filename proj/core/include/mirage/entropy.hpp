#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mirage/llmclient.hpp"

namespace mirage::entropy {

enum class ClusterMethod { embedding_threshold, judge_equivalence };

std::string_view cluster_method_name(ClusterMethod method);
ClusterMethod cluster_method_from_name(std::string_view name);

constexpr int kDefaultSamples = 10;
constexpr double kDefaultThreshold = 0.85;

struct EntropyEstimate {
    std::string prompt_ref;
    int n_samples = 0;
    std::vector<std::size_t> cluster_sizes;
    double entropy = 0.0;  // nats
    ClusterMethod clusterer = ClusterMethod::embedding_threshold;

    nlohmann::ordered_json to_json() const;
};

// n independent sampled answers, duplicates kept; sampling requires nucleus
// decoding.
std::vector<std::string> sample_responses(const std::string& prompt,
                                          const llm::ModelEndpoint& target,
                                          llm::Client& client, int n,
                                          const llm::DecodingConfig& decoding);

// embedding_threshold: greedy single-link pass, each response joins the first
// cluster whose founding member has cosine >= threshold. judge_equivalence:
// pairwise bidirectional yes/no equivalence calls with transitive closure.
std::vector<std::vector<std::string>> cluster_by_meaning(
    const std::vector<std::string>& responses, ClusterMethod method,
    llm::Client& client, const llm::ModelEndpoint& aux_endpoint,
    double threshold = kDefaultThreshold);

// H = -sum p_i ln p_i over cluster mass.
double semantic_entropy(const std::vector<std::size_t>& cluster_sizes);

EntropyEstimate estimate(const std::string& prompt_ref, const std::string& prompt,
                         const llm::ModelEndpoint& target,
                         const llm::ModelEndpoint& aux_endpoint,
                         llm::Client& client, int n, ClusterMethod method,
                         double threshold, const llm::DecodingConfig& decoding);

}  // namespace mirage::entropy
