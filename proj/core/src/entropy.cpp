#include "mirage/entropy.hpp"

#include <cmath>
#include <numeric>

#include "mirage/error.hpp"
#include "mirage/evaluator.hpp"
#include "mirage/util.hpp"

namespace mirage::entropy {

std::string_view cluster_method_name(ClusterMethod method) {
    return method == ClusterMethod::embedding_threshold ? "embedding_threshold"
                                                        : "judge_equivalence";
}

ClusterMethod cluster_method_from_name(std::string_view name) {
    if (name == "embedding_threshold") return ClusterMethod::embedding_threshold;
    if (name == "judge_equivalence") return ClusterMethod::judge_equivalence;
    throw Error(Errc::invalid_config,
                "unknown clustering method '" + std::string(name) + "'");
}

nlohmann::ordered_json EntropyEstimate::to_json() const {
    nlohmann::ordered_json out;
    out["prompt_ref"] = prompt_ref;
    out["n_samples"] = n_samples;
    out["cluster_sizes"] = cluster_sizes;
    out["entropy"] = entropy;
    out["clusterer"] = std::string(cluster_method_name(clusterer));
    return out;
}

std::vector<std::string> sample_responses(const std::string& prompt,
                                          const llm::ModelEndpoint& target,
                                          llm::Client& client, int n,
                                          const llm::DecodingConfig& decoding) {
    if (n < 1) {
        throw Error(Errc::invalid_config, "sample count must be >= 1");
    }
    if (decoding.strategy != llm::SamplingStrategy::nucleus) {
        throw Error(Errc::greedy_not_allowed,
                    "entropy estimation needs sampling, not greedy decoding");
    }
    std::vector<std::string> responses;
    responses.reserve(static_cast<std::size_t>(n));
    const std::vector<llm::Message> messages = {{"user", prompt}};
    for (int i = 0; i < n; ++i) {
        responses.push_back(client.chat(target, messages, decoding).response);
    }
    return responses;
}

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;

    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

bool parse_yes_no(const std::string& reply) {
    const std::string lower = util::to_lower(reply);
    auto is_word_char = [](unsigned char c) { return std::isalnum(c) != 0; };
    for (std::size_t i = 0; i < lower.size(); ++i) {
        const bool left_ok =
            i == 0 || !is_word_char(static_cast<unsigned char>(lower[i - 1]));
        if (!left_ok) continue;
        if (lower.compare(i, 3, "yes") == 0 &&
            (i + 3 >= lower.size() ||
             !is_word_char(static_cast<unsigned char>(lower[i + 3])))) {
            return true;
        }
        if (lower.compare(i, 2, "no") == 0 &&
            (i + 2 >= lower.size() ||
             !is_word_char(static_cast<unsigned char>(lower[i + 2])))) {
            return false;
        }
    }
    throw Error(Errc::malformed_response,
                "equivalence judge said neither yes nor no: '" + reply + "'");
}

bool judge_same_meaning(const std::string& a, const std::string& b,
                        llm::Client& client, const llm::ModelEndpoint& judge) {
    const std::string prompt =
        "Do these two answers mean the same thing? Reply with yes or no.\n\n"
        "Answer 1: " +
        a + "\n\nAnswer 2: " + b;
    const auto exchange = client.chat(
        judge, {{"user", prompt}}, llm::DecodingConfig::greedy_default());
    return parse_yes_no(exchange.response);
}

}  // namespace

std::vector<std::vector<std::string>> cluster_by_meaning(
    const std::vector<std::string>& responses, ClusterMethod method,
    llm::Client& client, const llm::ModelEndpoint& aux_endpoint,
    double threshold) {
    if (responses.empty()) {
        throw Error(Errc::empty_input, "no responses to cluster");
    }
    std::vector<std::vector<std::size_t>> groups;

    if (method == ClusterMethod::embedding_threshold) {
        if (!(threshold > 0.0 && threshold < 1.0)) {
            throw Error(Errc::invalid_threshold,
                        "clustering threshold must lie in (0,1)");
        }
        const auto embeddings = client.embed(aux_endpoint, responses);
        for (std::size_t i = 0; i < responses.size(); ++i) {
            bool placed = false;
            for (auto& group : groups) {
                const std::size_t founder = group.front();
                if (evaluator::cosine_similarity(embeddings[i],
                                                 embeddings[founder]) >= threshold) {
                    group.push_back(i);
                    placed = true;
                    break;
                }
            }
            if (!placed) {
                groups.push_back({i});
            }
        }
    } else {
        UnionFind uf(responses.size());
        for (std::size_t i = 0; i < responses.size(); ++i) {
            for (std::size_t j = i + 1; j < responses.size(); ++j) {
                if (uf.find(i) == uf.find(j)) continue;
                // Equivalent only when the judge agrees in both directions.
                if (judge_same_meaning(responses[i], responses[j], client,
                                       aux_endpoint) &&
                    judge_same_meaning(responses[j], responses[i], client,
                                       aux_endpoint)) {
                    uf.unite(i, j);
                }
            }
        }
        std::vector<long> root_to_group(responses.size(), -1);
        for (std::size_t i = 0; i < responses.size(); ++i) {
            const std::size_t root = uf.find(i);
            if (root_to_group[root] < 0) {
                root_to_group[root] = static_cast<long>(groups.size());
                groups.emplace_back();
            }
            groups[static_cast<std::size_t>(root_to_group[root])].push_back(i);
        }
    }

    std::vector<std::vector<std::string>> clusters;
    clusters.reserve(groups.size());
    for (const auto& group : groups) {
        std::vector<std::string> members;
        members.reserve(group.size());
        for (const std::size_t index : group) {
            members.push_back(responses[index]);
        }
        clusters.push_back(std::move(members));
    }
    return clusters;
}

double semantic_entropy(const std::vector<std::size_t>& cluster_sizes) {
    if (cluster_sizes.empty()) {
        throw Error(Errc::empty_clusters, "no clusters");
    }
    std::size_t total = 0;
    for (const std::size_t size : cluster_sizes) {
        if (size == 0) {
            throw Error(Errc::empty_clusters, "cluster sizes must be positive");
        }
        total += size;
    }
    double sum = 0.0;
    for (const std::size_t size : cluster_sizes) {
        const double p = static_cast<double>(size) / static_cast<double>(total);
        sum += p * std::log(p);
    }
    return sum == 0.0 ? 0.0 : -sum;
}

EntropyEstimate estimate(const std::string& prompt_ref, const std::string& prompt,
                         const llm::ModelEndpoint& target,
                         const llm::ModelEndpoint& aux_endpoint,
                         llm::Client& client, int n, ClusterMethod method,
                         double threshold, const llm::DecodingConfig& decoding) {
    const auto responses = sample_responses(prompt, target, client, n, decoding);
    const auto clusters =
        cluster_by_meaning(responses, method, client, aux_endpoint, threshold);
    EntropyEstimate result;
    result.prompt_ref = prompt_ref;
    result.n_samples = n;
    for (const auto& cluster : clusters) {
        result.cluster_sizes.push_back(cluster.size());
    }
    result.entropy = semantic_entropy(result.cluster_sizes);
    result.clusterer = method;
    return result;
}

}  // namespace mirage::entropy
