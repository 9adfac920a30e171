#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mirage/error.hpp"
#include "mirage/llmclient.hpp"

namespace mirage::mutator {

enum class NuanceAxis { readability, formality, concreteness };

struct Guideline {
    int id;  // canonical 1..6
    NuanceAxis axis;
    std::string emoji;
    std::string title;
    std::string body;
};

// The six rewriting guidelines: 1-2 readability, 3 and 5 formality, 4 and 6
// concreteness.
const std::vector<Guideline>& canonical_guidelines();

class GuidelineSet {
public:
    static GuidelineSet all();
    static GuidelineSet readability_only();
    static GuidelineSet formality_only();
    static GuidelineSet concreteness_only();
    // Non-empty subset of {1..6}.
    static GuidelineSet from_ids(std::vector<int> ids);
    // "all" | "read" | "form" | "conc" | comma-separated ids like "1,4,6".
    static GuidelineSet from_name(std::string_view name);

    const std::vector<int>& ids() const { return ids_; }
    bool contains(int id) const;

    bool operator==(const GuidelineSet& other) const { return ids_ == other.ids_; }

private:
    std::vector<int> ids_;  // sorted, unique
};

// Renders the rewriting-instruction prompt: role preamble, the selected
// guidelines renumbered 1..k, the task section, the original sentence, and
// the JSON output instruction.
std::string build_guidance_template(const std::string& question,
                                    const GuidelineSet& set);

struct MutationReply {
    std::string idea;
    std::string sentence_new;
};

// First JSON object in the reply, tolerating prose and code fences; both
// fields must be present and non-empty.
MutationReply parse_mutation_response(const std::string& raw);

struct MutatedPrompt {
    std::string original_id;
    std::string text;
    std::string idea;
    int iteration = 1;
    GuidelineSet guidelines;
    std::optional<double> similarity_to_original;

    nlohmann::ordered_json to_json() const;
};

// Attempts per mutation before giving up on malformed JSON.
constexpr int kMutationAttempts = 3;

MutatedPrompt mutate(const std::string& item_id, const std::string& question,
                     const GuidelineSet& set, llm::Client& client,
                     const llm::ModelEndpoint& endpoint,
                     const llm::DecodingConfig& decoding);

// Carries whatever part of the lineage completed before the failure.
class MutationChainError : public Error {
public:
    MutationChainError(Errc code, const std::string& message,
                       std::vector<MutatedPrompt> partial)
        : Error(code, message), partial_lineage(std::move(partial)) {}

    std::vector<MutatedPrompt> partial_lineage;
};

// Feeds each round's rewritten sentence forward as the next round's original
// sentence; returns all iterations in order.
std::vector<MutatedPrompt> mutate_iterative(
    const std::string& item_id, const std::string& question,
    const GuidelineSet& set, int iterations, llm::Client& client,
    const llm::ModelEndpoint& endpoint, const llm::DecodingConfig& decoding);

}  // namespace mirage::mutator
