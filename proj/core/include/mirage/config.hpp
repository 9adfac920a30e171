#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mirage/defenses.hpp"
#include "mirage/llmclient.hpp"
#include "mirage/mutator.hpp"

namespace mirage::config {

// Everything the CLI needs to run a stage: endpoints by role, decoding
// defaults, mutation settings, file paths, retry and debate knobs.
// Credentials never appear here, only environment variable names.
struct HarnessConfig {
    std::vector<llm::ModelEndpoint> targets;
    std::optional<llm::ModelEndpoint> mutator;
    std::optional<llm::ModelEndpoint> judge;
    std::optional<llm::ModelEndpoint> embedder;
    std::optional<llm::ModelEndpoint> perplexity;

    llm::DecodingConfig decoding = llm::DecodingConfig::greedy_default();
    mirage::mutator::GuidelineSet guidelines = mirage::mutator::GuidelineSet::all();
    int iterations = 1;
    std::vector<std::string> variants{"original", "illusionist"};
    std::vector<std::string> defenses{"none"};

    std::string benchmark_path;
    std::string record_store_path = "records.jsonl";
    std::string concreteness_lexicon_path;
    std::string tagger_lexicon_path;
    std::string honesty_preamble_path;
    std::string audit_log_path;
    std::string mock_fixture_path;

    llm::RetryPolicy retry;
    defenses::DebateConfig debate{2, 2, {}};
    std::string filter_corpus_path;
    double filter_threshold = 0.0;

    bool use_mock = false;
    std::optional<uint64_t> seed;

    static HarnessConfig from_file(const std::string& path);
    static HarnessConfig from_json(const nlohmann::json& doc);
    // All-mock preset so every subcommand runs offline without a config file.
    static HarnessConfig offline_mock();

    // Structural validation; runs before any side effect.
    void validate() const;
};

// Client with providers registered for every provider_id the config
// references; use_mock routes all of them to the scripted mock.
std::unique_ptr<llm::Client> make_client(const HarnessConfig& config);

}  // namespace mirage::config
