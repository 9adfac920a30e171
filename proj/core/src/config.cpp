#include "mirage/config.hpp"

#include <cctype>
#include <set>

#include "mirage/error.hpp"
#include "mirage/util.hpp"

namespace mirage::config {

namespace {

bool valid_env_name(const std::string& name) {
    if (name.empty()) return false;
    if (std::isdigit(static_cast<unsigned char>(name.front()))) return false;
    for (const char c : name) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    }
    return true;
}

llm::Capabilities default_capabilities(const std::string& role) {
    llm::Capabilities caps;
    if (role == "embedder") {
        caps.embeddings = true;
    } else if (role == "perplexity") {
        caps.logprobs = true;
    } else {
        caps.chat = true;
    }
    return caps;
}

llm::ModelEndpoint endpoint_from_json(const nlohmann::json& value,
                                      const std::string& role) {
    if (!value.is_object()) {
        throw Error(Errc::invalid_config,
                    "endpoint for role '" + role + "' must be a JSON object");
    }
    llm::ModelEndpoint endpoint;
    endpoint.provider_id = value.value("provider_id", "http");
    endpoint.model_name = value.value("model_name", "");
    endpoint.base_url = value.value("base_url", "");
    endpoint.credential_ref = value.value("credential_ref", "");
    endpoint.role = role;
    endpoint.max_in_flight = value.value("max_in_flight", 4);
    if (value.contains("capabilities")) {
        endpoint.capabilities = llm::Capabilities::from_json(value["capabilities"]);
    } else {
        endpoint.capabilities = default_capabilities(role);
    }
    if (endpoint.model_name.empty()) {
        throw Error(Errc::invalid_config,
                    "endpoint for role '" + role + "' is missing model_name");
    }
    return endpoint;
}

llm::ModelEndpoint mock_endpoint(const std::string& model_name,
                                 const std::string& role) {
    llm::ModelEndpoint endpoint;
    endpoint.provider_id = "mock";
    endpoint.model_name = model_name;
    endpoint.base_url = "mock://local";
    endpoint.role = role;
    endpoint.capabilities = {true, true, true};
    return endpoint;
}

}  // namespace

HarnessConfig HarnessConfig::from_file(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(util::read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::invalid_config, path + ": " + e.what());
    }
    return from_json(doc);
}

HarnessConfig HarnessConfig::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) {
        throw Error(Errc::invalid_config, "config root must be a JSON object");
    }
    HarnessConfig config;
    try {
        const auto endpoints = doc.value("endpoints", nlohmann::json::object());
        if (endpoints.contains("targets")) {
            for (const auto& t : endpoints["targets"]) {
                config.targets.push_back(endpoint_from_json(t, "target"));
            }
        } else if (endpoints.contains("target")) {
            config.targets.push_back(
                endpoint_from_json(endpoints["target"], "target"));
        }
        for (const char* role : {"mutator", "judge", "embedder", "perplexity"}) {
            if (!endpoints.contains(role)) continue;
            const auto endpoint = endpoint_from_json(endpoints[role], role);
            if (std::string(role) == "mutator") config.mutator = endpoint;
            if (std::string(role) == "judge") config.judge = endpoint;
            if (std::string(role) == "embedder") config.embedder = endpoint;
            if (std::string(role) == "perplexity") config.perplexity = endpoint;
        }

        if (doc.contains("decoding")) {
            const auto& d = doc["decoding"];
            config.decoding.strategy =
                llm::strategy_from_name(d.value("strategy", "greedy"));
            config.decoding.temperature = d.value(
                "temperature",
                config.decoding.strategy == llm::SamplingStrategy::greedy ? 0.0
                                                                          : 0.7);
            config.decoding.top_p = d.value("top_p", 1.0);
            config.decoding.max_tokens = d.value("max_tokens", 256);
        }

        config.guidelines =
            mirage::mutator::GuidelineSet::from_name(doc.value("guidelines", "all"));
        config.iterations = doc.value("iterations", 1);
        if (doc.contains("variants")) {
            config.variants = doc["variants"].get<std::vector<std::string>>();
        }
        if (doc.contains("defenses")) {
            config.defenses = doc["defenses"].get<std::vector<std::string>>();
        }

        const auto paths = doc.value("paths", nlohmann::json::object());
        config.benchmark_path = paths.value("benchmark", "");
        config.record_store_path = paths.value("record_store", "records.jsonl");
        config.concreteness_lexicon_path = paths.value("concreteness_lexicon", "");
        config.tagger_lexicon_path = paths.value("tagger_lexicon", "");
        config.honesty_preamble_path = paths.value("honesty_preamble", "");
        config.audit_log_path = paths.value("audit_log", "");
        config.mock_fixture_path = paths.value("mock_fixture", "");

        if (doc.contains("retry")) {
            const auto& r = doc["retry"];
            config.retry.max_retries = r.value("max_retries", 5);
            config.retry.base_delay_s = r.value("base_delay_s", 1.0);
            config.retry.factor = r.value("factor", 2.0);
        }
        if (doc.contains("debate")) {
            const auto& d = doc["debate"];
            config.debate.n_agents = d.value("n_agents", 2);
            config.debate.n_rounds = d.value("n_rounds", 2);
        }
        if (doc.contains("filter")) {
            const auto& f = doc["filter"];
            config.filter_corpus_path = f.value("corpus", "");
            config.filter_threshold = f.value("threshold", 0.0);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::invalid_config, std::string("config: ") + e.what());
    }
    config.validate();
    return config;
}

HarnessConfig HarnessConfig::offline_mock() {
    HarnessConfig config;
    config.targets.push_back(mock_endpoint("mock-target", "target"));
    config.mutator = mock_endpoint("mock-mutator", "mutator");
    config.judge = mock_endpoint("mock-judge", "judge");
    config.embedder = mock_endpoint("mock-embedder", "embedder");
    config.perplexity = mock_endpoint("mock-scorer", "perplexity");
    config.use_mock = true;
    return config;
}

void HarnessConfig::validate() const {
    auto check_endpoint = [](const llm::ModelEndpoint& endpoint) {
        if (endpoint.model_name.empty()) {
            throw Error(Errc::invalid_config,
                        "endpoint for role '" + endpoint.role +
                            "' is missing model_name");
        }
        if (!endpoint.credential_ref.empty() &&
            !valid_env_name(endpoint.credential_ref)) {
            throw Error(Errc::invalid_config,
                        "credential_ref '" + endpoint.credential_ref +
                            "' is not an environment variable name; keys must "
                            "never be written into the config");
        }
        if (endpoint.max_in_flight < 1) {
            throw Error(Errc::invalid_config,
                        "max_in_flight must be >= 1 for " + endpoint.model_name);
        }
    };
    for (const auto& target : targets) check_endpoint(target);
    if (mutator) check_endpoint(*mutator);
    if (judge) check_endpoint(*judge);
    if (embedder) check_endpoint(*embedder);
    if (perplexity) check_endpoint(*perplexity);

    decoding.validate();
    if (iterations < 1) {
        throw Error(Errc::invalid_config, "iterations must be >= 1");
    }
    for (const auto& variant : variants) {
        if (util::trim(variant).empty()) {
            throw Error(Errc::invalid_config, "variant names must be non-empty");
        }
    }
    for (const auto& defense : defenses) {
        if (defense != "none" && defense != "honest" && defense != "debate" &&
            defense != "filter") {
            throw Error(Errc::invalid_config, "unknown defense '" + defense + "'");
        }
    }
    if (retry.max_retries < 0 || retry.base_delay_s < 0.0 || retry.factor < 1.0) {
        throw Error(Errc::invalid_config, "retry policy out of range");
    }
    if (debate.n_agents < 1 || debate.n_rounds < 1) {
        throw Error(Errc::invalid_config,
                    "debate needs n_agents >= 1 and n_rounds >= 1");
    }
}

std::unique_ptr<llm::Client> make_client(const HarnessConfig& config) {
    auto client = std::make_unique<llm::Client>();
    client->set_retry_policy(config.retry);
    if (!config.audit_log_path.empty()) {
        client->set_audit_log(
            std::make_shared<llm::AuditLog>(config.audit_log_path));
    }

    std::set<std::string> provider_ids;
    for (const auto& target : config.targets) {
        provider_ids.insert(target.provider_id);
    }
    for (const auto& endpoint :
         {config.mutator, config.judge, config.embedder, config.perplexity}) {
        if (endpoint) provider_ids.insert(endpoint->provider_id);
    }
    if (provider_ids.empty()) provider_ids.insert("mock");

    std::shared_ptr<llm::MockProvider> mock;
    auto get_mock = [&]() {
        if (!mock) {
            mock = config.mock_fixture_path.empty()
                       ? std::make_shared<llm::MockProvider>()
                       : llm::MockProvider::from_file(config.mock_fixture_path);
        }
        return mock;
    };
    std::shared_ptr<llm::HttpProvider> http;
    for (const auto& id : provider_ids) {
        if (config.use_mock || id == "mock") {
            client->register_provider(id, get_mock());
        } else {
            if (!http) http = std::make_shared<llm::HttpProvider>();
            client->register_provider(id, http);
        }
    }
    return client;
}

}  // namespace mirage::config
