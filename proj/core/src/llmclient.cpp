#include "mirage/llmclient.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "mirage/error.hpp"
#include "mirage/util.hpp"

namespace mirage::llm {

namespace {

std::size_t word_count(std::string_view text) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : text) {
        const bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r';
        if (!ws && !in_word) ++n;
        in_word = !ws;
    }
    return n;
}

}  // namespace

Capabilities Capabilities::from_json(const nlohmann::json& names) {
    if (!names.is_array()) {
        throw Error(Errc::invalid_config, "capabilities must be an array");
    }
    Capabilities caps;
    for (const auto& name : names) {
        const std::string s = name.get<std::string>();
        if (s == "chat") {
            caps.chat = true;
        } else if (s == "logprobs") {
            caps.logprobs = true;
        } else if (s == "embeddings") {
            caps.embeddings = true;
        } else {
            throw Error(Errc::invalid_config, "unknown capability '" + s + "'");
        }
    }
    return caps;
}

nlohmann::ordered_json Capabilities::to_json() const {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    if (chat) out.push_back("chat");
    if (logprobs) out.push_back("logprobs");
    if (embeddings) out.push_back("embeddings");
    return out;
}

std::string_view strategy_name(SamplingStrategy s) {
    return s == SamplingStrategy::greedy ? "greedy" : "nucleus";
}

SamplingStrategy strategy_from_name(std::string_view name) {
    if (name == "greedy") return SamplingStrategy::greedy;
    if (name == "nucleus") return SamplingStrategy::nucleus;
    throw Error(Errc::invalid_config,
                "unknown decoding strategy '" + std::string(name) + "'");
}

DecodingConfig DecodingConfig::greedy_default() {
    DecodingConfig cfg;
    cfg.strategy = SamplingStrategy::greedy;
    cfg.temperature = 0.0;
    cfg.top_p = 1.0;
    return cfg;
}

void DecodingConfig::validate() const {
    if (strategy == SamplingStrategy::greedy && temperature != 0.0) {
        throw Error(Errc::invalid_config, "greedy decoding requires temperature 0");
    }
    if (temperature < 0.0) {
        throw Error(Errc::invalid_config, "temperature must be non-negative");
    }
    if (!(top_p > 0.0 && top_p <= 1.0)) {
        throw Error(Errc::invalid_config, "top_p must lie in (0,1]");
    }
    if (max_tokens <= 0) {
        throw Error(Errc::invalid_config, "max_tokens must be positive");
    }
}

nlohmann::ordered_json DecodingConfig::to_json() const {
    nlohmann::ordered_json out;
    out["strategy"] = std::string(strategy_name(strategy));
    out["temperature"] = temperature;
    out["top_p"] = top_p;
    out["max_tokens"] = max_tokens;
    if (seed.has_value()) out["seed"] = *seed;
    return out;
}

nlohmann::ordered_json messages_to_json(const std::vector<Message>& messages) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& m : messages) {
        out.push_back({{"role", m.role}, {"content", m.content}});
    }
    return out;
}

nlohmann::ordered_json ChatExchange::to_json() const {
    nlohmann::ordered_json out;
    out["messages"] = messages_to_json(messages);
    out["response"] = response;
    if (token_logprobs.has_value()) {
        nlohmann::ordered_json lps = nlohmann::ordered_json::array();
        for (const auto& tl : *token_logprobs) {
            lps.push_back({tl.token, tl.logprob});
        }
        out["logprobs"] = lps;
    }
    out["usage"] = {{"prompt_tokens", usage.prompt_tokens},
                    {"completion_tokens", usage.completion_tokens}};
    out["latency_ms"] = latency_ms;
    return out;
}

uint64_t request_key(std::string_view op, const ModelEndpoint& endpoint,
                     const std::vector<Message>& messages,
                     const DecodingConfig& decoding, std::string_view extra) {
    nlohmann::ordered_json payload;
    payload["op"] = std::string(op);
    payload["model"] = endpoint.model_name;
    payload["strategy"] = std::string(strategy_name(decoding.strategy));
    payload["temperature"] = decoding.temperature;
    payload["top_p"] = decoding.top_p;
    payload["max_tokens"] = decoding.max_tokens;
    payload["messages"] = messages_to_json(messages);
    payload["extra"] = std::string(extra);
    return util::fnv1a(payload.dump());
}

uint64_t embed_request_key(const ModelEndpoint& endpoint, std::string_view text) {
    nlohmann::ordered_json payload;
    payload["op"] = "embed";
    payload["model"] = endpoint.model_name;
    payload["text"] = std::string(text);
    return util::fnv1a(payload.dump());
}

// ---------------------------------------------------------------------------
// MockProvider

std::shared_ptr<MockProvider> MockProvider::from_file(const std::string& path) {
    const std::string raw = util::read_file(path);
    nlohmann::json fixture;
    try {
        fixture = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Errc::schema, "mock fixture '" + path + "': " + e.what());
    }
    return from_json(fixture);
}

std::shared_ptr<MockProvider> MockProvider::from_json(
    const nlohmann::json& fixture) {
    if (!fixture.is_object()) {
        throw Error(Errc::schema, "mock fixture must be a JSON object");
    }
    auto provider = std::make_shared<MockProvider>();
    provider->fixture_ = fixture;
    return provider;
}

std::optional<nlohmann::json> MockProvider::next_entry(
    uint64_t key, const std::string& model_name) {
    const std::string hex = util::hex64(key);
    std::lock_guard<std::mutex> lock(mutex_);
    const nlohmann::json* slot = nullptr;
    std::string cursor_key;
    if (fixture_.contains("entries") && fixture_["entries"].contains(hex)) {
        slot = &fixture_["entries"][hex];
        cursor_key = "e:" + hex;
    } else if (fixture_.contains("defaults") &&
               fixture_["defaults"].contains(model_name)) {
        slot = &fixture_["defaults"][model_name];
        cursor_key = "d:" + model_name;
    } else {
        return std::nullopt;
    }
    if (slot->is_array()) {
        if (slot->empty()) return std::nullopt;
        const std::size_t idx = cursors_[cursor_key]++ % slot->size();
        return (*slot)[idx];
    }
    return *slot;
}

namespace {

[[noreturn]] void throw_scripted(const std::string& name) {
    if (name == "rate_limited") throw Error(Errc::rate_limited, "scripted");
    if (name == "timeout") throw Error(Errc::timeout, "scripted");
    if (name == "transient") throw Error(Errc::transient, "scripted");
    if (name == "provider") throw Error(Errc::provider, "scripted");
    if (name == "auth") throw Error(Errc::auth, "scripted");
    throw Error(Errc::schema, "unknown scripted error '" + name + "'");
}

void maybe_throw_scripted(const nlohmann::json& entry) {
    if (entry.contains("error")) {
        throw_scripted(entry["error"].get<std::string>());
    }
}

}  // namespace

ChatExchange MockProvider::chat(const ModelEndpoint& endpoint,
                                const std::vector<Message>& messages,
                                const DecodingConfig& decoding) {
    const uint64_t key = request_key("chat", endpoint, messages, decoding, "");
    ChatExchange exchange;
    exchange.messages = messages;
    if (auto entry = next_entry(key, endpoint.model_name)) {
        maybe_throw_scripted(*entry);
        if (!entry->contains("response")) {
            throw Error(Errc::schema, "mock chat entry lacks 'response'");
        }
        std::string text = (*entry)["response"].get<std::string>();
        text = util::replace_all(text, "{hash8}", util::hex64(key).substr(0, 8));
        exchange.response = text;
        exchange.latency_ms = entry->value("latency_ms", 0);
    } else {
        // Builtin fallback: echo the last user message.
        std::string echo = "ok";
        for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
            if (it->role == "user") {
                echo = it->content;
                break;
            }
        }
        exchange.response = echo;
    }
    for (const auto& m : messages) {
        exchange.usage.prompt_tokens += static_cast<int64_t>(word_count(m.content));
    }
    exchange.usage.completion_tokens =
        static_cast<int64_t>(word_count(exchange.response));
    return exchange;
}

std::vector<TokenLogprob> MockProvider::continuation_logprobs(
    const ModelEndpoint& endpoint, const std::vector<Message>& messages,
    const DecodingConfig& decoding, const std::string& continuation) {
    const uint64_t key =
        request_key("logprobs", endpoint, messages, decoding, continuation);
    if (auto entry = next_entry(key, endpoint.model_name)) {
        maybe_throw_scripted(*entry);
        if (!entry->contains("token_logprobs")) {
            throw Error(Errc::schema, "mock logprob entry lacks 'token_logprobs'");
        }
        std::vector<TokenLogprob> out;
        for (const auto& pair : (*entry)["token_logprobs"]) {
            out.push_back({pair.at(0).get<std::string>(), pair.at(1).get<double>()});
        }
        return out;
    }
    // Builtin fallback: one pseudo-logprob per whitespace token, derived from
    // the request key so reruns agree.
    std::vector<TokenLogprob> out;
    std::istringstream words(continuation);
    std::string token;
    std::size_t index = 0;
    while (words >> token) {
        const uint64_t h =
            util::fnv1a(util::hex64(key) + token + std::to_string(index++));
        const double lp = -0.1 - 3.9 * static_cast<double>(h % 1000) / 1000.0;
        out.push_back({token, lp});
    }
    if (out.empty()) {
        out.push_back({continuation, -1.0});
    }
    return out;
}

std::vector<std::vector<double>> MockProvider::embed(
    const ModelEndpoint& endpoint, const std::vector<std::string>& texts) {
    std::vector<std::vector<double>> vectors;
    vectors.reserve(texts.size());
    for (const auto& text : texts) {
        const uint64_t key = embed_request_key(endpoint, text);
        if (auto entry = next_entry(key, endpoint.model_name)) {
            maybe_throw_scripted(*entry);
            if (!entry->contains("embedding")) {
                throw Error(Errc::schema, "mock embed entry lacks 'embedding'");
            }
            vectors.push_back((*entry)["embedding"].get<std::vector<double>>());
            continue;
        }
        // Builtin fallback: unit vector seeded by the request key; identical
        // texts embed identically.
        uint64_t state = key;
        std::vector<double> v(kEmbeddingDim);
        double norm_sq = 0.0;
        for (auto& x : v) {
            const uint64_t r = util::splitmix64(state);
            x = 2.0 * (static_cast<double>(r >> 11) * 0x1.0p-53) - 1.0;
            norm_sq += x * x;
        }
        const double norm = std::sqrt(norm_sq);
        for (auto& x : v) x /= norm;
        vectors.push_back(std::move(v));
    }
    return vectors;
}

// ---------------------------------------------------------------------------
// HttpProvider

namespace {

// Splits scheme://host[:port][/prefix]; a trailing /v1 in the prefix is
// dropped because the fixed paths below already carry it.
void parse_base_url(const std::string& base_url, std::string& origin,
                    std::string& prefix) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(Errc::invalid_config,
                    "base_url '" + base_url + "' lacks a scheme");
    }
    const auto path_start = base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        origin = base_url;
        prefix.clear();
    } else {
        origin = base_url.substr(0, path_start);
        prefix = base_url.substr(path_start);
    }
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    if (prefix.size() >= 3 && prefix.substr(prefix.size() - 3) == "/v1") {
        prefix.resize(prefix.size() - 3);
    }
}

[[noreturn]] void throw_http_status(int status, const std::string& body) {
    std::string snippet = body.substr(0, 200);
    const std::string detail = "status " + std::to_string(status) +
                               (snippet.empty() ? "" : ": " + snippet);
    if (status == 401 || status == 403) throw Error(Errc::auth, detail);
    if (status == 429) throw Error(Errc::rate_limited, detail);
    if (status == 408) throw Error(Errc::timeout, detail);
    if (status >= 500) throw Error(Errc::transient, detail);
    throw Error(Errc::provider, detail);
}

nlohmann::json post_json(const ModelEndpoint& endpoint, const std::string& path,
                         const nlohmann::ordered_json& body) {
    const std::string credential = HttpProvider::resolve_credential(endpoint);
    std::string origin;
    std::string prefix;
    parse_base_url(endpoint.base_url, origin, prefix);

    httplib::Client client(origin);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(120, 0);
    client.set_write_timeout(120, 0);
    httplib::Headers headers;
    if (!credential.empty()) {
        headers.emplace("Authorization", "Bearer " + credential);
    }

    const auto res =
        client.Post(prefix + path, headers, body.dump(), "application/json");
    if (!res) {
        const auto err = res.error();
        if (err == httplib::Error::ConnectionTimeout ||
            err == httplib::Error::Read || err == httplib::Error::Write) {
            throw Error(Errc::timeout, httplib::to_string(err));
        }
        throw Error(Errc::transient, httplib::to_string(err));
    }
    if (res->status != 200) {
        throw_http_status(res->status, res->body);
    }
    try {
        return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Errc::malformed_response, e.what());
    }
}

Usage parse_usage(const nlohmann::json& reply) {
    Usage usage;
    if (reply.contains("usage")) {
        usage.prompt_tokens = reply["usage"].value("prompt_tokens", int64_t{0});
        usage.completion_tokens =
            reply["usage"].value("completion_tokens", int64_t{0});
    }
    return usage;
}

std::string flatten_messages(const std::vector<Message>& messages) {
    std::string flat;
    for (const auto& m : messages) {
        if (!flat.empty()) flat += "\n\n";
        flat += m.content;
    }
    return flat;
}

int64_t elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start)
        .count();
}

}  // namespace

std::string HttpProvider::resolve_credential(const ModelEndpoint& endpoint) {
    if (endpoint.credential_ref.empty()) return "";
    const char* value = std::getenv(endpoint.credential_ref.c_str());
    if (value == nullptr || *value == '\0') {
        throw Error(Errc::auth, "environment variable '" +
                                    endpoint.credential_ref + "' is not set");
    }
    return value;
}

ChatExchange HttpProvider::chat(const ModelEndpoint& endpoint,
                                const std::vector<Message>& messages,
                                const DecodingConfig& decoding) {
    nlohmann::ordered_json body;
    body["model"] = endpoint.model_name;
    body["messages"] = messages_to_json(messages);
    body["temperature"] = decoding.temperature;
    body["top_p"] = decoding.top_p;
    body["max_tokens"] = decoding.max_tokens;
    if (decoding.seed.has_value()) body["seed"] = *decoding.seed;

    const auto start = std::chrono::steady_clock::now();
    const auto reply = post_json(endpoint, "/v1/chat/completions", body);

    ChatExchange exchange;
    exchange.messages = messages;
    exchange.latency_ms = elapsed_ms(start);
    try {
        exchange.response =
            reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::malformed_response,
                    std::string("chat completion reply: ") + e.what());
    }
    exchange.usage = parse_usage(reply);
    return exchange;
}

std::vector<TokenLogprob> HttpProvider::continuation_logprobs(
    const ModelEndpoint& endpoint, const std::vector<Message>& messages,
    const DecodingConfig& decoding, const std::string& continuation) {
    const std::string prompt = flatten_messages(messages);
    nlohmann::ordered_json body;
    body["model"] = endpoint.model_name;
    body["prompt"] = prompt + continuation;
    body["max_tokens"] = 0;
    body["echo"] = true;
    body["logprobs"] = 0;
    body["temperature"] = 0.0;
    (void)decoding;

    const auto reply = post_json(endpoint, "/v1/completions", body);
    try {
        const auto& lp = reply.at("choices").at(0).at("logprobs");
        const auto& tokens = lp.at("tokens");
        const auto& logprobs = lp.at("token_logprobs");
        const auto& offsets = lp.at("text_offset");
        std::vector<TokenLogprob> out;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (offsets.at(i).get<std::size_t>() < prompt.size()) continue;
            const double value =
                logprobs.at(i).is_null() ? 0.0 : logprobs.at(i).get<double>();
            out.push_back({tokens.at(i).get<std::string>(), value});
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::malformed_response,
                    std::string("completions logprob reply: ") + e.what());
    }
}

std::vector<std::vector<double>> HttpProvider::embed(
    const ModelEndpoint& endpoint, const std::vector<std::string>& texts) {
    nlohmann::ordered_json body;
    body["model"] = endpoint.model_name;
    body["input"] = texts;

    const auto reply = post_json(endpoint, "/v1/embeddings", body);
    try {
        std::vector<std::vector<double>> vectors(texts.size());
        for (const auto& item : reply.at("data")) {
            const auto index = item.at("index").get<std::size_t>();
            if (index >= vectors.size()) {
                throw Error(Errc::malformed_response, "embedding index out of range");
            }
            vectors[index] = item.at("embedding").get<std::vector<double>>();
        }
        return vectors;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::malformed_response,
                    std::string("embeddings reply: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Client

void AuditLog::append(const nlohmann::ordered_json& line) {
    std::lock_guard<std::mutex> lock(mutex_);
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) {
        throw Error(Errc::file_not_found, "audit log '" + path_ + "'");
    }
    out << line.dump() << '\n';
}

Client::Client() {
    sleeper_ = [](double seconds) {
        std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
    };
}

void Client::register_provider(const std::string& provider_id,
                               std::shared_ptr<Provider> provider) {
    providers_[provider_id] = std::move(provider);
}

Provider& Client::provider_for(const ModelEndpoint& endpoint) {
    const auto it = providers_.find(endpoint.provider_id);
    if (it == providers_.end()) {
        throw Error(Errc::invalid_config,
                    "no provider registered as '" + endpoint.provider_id + "'");
    }
    return *it->second;
}

void Client::set_sleeper(std::function<void(double)> sleeper) {
    sleeper_ = std::move(sleeper);
}

Client::Gate& Client::gate_for(const ModelEndpoint& endpoint) {
    std::lock_guard<std::mutex> lock(gates_mutex_);
    auto& slot = gates_[endpoint.key()];
    if (!slot) slot = std::make_unique<Gate>();
    return *slot;
}

namespace {

class GatePass {
public:
    GatePass(std::mutex& m, std::condition_variable& cv, int& in_flight, int cap)
        : mutex_(m), cv_(cv), in_flight_(in_flight) {
        std::unique_lock<std::mutex> lock(mutex_);
        cv_.wait(lock, [&] { return in_flight_ < cap; });
        ++in_flight_;
    }
    ~GatePass() {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            --in_flight_;
        }
        cv_.notify_one();
    }

private:
    std::mutex& mutex_;
    std::condition_variable& cv_;
    int& in_flight_;
};

}  // namespace

template <typename Fn>
auto Client::with_retry(Fn&& fn) -> decltype(fn()) {
    int attempt = 0;
    for (;;) {
        try {
            return fn();
        } catch (const Error& e) {
            if (!is_retryable(e.code()) || attempt >= retry_.max_retries) {
                throw;
            }
            sleeper_(retry_.base_delay_s * std::pow(retry_.factor, attempt));
            ++attempt;
        }
    }
}

void Client::audit(uint64_t key, const ModelEndpoint& endpoint,
                   const std::vector<Message>& messages,
                   const std::string& response,
                   const std::optional<std::vector<TokenLogprob>>& logprobs,
                   const Usage& usage, int64_t latency_ms) {
    if (!audit_) return;
    nlohmann::ordered_json line;
    line["request_hash"] = util::hex64(key);
    line["role"] = endpoint.role;
    line["messages"] = messages_to_json(messages);
    line["response"] = response;
    if (logprobs.has_value()) {
        nlohmann::ordered_json lps = nlohmann::ordered_json::array();
        for (const auto& tl : *logprobs) lps.push_back({tl.token, tl.logprob});
        line["logprobs"] = lps;
    }
    line["usage"] = {{"prompt_tokens", usage.prompt_tokens},
                     {"completion_tokens", usage.completion_tokens}};
    line["latency_ms"] = latency_ms;
    line["timestamp"] = util::iso8601_utc_now();
    audit_->append(line);
}

ChatExchange Client::chat(const ModelEndpoint& endpoint,
                          const std::vector<Message>& messages,
                          const DecodingConfig& decoding) {
    decoding.validate();
    if (!endpoint.capabilities.chat) {
        throw Error(Errc::unsupported,
                    "endpoint " + endpoint.model_name + " lacks chat capability");
    }
    auto& provider = provider_for(endpoint);
    auto& gate = gate_for(endpoint);
    const GatePass pass(gate.mutex, gate.cv, gate.in_flight,
                        std::max(1, endpoint.max_in_flight));
    const auto exchange =
        with_retry([&] { return provider.chat(endpoint, messages, decoding); });
    audit(request_key("chat", endpoint, messages, decoding, ""), endpoint,
          messages, exchange.response, exchange.token_logprobs, exchange.usage,
          exchange.latency_ms);
    return exchange;
}

std::vector<TokenLogprob> Client::score_tokens(const ModelEndpoint& endpoint,
                                               const std::vector<Message>& messages,
                                               const DecodingConfig& decoding,
                                               const std::string& continuation) {
    decoding.validate();
    if (!endpoint.capabilities.logprobs) {
        throw Error(Errc::unsupported, "endpoint " + endpoint.model_name +
                                           " lacks logprobs capability");
    }
    auto& provider = provider_for(endpoint);
    auto& gate = gate_for(endpoint);
    const GatePass pass(gate.mutex, gate.cv, gate.in_flight,
                        std::max(1, endpoint.max_in_flight));
    const auto tokens = with_retry([&] {
        return provider.continuation_logprobs(endpoint, messages, decoding,
                                              continuation);
    });
    audit(request_key("logprobs", endpoint, messages, decoding, continuation),
          endpoint, messages, continuation, tokens, Usage{}, 0);
    return tokens;
}

std::vector<std::pair<std::string, double>> Client::chat_with_logprobs(
    const ModelEndpoint& endpoint, const std::vector<Message>& messages,
    const DecodingConfig& decoding,
    const std::vector<std::string>& continuations) {
    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(continuations.size());
    for (const auto& continuation : continuations) {
        const auto tokens = score_tokens(endpoint, messages, decoding, continuation);
        double total = 0.0;
        for (const auto& tl : tokens) total += tl.logprob;
        scored.emplace_back(continuation, total);
    }
    return scored;
}

std::vector<std::vector<double>> Client::embed(
    const ModelEndpoint& endpoint, const std::vector<std::string>& texts) {
    if (!endpoint.capabilities.embeddings) {
        throw Error(Errc::unsupported, "endpoint " + endpoint.model_name +
                                           " lacks embeddings capability");
    }
    if (texts.empty()) {
        throw Error(Errc::empty_input, "no texts to embed");
    }
    auto& provider = provider_for(endpoint);
    auto& gate = gate_for(endpoint);
    const GatePass pass(gate.mutex, gate.cv, gate.in_flight,
                        std::max(1, endpoint.max_in_flight));
    const auto start = std::chrono::steady_clock::now();
    const auto vectors =
        with_retry([&] { return provider.embed(endpoint, texts); });
    if (vectors.size() != texts.size()) {
        throw Error(Errc::malformed_response, "embedding count mismatch");
    }
    for (const auto& v : vectors) {
        if (v.size() != vectors.front().size()) {
            throw Error(Errc::malformed_response, "embedding dimension mismatch");
        }
    }
    std::ostringstream summary;
    summary << "[embeddings n=" << vectors.size() << " dim="
            << (vectors.empty() ? 0 : vectors.front().size()) << "]";
    std::vector<Message> texts_as_messages;
    texts_as_messages.reserve(texts.size());
    for (const auto& t : texts) texts_as_messages.push_back({"user", t});
    audit(embed_request_key(endpoint, texts.front()), endpoint, texts_as_messages,
          summary.str(), std::nullopt, Usage{}, elapsed_ms(start));
    return vectors;
}

}  // namespace mirage::llm
