#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace mirage::llm {

struct Capabilities {
    bool chat = false;
    bool logprobs = false;
    bool embeddings = false;

    static Capabilities from_json(const nlohmann::json& names);
    nlohmann::ordered_json to_json() const;
};

struct ModelEndpoint {
    std::string provider_id;
    std::string model_name;
    std::string base_url;
    // Name of the environment variable holding the key; the key itself is
    // never stored or logged.
    std::string credential_ref;
    Capabilities capabilities;
    std::string role;  // target | mutator | judge | embedder | perplexity
    int max_in_flight = 4;

    // Limiter key; two endpoints sharing it share a rate gate.
    std::string key() const { return provider_id + "/" + model_name + "@" + base_url; }
};

enum class SamplingStrategy { greedy, nucleus };

std::string_view strategy_name(SamplingStrategy s);
SamplingStrategy strategy_from_name(std::string_view name);

struct DecodingConfig {
    SamplingStrategy strategy = SamplingStrategy::nucleus;
    double temperature = 0.7;
    double top_p = 0.95;
    int max_tokens = 256;
    std::optional<uint64_t> seed;

    static DecodingConfig greedy_default();
    // Throws InvalidConfig: greedy requires temperature 0, top_p in (0,1],
    // max_tokens positive, temperature non-negative.
    void validate() const;
    nlohmann::ordered_json to_json() const;
};

struct Message {
    std::string role;  // system | user | assistant
    std::string content;
};

nlohmann::ordered_json messages_to_json(const std::vector<Message>& messages);

struct Usage {
    int64_t prompt_tokens = 0;
    int64_t completion_tokens = 0;
};

struct TokenLogprob {
    std::string token;
    double logprob = 0.0;
};

struct ChatExchange {
    std::vector<Message> messages;
    std::string response;
    std::optional<std::vector<TokenLogprob>> token_logprobs;
    Usage usage;
    int64_t latency_ms = 0;

    nlohmann::ordered_json to_json() const;
};

// Stable hash identifying one provider request; mock fixtures and the audit
// log are keyed by it. The decoding seed is excluded so seeded reruns keep
// their fixture keys.
uint64_t request_key(std::string_view op, const ModelEndpoint& endpoint,
                     const std::vector<Message>& messages,
                     const DecodingConfig& decoding, std::string_view extra);
uint64_t embed_request_key(const ModelEndpoint& endpoint, std::string_view text);

class Provider {
public:
    virtual ~Provider() = default;
    virtual ChatExchange chat(const ModelEndpoint& endpoint,
                              const std::vector<Message>& messages,
                              const DecodingConfig& decoding) = 0;
    // Token logprobs of `continuation` given the flattened messages.
    virtual std::vector<TokenLogprob> continuation_logprobs(
        const ModelEndpoint& endpoint, const std::vector<Message>& messages,
        const DecodingConfig& decoding, const std::string& continuation) = 0;
    virtual std::vector<std::vector<double>> embed(
        const ModelEndpoint& endpoint, const std::vector<std::string>& texts) = 0;
    virtual bool supports_seed() const { return false; }
};

// Scripted offline provider. Fixture schema:
//   {"entries": {"<16-hex request key>": <entry> | [<entry>, ...]},
//    "defaults": {"<model_name>": <entry> | [...]}}
// entry: {"response": text} | {"error": "rate_limited"|"timeout"|"transient"|
//        "provider"|"auth"} | {"token_logprobs": [[token, lp], ...]} |
//        {"embedding": [reals]}; optional "latency_ms".
// Lists are consumed round-robin per key; "{hash8}" in a response expands to
// the first 8 hex digits of the request key. With no matching entry the
// provider falls back to deterministic builtins (echoed last user message,
// hash-derived logprobs, hash-derived unit embeddings).
class MockProvider : public Provider {
public:
    MockProvider() = default;
    static std::shared_ptr<MockProvider> from_file(const std::string& path);
    static std::shared_ptr<MockProvider> from_json(const nlohmann::json& fixture);

    ChatExchange chat(const ModelEndpoint& endpoint,
                      const std::vector<Message>& messages,
                      const DecodingConfig& decoding) override;
    std::vector<TokenLogprob> continuation_logprobs(
        const ModelEndpoint& endpoint, const std::vector<Message>& messages,
        const DecodingConfig& decoding, const std::string& continuation) override;
    std::vector<std::vector<double>> embed(
        const ModelEndpoint& endpoint,
        const std::vector<std::string>& texts) override;

    static constexpr int kEmbeddingDim = 16;

private:
    nlohmann::json fixture_ = nlohmann::json::object();
    std::unordered_map<std::string, std::size_t> cursors_;
    std::mutex mutex_;

    std::optional<nlohmann::json> next_entry(uint64_t key,
                                             const std::string& model_name);
};

// OpenAI-style JSON-over-HTTP adapter: /v1/chat/completions, /v1/embeddings,
// and /v1/completions with echo for continuation scoring.
class HttpProvider : public Provider {
public:
    ChatExchange chat(const ModelEndpoint& endpoint,
                      const std::vector<Message>& messages,
                      const DecodingConfig& decoding) override;
    std::vector<TokenLogprob> continuation_logprobs(
        const ModelEndpoint& endpoint, const std::vector<Message>& messages,
        const DecodingConfig& decoding, const std::string& continuation) override;
    std::vector<std::vector<double>> embed(
        const ModelEndpoint& endpoint,
        const std::vector<std::string>& texts) override;
    bool supports_seed() const override { return true; }

    // Resolved key, or AuthError; reads only the named env var.
    static std::string resolve_credential(const ModelEndpoint& endpoint);
};

struct RetryPolicy {
    int max_retries = 5;
    double base_delay_s = 1.0;
    double factor = 2.0;
};

// JSONL transcript sink; thread-safe appends.
class AuditLog {
public:
    explicit AuditLog(std::string path) : path_(std::move(path)) {}
    void append(const nlohmann::ordered_json& line);
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::mutex mutex_;
};

class Client {
public:
    Client();

    void register_provider(const std::string& provider_id,
                           std::shared_ptr<Provider> provider);
    Provider& provider_for(const ModelEndpoint& endpoint);

    void set_retry_policy(RetryPolicy policy) { retry_ = policy; }
    const RetryPolicy& retry_policy() const { return retry_; }
    void set_audit_log(std::shared_ptr<AuditLog> log) { audit_ = std::move(log); }
    // Test seam; default sleeps for real.
    void set_sleeper(std::function<void(double)> sleeper);

    ChatExchange chat(const ModelEndpoint& endpoint,
                      const std::vector<Message>& messages,
                      const DecodingConfig& decoding);
    // Per-token logprobs of one continuation given the messages.
    std::vector<TokenLogprob> score_tokens(const ModelEndpoint& endpoint,
                                           const std::vector<Message>& messages,
                                           const DecodingConfig& decoding,
                                           const std::string& continuation);
    std::vector<std::pair<std::string, double>> chat_with_logprobs(
        const ModelEndpoint& endpoint, const std::vector<Message>& messages,
        const DecodingConfig& decoding,
        const std::vector<std::string>& continuations);
    std::vector<std::vector<double>> embed(const ModelEndpoint& endpoint,
                                           const std::vector<std::string>& texts);

private:
    struct Gate {
        std::mutex mutex;
        std::condition_variable cv;
        int in_flight = 0;
    };

    std::unordered_map<std::string, std::shared_ptr<Provider>> providers_;
    std::map<std::string, std::unique_ptr<Gate>> gates_;
    std::mutex gates_mutex_;
    RetryPolicy retry_;
    std::shared_ptr<AuditLog> audit_;
    std::function<void(double)> sleeper_;

    Gate& gate_for(const ModelEndpoint& endpoint);

    template <typename Fn>
    auto with_retry(Fn&& fn) -> decltype(fn());

    void audit(uint64_t key, const ModelEndpoint& endpoint,
               const std::vector<Message>& messages, const std::string& response,
               const std::optional<std::vector<TokenLogprob>>& logprobs,
               const Usage& usage, int64_t latency_ms);
};

}  // namespace mirage::llm
