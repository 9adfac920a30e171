#include "mirage/defenses.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "mirage/error.hpp"
#include "mirage/util.hpp"

#ifndef MIRAGE_DATA_DIR
#define MIRAGE_DATA_DIR ""
#endif

namespace mirage::defenses {

namespace {

constexpr char kContextSep = '\x1f';
const std::string kStartSymbol = "<s>";
const std::string kUnknownSymbol = "<unk>";

std::vector<std::string> lm_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream stream(text);
    std::string raw;
    while (stream >> raw) {
        std::size_t begin = 0;
        std::size_t end = raw.size();
        while (begin < end && std::ispunct(static_cast<unsigned char>(raw[begin]))) {
            ++begin;
        }
        while (end > begin &&
               std::ispunct(static_cast<unsigned char>(raw[end - 1]))) {
            --end;
        }
        if (begin == end) continue;
        tokens.push_back(util::to_lower(raw.substr(begin, end - begin)));
    }
    return tokens;
}

std::string context_key(const std::vector<std::string>& window) {
    std::string key;
    for (const auto& symbol : window) {
        if (!key.empty()) key += kContextSep;
        key += symbol;
    }
    return key;
}

}  // namespace

NgramLm::NgramLm(int order) : order_(order) {
    if (order < 1) {
        throw Error(Errc::invalid_config, "n-gram order must be >= 1");
    }
}

void NgramLm::train(const std::string& text) {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        const auto tokens = lm_tokens(line);
        if (tokens.empty()) continue;
        std::vector<std::string> window(static_cast<std::size_t>(order_ - 1),
                                        kStartSymbol);
        for (const auto& token : tokens) {
            vocab_.insert(token);
            const std::string ctx = context_key(window);
            ++context_counts_[ctx];
            ++gram_counts_[ctx.empty() ? token : ctx + kContextSep + token];
            if (order_ > 1) {
                window.erase(window.begin());
                window.push_back(token);
            }
        }
    }
}

NgramLm NgramLm::from_file(const std::string& path, int order) {
    NgramLm lm(order);
    lm.train(util::read_file(path));
    return lm;
}

NgramLm NgramLm::uniform(const std::vector<std::string>& vocab) {
    if (vocab.empty()) {
        throw Error(Errc::invalid_config, "uniform model needs a vocabulary");
    }
    NgramLm lm(1);
    lm.uniform_ = true;
    lm.vocab_.insert(vocab.begin(), vocab.end());
    return lm;
}

std::vector<double> NgramLm::token_logprobs(const std::string& text) {
    const auto tokens = lm_tokens(text);
    std::vector<double> logprobs;
    logprobs.reserve(tokens.size());
    if (uniform_) {
        const double lp = -std::log(static_cast<double>(vocab_.size()));
        logprobs.assign(tokens.size(), lp);
        return logprobs;
    }
    const double denom_extra = static_cast<double>(vocab_.size()) + 1.0;
    std::vector<std::string> window(static_cast<std::size_t>(order_ - 1),
                                    kStartSymbol);
    for (const auto& raw : tokens) {
        const std::string token = vocab_.count(raw) ? raw : kUnknownSymbol;
        const std::string ctx = context_key(window);
        const auto gram_it =
            gram_counts_.find(ctx.empty() ? token : ctx + kContextSep + token);
        const auto ctx_it = context_counts_.find(ctx);
        const double gram = gram_it == gram_counts_.end()
                                ? 0.0
                                : static_cast<double>(gram_it->second);
        const double ctx_total = ctx_it == context_counts_.end()
                                     ? 0.0
                                     : static_cast<double>(ctx_it->second);
        logprobs.push_back(std::log((gram + 1.0) / (ctx_total + denom_extra)));
        if (order_ > 1) {
            window.erase(window.begin());
            window.push_back(token);
        }
    }
    return logprobs;
}

std::vector<double> ApiLm::token_logprobs(const std::string& text) {
    const auto scored = client_.score_tokens(
        endpoint_, {{"user", ""}}, llm::DecodingConfig::greedy_default(), text);
    std::vector<double> logprobs;
    logprobs.reserve(scored.size());
    for (const auto& tl : scored) logprobs.push_back(tl.logprob);
    return logprobs;
}

double perplexity(const std::string& text, LanguageModel& lm) {
    if (util::trim(text).empty()) {
        throw Error(Errc::empty_text, "cannot score an empty text");
    }
    const auto logprobs = lm.token_logprobs(text);
    if (logprobs.empty()) {
        throw Error(Errc::empty_text, "text has no tokens to score");
    }
    double sum = 0.0;
    for (const double lp : logprobs) sum += lp;
    return std::exp(-sum / static_cast<double>(logprobs.size()));
}

double calibrate_threshold(const std::vector<double>& original_perplexities) {
    if (original_perplexities.empty()) {
        throw Error(Errc::empty_input, "no perplexities to calibrate from");
    }
    return *std::max_element(original_perplexities.begin(),
                             original_perplexities.end());
}

nlohmann::ordered_json PerplexityVerdict::to_json() const {
    nlohmann::ordered_json out;
    out["text_ref"] = text_ref;
    out["perplexity"] = perplexity;
    out["threshold"] = threshold;
    out["passed"] = passed;
    return out;
}

FilterOutcome filter_inputs(const std::vector<std::string>& texts,
                            LanguageModel& lm, double threshold) {
    if (threshold <= 0.0) {
        throw Error(Errc::invalid_threshold, "filter threshold must be positive");
    }
    if (texts.empty()) {
        throw Error(Errc::empty_input, "no texts to filter");
    }
    FilterOutcome outcome;
    outcome.verdicts.reserve(texts.size());
    std::size_t passed = 0;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        PerplexityVerdict verdict;
        char ref[16];
        std::snprintf(ref, sizeof(ref), "t%04zu", i + 1);
        verdict.text_ref = ref;
        verdict.perplexity = perplexity(texts[i], lm);
        verdict.threshold = threshold;
        verdict.passed = verdict.perplexity <= threshold;
        if (verdict.passed) ++passed;
        outcome.verdicts.push_back(std::move(verdict));
    }
    outcome.pass_rate =
        static_cast<double>(passed) / static_cast<double>(texts.size());
    return outcome;
}

std::vector<llm::Message> honest_wrap(const std::string& question,
                                      const std::string& preamble) {
    if (util::trim(question).empty()) {
        throw Error(Errc::empty_question, "cannot wrap an empty question");
    }
    return {{"system", preamble}, {"user", question}};
}

std::string default_honesty_preamble() {
    std::string path;
    if (const char* env = std::getenv("MIRAGE_HONESTY_PREAMBLE");
        env != nullptr && *env != '\0') {
        path = env;
    } else {
        path = std::string(MIRAGE_DATA_DIR) + "/honesty_preamble.txt";
    }
    std::string text = util::read_file(path);
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) {
        text.pop_back();
    }
    return text;
}

std::vector<llm::Message> NoDefense::wrap(const std::string& question) {
    if (util::trim(question).empty()) {
        throw Error(Errc::empty_question, "cannot wrap an empty question");
    }
    return {{"user", question}};
}

std::vector<llm::Message> HonestDefense::wrap(const std::string& question) {
    return honest_wrap(question, preamble_);
}

void DebateConfig::validate() const {
    if (n_agents < 1) {
        throw Error(Errc::invalid_config, "debate needs at least one agent");
    }
    if (n_rounds < 1) {
        throw Error(Errc::invalid_config, "debate needs at least one round");
    }
    if (agent_endpoints.size() != static_cast<std::size_t>(n_agents)) {
        throw Error(Errc::invalid_config,
                    "debate has " + std::to_string(agent_endpoints.size()) +
                        " endpoints for " + std::to_string(n_agents) + " agents");
    }
}

nlohmann::ordered_json DebateResult::to_json() const {
    nlohmann::ordered_json out;
    out["answer"] = answer;
    out["transcript"] = transcript;
    return out;
}

namespace {

std::string revision_prompt(const std::vector<std::string>& last_answers,
                            std::size_t self) {
    if (last_answers.size() == 1) {
        return "Review your previous answer for accuracy and revise it if "
               "needed. Reply with your updated answer only.";
    }
    std::string prompt = "Here are the latest answers from the other agents:\n";
    for (std::size_t i = 0; i < last_answers.size(); ++i) {
        if (i == self) continue;
        prompt += "\nAgent " + std::to_string(i + 1) + ": " + last_answers[i] + "\n";
    }
    prompt +=
        "\nConsider them, then revise your own answer. Reply with your "
        "updated answer only.";
    return prompt;
}

}  // namespace

DebateResult multi_agent_debate(const std::string& question,
                                const DebateConfig& config, llm::Client& client,
                                const llm::DecodingConfig& decoding) {
    config.validate();
    if (util::trim(question).empty()) {
        throw Error(Errc::empty_question, "cannot debate an empty question");
    }
    const auto n = static_cast<std::size_t>(config.n_agents);
    std::vector<std::vector<llm::Message>> conversations(
        n, std::vector<llm::Message>{{"user", question}});
    std::vector<std::string> last_answers(n);

    DebateResult result;
    for (int round = 1; round <= config.n_rounds; ++round) {
        std::vector<std::string> round_answers(n);
        for (std::size_t agent = 0; agent < n; ++agent) {
            if (round > 1) {
                conversations[agent].push_back(
                    {"user", revision_prompt(last_answers, agent)});
            }
            const auto exchange = client.chat(config.agent_endpoints[agent],
                                              conversations[agent], decoding);
            conversations[agent].push_back({"assistant", exchange.response});
            round_answers[agent] = exchange.response;
        }
        last_answers = round_answers;
        result.transcript.push_back(std::move(round_answers));
    }

    if (n == 1) {
        result.answer = last_answers[0];
        return result;
    }
    conversations[0].push_back(
        {"user",
         "The debate is over. Considering every agent's final answer, state "
         "the consensus answer."});
    result.answer =
        client.chat(config.agent_endpoints[0], conversations[0], decoding)
            .response;
    return result;
}

}  // namespace mirage::defenses
