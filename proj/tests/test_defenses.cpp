#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "mirage/defenses.hpp"
#include "mirage/error.hpp"
#include "mirage/llmclient.hpp"
#include "mirage/util.hpp"

using namespace mirage;
using namespace mirage::defenses;

namespace {

llm::ModelEndpoint agent_endpoint(const std::string& model = "mock-agent") {
    llm::ModelEndpoint e;
    e.provider_id = "mock";
    e.model_name = model;
    e.base_url = "mock://local";
    e.capabilities.chat = true;
    e.capabilities.logprobs = true;
    e.role = "target";
    return e;
}

std::unique_ptr<llm::Client> make_client(std::shared_ptr<llm::Provider> p) {
    auto client = std::make_unique<llm::Client>();
    client->register_provider("mock", std::move(p));
    client->set_sleeper([](double) {});
    return client;
}

template <typename F>
void check_raises(Errc code, F&& f) {
    try {
        f();
        FAIL_CHECK("expected an error, none raised");
    } catch (const Error& e) {
        CHECK(e.code() == code);
    }
}

// Emits one prescribed logprob for every token of any text.
class FlatLm : public LanguageModel {
public:
    explicit FlatLm(double lp) : lp_(lp) {}
    std::vector<double> token_logprobs(const std::string& text) override {
        std::size_t n = 0;
        std::istringstream in(text);
        std::string w;
        while (in >> w) ++n;
        return std::vector<double>(n, lp_);
    }

private:
    double lp_;
};

}  // namespace

TEST_CASE("uniform model perplexity equals the vocabulary size") {
    auto lm = NgramLm::uniform({"a", "b", "c", "d", "e"});
    CHECK(lm.vocab_size() == 5);
    CHECK(perplexity("anything at all", lm) == doctest::Approx(5.0));
    CHECK(perplexity("a", lm) == doctest::Approx(5.0));
    CHECK(perplexity("totally out of vocabulary words", lm) ==
          doctest::Approx(5.0));

    for (double lp : lm.token_logprobs("one two three")) {
        CHECK(lp == doctest::Approx(-std::log(5.0)));
    }

    check_raises(Errc::invalid_config, [] { NgramLm::uniform({}); });
}

TEST_CASE("perplexity is the exponential of the mean surprisal") {
    FlatLm flat(-2.0);
    CHECK(perplexity("three word text", flat) ==
          doctest::Approx(std::exp(2.0)));
    FlatLm sure(0.0);
    CHECK(perplexity("certain text", sure) == doctest::Approx(1.0));

    check_raises(Errc::empty_text, [&] { perplexity("", flat); });
    check_raises(Errc::empty_text, [&] { perplexity("   ", flat); });
    // Tokens that vanish after punctuation stripping leave nothing to score.
    check_raises(Errc::empty_text, [&] {
        NgramLm lm(1);
        lm.train("some vocab");
        perplexity("?! ... --", lm);
    });
}

TEST_CASE("bigram add-one smoothing on a two-word corpus") {
    NgramLm lm(2);
    lm.train("a b");
    CHECK(lm.vocab_size() == 2);
    // P(a|<s>) = (1+1)/(1+2+1), P(b|a) likewise, so PP = 2 exactly.
    CHECK(perplexity("a b", lm) == doctest::Approx(2.0).epsilon(1e-12));
    // Both words unseen: P = 1/4 then 1/3, so PP = sqrt(12).
    CHECK(perplexity("x y", lm) ==
          doctest::Approx(std::sqrt(12.0)).epsilon(1e-9));
}

TEST_CASE("in-domain text scores lower than gibberish") {
    NgramLm lm(2);
    lm.train("the cat sat on the mat\nthe dog sat on the rug\n"
             "a cat ran to the mat");
    double in_domain = perplexity("the cat sat on the rug", lm);
    double gibberish = perplexity("zyx qwv braque phlog", lm);
    CHECK(in_domain < gibberish);
}

TEST_CASE("threshold calibration takes the maximum") {
    CHECK(calibrate_threshold({3.5}) == doctest::Approx(3.5));
    CHECK(calibrate_threshold({1.0, 9.25, 4.0}) == doctest::Approx(9.25));
    check_raises(Errc::empty_input, [] { calibrate_threshold({}); });

    // Adding observations can only raise the bar.
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> pp(1.0, 50.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> values;
        int n = 1 + int(rng() % 20);
        for (int i = 0; i < n; ++i) values.push_back(pp(rng));
        double before = calibrate_threshold(values);
        values.push_back(pp(rng));
        CHECK(calibrate_threshold(values) >= before);
        double expected = *std::max_element(values.begin(), values.end());
        CHECK(calibrate_threshold(values) == doctest::Approx(expected));
    }
}

TEST_CASE("filter pass rates at the two extremes") {
    // Mirrors the benign/adversarial split: everything below the threshold
    // passes, everything above fails.
    const double threshold = 5.65;

    FlatLm below(-std::log(4.0));  // PP 4 < 5.65
    auto all_pass = filter_inputs({"one text", "two texts", "three texts"},
                                  below, threshold);
    CHECK(all_pass.pass_rate == doctest::Approx(1.0));
    for (const auto& v : all_pass.verdicts) {
        CHECK(v.passed);
        CHECK(v.perplexity == doctest::Approx(4.0));
        CHECK(v.threshold == doctest::Approx(threshold));
    }

    FlatLm above(-std::log(9.0));  // PP 9 > 5.65
    auto none_pass =
        filter_inputs({"one text", "two texts"}, above, threshold);
    CHECK(none_pass.pass_rate == doctest::Approx(0.0));
    for (const auto& v : none_pass.verdicts) CHECK_FALSE(v.passed);

    // Refs are ordinal and one-based.
    CHECK(all_pass.verdicts[0].text_ref == "t0001");
    CHECK(all_pass.verdicts[2].text_ref == "t0003");
}

TEST_CASE("filter validates threshold and inputs") {
    FlatLm flat(-1.0);
    check_raises(Errc::invalid_threshold,
                 [&] { filter_inputs({"x"}, flat, 0.0); });
    check_raises(Errc::invalid_threshold,
                 [&] { filter_inputs({"x"}, flat, -2.0); });
    check_raises(Errc::empty_input, [&] { filter_inputs({}, flat, 5.0); });
}

TEST_CASE("a text at exactly the threshold passes") {
    FlatLm flat(-std::log(4.0));
    auto outcome = filter_inputs({"any text"}, flat, 4.0);
    CHECK(outcome.verdicts[0].passed);
    CHECK(outcome.pass_rate == doctest::Approx(1.0));
}

TEST_CASE("verdicts serialize in a fixed field order") {
    PerplexityVerdict v;
    v.text_ref = "t0001";
    v.perplexity = 4.5;
    v.threshold = 5.65;
    v.passed = true;
    auto j = v.to_json();
    CHECK(j.dump() ==
          "{\"text_ref\":\"t0001\",\"perplexity\":4.5,\"threshold\":5.65,"
          "\"passed\":true}");
}

TEST_CASE("honest wrapping prepends the system preamble verbatim") {
    auto msgs = honest_wrap("What color are veins?", "Answer honestly.");
    REQUIRE(msgs.size() == 2);
    CHECK(msgs[0].role == "system");
    CHECK(msgs[0].content == "Answer honestly.");
    CHECK(msgs[1].role == "user");
    CHECK(msgs[1].content == "What color are veins?");

    check_raises(Errc::empty_question, [] { honest_wrap("", "P"); });
    check_raises(Errc::empty_question, [] { honest_wrap("  ", "P"); });
}

TEST_CASE("bundled honesty preamble loads and can be overridden") {
    ::unsetenv("MIRAGE_HONESTY_PREAMBLE");
    std::string bundled = default_honesty_preamble();
    CHECK_FALSE(bundled.empty());
    CHECK(bundled.find("uncertain") != std::string::npos);

    util::write_file("/tmp/mirage_test_preamble.txt", "Custom preamble.\n");
    ::setenv("MIRAGE_HONESTY_PREAMBLE", "/tmp/mirage_test_preamble.txt", 1);
    CHECK(default_honesty_preamble() == "Custom preamble.");
    ::unsetenv("MIRAGE_HONESTY_PREAMBLE");
    std::remove("/tmp/mirage_test_preamble.txt");
}

TEST_CASE("defense hooks name themselves and shape messages") {
    NoDefense none;
    CHECK(none.name() == "none");
    auto plain = none.wrap("Q?");
    REQUIRE(plain.size() == 1);
    CHECK(plain[0].role == "user");
    CHECK(plain[0].content == "Q?");

    HonestDefense honest("Preamble.");
    CHECK(honest.name() == "honest");
    auto wrapped = honest.wrap("Q?");
    REQUIRE(wrapped.size() == 2);
    CHECK(wrapped[0].content == "Preamble.");
}

TEST_CASE("debate config validation") {
    DebateConfig cfg;
    cfg.n_agents = 0;
    cfg.n_rounds = 1;
    check_raises(Errc::invalid_config, [&] { cfg.validate(); });

    cfg.n_agents = 1;
    cfg.n_rounds = 0;
    check_raises(Errc::invalid_config, [&] { cfg.validate(); });

    cfg.n_rounds = 1;
    check_raises(Errc::invalid_config, [&] { cfg.validate(); });  // 0 endpoints

    cfg.agent_endpoints = {agent_endpoint()};
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("a lone agent with one round is just a direct chat call") {
    auto e = agent_endpoint();
    auto d = llm::DecodingConfig::greedy_default();
    auto client = make_client(std::make_shared<llm::MockProvider>());

    DebateConfig cfg;
    cfg.n_agents = 1;
    cfg.n_rounds = 1;
    cfg.agent_endpoints = {e};

    auto result = multi_agent_debate("What color are veins?", cfg, *client, d);
    auto direct = client->chat(e, {{"user", "What color are veins?"}}, d);
    CHECK(result.answer == direct.response);
    REQUIRE(result.transcript.size() == 1);
    REQUIRE(result.transcript[0].size() == 1);
    CHECK(result.transcript[0][0] == direct.response);
}

TEST_CASE("two agents over two rounds close with a consensus turn") {
    auto e = agent_endpoint();
    auto d = llm::DecodingConfig::greedy_default();

    // Call order is deterministic: agents in index order each round, then
    // the closing consensus call by agent 0.
    nlohmann::json fixture;
    fixture["defaults"]["mock-agent"] = {
        {{"response", "first draft A"}},  {{"response", "first draft B"}},
        {{"response", "revised A"}},      {{"response", "revised B"}},
        {{"response", "consensus: X"}},
    };
    auto client = make_client(llm::MockProvider::from_json(fixture));

    DebateConfig cfg;
    cfg.n_agents = 2;
    cfg.n_rounds = 2;
    cfg.agent_endpoints = {e, e};

    auto result = multi_agent_debate("Q?", cfg, *client, d);
    CHECK(result.answer == "consensus: X");
    REQUIRE(result.transcript.size() == 2);
    CHECK(result.transcript[0] ==
          std::vector<std::string>{"first draft A", "first draft B"});
    CHECK(result.transcript[1] ==
          std::vector<std::string>{"revised A", "revised B"});

    auto j = result.to_json();
    CHECK(j["answer"] == "consensus: X");
    CHECK(j["transcript"][0][1] == "first draft B");
}

TEST_CASE("debate rejects an empty question") {
    auto client = make_client(std::make_shared<llm::MockProvider>());
    DebateConfig cfg;
    cfg.n_agents = 1;
    cfg.n_rounds = 1;
    cfg.agent_endpoints = {agent_endpoint()};
    check_raises(Errc::empty_question, [&] {
        multi_agent_debate("", cfg, *client,
                           llm::DecodingConfig::greedy_default());
    });
}
