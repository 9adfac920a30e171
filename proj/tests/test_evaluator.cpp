#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "mirage/error.hpp"
#include "mirage/evaluator.hpp"
#include "mirage/llmclient.hpp"
#include "mirage/util.hpp"

using namespace mirage;
using namespace mirage::evaluator;

namespace {

llm::ModelEndpoint endpoint_named(const std::string& model,
                                  const std::string& role) {
    llm::ModelEndpoint e;
    e.provider_id = "mock";
    e.model_name = model;
    e.base_url = "mock://local";
    e.capabilities.chat = true;
    e.capabilities.logprobs = true;
    e.capabilities.embeddings = true;
    e.role = role;
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

}  // namespace

TEST_CASE("judge kind names round-trip") {
    CHECK(judge_kind_name(JudgeKind::hallucination) == "hallucination");
    CHECK(judge_kind_name(JudgeKind::logicality) == "logicality");
    CHECK(judge_kind_name(JudgeKind::quality) == "quality");
    CHECK(judge_kind_from_name("hallucination") == JudgeKind::hallucination);
    CHECK(judge_kind_from_name("logicality") == JudgeKind::logicality);
    CHECK(judge_kind_from_name("quality") == JudgeKind::quality);
    check_raises(Errc::invalid_config, [] { judge_kind_from_name("vibes"); });
}

TEST_CASE("judge prompts embed their inputs verbatim") {
    std::string h = hallucination_prompt("Q text?", "A text.", "E1; E2");
    CHECK(h.find("Q text?") != std::string::npos);
    CHECK(h.find("A text.") != std::string::npos);
    CHECK(h.find("E1; E2") != std::string::npos);

    std::string l = logicality_prompt("Q text?", "A text.");
    CHECK(l.find("Q text?") != std::string::npos);
    CHECK(l.find("A text.") != std::string::npos);

    std::string q = quality_prompt("P text.");
    CHECK(q.find("P text.") != std::string::npos);
}

TEST_CASE("judge JSON parsing") {
    SUBCASE("number score") {
        auto [score, obj] =
            parse_judge_json(R"({"reason": "r", "score": 7})",
                             {"reason", "score"}, "score");
        CHECK(score == doctest::Approx(7.0));
        CHECK(obj["reason"] == "r");
    }
    SUBCASE("numeric string score") {
        auto [score, obj] = parse_judge_json(
            R"({"reason": "r", "score": "7.5"})", {"reason", "score"},
            "score");
        CHECK(score == doctest::Approx(7.5));
    }
    SUBCASE("fenced with prose") {
        auto [score, obj] = parse_judge_json(
            "Verdict below.\n```json\n{\"reason\": \"ok\", \"score\": \"4\"}"
            "\n```",
            {"reason", "score"}, "score");
        CHECK(score == doctest::Approx(4.0));
    }
    SUBCASE("trailing comma survives") {
        auto [score, obj] = parse_judge_json(
            "{\"reason\": \"ok\", \"score\": \"4\",}", {"reason", "score"},
            "score");
        CHECK(score == doctest::Approx(4.0));
    }
    SUBCASE("missing required field") {
        check_raises(Errc::judge_parse, [] {
            parse_judge_json(R"({"score": 5})", {"reason", "score"}, "score");
        });
    }
    SUBCASE("score above the scale") {
        check_raises(Errc::judge_parse, [] {
            parse_judge_json(R"({"reason": "r", "score": 11})",
                             {"reason", "score"}, "score");
        });
    }
    SUBCASE("negative score") {
        check_raises(Errc::judge_parse, [] {
            parse_judge_json(R"({"reason": "r", "score": -1})",
                             {"reason", "score"}, "score");
        });
    }
    SUBCASE("non-numeric score") {
        check_raises(Errc::judge_parse, [] {
            parse_judge_json(R"({"reason": "r", "score": "high"})",
                             {"reason", "score"}, "score");
        });
    }
    SUBCASE("no JSON object") {
        check_raises(Errc::judge_parse, [] {
            parse_judge_json("Score: 7 out of 10", {"score"}, "score");
        });
    }
}

TEST_CASE("rubric labels map onto their exact scores") {
    CHECK(label_to_score(JudgeKind::hallucination, "Completely factual") == 2);
    CHECK(label_to_score(JudgeKind::hallucination, "Mostly factual") == 4);
    CHECK(label_to_score(JudgeKind::hallucination,
                         "Mixed facts and hallucinations") == 6);
    CHECK(label_to_score(JudgeKind::hallucination, "Mostly hallucinated") ==
          8);
    CHECK(label_to_score(JudgeKind::hallucination,
                         "Completely hallucinated") == 10);

    CHECK(label_to_score(JudgeKind::logicality, "Completely deviated") == 2);
    CHECK(label_to_score(JudgeKind::logicality, "Mostly deviated") == 4);
    CHECK(label_to_score(JudgeKind::logicality,
                         "Partially logical, mainly deviated") == 6);
    CHECK(label_to_score(JudgeKind::logicality, "Mostly logical") == 8);
    CHECK(label_to_score(JudgeKind::logicality, "Completely logical") == 10);

    CHECK(label_to_score(JudgeKind::quality,
                         "Fluent, natural, no grammatical errors") == 10);
    CHECK(label_to_score(JudgeKind::quality,
                         "Less fluent, few grammatical errors") == 8);
    CHECK(label_to_score(JudgeKind::quality,
                         "Less fluent, noticeable grammatical errors") == 6);
    CHECK(label_to_score(JudgeKind::quality,
                         "Not fluent, frequent grammatical errors") == 4);
    CHECK(label_to_score(JudgeKind::quality,
                         "Hardly readable, severe grammatical errors") == 2);

    check_raises(Errc::unknown_label, [] {
        label_to_score(JudgeKind::hallucination, "Sorta factual");
    });
    // Labels belong to their own rubric.
    check_raises(Errc::unknown_label, [] {
        label_to_score(JudgeKind::quality, "Mostly factual");
    });
}

TEST_CASE("hallucination judging joins evidence and retries bad JSON") {
    auto e = endpoint_named("mock-judge", "judge");
    auto d = llm::DecodingConfig::greedy_default();
    std::string prompt = hallucination_prompt(
        "What color are veins?", "Blue.",
        "Veins look blue through skin; Blood is dark red");
    std::vector<llm::Message> msgs = {{"user", prompt}};
    std::string key = util::hex64(llm::request_key("chat", e, msgs, d, ""));

    nlohmann::json fixture;
    fixture["entries"][key] = {
        {{"response", "not json"}},
        {{"response", "{\"reason\": \"grounded\", \"score\": \"3\"}"}}};
    auto client = make_client(llm::MockProvider::from_json(fixture));

    auto score = judge_hallucination(
        "What color are veins?", "Blue.",
        {"Veins look blue through skin", "Blood is dark red"}, *client, e, d);
    CHECK(score.kind == JudgeKind::hallucination);
    CHECK(score.score == doctest::Approx(3.0));
    CHECK(score.reason == "grounded");
    CHECK(score.raw.find("grounded") != std::string::npos);
}

TEST_CASE("judging fails typed after three unparseable replies") {
    auto e = endpoint_named("mock-judge", "judge");
    auto d = llm::DecodingConfig::greedy_default();
    nlohmann::json fixture;
    fixture["defaults"]["mock-judge"] = {{"response", "never json"}};
    auto client = make_client(llm::MockProvider::from_json(fixture));

    check_raises(Errc::judge_parse, [&] {
        judge_logicality("Q?", "A.", *client, e, d);
    });
}

TEST_CASE("quality judging reads the errors field as the reason") {
    auto e = endpoint_named("mock-judge", "judge");
    auto d = llm::DecodingConfig::greedy_default();
    nlohmann::json fixture;
    fixture["defaults"]["mock-judge"] = {
        {"response", "{\"main points\": \"one claim\", \"errors\": \"none\", "
                     "\"score\": 9}"}};
    auto client = make_client(llm::MockProvider::from_json(fixture));

    auto score = judge_quality("A fine paragraph.", *client, e, d);
    CHECK(score.kind == JudgeKind::quality);
    CHECK(score.score == doctest::Approx(9.0));
    CHECK(score.reason == "none");
}

TEST_CASE("cosine similarity basics") {
    CHECK(cosine_similarity({1, 0, 0}, {1, 0, 0}) == doctest::Approx(1.0));
    CHECK(cosine_similarity({1, 0, 0}, {0, 1, 0}) == doctest::Approx(0.0));
    CHECK(cosine_similarity({1, 0, 0}, {-1, 0, 0}) == doctest::Approx(-1.0));
    CHECK(cosine_similarity({1, 2, 3}, {4, 5, 6}) ==
          doctest::Approx(cosine_similarity({4, 5, 6}, {1, 2, 3})));
    check_raises(Errc::malformed_response, [] { cosine_similarity({}, {}); });
    check_raises(Errc::malformed_response,
                 [] { cosine_similarity({1, 2}, {1, 2, 3}); });
    check_raises(Errc::malformed_response,
                 [] { cosine_similarity({0, 0}, {1, 2}); });
}

TEST_CASE("semantic similarity is one for identical texts") {
    auto client = make_client(std::make_shared<llm::MockProvider>());
    auto e = endpoint_named("mock-embedder", "embedder");

    auto same = semantic_similarity("waves", "waves", *client, e);
    CHECK(same.value == doctest::Approx(1.0));
    CHECK(same.embedder == "mock-embedder");

    auto other = semantic_similarity("waves", "particles", *client, e);
    CHECK(other.value < 1.0);
    CHECK(other.value >= -1.0);
}

namespace {

// Serves one scripted logprob per continuation; label replies pass through.
class ScriptedLogprobProvider : public llm::Provider {
public:
    std::map<std::string, double> logprob_for;
    std::string label_reply;

    llm::ChatExchange chat(const llm::ModelEndpoint&,
                           const std::vector<llm::Message>& msgs,
                           const llm::DecodingConfig&) override {
        llm::ChatExchange ex;
        ex.messages = msgs;
        ex.response = label_reply;
        return ex;
    }
    std::vector<llm::TokenLogprob> continuation_logprobs(
        const llm::ModelEndpoint&, const std::vector<llm::Message>&,
        const llm::DecodingConfig&, const std::string& continuation) override {
        return {{continuation, logprob_for.at(continuation)}};
    }
    std::vector<std::vector<double>> embed(
        const llm::ModelEndpoint&, const std::vector<std::string>&) override {
        return {};
    }
};

}  // namespace

TEST_CASE("logprob choice takes the argmax and ties keep the lowest index") {
    auto provider = std::make_shared<ScriptedLogprobProvider>();
    provider->logprob_for[" red"] = -2.0;
    provider->logprob_for[" blue"] = -0.5;
    provider->logprob_for[" green"] = -0.5;
    auto client = make_client(provider);
    auto e = endpoint_named("mock-target", "target");

    McItem item{"What color?", {"red", "blue", "green"}, 1};
    CHECK(mc_choose(item, e, *client, McMode::logprob) == 1);

    provider->logprob_for[" blue"] = -3.0;
    provider->logprob_for[" green"] = -3.0;
    // Now red wins outright.
    CHECK(mc_choose(item, e, *client, McMode::logprob) == 0);
}

TEST_CASE("argmax is invariant to shifts and option order") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> lp(-8.0, -0.01);
    std::uniform_real_distribution<double> shift(-5.0, 5.0);

    auto provider = std::make_shared<ScriptedLogprobProvider>();
    auto client = make_client(provider);
    auto e = endpoint_named("mock-target", "target");

    for (int trial = 0; trial < 1000; ++trial) {
        int k = 2 + int(rng() % 5);
        McItem item;
        item.question = "q" + std::to_string(trial);
        provider->logprob_for.clear();
        for (int i = 0; i < k; ++i) {
            std::string opt = "opt" + std::to_string(trial) + "_" +
                              std::to_string(i);
            item.options.push_back(opt);
            provider->logprob_for[" " + opt] = lp(rng);
        }
        item.correct_index = int(rng() % k);

        int chosen = mc_choose(item, e, *client, McMode::logprob);

        // Constant shift of every logprob.
        double c = shift(rng);
        for (auto& [key, value] : provider->logprob_for) value += c;
        CHECK(mc_choose(item, e, *client, McMode::logprob) == chosen);

        // Reordering the options still selects the same option text.
        std::string winner = item.options[chosen];
        McItem shuffled = item;
        std::shuffle(shuffled.options.begin(), shuffled.options.end(), rng);
        int again = mc_choose(shuffled, e, *client, McMode::logprob);
        CHECK(shuffled.options[again] == winner);
    }
}

TEST_CASE("label mode parses a standalone letter") {
    auto provider = std::make_shared<ScriptedLogprobProvider>();
    auto client = make_client(provider);
    auto e = endpoint_named("mock-target", "target");
    McItem item{"Pick one.", {"first", "second", "third"}, 0};

    provider->label_reply = "B";
    CHECK(mc_choose(item, e, *client, McMode::label) == 1);
    provider->label_reply = "The answer is C.";
    CHECK(mc_choose(item, e, *client, McMode::label) == 2);
    provider->label_reply = "a";
    CHECK(mc_choose(item, e, *client, McMode::label) == 0);
    // "D" is outside the option range and "Because" hides its letters
    // inside words.
    provider->label_reply = "D, because";
    check_raises(Errc::label_parse,
                 [&] { mc_choose(item, e, *client, McMode::label); });
}

TEST_CASE("MC items validate their shape") {
    check_raises(Errc::empty_question, [] {
        McItem{"", {"a", "b"}, 0}.validate();
    });
    check_raises(Errc::schema, [] { McItem{"q", {}, 0}.validate(); });
    check_raises(Errc::schema, [] {
        McItem{"q", {"a", "b"}, 2}.validate();
    });
    check_raises(Errc::schema, [] {
        McItem{"q", {"a", "b"}, -1}.validate();
    });
    std::vector<std::string> many(27, "x");
    check_raises(Errc::schema, [&] { McItem{"q", many, 0}.validate(); });
    CHECK_NOTHROW(McItem{"q", {"a", "b"}, 1}.validate());
}

TEST_CASE("mc accuracy is plain counting") {
    CHECK(mc_accuracy({{0, 0}, {1, 1}, {2, 0}, {1, 2}}) ==
          doctest::Approx(0.5));
    CHECK(mc_accuracy({{3, 3}}) == doctest::Approx(1.0));
    check_raises(Errc::empty_input, [] { mc_accuracy({}); });

    // Brute-force comparison over random instances.
    std::mt19937 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::pair<int, int>> choices;
        int n = 1 + int(rng() % 50);
        int agree = 0;
        for (int i = 0; i < n; ++i) {
            int chosen = int(rng() % 4);
            int truth = int(rng() % 4);
            if (chosen == truth) ++agree;
            choices.push_back({chosen, truth});
        }
        CHECK(mc_accuracy(choices) ==
              doctest::Approx(double(agree) / double(n)));
    }
}

TEST_CASE("judge mode names parse") {
    CHECK(mc_mode_from_name("logprob") == McMode::logprob);
    CHECK(mc_mode_from_name("label") == McMode::label);
    check_raises(Errc::invalid_config, [] { mc_mode_from_name("vote"); });
}
