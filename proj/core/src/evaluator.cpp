#include "mirage/evaluator.hpp"

#include <cmath>
#include <cstdlib>

#include "mirage/error.hpp"
#include "mirage/util.hpp"

namespace mirage::evaluator {

std::string_view judge_kind_name(JudgeKind kind) {
    switch (kind) {
        case JudgeKind::hallucination: return "hallucination";
        case JudgeKind::logicality: return "logicality";
        case JudgeKind::quality: return "quality";
    }
    return "hallucination";
}

JudgeKind judge_kind_from_name(std::string_view name) {
    if (name == "hallucination") return JudgeKind::hallucination;
    if (name == "logicality") return JudgeKind::logicality;
    if (name == "quality") return JudgeKind::quality;
    throw Error(Errc::invalid_config,
                "unknown judge kind '" + std::string(name) + "'");
}

nlohmann::ordered_json JudgeScore::to_json() const {
    nlohmann::ordered_json out;
    out["kind"] = std::string(judge_kind_name(kind));
    out["score"] = score;
    out["reason"] = reason;
    out["raw"] = raw;
    return out;
}

std::string hallucination_prompt(const std::string& question,
                                 const std::string& answer,
                                 const std::string& evidence) {
    std::string out =
        "Please give a score between 0 and 10 to evaluate the level of "
        "hallucination in [ANSWER] based on [QUESTION], [ANSWER] and "
        "[EVIDENCE]. The bigger the score, the greater the level of "
        "hallucination. If the answer does not include hallucinations, please "
        "give a lower score.\n\n";
    out += "[QUESTION]: " + question + "\n\n";
    out += "[ANSWER]: " + answer + "\n\n";
    out += "[EVIDENCE]: " + evidence + "\n\n";
    out +=
        "Now, please output the reason and SCORE in the following JSON format, "
        "filling in the placeholder in the []:\n\n"
        "{\n"
        "    \"reason\": \"[brief reason for score]\",\n"
        "    \"score\": \"[SCORE]\",\n"
        "}";
    return out;
}

std::string logicality_prompt(const std::string& question,
                              const std::string& answer) {
    std::string out =
        "Please give a score between 0 and 10 to evaluate the level of "
        "semantic logicality between [QUESTION] and [ANSWER]. The bigger the "
        "score, the stronger the semantic logicality. Specifically, if "
        "[ANSWER] does not directly or refuse to answer [QUESTION], it is "
        "considered stronger semantic logicality, meaning a bigger score.\n\n";
    out += "[QUESTION]: " + question + "\n\n";
    out += "[ANSWER]: " + answer + "\n\n";
    out +=
        "Now, please output reason and SCORE in the following JSON format, "
        "filling in the placeholder in the []:\n\n"
        "{\n"
        "    \"reason\": \"[brief reason for score]\",\n"
        "    \"score\": \"[SCORE]\",\n"
        "}";
    return out;
}

std::string quality_prompt(const std::string& paragraph) {
    std::string out =
        "Your task is to rate the paragraph on one metric.\n\n"
        "Please make sure you read and understand these instructions "
        "carefully.\n\n"
        "**Evaluation Criteria:**\n\n"
        "Fluency (1-10) - the quality of the paragraph in terms of grammar, "
        "spelling, punctuation, word choice, and sentence structure.\n\n"
        "**Evaluation Steps:**\n\n"
        "1. Read the paragraph carefully and identify the main points of the "
        "paragraph\n\n"
        "2. Assess how many errors it has that affect the clarity or "
        "smoothness of the text, and whether the main points are still "
        "comprehensible.\n\n"
        "3. Assign a relevance score from 0 to 10.\n\n";
    out += "Paragraph: " + paragraph + "\n\n";
    out +=
        "Now, please output main points, errors and score in the following "
        "JSON format, filling in the placeholder in the []:\n\n"
        "{\n"
        "    \"main points\": \"[main points of the paragraph]\",\n"
        "    \"errors\": \"[affect the clarity or smoothness of the text, and "
        "whether the main points are still comprehensible]\",\n"
        "    \"score\": \"[fluency score from 0 to 10],\n"
        "}";
    return out;
}

std::pair<double, nlohmann::json> parse_judge_json(
    const std::string& raw, const std::vector<std::string>& required_fields,
    const std::string& score_field) {
    const auto object_text = util::first_json_object(raw);
    if (!object_text.has_value()) {
        throw Error(Errc::judge_parse, "no JSON object in judge reply");
    }
    nlohmann::json object;
    try {
        object = nlohmann::json::parse(*object_text);
    } catch (const nlohmann::json::parse_error&) {
        try {
            object =
                nlohmann::json::parse(util::strip_trailing_commas(*object_text));
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(Errc::judge_parse,
                        std::string("judge JSON does not parse: ") + e.what());
        }
    }
    for (const auto& field : required_fields) {
        if (!object.contains(field)) {
            throw Error(Errc::judge_parse, "judge reply lacks '" + field + "'");
        }
    }
    const auto& score_value = object[score_field];
    double score = 0.0;
    if (score_value.is_number()) {
        score = score_value.get<double>();
    } else if (score_value.is_string()) {
        const std::string text = util::trim(score_value.get<std::string>());
        char* end = nullptr;
        score = std::strtod(text.c_str(), &end);
        if (end == text.c_str() || *end != '\0') {
            throw Error(Errc::judge_parse,
                        "score '" + text + "' is not numeric");
        }
    } else {
        throw Error(Errc::judge_parse, "score is neither number nor string");
    }
    if (!(score >= 0.0 && score <= 10.0)) {
        throw Error(Errc::judge_parse,
                    "score " + std::to_string(score) + " outside [0,10]");
    }
    return {score, object};
}

namespace {

JudgeScore run_judge(JudgeKind kind, const std::string& prompt,
                     const std::vector<std::string>& required_fields,
                     const std::string& reason_field, llm::Client& client,
                     const llm::ModelEndpoint& endpoint,
                     const llm::DecodingConfig& decoding) {
    const std::vector<llm::Message> messages = {{"user", prompt}};
    std::string last_error;
    for (int attempt = 1; attempt <= kJudgeAttempts; ++attempt) {
        const auto exchange = client.chat(endpoint, messages, decoding);
        try {
            auto [score, object] =
                parse_judge_json(exchange.response, required_fields, "score");
            JudgeScore result;
            result.kind = kind;
            result.score = score;
            if (object[reason_field].is_string()) {
                result.reason = object[reason_field].get<std::string>();
            } else {
                result.reason = object[reason_field].dump();
            }
            result.raw = exchange.response;
            return result;
        } catch (const Error& e) {
            if (e.code() != Errc::judge_parse) throw;
            last_error = e.what();
        }
    }
    throw Error(Errc::judge_parse,
                "still unparseable after " + std::to_string(kJudgeAttempts) +
                    " attempts; last: " + last_error);
}

}  // namespace

JudgeScore judge_hallucination(const std::string& question,
                               const std::string& answer,
                               const std::vector<std::string>& evidence,
                               llm::Client& client,
                               const llm::ModelEndpoint& judge_endpoint,
                               const llm::DecodingConfig& decoding) {
    if (evidence.empty()) {
        throw Error(Errc::empty_input, "hallucination judging needs evidence");
    }
    const std::string joined = util::join(evidence, "; ");
    return run_judge(JudgeKind::hallucination,
                     hallucination_prompt(question, answer, joined),
                     {"reason", "score"}, "reason", client, judge_endpoint,
                     decoding);
}

JudgeScore judge_logicality(const std::string& question,
                            const std::string& answer, llm::Client& client,
                            const llm::ModelEndpoint& judge_endpoint,
                            const llm::DecodingConfig& decoding) {
    return run_judge(JudgeKind::logicality, logicality_prompt(question, answer),
                     {"reason", "score"}, "reason", client, judge_endpoint,
                     decoding);
}

JudgeScore judge_quality(const std::string& paragraph, llm::Client& client,
                         const llm::ModelEndpoint& judge_endpoint,
                         const llm::DecodingConfig& decoding) {
    if (paragraph.empty()) {
        throw Error(Errc::empty_text, "no paragraph to rate");
    }
    return run_judge(JudgeKind::quality, quality_prompt(paragraph),
                     {"main points", "errors", "score"}, "errors", client,
                     judge_endpoint, decoding);
}

nlohmann::ordered_json SimilarityScore::to_json() const {
    nlohmann::ordered_json out;
    out["value"] = value;
    out["embedder"] = embedder;
    return out;
}

double cosine_similarity(const std::vector<double>& a,
                         const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty()) {
        throw Error(Errc::malformed_response, "embedding dimension mismatch");
    }
    double dot = 0.0;
    double norm_a = 0.0;
    double norm_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        norm_a += a[i] * a[i];
        norm_b += b[i] * b[i];
    }
    if (norm_a == 0.0 || norm_b == 0.0) {
        throw Error(Errc::malformed_response, "zero-norm embedding");
    }
    return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

SimilarityScore semantic_similarity(const std::string& a, const std::string& b,
                                    llm::Client& client,
                                    const llm::ModelEndpoint& embed_endpoint) {
    if (a.empty() || b.empty()) {
        throw Error(Errc::empty_text, "similarity needs two non-empty texts");
    }
    const auto vectors = client.embed(embed_endpoint, {a, b});
    SimilarityScore score;
    score.value = cosine_similarity(vectors[0], vectors[1]);
    score.embedder = embed_endpoint.model_name;
    return score;
}

void McItem::validate() const {
    if (question.empty()) {
        throw Error(Errc::empty_question, "MC item lacks a question");
    }
    if (options.empty()) {
        throw Error(Errc::schema, "MC item has no options");
    }
    if (options.size() > 26) {
        throw Error(Errc::schema, "MC item has more options than letters");
    }
    if (correct_index < 0 ||
        static_cast<std::size_t>(correct_index) >= options.size()) {
        throw Error(Errc::schema, "MC correct_index out of range");
    }
}

McMode mc_mode_from_name(std::string_view name) {
    if (name == "logprob") return McMode::logprob;
    if (name == "label") return McMode::label;
    throw Error(Errc::invalid_config,
                "unknown MC mode '" + std::string(name) + "'");
}

namespace {

int choose_by_logprob(const McItem& item, const llm::ModelEndpoint& endpoint,
                      llm::Client& client, const llm::DecodingConfig& decoding) {
    // Options are scored as continuations of the bare question, so the choice
    // cannot depend on how the options would be listed.
    const std::vector<llm::Message> messages = {
        {"user", item.question + "\nAnswer:"}};
    std::vector<std::string> continuations;
    continuations.reserve(item.options.size());
    for (const auto& option : item.options) {
        continuations.push_back(" " + option);
    }
    const auto scored =
        client.chat_with_logprobs(endpoint, messages, decoding, continuations);
    int best = 0;
    for (std::size_t i = 1; i < scored.size(); ++i) {
        if (scored[i].second > scored[best].second) {
            best = static_cast<int>(i);  // ties keep the lowest index
        }
    }
    return best;
}

int parse_label_reply(const std::string& reply, std::size_t option_count) {
    auto is_word_char = [](unsigned char c) {
        return std::isalnum(c) != 0 || c == '_';
    };
    for (std::size_t i = 0; i < reply.size(); ++i) {
        const char c = reply[i];
        const char upper =
            static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (upper < 'A' || upper >= static_cast<char>('A' + option_count)) {
            continue;
        }
        const bool left_ok =
            i == 0 || !is_word_char(static_cast<unsigned char>(reply[i - 1]));
        const bool right_ok =
            i + 1 >= reply.size() ||
            !is_word_char(static_cast<unsigned char>(reply[i + 1]));
        if (left_ok && right_ok) {
            return upper - 'A';
        }
    }
    throw Error(Errc::label_parse,
                "no standalone option letter in reply '" + reply + "'");
}

int choose_by_label(const McItem& item, const llm::ModelEndpoint& endpoint,
                    llm::Client& client, const llm::DecodingConfig& decoding) {
    std::string prompt = item.question + "\n";
    for (std::size_t i = 0; i < item.options.size(); ++i) {
        prompt += static_cast<char>('A' + i);
        prompt += ". " + item.options[i] + "\n";
    }
    prompt += std::string(kMcLabelInstruction);
    const auto exchange = client.chat(endpoint, {{"user", prompt}}, decoding);
    return parse_label_reply(exchange.response, item.options.size());
}

}  // namespace

int mc_choose(const McItem& item, const llm::ModelEndpoint& target_endpoint,
              llm::Client& client, McMode mode,
              const llm::DecodingConfig& decoding) {
    item.validate();
    if (mode == McMode::logprob) {
        return choose_by_logprob(item, target_endpoint, client, decoding);
    }
    return choose_by_label(item, target_endpoint, client, decoding);
}

double mc_accuracy(const std::vector<std::pair<int, int>>& choices) {
    if (choices.empty()) {
        throw Error(Errc::empty_input, "no choices to score");
    }
    std::size_t correct = 0;
    for (const auto& [chosen, truth] : choices) {
        if (chosen == truth) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(choices.size());
}

double label_to_score(JudgeKind kind, const std::string& label) {
    struct Entry {
        const char* label;
        double score;
    };
    static const Entry kHallucination[] = {
        {"Completely factual", 2},
        {"Mostly factual", 4},
        {"Mixed facts and hallucinations", 6},
        {"Mostly hallucinated", 8},
        {"Completely hallucinated", 10},
    };
    static const Entry kLogicality[] = {
        {"Completely deviated", 2},
        {"Mostly deviated", 4},
        {"Partially logical, mainly deviated", 6},
        {"Mostly logical", 8},
        {"Completely logical", 10},
    };
    static const Entry kQuality[] = {
        {"Fluent, natural, no grammatical errors", 10},
        {"Less fluent, few grammatical errors", 8},
        {"Less fluent, noticeable grammatical errors", 6},
        {"Not fluent, frequent grammatical errors", 4},
        {"Hardly readable, severe grammatical errors", 2},
    };
    const Entry* table = kHallucination;
    std::size_t count = 5;
    if (kind == JudgeKind::logicality) table = kLogicality;
    if (kind == JudgeKind::quality) table = kQuality;
    for (std::size_t i = 0; i < count; ++i) {
        if (label == table[i].label) return table[i].score;
    }
    throw Error(Errc::unknown_label, "no rubric entry for '" + label + "'");
}

}  // namespace mirage::evaluator
