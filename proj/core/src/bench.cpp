#include "mirage/bench.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "mirage/error.hpp"
#include "mirage/util.hpp"

namespace mirage::bench {

Task task_from_name(std::string_view name) {
    if (name == "generation") return Task::generation;
    if (name == "mc") return Task::mc;
    throw Error(Errc::invalid_config,
                "unknown task '" + std::string(name) + "'");
}

std::string_view task_name(Task task) {
    return task == Task::generation ? "generation" : "mc";
}

std::string generation_prompt(const std::string& question) {
    return question + " " + std::string(kAnswerSuffix);
}

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            row.push_back(field);
            field.clear();
        } else if (c == '\n') {
            row.push_back(field);
            field.clear();
            rows.push_back(row);
            row.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    if (!field.empty() || !row.empty()) {
        row.push_back(field);
        rows.push_back(row);
    }
    return rows;
}

bool blank_row(const std::vector<std::string>& row) {
    for (const auto& cell : row) {
        if (!util::trim(cell).empty()) return false;
    }
    return true;
}

std::vector<std::string> split_answers(const std::string& joined) {
    std::vector<std::string> answers;
    std::string piece;
    std::istringstream stream(joined);
    while (std::getline(stream, piece, ';')) {
        const std::string trimmed = util::trim(piece);
        if (!trimmed.empty()) answers.push_back(trimmed);
    }
    return answers;
}

std::string item_id_for(std::size_t ordinal) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "q%04zu", ordinal);
    return buf;
}

std::vector<BenchItem> load_csv(const std::string& path, Task task) {
    const auto rows = parse_csv(util::read_file(path));
    if (rows.empty()) {
        throw Error(Errc::schema, path + ": empty benchmark file");
    }
    std::unordered_map<std::string, std::size_t> columns;
    for (std::size_t i = 0; i < rows.front().size(); ++i) {
        columns[util::trim(rows.front()[i])] = i;
    }
    if (!columns.count("Question")) {
        throw Error(Errc::schema, path + ": missing required column 'Question'");
    }
    auto cell = [&](const std::vector<std::string>& row,
                    const char* column) -> std::string {
        const auto it = columns.find(column);
        if (it == columns.end() || it->second >= row.size()) return "";
        return util::trim(row[it->second]);
    };

    std::vector<BenchItem> items;
    std::size_t ordinal = 0;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (blank_row(rows[r])) continue;
        ++ordinal;
        BenchItem item;
        item.id = item_id_for(ordinal);
        item.question = cell(rows[r], "Question");
        if (item.question.empty()) {
            throw Error(Errc::schema,
                        path + " row " + std::to_string(r + 1) +
                            ": missing question");
        }
        item.type = cell(rows[r], "Type");
        item.category = cell(rows[r], "Category");
        item.best_answer = cell(rows[r], "Best Answer");
        item.correct_answers = split_answers(cell(rows[r], "Correct Answers"));
        item.incorrect_answers = split_answers(cell(rows[r], "Incorrect Answers"));
        item.source = cell(rows[r], "Source");
        if (task == Task::generation && item.correct_answers.empty()) {
            throw Error(Errc::schema,
                        path + " row " + std::to_string(r + 1) +
                            ": generation item needs at least one correct answer");
        }
        // Single-true MC in the official layout: best answer first, then the
        // listed incorrect answers, answer choices untouched.
        if (!item.best_answer.empty() && !item.incorrect_answers.empty() &&
            item.incorrect_answers.size() + 1 <= 26) {
            evaluator::McItem mc;
            mc.question = item.question;
            mc.options.push_back(item.best_answer);
            mc.options.insert(mc.options.end(), item.incorrect_answers.begin(),
                              item.incorrect_answers.end());
            mc.correct_index = 0;
            item.mc = std::move(mc);
        }
        items.push_back(std::move(item));
    }
    return items;
}

std::vector<BenchItem> load_jsonl(const std::string& path, Task task) {
    const auto lines = util::read_lines(path);
    std::vector<BenchItem> items;
    std::size_t ordinal = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (util::trim(lines[i]).empty()) continue;
        ++ordinal;
        const std::string where = path + " line " + std::to_string(i + 1);
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(lines[i]);
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::schema, where + ": " + e.what());
        }
        if (!row.is_object()) {
            throw Error(Errc::schema, where + ": expected a JSON object");
        }
        BenchItem item;
        item.id = row.value("id", item_id_for(ordinal));
        item.question = util::trim(row.value("question", ""));
        if (item.question.empty()) {
            throw Error(Errc::schema, where + ": missing question");
        }
        item.type = row.value("type", "");
        item.category = row.value("category", "");
        item.best_answer = row.value("best_answer", "");
        for (const auto& a : row.value("correct_answers", nlohmann::json::array())) {
            item.correct_answers.push_back(a.get<std::string>());
        }
        for (const auto& a :
             row.value("incorrect_answers", nlohmann::json::array())) {
            item.incorrect_answers.push_back(a.get<std::string>());
        }
        item.source = row.value("source", "");
        if (task == Task::generation && item.correct_answers.empty()) {
            throw Error(Errc::schema,
                        where + ": generation item needs at least one correct answer");
        }
        if (row.contains("mc") && !row["mc"].is_null()) {
            evaluator::McItem mc;
            mc.question = item.question;
            for (const auto& opt : row["mc"].value("options", nlohmann::json::array())) {
                mc.options.push_back(opt.get<std::string>());
            }
            mc.correct_index = row["mc"].value("correct_index", 0);
            try {
                mc.validate();
            } catch (const Error& e) {
                throw Error(Errc::schema, where + ": " + e.what());
            }
            item.mc = std::move(mc);
        }
        items.push_back(std::move(item));
    }
    return items;
}

}  // namespace

std::vector<BenchItem> load_benchmark(const std::string& path, Task task) {
    std::vector<BenchItem> items;
    const bool looks_csv = path.size() >= 4 && path.rfind(".csv") == path.size() - 4;
    if (looks_csv) {
        items = load_csv(path, task);
    } else {
        items = load_jsonl(path, task);
    }
    if (task == Task::mc) {
        std::vector<BenchItem> mc_items;
        for (auto& item : items) {
            if (item.mc.has_value()) mc_items.push_back(std::move(item));
        }
        if (mc_items.empty()) {
            throw Error(Errc::schema,
                        path + ": no multiple-choice items for the mc task");
        }
        return mc_items;
    }
    return items;
}

std::string_view record_status_name(RecordStatus status) {
    switch (status) {
        case RecordStatus::ok: return "ok";
        case RecordStatus::mutation_error: return "mutation_error";
        case RecordStatus::target_error: return "target_error";
        case RecordStatus::judge_error: return "judge_error";
        case RecordStatus::blocked_by_filter: return "blocked_by_filter";
    }
    return "ok";
}

RecordStatus record_status_from_name(std::string_view name) {
    if (name == "ok") return RecordStatus::ok;
    if (name == "mutation_error") return RecordStatus::mutation_error;
    if (name == "target_error") return RecordStatus::target_error;
    if (name == "judge_error") return RecordStatus::judge_error;
    if (name == "blocked_by_filter") return RecordStatus::blocked_by_filter;
    throw Error(Errc::schema, "unknown record status '" + std::string(name) + "'");
}

std::string record_key(const std::string& item_id, const std::string& model,
                       const std::string& variant, const std::string& defense,
                       llm::SamplingStrategy strategy) {
    std::string joined = item_id;
    joined += '\x1f';
    joined += model;
    joined += '\x1f';
    joined += variant;
    joined += '\x1f';
    joined += defense;
    joined += '\x1f';
    joined += llm::strategy_name(strategy);
    return util::hex64(util::fnv1a(joined));
}

nlohmann::ordered_json EvalRecord::to_json() const {
    nlohmann::ordered_json out;
    out["record_key"] = key;
    out["item_id"] = item_id;
    out["variant"] = variant;
    out["model"] = model;
    out["decoding"] = decoding;
    out["defense"] = defense;
    out["seeded"] = seeded;
    out["status"] = std::string(record_status_name(status));
    out["prompt_text"] = prompt_text;
    out["response_text"] = response_text;
    nlohmann::ordered_json score_list = nlohmann::ordered_json::array();
    for (const auto& score : scores) score_list.push_back(score.to_json());
    out["scores"] = score_list;
    out["similarity"] =
        similarity ? similarity->to_json() : nlohmann::ordered_json(nullptr);
    out["mc_choice"] =
        mc_choice ? nlohmann::ordered_json(*mc_choice) : nlohmann::ordered_json(nullptr);
    out["mc_correct"] =
        mc_correct ? nlohmann::ordered_json(*mc_correct) : nlohmann::ordered_json(nullptr);
    out["error"] = error ? nlohmann::ordered_json(*error) : nlohmann::ordered_json(nullptr);
    out["started_at"] = started_at;
    out["finished_at"] = finished_at;
    return out;
}

EvalRecord EvalRecord::from_json(const nlohmann::json& value) {
    EvalRecord record;
    record.key = value.value("record_key", "");
    record.item_id = value.value("item_id", "");
    record.variant = value.value("variant", "");
    record.model = value.value("model", "");
    record.decoding = value.value("decoding", "");
    record.defense = value.value("defense", "");
    record.seeded = value.value("seeded", false);
    record.status = record_status_from_name(value.value("status", "ok"));
    record.prompt_text = value.value("prompt_text", "");
    record.response_text = value.value("response_text", "");
    for (const auto& s : value.value("scores", nlohmann::json::array())) {
        evaluator::JudgeScore score;
        score.kind = evaluator::judge_kind_from_name(s.value("kind", "hallucination"));
        score.score = s.value("score", 0.0);
        score.reason = s.value("reason", "");
        score.raw = s.value("raw", "");
        record.scores.push_back(std::move(score));
    }
    if (value.contains("similarity") && !value["similarity"].is_null()) {
        evaluator::SimilarityScore sim;
        sim.value = value["similarity"].value("value", 0.0);
        sim.embedder = value["similarity"].value("embedder", "");
        record.similarity = sim;
    }
    if (value.contains("mc_choice") && !value["mc_choice"].is_null()) {
        record.mc_choice = value["mc_choice"].get<int>();
    }
    if (value.contains("mc_correct") && !value["mc_correct"].is_null()) {
        record.mc_correct = value["mc_correct"].get<bool>();
    }
    if (value.contains("error") && !value["error"].is_null()) {
        record.error = value["error"].get<std::string>();
    }
    record.started_at = value.value("started_at", "");
    record.finished_at = value.value("finished_at", "");
    return record;
}

RecordStore::RecordStore(std::string path) : path_(std::move(path)) {
    if (!util::file_exists(path_)) return;
    // A killed run can leave an unterminated final line. If it parses it only
    // misses its newline, so add one; otherwise drop the torn tail so the
    // record is recomputed and the next append starts on a fresh line.
    std::string content = util::read_file(path_);
    if (!content.empty() && content.back() != '\n') {
        const std::size_t last_nl = content.find_last_of('\n');
        const std::size_t tail = last_nl == std::string::npos ? 0 : last_nl + 1;
        bool tail_parses = false;
        try {
            tail_parses = nlohmann::json::parse(content.substr(tail)).is_object();
        } catch (const nlohmann::json::exception&) {
        }
        if (tail_parses) {
            content += '\n';
        } else {
            content.resize(tail);
        }
        util::write_file(path_, content);
    }
    for (const auto& line : util::read_lines(path_)) {
        if (util::trim(line).empty()) continue;
        try {
            const auto parsed = nlohmann::json::parse(line);
            const std::string key = parsed.value("record_key", "");
            if (!key.empty()) keys_.insert(key);
        } catch (const nlohmann::json::exception&) {
            continue;
        }
    }
}

bool RecordStore::contains(const std::string& key) const {
    const std::lock_guard<std::mutex> lock(mutex_);
    return keys_.count(key) > 0;
}

void RecordStore::append(const EvalRecord& record) {
    const std::lock_guard<std::mutex> lock(mutex_);
    std::ofstream out(path_, std::ios::app);
    if (!out) {
        throw Error(Errc::file_not_found, "cannot open record store " + path_);
    }
    out << record.to_json().dump() << '\n';
    out.flush();
    keys_.insert(record.key);
}

std::size_t RecordStore::size() const {
    const std::lock_guard<std::mutex> lock(mutex_);
    return keys_.size();
}

std::vector<EvalRecord> RecordStore::read_all(const std::string& path) {
    const auto lines = util::read_lines(path);
    std::vector<EvalRecord> records;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (util::trim(lines[i]).empty()) continue;
        try {
            records.push_back(EvalRecord::from_json(nlohmann::json::parse(lines[i])));
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::schema, path + " line " + std::to_string(i + 1) +
                                          ": " + e.what());
        }
    }
    return records;
}

namespace {

bool has_defense(const CampaignPlan& plan, std::string_view name) {
    return std::find(plan.defenses.begin(), plan.defenses.end(), name) !=
           plan.defenses.end();
}

}  // namespace

void CampaignPlan::validate() const {
    if (targets.empty()) {
        throw Error(Errc::invalid_config, "campaign needs at least one target");
    }
    if (variants.empty()) {
        throw Error(Errc::invalid_config, "campaign needs at least one variant");
    }
    if (defenses.empty()) {
        throw Error(Errc::invalid_config,
                    "campaign needs at least one defense entry (use 'none')");
    }
    for (const auto& defense : defenses) {
        if (defense != "none" && defense != "honest" && defense != "debate" &&
            defense != "filter") {
            throw Error(Errc::invalid_config, "unknown defense '" + defense + "'");
        }
    }
    if (!judge_endpoint.has_value()) {
        throw Error(Errc::invalid_config, "campaign needs a judge endpoint");
    }
    bool mutated = false;
    for (const auto& variant : variants) {
        if (variant != "original") mutated = true;
    }
    if (mutated) {
        if (!mutator_endpoint.has_value()) {
            throw Error(Errc::invalid_config,
                        "mutated variants need a mutator endpoint");
        }
        if (iterations < 1) {
            throw Error(Errc::invalid_config, "mutation iterations must be >= 1");
        }
    }
    if (has_defense(*this, "filter") && filter_lm == nullptr) {
        throw Error(Errc::invalid_config,
                    "filter defense needs a perplexity language model");
    }
    if (has_defense(*this, "debate")) {
        if (debate.n_agents < 1) {
            throw Error(Errc::invalid_config, "debate needs at least one agent");
        }
        if (debate.n_rounds < 1) {
            throw Error(Errc::invalid_config, "debate needs at least one round");
        }
        if (!debate.agent_endpoints.empty() &&
            debate.agent_endpoints.size() !=
                static_cast<std::size_t>(debate.n_agents)) {
            throw Error(Errc::invalid_config,
                        "debate endpoint list does not match n_agents");
        }
    }
    decoding.validate();
}

std::vector<EvalRecord> run_campaign(const std::vector<BenchItem>& items,
                                     const CampaignPlan& plan,
                                     llm::Client& client, RecordStore& store) {
    plan.validate();

    double filter_threshold = plan.filter_threshold;
    if (has_defense(plan, "filter") && filter_threshold <= 0.0) {
        std::vector<double> originals;
        originals.reserve(items.size());
        for (const auto& item : items) {
            originals.push_back(defenses::perplexity(
                generation_prompt(item.question), *plan.filter_lm));
        }
        filter_threshold = defenses::calibrate_threshold(originals);
    }
    std::string preamble = plan.honesty_preamble;
    if (has_defense(plan, "honest") && preamble.empty()) {
        preamble = defenses::default_honesty_preamble();
    }

    struct MutationOutcome {
        bool ok = false;
        std::string text;
        std::string error;
    };
    std::map<std::pair<std::string, std::string>, MutationOutcome> mutations;
    auto mutated_question = [&](const BenchItem& item,
                                const std::string& variant) -> MutationOutcome& {
        const auto cache_key = std::make_pair(item.id, variant);
        auto it = mutations.find(cache_key);
        if (it != mutations.end()) return it->second;
        MutationOutcome outcome;
        try {
            const auto lineage = mutator::mutate_iterative(
                item.id, item.question, plan.guidelines, plan.iterations, client,
                *plan.mutator_endpoint, plan.decoding);
            outcome.ok = true;
            outcome.text = lineage.back().text;
        } catch (const Error& e) {
            outcome.error = e.what();
        }
        return mutations.emplace(cache_key, std::move(outcome)).first->second;
    };

    std::vector<EvalRecord> produced;
    for (const auto& item : items) {
        for (const auto& target : plan.targets) {
            for (const auto& variant : plan.variants) {
                for (const auto& defense : plan.defenses) {
                    const std::string key =
                        record_key(item.id, target.model_name, variant, defense,
                                   plan.decoding.strategy);
                    if (store.contains(key)) continue;

                    EvalRecord record;
                    record.key = key;
                    record.item_id = item.id;
                    record.variant = variant;
                    record.model = target.model_name;
                    record.decoding = std::string(
                        llm::strategy_name(plan.decoding.strategy));
                    record.defense = defense;
                    record.started_at = util::iso8601_utc_now();

                    auto finish = [&](EvalRecord& r) {
                        r.finished_at = util::iso8601_utc_now();
                        store.append(r);
                        produced.push_back(r);
                    };

                    std::string question = item.question;
                    if (variant != "original") {
                        const auto& outcome = mutated_question(item, variant);
                        if (!outcome.ok) {
                            record.status = RecordStatus::mutation_error;
                            record.error = outcome.error;
                            finish(record);
                            continue;
                        }
                        question = outcome.text;
                    }
                    record.prompt_text = generation_prompt(question);

                    llm::DecodingConfig decoding = plan.decoding;
                    if (decoding.strategy == llm::SamplingStrategy::nucleus &&
                        client.provider_for(target).supports_seed()) {
                        uint64_t state = util::fnv1a(key) ^ plan.seed.value_or(0);
                        decoding.seed = util::splitmix64(state);
                        record.seeded = true;
                    }

                    try {
                        if (defense == "filter") {
                            const double pp = defenses::perplexity(
                                record.prompt_text, *plan.filter_lm);
                            if (pp > filter_threshold) {
                                char why[96];
                                std::snprintf(why, sizeof(why),
                                              "perplexity %.4f above threshold %.4f",
                                              pp, filter_threshold);
                                record.status = RecordStatus::blocked_by_filter;
                                record.error = why;
                                finish(record);
                                continue;
                            }
                        }
                        if (defense == "debate") {
                            defenses::DebateConfig debate = plan.debate;
                            if (debate.agent_endpoints.empty()) {
                                debate.agent_endpoints.assign(
                                    static_cast<std::size_t>(debate.n_agents),
                                    target);
                            }
                            record.response_text =
                                defenses::multi_agent_debate(record.prompt_text,
                                                             debate, client,
                                                             decoding)
                                    .answer;
                        } else {
                            std::vector<llm::Message> messages;
                            if (defense == "honest") {
                                messages = defenses::honest_wrap(
                                    record.prompt_text, preamble);
                            } else {
                                messages = {{"user", record.prompt_text}};
                            }
                            record.response_text =
                                client.chat(target, messages, decoding).response;
                        }
                    } catch (const Error& e) {
                        record.status = RecordStatus::target_error;
                        record.error = e.what();
                        finish(record);
                        continue;
                    }

                    try {
                        record.scores.push_back(evaluator::judge_hallucination(
                            question, record.response_text, item.correct_answers,
                            client, *plan.judge_endpoint));
                        record.scores.push_back(evaluator::judge_logicality(
                            question, record.response_text, client,
                            *plan.judge_endpoint));
                        record.scores.push_back(evaluator::judge_quality(
                            record.response_text, client, *plan.judge_endpoint));
                        if (plan.embed_endpoint.has_value()) {
                            record.similarity = evaluator::semantic_similarity(
                                item.question, question, client,
                                *plan.embed_endpoint);
                        }
                    } catch (const Error& e) {
                        record.status = RecordStatus::judge_error;
                        record.error = e.what();
                    }
                    finish(record);
                }
            }
        }
    }
    return produced;
}

namespace {

const std::array<std::string, 5> kMetricColumns = {
    "hallucination", "logicality", "quality", "similarity", "mc_accuracy"};

std::string csv_escape(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) return value;
    std::string out = "\"";
    for (const char c : value) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    out += "\"";
    return out;
}

std::string format_mean(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return buf;
}

std::string format_mean_delta(double value, double delta) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f (%+.2f)", value, delta);
    return buf;
}

}  // namespace

ReportTable aggregate(const std::vector<EvalRecord>& records) {
    if (records.empty()) {
        throw Error(Errc::empty_input, "no records to aggregate");
    }
    using GroupKey = std::tuple<std::string, std::string, std::string, std::string>;
    struct Acc {
        std::size_t ok = 0;
        std::size_t excluded = 0;
        std::map<std::string, std::pair<double, std::size_t>> sums;
    };
    std::map<GroupKey, Acc> accs;
    std::size_t excluded_total = 0;
    for (const auto& record : records) {
        const GroupKey key{record.model, record.variant, record.defense,
                           record.decoding};
        Acc& acc = accs[key];
        if (record.status != RecordStatus::ok) {
            ++acc.excluded;
            ++excluded_total;
            continue;
        }
        ++acc.ok;
        for (const auto& score : record.scores) {
            auto& slot = acc.sums[std::string(
                evaluator::judge_kind_name(score.kind))];
            slot.first += score.score;
            ++slot.second;
        }
        if (record.similarity.has_value()) {
            auto& slot = acc.sums["similarity"];
            slot.first += record.similarity->value;
            ++slot.second;
        }
        if (record.mc_correct.has_value()) {
            auto& slot = acc.sums["mc_accuracy"];
            slot.first += *record.mc_correct ? 1.0 : 0.0;
            ++slot.second;
        }
    }

    ReportTable table;
    table.excluded_records = excluded_total;
    for (const auto& [key, acc] : accs) {
        GroupStats group;
        group.model = std::get<0>(key);
        group.variant = std::get<1>(key);
        group.defense = std::get<2>(key);
        group.decoding = std::get<3>(key);
        group.records_ok = acc.ok;
        group.records_excluded = acc.excluded;
        for (const auto& [label, sum] : acc.sums) {
            if (sum.second > 0) {
                group.means[label] = sum.first / static_cast<double>(sum.second);
            }
        }
        table.groups.push_back(std::move(group));
    }

    std::sort(table.groups.begin(), table.groups.end(),
              [](const GroupStats& a, const GroupStats& b) {
                  const int ra = a.variant == "original" ? 0 : 1;
                  const int rb = b.variant == "original" ? 0 : 1;
                  return std::tie(a.model, a.defense, a.decoding, ra, a.variant) <
                         std::tie(b.model, b.defense, b.decoding, rb, b.variant);
              });

    std::map<GroupKey, const GroupStats*> originals;
    for (const auto& group : table.groups) {
        if (group.variant == "original") {
            originals[{group.model, "original", group.defense, group.decoding}] =
                &group;
        }
    }
    for (auto& group : table.groups) {
        if (group.variant == "original") continue;
        const auto it = originals.find(
            {group.model, "original", group.defense, group.decoding});
        if (it == originals.end()) continue;
        for (const auto& [label, mean] : group.means) {
            const auto twin = it->second->means.find(label);
            if (twin != it->second->means.end()) {
                group.deltas[label] = mean - twin->second;
            }
        }
    }
    return table;
}

std::string ReportTable::to_text() const {
    std::vector<std::string> metric_labels;
    for (const auto& label : kMetricColumns) {
        for (const auto& group : groups) {
            if (group.means.count(label)) {
                metric_labels.push_back(label);
                break;
            }
        }
    }
    std::vector<std::string> headers = {"model", "variant", "defense",
                                        "decoding", "n"};
    headers.insert(headers.end(), metric_labels.begin(), metric_labels.end());

    std::vector<std::vector<std::string>> cells;
    for (const auto& group : groups) {
        std::vector<std::string> row = {group.model, group.variant, group.defense,
                                        group.decoding,
                                        std::to_string(group.records_ok)};
        for (const auto& label : metric_labels) {
            const auto mean = group.means.find(label);
            if (mean == group.means.end()) {
                row.push_back("-");
            } else if (const auto delta = group.deltas.find(label);
                       delta != group.deltas.end()) {
                row.push_back(format_mean_delta(mean->second, delta->second));
            } else {
                row.push_back(format_mean(mean->second));
            }
        }
        cells.push_back(std::move(row));
    }

    std::vector<std::size_t> widths(headers.size());
    for (std::size_t c = 0; c < headers.size(); ++c) {
        widths[c] = headers[c].size();
        for (const auto& row : cells) {
            widths[c] = std::max(widths[c], row[c].size());
        }
    }
    std::ostringstream out;
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << row[c];
            if (c + 1 < row.size()) {
                out << std::string(widths[c] - row[c].size() + 2, ' ');
            }
        }
        out << '\n';
    };
    emit_row(headers);
    for (std::size_t c = 0; c < headers.size(); ++c) {
        out << std::string(widths[c], '-');
        if (c + 1 < headers.size()) out << "  ";
    }
    out << '\n';
    for (const auto& row : cells) emit_row(row);
    if (excluded_records > 0) {
        out << '\n'
            << excluded_records
            << " record(s) excluded from means (non-ok status)\n";
    }
    return out.str();
}

std::string ReportTable::to_csv() const {
    std::ostringstream out;
    out << "model,variant,defense,decoding,records_ok,records_excluded";
    for (const auto& label : kMetricColumns) {
        out << ',' << label << ',' << label << "_delta";
    }
    out << '\n';
    char buf[32];
    for (const auto& group : groups) {
        out << csv_escape(group.model) << ',' << csv_escape(group.variant) << ','
            << csv_escape(group.defense) << ',' << csv_escape(group.decoding)
            << ',' << group.records_ok << ',' << group.records_excluded;
        for (const auto& label : kMetricColumns) {
            out << ',';
            if (const auto mean = group.means.find(label);
                mean != group.means.end()) {
                std::snprintf(buf, sizeof(buf), "%.6g", mean->second);
                out << buf;
            }
            out << ',';
            if (const auto delta = group.deltas.find(label);
                delta != group.deltas.end()) {
                std::snprintf(buf, sizeof(buf), "%.6g", delta->second);
                out << buf;
            }
        }
        out << '\n';
    }
    return out.str();
}

nlohmann::ordered_json ReportTable::to_json() const {
    nlohmann::ordered_json out;
    nlohmann::ordered_json group_list = nlohmann::ordered_json::array();
    for (const auto& group : groups) {
        nlohmann::ordered_json g;
        g["model"] = group.model;
        g["variant"] = group.variant;
        g["defense"] = group.defense;
        g["decoding"] = group.decoding;
        g["records_ok"] = group.records_ok;
        g["records_excluded"] = group.records_excluded;
        g["means"] = group.means;
        g["deltas"] = group.deltas;
        group_list.push_back(std::move(g));
    }
    out["groups"] = group_list;
    out["excluded_records"] = excluded_records;
    return out;
}

std::string histogram_svg(const std::vector<EvalRecord>& records,
                          evaluator::JudgeKind kind) {
    std::map<std::string, std::array<int, 11>> panels;
    for (const auto& record : records) {
        if (record.status != RecordStatus::ok) continue;
        for (const auto& score : record.scores) {
            if (score.kind != kind) continue;
            const int bin = std::clamp(
                static_cast<int>(std::llround(score.score)), 0, 10);
            const std::string label = record.model + " / " + record.variant +
                                      " / " + record.defense + " / " +
                                      record.decoding;
            auto [it, inserted] = panels.try_emplace(label);
            if (inserted) it->second.fill(0);
            ++it->second[static_cast<std::size_t>(bin)];
        }
    }

    const int panel_w = 460;
    const int panel_h = 150;
    const int bar_area_h = 100;
    const int total_h =
        panels.empty() ? 60 : static_cast<int>(panels.size()) * panel_h + 30;
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << panel_w
        << "\" height=\"" << total_h << "\" font-family=\"monospace\">\n";
    out << "<text x=\"10\" y=\"18\" font-size=\"13\">"
        << evaluator::judge_kind_name(kind) << " score distribution</text>\n";
    if (panels.empty()) {
        out << "<text x=\"10\" y=\"40\" font-size=\"12\">no scored records</text>\n";
        out << "</svg>\n";
        return out.str();
    }
    int panel_index = 0;
    for (const auto& [label, bins] : panels) {
        const int top = 30 + panel_index * panel_h;
        int max_count = 1;
        for (const int count : bins) max_count = std::max(max_count, count);
        out << "<text x=\"10\" y=\"" << top + 14 << "\" font-size=\"11\">"
            << label << "</text>\n";
        for (int b = 0; b <= 10; ++b) {
            const int h = bins[static_cast<std::size_t>(b)] * bar_area_h / max_count;
            const int x = 10 + b * 40;
            const int y = top + 20 + (bar_area_h - h);
            out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"32\" height=\""
                << h << "\" fill=\"#4682b4\"/>\n";
            out << "<text x=\"" << x + 12 << "\" y=\"" << top + 20 + bar_area_h + 14
                << "\" font-size=\"10\">" << b << "</text>\n";
            if (bins[static_cast<std::size_t>(b)] > 0) {
                out << "<text x=\"" << x + 8 << "\" y=\"" << y - 3
                    << "\" font-size=\"10\">" << bins[static_cast<std::size_t>(b)]
                    << "</text>\n";
            }
        }
        ++panel_index;
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace mirage::bench
