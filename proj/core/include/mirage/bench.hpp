#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mirage/defenses.hpp"
#include "mirage/evaluator.hpp"
#include "mirage/llmclient.hpp"
#include "mirage/mutator.hpp"

namespace mirage::bench {

enum class Task { generation, mc };

Task task_from_name(std::string_view name);
std::string_view task_name(Task task);

struct BenchItem {
    std::string id;
    std::string question;
    std::string category;
    std::string type;
    std::string best_answer;
    std::vector<std::string> correct_answers;
    std::vector<std::string> incorrect_answers;
    std::string source;
    std::optional<evaluator::McItem> mc;
};

// Appended to every prompt sent to a generation target; the pristine
// question is kept separate so mutation never sees it.
inline constexpr std::string_view kAnswerSuffix =
    "Please answer in one short sentence.";

std::string generation_prompt(const std::string& question);

// Accepts the official CSV column layout (Type, Category, Question,
// Best Answer, Correct Answers, Incorrect Answers, Source; answer lists
// ';'-separated) or a JSONL mirror with the same fields in snake_case plus
// an optional "mc" object {options, correct_index}. Schema problems name
// the offending row.
std::vector<BenchItem> load_benchmark(const std::string& path, Task task);

enum class RecordStatus { ok, mutation_error, target_error, judge_error,
                          blocked_by_filter };

std::string_view record_status_name(RecordStatus status);
RecordStatus record_status_from_name(std::string_view name);

// Resume identity of one (item, model, variant, defense, decoding) cell.
std::string record_key(const std::string& item_id, const std::string& model,
                       const std::string& variant, const std::string& defense,
                       llm::SamplingStrategy strategy);

struct EvalRecord {
    std::string key;
    std::string item_id;
    std::string variant;
    std::string model;
    std::string decoding;
    std::string defense;
    bool seeded = false;
    RecordStatus status = RecordStatus::ok;
    std::string prompt_text;
    std::string response_text;
    std::vector<evaluator::JudgeScore> scores;
    std::optional<evaluator::SimilarityScore> similarity;
    std::optional<int> mc_choice;
    std::optional<bool> mc_correct;
    std::optional<std::string> error;
    std::string started_at;
    std::string finished_at;

    nlohmann::ordered_json to_json() const;
    static EvalRecord from_json(const nlohmann::json& value);
};

// Append-only JSONL store; existing keys are loaded on open so interrupted
// campaigns resume without duplicates.
class RecordStore {
public:
    explicit RecordStore(std::string path);

    bool contains(const std::string& key) const;
    void append(const EvalRecord& record);
    std::size_t size() const;
    const std::string& path() const { return path_; }

    static std::vector<EvalRecord> read_all(const std::string& path);

private:
    std::string path_;
    std::set<std::string> keys_;
    mutable std::mutex mutex_;
};

struct CampaignPlan {
    std::vector<llm::ModelEndpoint> targets;
    // "original" plus any mutated variants, e.g. "illusionist".
    std::vector<std::string> variants;
    // Subset of {none, honest, debate, filter}.
    std::vector<std::string> defenses{"none"};
    llm::DecodingConfig decoding = llm::DecodingConfig::greedy_default();
    mutator::GuidelineSet guidelines = mutator::GuidelineSet::all();
    int iterations = 1;
    std::optional<llm::ModelEndpoint> mutator_endpoint;
    std::optional<llm::ModelEndpoint> judge_endpoint;
    std::optional<llm::ModelEndpoint> embed_endpoint;
    std::string honesty_preamble;
    defenses::DebateConfig debate;
    defenses::LanguageModel* filter_lm = nullptr;
    // Non-positive means calibrate from the original suffixed prompts.
    double filter_threshold = 0.0;
    std::optional<uint64_t> seed;

    // Throws InvalidConfig when a requested variant or defense lacks the
    // endpoints or models it needs; runs before any side effect.
    void validate() const;
};

// One record per item x target x variant x defense, appended to the store
// as produced. Per-record failures land in the record's status and error
// fields; only configuration problems abort.
std::vector<EvalRecord> run_campaign(const std::vector<BenchItem>& items,
                                     const CampaignPlan& plan,
                                     llm::Client& client, RecordStore& store);

struct GroupStats {
    std::string model;
    std::string variant;
    std::string defense;
    std::string decoding;
    std::size_t records_ok = 0;
    std::size_t records_excluded = 0;
    // Column label -> mean over ok records carrying that metric.
    std::map<std::string, double> means;
    // Column label -> this group's mean minus the original twin's mean.
    std::map<std::string, double> deltas;
};

struct ReportTable {
    std::vector<GroupStats> groups;
    std::size_t excluded_records = 0;

    std::string to_text() const;
    std::string to_csv() const;
    nlohmann::ordered_json to_json() const;
};

// Means per (model, variant, defense, decoding) over ok records; non-ok
// records are excluded from means and counted. Deltas appear on groups
// whose original twin exists.
ReportTable aggregate(const std::vector<EvalRecord>& records);

// Per-group histogram of a judge kind's scores, one panel per group.
std::string histogram_svg(const std::vector<EvalRecord>& records,
                          evaluator::JudgeKind kind);

}  // namespace mirage::bench
