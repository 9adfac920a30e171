#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mirage/bench.hpp"
#include "mirage/config.hpp"
#include "mirage/defenses.hpp"
#include "mirage/entropy.hpp"
#include "mirage/error.hpp"
#include "mirage/evaluator.hpp"
#include "mirage/lexmetrics.hpp"
#include "mirage/llmclient.hpp"
#include "mirage/mutator.hpp"
#include "mirage/util.hpp"

namespace {

using mirage::Errc;
using mirage::Error;
namespace bench = mirage::bench;
namespace config = mirage::config;
namespace defenses = mirage::defenses;
namespace entropy = mirage::entropy;
namespace evaluator = mirage::evaluator;
namespace lexmetrics = mirage::lexmetrics;
namespace llm = mirage::llm;
namespace mutator = mirage::mutator;
namespace util = mirage::util;

// Writes to a file when a path is given, stdout otherwise.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_) {
                throw Error(Errc::file_not_found, "cannot open output " + path);
            }
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

std::vector<std::string> read_input_lines(const std::string& path) {
    if (path.empty() || path == "-") {
        std::vector<std::string> lines;
        std::string line;
        while (std::getline(std::cin, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            lines.push_back(line);
        }
        return lines;
    }
    return util::read_lines(path);
}

struct InputItem {
    std::string id;
    std::string text;
};

// Plain lines are taken verbatim; lines starting with '{' are JSONL objects
// carrying `field` and an optional id.
std::vector<InputItem> parse_inputs(const std::vector<std::string>& lines,
                                    const std::string& field) {
    std::vector<InputItem> items;
    std::size_t ordinal = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string trimmed = util::trim(lines[i]);
        if (trimmed.empty()) continue;
        ++ordinal;
        char fallback[16];
        std::snprintf(fallback, sizeof(fallback), "q%04zu", ordinal);
        InputItem item;
        item.id = fallback;
        if (trimmed.front() == '{') {
            nlohmann::json row;
            try {
                row = nlohmann::json::parse(trimmed);
            } catch (const nlohmann::json::exception& e) {
                throw Error(Errc::schema,
                            "input line " + std::to_string(i + 1) + ": " + e.what());
            }
            item.id = row.value("id", item.id);
            item.text = row.value(field, "");
            if (item.text.empty()) {
                throw Error(Errc::schema, "input line " + std::to_string(i + 1) +
                                              ": missing '" + field + "'");
            }
        } else {
            item.text = lines[i];
        }
        items.push_back(std::move(item));
    }
    return items;
}

std::vector<std::string> split_csv_list(const std::string& joined) {
    std::vector<std::string> parts;
    std::string piece;
    std::istringstream stream(joined);
    while (std::getline(stream, piece, ',')) {
        const std::string trimmed = util::trim(piece);
        if (!trimmed.empty()) parts.push_back(trimmed);
    }
    return parts;
}

std::string load_preamble(const config::HarnessConfig& cfg) {
    if (cfg.honesty_preamble_path.empty()) {
        return defenses::default_honesty_preamble();
    }
    std::string text = util::read_file(cfg.honesty_preamble_path);
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) {
        text.pop_back();
    }
    return text;
}

const llm::ModelEndpoint& require_endpoint(
    const std::optional<llm::ModelEndpoint>& endpoint, const char* role) {
    if (!endpoint) {
        throw Error(Errc::invalid_config,
                    std::string("config has no ") + role + " endpoint");
    }
    return *endpoint;
}

const llm::ModelEndpoint& require_target(const config::HarnessConfig& cfg) {
    if (cfg.targets.empty()) {
        throw Error(Errc::invalid_config, "config has no target endpoints");
    }
    return cfg.targets.front();
}

struct MetricsOpts {
    std::string in;
    std::string out;
    std::string lexicon;
};

int cmd_metrics(const config::HarnessConfig& cfg, const MetricsOpts& opts) {
    std::string lexicon_path = opts.lexicon;
    if (lexicon_path.empty()) lexicon_path = cfg.concreteness_lexicon_path;
    lexmetrics::ConcretenessLexicon loaded;
    const lexmetrics::ConcretenessLexicon* lexicon;
    if (lexicon_path.empty()) {
        lexicon = &lexmetrics::default_concreteness();
    } else {
        loaded = lexmetrics::ConcretenessLexicon::from_file(lexicon_path);
        lexicon = &loaded;
    }
    lexmetrics::RuleTagger file_tagger;
    const lexmetrics::PosTagger* tagger;
    if (cfg.tagger_lexicon_path.empty()) {
        tagger = &lexmetrics::default_tagger();
    } else {
        file_tagger = lexmetrics::RuleTagger::from_file(cfg.tagger_lexicon_path);
        tagger = &file_tagger;
    }

    Output out(opts.out);
    for (const auto& item : parse_inputs(read_input_lines(opts.in), "text")) {
        try {
            const auto report = lexmetrics::nuance_report(item.text, lexicon, *tagger);
            out.stream() << report.to_json().dump() << '\n';
        } catch (const Error& e) {
            nlohmann::ordered_json line;
            line["error"] = e.what();
            line["text"] = item.text;
            out.stream() << line.dump() << '\n';
        }
    }
    return 0;
}

struct MutateOpts {
    std::string question;
    std::string in;
    std::string out;
    std::string guidelines;
    int iterations = 0;
    bool template_only = false;
};

int cmd_mutate(const config::HarnessConfig& cfg, const MutateOpts& opts) {
    const auto set = opts.guidelines.empty()
                         ? cfg.guidelines
                         : mutator::GuidelineSet::from_name(opts.guidelines);
    const int iterations = opts.iterations > 0 ? opts.iterations : cfg.iterations;

    std::vector<InputItem> items;
    if (!opts.question.empty()) {
        items.push_back({"q0001", opts.question});
    } else {
        items = parse_inputs(read_input_lines(opts.in), "question");
    }

    Output out(opts.out);
    if (opts.template_only) {
        for (const auto& item : items) {
            out.stream() << mutator::build_guidance_template(item.text, set) << '\n';
        }
        return 0;
    }

    const auto& endpoint = require_endpoint(cfg.mutator, "mutator");
    auto client = config::make_client(cfg);
    for (const auto& item : items) {
        try {
            const auto lineage = mutator::mutate_iterative(
                item.id, item.text, set, iterations, *client, endpoint,
                cfg.decoding);
            for (const auto& stage : lineage) {
                out.stream() << stage.to_json().dump() << '\n';
            }
        } catch (const Error& e) {
            nlohmann::ordered_json line;
            line["error"] = e.what();
            line["id"] = item.id;
            out.stream() << line.dump() << '\n';
        }
    }
    return 0;
}

struct AttackOpts {
    std::string benchmark;
    std::string store;
    std::string variants;
    std::string defenses_list;
    std::string guidelines;
    std::string decoding;
    int iterations = 0;
    std::size_t limit = 0;
    bool verbose = false;
};

int cmd_attack(const config::HarnessConfig& cfg, const AttackOpts& opts) {
    const std::string benchmark_path =
        opts.benchmark.empty() ? cfg.benchmark_path : opts.benchmark;
    if (benchmark_path.empty()) {
        throw Error(Errc::invalid_config, "no benchmark file configured");
    }
    const std::string store_path =
        opts.store.empty() ? cfg.record_store_path : opts.store;

    bench::CampaignPlan plan;
    plan.targets = cfg.targets;
    plan.variants =
        opts.variants.empty() ? cfg.variants : split_csv_list(opts.variants);
    plan.defenses = opts.defenses_list.empty() ? cfg.defenses
                                               : split_csv_list(opts.defenses_list);
    plan.decoding = cfg.decoding;
    if (!opts.decoding.empty()) {
        plan.decoding = opts.decoding == "greedy"
                            ? llm::DecodingConfig::greedy_default()
                            : llm::DecodingConfig{};
        plan.decoding.strategy = llm::strategy_from_name(opts.decoding);
    }
    plan.guidelines = opts.guidelines.empty()
                          ? cfg.guidelines
                          : mutator::GuidelineSet::from_name(opts.guidelines);
    plan.iterations = opts.iterations > 0 ? opts.iterations : cfg.iterations;
    plan.mutator_endpoint = cfg.mutator;
    plan.judge_endpoint = cfg.judge;
    plan.embed_endpoint = cfg.embedder;
    plan.debate = cfg.debate;
    plan.filter_threshold = cfg.filter_threshold;
    plan.seed = cfg.seed;

    const bool wants_filter =
        std::find(plan.defenses.begin(), plan.defenses.end(), "filter") !=
        plan.defenses.end();
    const bool wants_honest =
        std::find(plan.defenses.begin(), plan.defenses.end(), "honest") !=
        plan.defenses.end();
    if (wants_honest) plan.honesty_preamble = load_preamble(cfg);

    auto client = config::make_client(cfg);
    std::unique_ptr<defenses::LanguageModel> filter_lm;
    if (wants_filter) {
        if (!cfg.filter_corpus_path.empty()) {
            filter_lm = std::make_unique<defenses::NgramLm>(
                defenses::NgramLm::from_file(cfg.filter_corpus_path));
        } else {
            filter_lm = std::make_unique<defenses::ApiLm>(
                *client, require_endpoint(cfg.perplexity, "perplexity"));
        }
        plan.filter_lm = filter_lm.get();
    }
    plan.validate();

    auto items = bench::load_benchmark(benchmark_path, bench::Task::generation);
    if (opts.limit > 0 && items.size() > opts.limit) items.resize(opts.limit);

    // Every append lands on disk before the next record starts, so an
    // interrupted run resumes from the store without losing finished work.
    bench::RecordStore store(store_path);
    const std::size_t before = store.size();
    const auto produced = bench::run_campaign(items, plan, *client, store);
    if (opts.verbose) {
        for (const auto& record : produced) {
            std::cerr << record.key << ' ' << record.item_id << ' '
                      << record.variant << ' ' << record.defense << ' '
                      << bench::record_status_name(record.status) << '\n';
        }
    }
    std::cout << produced.size() << " record(s) written to " << store_path << " ("
              << before << " already present)\n";
    return 0;
}

struct JudgeOpts {
    std::string question;
    std::string answer;
    std::string evidence;
    std::string in;
    std::string out;
    std::string kind = "all";
};

int cmd_judge(const config::HarnessConfig& cfg, const JudgeOpts& opts) {
    const auto& endpoint = require_endpoint(cfg.judge, "judge");
    auto client = config::make_client(cfg);

    struct JudgeInput {
        std::string question;
        std::string answer;
        std::vector<std::string> evidence;
    };
    std::vector<JudgeInput> inputs;
    if (!opts.answer.empty()) {
        JudgeInput one;
        one.question = opts.question;
        one.answer = opts.answer;
        for (auto& piece : split_csv_list(opts.evidence)) {
            one.evidence.push_back(std::move(piece));
        }
        inputs.push_back(std::move(one));
    } else {
        for (const auto& line : read_input_lines(opts.in)) {
            if (util::trim(line).empty()) continue;
            nlohmann::json row;
            try {
                row = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw Error(Errc::schema, std::string("judge input: ") + e.what());
            }
            JudgeInput one;
            one.question = row.value("question", "");
            one.answer = row.value("answer", "");
            for (const auto& ev : row.value("evidence", nlohmann::json::array())) {
                one.evidence.push_back(ev.get<std::string>());
            }
            inputs.push_back(std::move(one));
        }
    }

    Output out(opts.out);
    for (const auto& input : inputs) {
        nlohmann::ordered_json line;
        line["question"] = input.question;
        line["answer"] = input.answer;
        nlohmann::ordered_json scores = nlohmann::ordered_json::array();
        try {
            if (opts.kind == "all" || opts.kind == "hallucination") {
                scores.push_back(evaluator::judge_hallucination(
                                     input.question, input.answer, input.evidence,
                                     *client, endpoint)
                                     .to_json());
            }
            if (opts.kind == "all" || opts.kind == "logicality") {
                scores.push_back(evaluator::judge_logicality(
                                     input.question, input.answer, *client, endpoint)
                                     .to_json());
            }
            if (opts.kind == "all" || opts.kind == "quality") {
                scores.push_back(
                    evaluator::judge_quality(input.answer, *client, endpoint)
                        .to_json());
            }
            line["scores"] = scores;
        } catch (const Error& e) {
            line["scores"] = scores;
            line["error"] = e.what();
        }
        out.stream() << line.dump() << '\n';
    }
    return 0;
}

struct McOpts {
    std::string benchmark;
    std::string mode = "logprob";
    std::string variant = "original";
    std::string out;
    std::size_t limit = 0;
};

int cmd_mc(const config::HarnessConfig& cfg, const McOpts& opts) {
    const std::string benchmark_path =
        opts.benchmark.empty() ? cfg.benchmark_path : opts.benchmark;
    if (benchmark_path.empty()) {
        throw Error(Errc::invalid_config, "no benchmark file configured");
    }
    const auto mode = evaluator::mc_mode_from_name(opts.mode);
    const auto& target = require_target(cfg);
    auto client = config::make_client(cfg);

    auto items = bench::load_benchmark(benchmark_path, bench::Task::mc);
    if (opts.limit > 0 && items.size() > opts.limit) items.resize(opts.limit);

    Output out(opts.out);
    std::vector<std::pair<int, int>> choices;
    for (const auto& item : items) {
        evaluator::McItem mc = *item.mc;
        std::string question = item.question;
        if (opts.variant != "original") {
            const auto lineage = mutator::mutate_iterative(
                item.id, item.question, cfg.guidelines, cfg.iterations, *client,
                require_endpoint(cfg.mutator, "mutator"), cfg.decoding);
            question = lineage.back().text;
            // Answer choices stay untouched; only the question is rewritten.
            mc.question = question;
        }

        bench::EvalRecord record;
        record.key = bench::record_key(item.id, target.model_name, opts.variant,
                                       "none", cfg.decoding.strategy);
        record.item_id = item.id;
        record.variant = opts.variant;
        record.model = target.model_name;
        record.decoding = std::string(llm::strategy_name(cfg.decoding.strategy));
        record.defense = "none";
        record.started_at = util::iso8601_utc_now();
        record.prompt_text = question;
        try {
            const int choice =
                evaluator::mc_choose(mc, target, *client, mode, cfg.decoding);
            record.mc_choice = choice;
            record.mc_correct = choice == mc.correct_index;
            record.response_text = mc.options[static_cast<std::size_t>(choice)];
            choices.emplace_back(choice, mc.correct_index);
        } catch (const Error& e) {
            record.status = bench::RecordStatus::target_error;
            record.error = e.what();
        }
        record.finished_at = util::iso8601_utc_now();
        out.stream() << record.to_json().dump() << '\n';
    }

    if (choices.empty()) {
        std::cerr << "no multiple-choice item produced a choice\n";
        return 2;
    }
    const double accuracy = evaluator::mc_accuracy(choices);
    char summary[96];
    std::snprintf(summary, sizeof(summary), "mc accuracy: %.4f (%zu item(s), %s)",
                  accuracy, choices.size(), opts.mode.c_str());
    std::cout << summary << '\n';
    return 0;
}

struct EntropyOpts {
    std::string prompt;
    std::string in;
    std::string out;
    std::string method = "embedding_threshold";
    int n = entropy::kDefaultSamples;
    double threshold = entropy::kDefaultThreshold;
};

int cmd_entropy(const config::HarnessConfig& cfg, const EntropyOpts& opts) {
    const auto method = entropy::cluster_method_from_name(opts.method);
    const auto& target = require_target(cfg);
    const auto& aux = method == entropy::ClusterMethod::embedding_threshold
                          ? require_endpoint(cfg.embedder, "embedder")
                          : require_endpoint(cfg.judge, "judge");
    auto client = config::make_client(cfg);

    // Entropy needs sampling; fall back to nucleus defaults when the
    // configured decoding is greedy.
    llm::DecodingConfig decoding = cfg.decoding;
    if (decoding.strategy != llm::SamplingStrategy::nucleus) {
        decoding = llm::DecodingConfig{};
    }

    std::vector<InputItem> items;
    if (!opts.prompt.empty()) {
        items.push_back({"q0001", opts.prompt});
    } else {
        items = parse_inputs(read_input_lines(opts.in), "prompt");
    }

    Output out(opts.out);
    for (const auto& item : items) {
        try {
            const auto estimate =
                entropy::estimate(item.id, item.text, target, aux, *client,
                                  opts.n, method, opts.threshold, decoding);
            out.stream() << estimate.to_json().dump() << '\n';
        } catch (const Error& e) {
            nlohmann::ordered_json line;
            line["error"] = e.what();
            line["id"] = item.id;
            out.stream() << line.dump() << '\n';
        }
    }
    return 0;
}

struct FilterOpts {
    std::string lm;
    std::string calibrate;
    std::string in;
    std::string out;
    double threshold = 0.0;
};

int cmd_filter(const config::HarnessConfig& cfg, const FilterOpts& opts) {
    auto client = config::make_client(cfg);

    std::unique_ptr<defenses::LanguageModel> lm;
    std::string lm_spec = opts.lm;
    if (lm_spec.empty()) {
        lm_spec = cfg.filter_corpus_path.empty()
                      ? "api"
                      : "ngram:" + cfg.filter_corpus_path;
    }
    if (lm_spec.rfind("ngram:", 0) == 0) {
        lm = std::make_unique<defenses::NgramLm>(
            defenses::NgramLm::from_file(lm_spec.substr(6)));
    } else if (lm_spec == "api" || lm_spec.rfind("api:", 0) == 0) {
        lm = std::make_unique<defenses::ApiLm>(
            *client, require_endpoint(cfg.perplexity, "perplexity"));
    } else {
        throw Error(Errc::invalid_config,
                    "--lm expects api or ngram:<corpus-path>, got '" + lm_spec +
                        "'");
    }

    double threshold = opts.threshold > 0.0 ? opts.threshold : cfg.filter_threshold;
    if (!opts.calibrate.empty()) {
        std::vector<double> originals;
        for (const auto& item :
             parse_inputs(util::read_lines(opts.calibrate), "text")) {
            originals.push_back(defenses::perplexity(item.text, *lm));
        }
        threshold = defenses::calibrate_threshold(originals);
    }
    if (threshold <= 0.0) {
        throw Error(Errc::invalid_config,
                    "no threshold: pass --threshold or --calibrate");
    }

    std::vector<std::string> texts;
    for (const auto& item : parse_inputs(read_input_lines(opts.in), "text")) {
        texts.push_back(item.text);
    }
    const auto outcome = defenses::filter_inputs(texts, *lm, threshold);

    Output out(opts.out);
    for (const auto& verdict : outcome.verdicts) {
        out.stream() << verdict.to_json().dump() << '\n';
    }
    char summary[96];
    std::snprintf(summary, sizeof(summary),
                  "pass rate: %.2f%% (%zu text(s), threshold %.4f)",
                  outcome.pass_rate * 100.0, outcome.verdicts.size(), threshold);
    std::cout << summary << '\n';
    return 0;
}

struct ReportOpts {
    std::string in;
    std::string out;
    std::string csv;
    std::string svg;
    std::string svg_kind = "hallucination";
};

int cmd_report(const config::HarnessConfig& cfg, const ReportOpts& opts) {
    const std::string store_path =
        opts.in.empty() ? cfg.record_store_path : opts.in;
    const auto records = bench::RecordStore::read_all(store_path);
    const auto table = bench::aggregate(records);

    Output out(opts.out);
    out.stream() << table.to_text();
    if (!opts.csv.empty()) {
        util::write_file(opts.csv, table.to_csv());
    }
    if (!opts.svg.empty()) {
        util::write_file(
            opts.svg,
            bench::histogram_svg(records,
                                 evaluator::judge_kind_from_name(opts.svg_kind)));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Linguistic-nuance red-teaming harness for chat models"};
    app.require_subcommand(1);
    // Global flags remain usable after the subcommand name.
    app.fallthrough();

    std::string config_path;
    bool mock = false;
    bool verbose = false;
    uint64_t seed = 0;
    std::string fixture_path;
    app.add_option("--config", config_path, "JSON config file");
    app.add_flag("--mock", mock, "route every endpoint to the offline mock");
    app.add_option("--fixture", fixture_path, "scripted replies for the mock provider");
    app.add_flag("--verbose", verbose, "progress details on stderr");
    app.add_option("--seed", seed, "base seed for seeded nucleus runs");

    MetricsOpts metrics_opts;
    auto* metrics = app.add_subcommand(
        "metrics", "readability, formality, and concreteness per input line");
    metrics->add_option("--in", metrics_opts.in, "text or JSONL file (default stdin)");
    metrics->add_option("--out", metrics_opts.out, "output JSONL (default stdout)");
    metrics->add_option("--lexicon", metrics_opts.lexicon,
                        "concreteness ratings TSV");

    MutateOpts mutate_opts;
    auto* mutate = app.add_subcommand("mutate", "rewrite questions adversarially");
    mutate->add_option("--question", mutate_opts.question, "single question text");
    mutate->add_option("--in", mutate_opts.in, "questions file (default stdin)");
    mutate->add_option("--out", mutate_opts.out, "output JSONL (default stdout)");
    mutate->add_option("--guidelines", mutate_opts.guidelines,
                       "all | read | form | conc | ids like 1,4,6");
    mutate->add_option("--iterations", mutate_opts.iterations,
                       "rewriting rounds (default from config)");
    mutate->add_flag("--template-only", mutate_opts.template_only,
                     "print the guidance prompt instead of calling a model");

    AttackOpts attack_opts;
    auto* attack = app.add_subcommand(
        "attack", "mutate questions and run the full evaluation campaign");
    attack->add_option("--benchmark", attack_opts.benchmark, "benchmark CSV/JSONL");
    attack->add_option("--store", attack_opts.store, "record store JSONL path");
    attack->add_option("--variants", attack_opts.variants,
                       "comma list, e.g. original,illusionist");
    attack->add_option("--defenses", attack_opts.defenses_list,
                       "comma list of none,honest,debate,filter");
    attack->add_option("--guidelines", attack_opts.guidelines,
                       "guideline set for mutation");
    attack->add_option("--iterations", attack_opts.iterations, "rewriting rounds");
    attack->add_option("--decoding", attack_opts.decoding, "greedy | nucleus");
    attack->add_option("--limit", attack_opts.limit, "use only the first N items");

    JudgeOpts judge_opts;
    auto* judge = app.add_subcommand("judge", "score answers with the judge model");
    judge->add_option("--question", judge_opts.question, "question text");
    judge->add_option("--answer", judge_opts.answer, "answer text");
    judge->add_option("--evidence", judge_opts.evidence,
                      "comma list of correct answers");
    judge->add_option("--in", judge_opts.in,
                      "JSONL {question, answer, evidence[]} (default stdin)");
    judge->add_option("--out", judge_opts.out, "output JSONL (default stdout)");
    judge->add_option("--kind", judge_opts.kind,
                      "hallucination | logicality | quality | all");

    McOpts mc_opts;
    auto* mc = app.add_subcommand("mc", "multiple-choice accuracy run");
    mc->add_option("--benchmark", mc_opts.benchmark, "benchmark CSV/JSONL");
    mc->add_option("--mode", mc_opts.mode, "logprob | label");
    mc->add_option("--variant", mc_opts.variant,
                   "original, or a mutated variant name");
    mc->add_option("--out", mc_opts.out, "per-item records JSONL (default stdout)");
    mc->add_option("--limit", mc_opts.limit, "use only the first N items");

    EntropyOpts entropy_opts;
    auto* entropy_cmd = app.add_subcommand(
        "entropy", "semantic entropy over sampled responses");
    entropy_cmd->add_option("--prompt", entropy_opts.prompt, "single prompt text");
    entropy_cmd->add_option("--in", entropy_opts.in,
                            "prompts file (default stdin)");
    entropy_cmd->add_option("--out", entropy_opts.out,
                            "output JSONL (default stdout)");
    entropy_cmd->add_option("--n", entropy_opts.n, "samples per prompt");
    entropy_cmd->add_option("--method", entropy_opts.method,
                            "embedding_threshold | judge_equivalence");
    entropy_cmd->add_option("--threshold", entropy_opts.threshold,
                            "cosine threshold in (0,1)");

    FilterOpts filter_opts;
    auto* filter = app.add_subcommand("filter", "perplexity-based input filter");
    filter->add_option("--lm", filter_opts.lm, "api | ngram:<corpus-path>");
    filter->add_option("--calibrate", filter_opts.calibrate,
                       "benign inputs file; threshold = their max perplexity");
    filter->add_option("--threshold", filter_opts.threshold,
                       "explicit perplexity threshold");
    filter->add_option("--in", filter_opts.in, "texts to filter (default stdin)");
    filter->add_option("--out", filter_opts.out,
                       "verdict JSONL (default stdout)");

    ReportOpts report_opts;
    auto* report = app.add_subcommand("report", "aggregate a record store");
    report->add_option("--in", report_opts.in, "record store JSONL");
    report->add_option("--out", report_opts.out, "table output (default stdout)");
    report->add_option("--csv", report_opts.csv, "also write CSV here");
    report->add_option("--svg", report_opts.svg, "also write a histogram SVG here");
    report->add_option("--svg-kind", report_opts.svg_kind,
                       "judge kind for the histogram");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        config::HarnessConfig cfg =
            config_path.empty() ? config::HarnessConfig::offline_mock()
                                : config::HarnessConfig::from_file(config_path);
        if (mock) cfg.use_mock = true;
        if (!fixture_path.empty()) {
            cfg.use_mock = true;
            cfg.mock_fixture_path = fixture_path;
        }
        if (app.count("--seed") > 0) cfg.seed = seed;
        attack_opts.verbose = verbose;

        if (metrics->parsed()) return cmd_metrics(cfg, metrics_opts);
        if (mutate->parsed()) return cmd_mutate(cfg, mutate_opts);
        if (attack->parsed()) return cmd_attack(cfg, attack_opts);
        if (judge->parsed()) return cmd_judge(cfg, judge_opts);
        if (mc->parsed()) return cmd_mc(cfg, mc_opts);
        if (entropy_cmd->parsed()) return cmd_entropy(cfg, entropy_opts);
        if (filter->parsed()) return cmd_filter(cfg, filter_opts);
        if (report->parsed()) return cmd_report(cfg, report_opts);
        std::cerr << "no subcommand selected\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
