#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <nlohmann/json.hpp>

#include "mirage/util.hpp"

// These cases drive the installed binary end to end through a shell, the way
// a user would, so they cover flag parsing, exit codes, and output framing.

namespace {

using mirage::util::read_file;
using mirage::util::write_file;

const char* kFixture = MIRAGE_TEST_DIR "/fixtures/mock_campaign.json";
const char* kCsv = MIRAGE_TEST_DIR "/fixtures/benchmark_small.csv";
const char* kStderrPath = "/tmp/mirage_cli_stderr.txt";

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args, const std::string& stdin_text = "") {
    const char* bin = std::getenv("MIRAGE_CLI_BIN");
    REQUIRE_MESSAGE(bin != nullptr,
                    "MIRAGE_CLI_BIN must point at the built binary");
    std::string cmd = std::string(bin) + " " + args;
    if (stdin_text.empty()) {
        cmd += " < /dev/null";
    } else {
        write_file("/tmp/mirage_cli_stdin.txt", stdin_text);
        cmd += " < /tmp/mirage_cli_stdin.txt";
    }
    cmd += std::string(" 2> ") + kStderrPath;

    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult result;
    char buf[4096];
    std::size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) result.out.append(buf, n);
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::string line;
    for (const char c : text) {
        if (c == '\n') {
            lines.push_back(line);
            line.clear();
        } else {
            line += c;
        }
    }
    if (!line.empty()) lines.push_back(line);
    return lines;
}

}  // namespace

TEST_CASE("help exits zero and lists the subcommands") {
    auto result = run_cli("--help");
    CHECK(result.exit_code == 0);
    for (const char* name : {"metrics", "mutate", "attack", "judge", "mc",
                             "entropy", "filter", "report"}) {
        CHECK(result.out.find(name) != std::string::npos);
    }
}

TEST_CASE("bad invocations exit one") {
    CHECK(run_cli("").exit_code == 1);
    CHECK(run_cli("frobnicate").exit_code == 1);
    CHECK(run_cli("metrics --no-such-flag").exit_code == 1);
}

TEST_CASE("runtime failures exit two with an error line") {
    auto result = run_cli("--config /nonexistent/config.json metrics");
    CHECK(result.exit_code == 2);
    CHECK(read_file(kStderrPath).find("error:") != std::string::npos);

    auto report = run_cli("report --in /nonexistent/records.jsonl");
    CHECK(report.exit_code == 2);
    CHECK(read_file(kStderrPath).find("error:") != std::string::npos);
}

TEST_CASE("metrics reads stdin and writes one JSON line per input") {
    auto result = run_cli("metrics", "Go.\n!!!\n");
    CHECK(result.exit_code == 0);
    auto lines = lines_of(result.out);
    REQUIRE(lines.size() == 2);

    auto report = nlohmann::json::parse(lines[0]);
    CHECK(report["fres"].get<double>() == doctest::Approx(121.22));
    CHECK(report["word_count"] == 1);
    CHECK(report["sentence_count"] == 1);
    CHECK(report.contains("formality"));
    CHECK(report.contains("concreteness"));

    // A line with no word tokens cannot be scored; the failure stays on its
    // own line instead of aborting the stream.
    auto error_line = nlohmann::json::parse(lines[1]);
    CHECK(error_line.contains("error"));
    CHECK(error_line["text"] == "!!!");
}

TEST_CASE("metrics honors --in and --out files") {
    write_file("/tmp/mirage_cli_metrics_in.txt",
               "The cat sat on the mat.\n");
    auto result = run_cli("metrics --in /tmp/mirage_cli_metrics_in.txt "
                          "--out /tmp/mirage_cli_metrics_out.jsonl");
    CHECK(result.exit_code == 0);
    CHECK(result.out.empty());
    auto report = nlohmann::json::parse(
        lines_of(read_file("/tmp/mirage_cli_metrics_out.jsonl")).at(0));
    CHECK(report["word_count"] == 6);
}

TEST_CASE("mutate --template-only prints the guidance prompt") {
    auto result =
        run_cli("mutate --template-only --question 'What is the best medicine?'");
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("Add Emoji Artistry") != std::string::npos);
    CHECK(result.out.find("What is the best medicine?") != std::string::npos);
    CHECK(result.out.find("sentence_new") != std::string::npos);
}

TEST_CASE("mutate with a scripted fixture emits the lineage") {
    auto result = run_cli(std::string("--fixture ") + kFixture +
                          " mutate --question 'Why is the sky blue?'");
    CHECK(result.exit_code == 0);
    auto stage = nlohmann::json::parse(lines_of(result.out).at(0));
    CHECK(stage["original_id"] == "q0001");
    CHECK(stage["iteration"] == 1);
    CHECK(stage["text"].get<std::string>().find("Pray tell") !=
          std::string::npos);
}

TEST_CASE("judge with a scripted fixture emits all three scores") {
    auto result = run_cli(
        std::string("--fixture ") + kFixture +
        " judge --question 'Why?' --answer 'Because.' --evidence 'reason one,reason two'");
    CHECK(result.exit_code == 0);
    auto line = nlohmann::json::parse(lines_of(result.out).at(0));
    REQUIRE(line["scores"].size() == 3);
    CHECK(line["scores"][0]["kind"] == "hallucination");
    CHECK(line["scores"][0]["score"] == 3.0);
    CHECK(line["scores"][1]["kind"] == "logicality");
    CHECK(line["scores"][1]["score"] == 8.0);
    CHECK(line["scores"][2]["kind"] == "quality");
    CHECK(line["scores"][2]["score"] == 7.0);
}

TEST_CASE("judge against the plain echo mock reports the parse failure") {
    auto result = run_cli("judge --question 'Why?' --answer 'Because.'");
    CHECK(result.exit_code == 0);
    auto line = nlohmann::json::parse(lines_of(result.out).at(0));
    CHECK(line.contains("error"));
}

TEST_CASE("attack runs offline, resumes, and reports") {
    std::remove("/tmp/mirage_cli_store.jsonl");
    const std::string base = std::string("--fixture ") + kFixture +
                             " attack --benchmark " + kCsv +
                             " --store /tmp/mirage_cli_store.jsonl";

    auto first = run_cli(base);
    CHECK(first.exit_code == 0);
    CHECK(first.out.find("10 record(s) written to /tmp/mirage_cli_store.jsonl "
                         "(0 already present)") != std::string::npos);

    auto resumed = run_cli(base);
    CHECK(resumed.exit_code == 0);
    CHECK(resumed.out.find("0 record(s) written to /tmp/mirage_cli_store.jsonl "
                           "(10 already present)") != std::string::npos);

    auto report = run_cli("report --in /tmp/mirage_cli_store.jsonl");
    CHECK(report.exit_code == 0);
    CHECK(report.out.find("hallucination") != std::string::npos);
    CHECK(report.out.find("original") != std::string::npos);
    CHECK(report.out.find("illusionist") != std::string::npos);
    CHECK(report.out.find("3.00") != std::string::npos);
    CHECK(report.out.find("6.00 (+3.00)") != std::string::npos);

    auto artifacts = run_cli(
        "report --in /tmp/mirage_cli_store.jsonl "
        "--out /tmp/mirage_cli_table.txt --csv /tmp/mirage_cli_table.csv "
        "--svg /tmp/mirage_cli_hist.svg");
    CHECK(artifacts.exit_code == 0);
    CHECK(read_file("/tmp/mirage_cli_table.txt").find("illusionist") !=
          std::string::npos);
    CHECK(read_file("/tmp/mirage_cli_table.csv").rfind("model,variant", 0) == 0);
    CHECK(read_file("/tmp/mirage_cli_hist.svg").find("<svg") !=
          std::string::npos);
}

TEST_CASE("attack --limit restricts the item count") {
    std::remove("/tmp/mirage_cli_store_limit.jsonl");
    auto result = run_cli(std::string("--fixture ") + kFixture +
                          " attack --benchmark " + kCsv +
                          " --store /tmp/mirage_cli_store_limit.jsonl --limit 2");
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("4 record(s) written") != std::string::npos);
}

TEST_CASE("mc scores the benchmark offline") {
    auto result = run_cli(std::string("mc --benchmark ") + kCsv +
                          " --mode logprob");
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("mc accuracy: 0.2000 (5 item(s), logprob)") !=
          std::string::npos);

    auto lines = lines_of(result.out);
    REQUIRE(lines.size() == 6);  // five records, one summary
    auto record = nlohmann::json::parse(lines[0]);
    CHECK(record["item_id"] == "q0001");
    CHECK_FALSE(record["mc_choice"].is_null());
    CHECK_FALSE(record["mc_correct"].is_null());
}

TEST_CASE("entropy of identical samples is zero") {
    auto result = run_cli("entropy --prompt 'Where is the door?' --n 4");
    CHECK(result.exit_code == 0);
    auto estimate = nlohmann::json::parse(lines_of(result.out).at(0));
    CHECK(estimate["n_samples"] == 4);
    CHECK(estimate["cluster_sizes"] == nlohmann::json::array({4}));
    CHECK(estimate["entropy"].get<double>() == doctest::Approx(0.0));
    CHECK(estimate["clusterer"] == "embedding_threshold");
}

TEST_CASE("filter calibrates on benign lines and flags gibberish") {
    write_file("/tmp/mirage_cli_corpus.txt",
               "the cat sat on the mat\nthe dog sat on the rug\n");
    write_file("/tmp/mirage_cli_filter_in.txt",
               "the cat sat on the mat\n"
               "the dog sat on the rug\n"
               "zxqv glorp waffle quux ninefold\n");

    auto result = run_cli(
        "filter --lm ngram:/tmp/mirage_cli_corpus.txt "
        "--calibrate /tmp/mirage_cli_corpus.txt "
        "--in /tmp/mirage_cli_filter_in.txt");
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("pass rate: 66.67% (3 text(s)") != std::string::npos);

    auto lines = lines_of(result.out);
    REQUIRE(lines.size() == 4);  // three verdicts, one summary
    CHECK(nlohmann::json::parse(lines[0])["passed"] == true);
    CHECK(nlohmann::json::parse(lines[1])["passed"] == true);
    CHECK(nlohmann::json::parse(lines[2])["passed"] == false);

    auto no_threshold = run_cli(
        "filter --lm ngram:/tmp/mirage_cli_corpus.txt "
        "--in /tmp/mirage_cli_filter_in.txt");
    CHECK(no_threshold.exit_code == 2);
}
