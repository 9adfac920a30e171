#include <string>

#include <benchmark/benchmark.h>

#include "mirage/lexmetrics.hpp"

namespace {

using namespace mirage;

const std::string kShort =
    "How long should you wait between eating a meal and going swimming?";

std::string paragraph() {
    std::string text;
    for (int i = 0; i < 40; ++i) {
        text += "What is the advisable duration to elapse between the "
                "consumption of a meal and the subsequent engagement in "
                "swimming activities? ";
    }
    return text;
}

void bm_tokenize(benchmark::State& state) {
    const std::string text = paragraph();
    for (auto _ : state) {
        benchmark::DoNotOptimize(lexmetrics::tokenize(text));
    }
}
BENCHMARK(bm_tokenize);

void bm_syllables(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(lexmetrics::count_syllables("unquestionably"));
    }
}
BENCHMARK(bm_syllables);

void bm_fres_sentence(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(lexmetrics::fres(kShort));
    }
}
BENCHMARK(bm_fres_sentence);

void bm_fres_paragraph(benchmark::State& state) {
    const std::string text = paragraph();
    for (auto _ : state) {
        benchmark::DoNotOptimize(lexmetrics::fres(text));
    }
}
BENCHMARK(bm_fres_paragraph);

void bm_formality(benchmark::State& state) {
    const auto& tagger = lexmetrics::default_tagger();
    for (auto _ : state) {
        benchmark::DoNotOptimize(lexmetrics::formality(kShort, tagger));
    }
}
BENCHMARK(bm_formality);

void bm_concreteness(benchmark::State& state) {
    const auto& lexicon = lexmetrics::default_concreteness();
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            lexmetrics::concreteness("What type of person can die many times?",
                                     lexicon));
    }
}
BENCHMARK(bm_concreteness);

void bm_nuance_report(benchmark::State& state) {
    const std::string text = paragraph();
    const auto& lexicon = lexmetrics::default_concreteness();
    const auto& tagger = lexmetrics::default_tagger();
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            lexmetrics::nuance_report(text, &lexicon, tagger));
    }
}
BENCHMARK(bm_nuance_report);

}  // namespace

BENCHMARK_MAIN();
