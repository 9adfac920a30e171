#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "mirage/entropy.hpp"
#include "mirage/evaluator.hpp"

namespace {

using namespace mirage;

std::vector<std::size_t> random_partition(std::mt19937& rng, std::size_t k) {
    std::vector<std::size_t> sizes(k);
    for (auto& s : sizes) s = 1 + rng() % 20;
    return sizes;
}

void bm_semantic_entropy(benchmark::State& state) {
    std::mt19937 rng(1);
    const auto sizes = random_partition(rng, std::size_t(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(entropy::semantic_entropy(sizes));
    }
}
BENCHMARK(bm_semantic_entropy)->Arg(2)->Arg(8)->Arg(64);

void bm_cosine_similarity(benchmark::State& state) {
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    std::vector<double> a(std::size_t(state.range(0)));
    std::vector<double> b(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = coord(rng);
        b[i] = coord(rng);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluator::cosine_similarity(a, b));
    }
}
BENCHMARK(bm_cosine_similarity)->Arg(16)->Arg(256)->Arg(1536);

}  // namespace

BENCHMARK_MAIN();
