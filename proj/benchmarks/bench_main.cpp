#include <benchmark/benchmark.h>

#include "bipcp/combinatorics.hpp"
#include "bipcp/contact.hpp"
#include "bipcp/hypergraph.hpp"
#include "bipcp/phase.hpp"
#include "bipcp/rng.hpp"

using namespace bipcp;

static void BM_Classify(benchmark::State& state) {
    Stream s(1);
    for (auto _ : state) {
        double g1 = 0.55 + 0.4 * s.uniform01();
        double g2 = 0.55 + 0.4 * s.uniform01();
        benchmark::DoNotOptimize(classify(g1, g2, 0.1 + 5.0 * s.uniform01()));
    }
}
BENCHMARK(BM_Classify);

static void BM_SampleGraph(benchmark::State& state) {
    ModelParams p{0.7, 0.6, 1.0, 0.1};
    std::uint64_t seed = 0;
    for (auto _ : state) {
        auto g = Hypergraph::sample(p, {double(state.range(0))}, ++seed);
        benchmark::DoNotOptimize(g.size());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SampleGraph)->Range(100, 10000)->Complexity();

static void BM_NeighborQuery(benchmark::State& state) {
    ModelParams p{0.7, 0.6, 1.0, 0.1};
    auto g = Hypergraph::sample(p, {double(state.range(0))}, 42);
    std::int64_t id = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(g.neighbors(id));
        id = (id + 1) % static_cast<std::int64_t>(g.size());
    }
}
BENCHMARK(BM_NeighborQuery)->Range(100, 10000);

static void BM_ContactRun(benchmark::State& state) {
    ModelParams p{0.8, 0.8, 1.0, 0.3};
    auto g = Hypergraph::sample(p, {double(state.range(0))}, 7,
                                {RootSpec::uniform_mark, 0.0, 1});
    contact::SimConfig cfg;
    cfg.t_max = 50.0;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        cfg.seed = ++seed;
        benchmark::DoNotOptimize(contact::run(g, {0.3, 0.3}, {*g.root_id()}, cfg));
    }
}
BENCHMARK(BM_ContactRun)->Range(100, 2000);

static void BM_StarRun(benchmark::State& state) {
    contact::SimConfig cfg;
    cfg.t_max = 100.0;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        cfg.seed = ++seed;
        benchmark::DoNotOptimize(
            contact::run_star(state.range(0), {0.02, 0.02}, {true, 0}, cfg));
    }
}
BENCHMARK(BM_StarRun)->Range(1000, 100000);

static void BM_Reduction(benchmark::State& state) {
    std::uint64_t seed = 0;
    for (auto _ : state) {
        auto t = combi::random_tree(++seed, static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(combi::reduce_to_segment(t));
    }
}
BENCHMARK(BM_Reduction)->Arg(8)->Arg(20);

BENCHMARK_MAIN();
