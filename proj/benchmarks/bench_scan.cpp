// Genome scan cost against the number of time points. The design is
// factored once per position, so time should grow linearly in T.

#include "fvqtl/fvqtl.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <random>

namespace {

struct Fixture {
    fvqtl::GenoProbs probs;
    Eigen::MatrixXd y;
};

const Fixture& fixture(std::size_t n_times) {
    static std::map<std::size_t, Fixture> cache;
    auto it = cache.find(n_times);
    if (it != cache.end()) return it->second;
    const auto map = fvqtl::GeneticMap::uniform(5, 100.0, 5.0);
    const auto geno = fvqtl::sim_genotypes(map, fvqtl::CrossType::RilSelf, 162, 7);
    Fixture f{fvqtl::calc_genoprob(geno, map, fvqtl::CrossType::RilSelf, fvqtl::GridSpec{1.0}), {}};
    std::mt19937_64 rng(11);
    std::normal_distribution<double> z;
    f.y.resize(162, static_cast<Eigen::Index>(n_times));
    for (Eigen::Index i = 0; i < f.y.size(); ++i) f.y.data()[i] = z(rng);
    return cache.emplace(n_times, std::move(f)).first->second;
}

void BM_ScanTimes(benchmark::State& state) {
    const auto n_times = static_cast<std::size_t>(state.range(0));
    const auto& f = fixture(n_times);
    const fvqtl::HkScanner scanner(f.probs);
    const auto y = fvqtl::center_phenotypes(f.y);
    std::vector<double> labels(n_times);
    for (std::size_t t = 0; t < n_times; ++t) labels[t] = static_cast<double>(t);
    for (auto _ : state) benchmark::DoNotOptimize(scanner.scan(y, labels));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ScanTimes)->RangeMultiplier(2)->Range(25, 800)->Complexity(benchmark::oN)->Unit(benchmark::kMillisecond);

void BM_GenomeMax(benchmark::State& state) {
    const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
    const fvqtl::HkScanner scanner(f.probs);
    const auto y = fvqtl::center_phenotypes(f.y);
    for (auto _ : state) benchmark::DoNotOptimize(scanner.genome_max(y.yc, y.rss0));
}
BENCHMARK(BM_GenomeMax)->Arg(241)->Unit(benchmark::kMillisecond);

void BM_Genoprob(benchmark::State& state) {
    const auto map = fvqtl::GeneticMap::uniform(5, 100.0, 5.0);
    const auto geno = fvqtl::sim_genotypes(map, fvqtl::CrossType::F2, static_cast<std::size_t>(state.range(0)), 3);
    for (auto _ : state)
        benchmark::DoNotOptimize(fvqtl::calc_genoprob(geno, map, fvqtl::CrossType::F2, fvqtl::GridSpec{1.0}));
}
BENCHMARK(BM_Genoprob)->Arg(162)->Arg(324)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
