#include <benchmark/benchmark.h>

#include <random>

#include "nbplan/snapshot_reduction.hpp"

static void BM_KMeans(benchmark::State& state) {
    const auto hours = static_cast<Eigen::Index>(state.range(0));
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.05);
    Eigen::MatrixXd raw(hours, 6);
    for (Eigen::Index h = 0; h < hours; ++h)
        for (Eigen::Index j = 0; j < raw.cols(); ++j)
            raw(h, j) = std::sin(0.2618 * static_cast<double>(h % 24) + static_cast<double>(j)) + noise(rng);
    const auto features = nbplan::FeatureMatrix::normalize(raw, {"a", "b", "c", "d", "e", "f"});
    for (auto _ : state)
        benchmark::DoNotOptimize(nbplan::reduce_snapshots(features, {.k = 12, .seed = 1}));
}
BENCHMARK(BM_KMeans)->Arg(720)->Arg(8760)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
