#include <benchmark/benchmark.h>

#include <random>

#include "nbplan/sensitivity.hpp"

namespace {

// Ring with chords; every bus is on at least one cycle.
nbplan::Network meshed(std::size_t n) {
    nbplan::NetworkData d;
    for (std::size_t i = 0; i < n; ++i) d.buses.push_back({"b" + std::to_string(i)});
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> x(0.02, 0.4);
    auto add = [&](std::size_t a, std::size_t b) {
        d.lines.push_back({"l" + std::to_string(d.lines.size()), d.buses[a].id, d.buses[b].id, x(rng), 100.0});
    };
    for (std::size_t i = 0; i < n; ++i) add(i, (i + 1) % n);
    for (std::size_t i = 0; i + n / 2 < n; i += 3) add(i, i + n / 2);
    d.snapshots.push_back({"t0", 1.0});
    d.period_hours.reset();
    return nbplan::Network(std::move(d));
}

void BM_Sensitivities(benchmark::State& state) {
    const nbplan::Network net = meshed(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(nbplan::compute_sensitivities(net));
    state.counters["lines"] = static_cast<double>(net.line_count());
}
BENCHMARK(BM_Sensitivities)->RangeMultiplier(2)->Range(16, 256)->Unit(benchmark::kMicrosecond);

}  // namespace
