#include <benchmark/benchmark.h>

#include "nbplan/log.hpp"
#include "nbplan/planning.hpp"
#include "nbplan/scenario.hpp"

namespace {

void BM_Model(benchmark::State& state, const char* fixture, nbplan::ModelKind model) {
    nbplan::log::set_level(nbplan::log::Level::Warning);
    const std::string dir = std::string(NBPLAN_FIXTURE_DIR) + "/" + fixture;
    const nbplan::Network net = nbplan::load_network(dir);
    nbplan::ScenarioConfig cfg = nbplan::load_config(dir + "/scenario.toml");
    cfg.model = model;
    const nbplan::PlanningContext ctx(net, cfg);
    for (auto _ : state) {
        const nbplan::ModelRun run = nbplan::run_model(ctx, cfg);
        if (!run.optimal()) state.SkipWithError("not optimal");
        benchmark::DoNotOptimize(run.plan);
    }
}

BENCHMARK_CAPTURE(BM_Model, triangle_sequential, "triangle", nbplan::ModelKind::Sequential)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Model, two_zone_preventive, "two_zone", nbplan::ModelKind::Preventive)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Model, two_zone_simultaneous, "two_zone", nbplan::ModelKind::Simultaneous)
    ->Unit(benchmark::kMillisecond);

}  // namespace
