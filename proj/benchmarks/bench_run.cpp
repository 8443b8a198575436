#include <benchmark/benchmark.h>

#include "dcbsim/scenario.hpp"
#include "dcbsim/simulation.hpp"

namespace {

// End-to-end cost of the bundled preset (about 40 simulated hours).
void BM_PaperPresetRun(benchmark::State& state) {
    const dcbsim::ScenarioConfig config = dcbsim::paper_scenario();
    for (auto _ : state) {
        dcbsim::Simulation sim(config);
        benchmark::DoNotOptimize(sim.run());
    }
}

} // namespace

BENCHMARK(BM_PaperPresetRun)->Unit(benchmark::kMillisecond)->Iterations(1);
