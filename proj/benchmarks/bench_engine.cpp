#include <benchmark/benchmark.h>

#include "dcbsim/engine.hpp"

namespace {

void BM_ScheduleAndFire(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        dcbsim::Engine engine;
        long fired = 0;
        for (int i = 0; i < n; ++i) {
            engine.schedule(dcbsim::SimTime::from_us((i * 7919) % 100000),
                            dcbsim::EventKind::Generic, [&fired] { ++fired; });
        }
        engine.run_until(dcbsim::SimTime::from_us(100000));
        benchmark::DoNotOptimize(fired);
    }
    state.SetItemsProcessed(state.iterations() * n);
}

} // namespace

BENCHMARK(BM_ScheduleAndFire)->Arg(1000)->Arg(100000);
