#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "dcbsim/flow_network.hpp"

namespace {

using dcbsim::FlowDemand;
using dcbsim::LinkSpec;

std::vector<LinkSpec> make_links() {
    return {
        {"repo", 500'000'000},
        {"up0", 1'000'000'000},
        {"up1", 1'000'000'000},
        {"down0", 1'000'000'000},
        {"down1", 1'000'000'000},
    };
}

std::vector<FlowDemand> make_flows(int n) {
    std::vector<FlowDemand> flows;
    flows.reserve(n);
    for (int i = 0; i < n; ++i) {
        FlowDemand f;
        f.flow_id = "f" + std::to_string(i);
        f.path = {"repo", i % 2 ? "up0" : "up1", i % 3 ? "down0" : "down1"};
        f.demand_bps = (i % 4 == 0) ? dcbsim::kUnboundedBps : 3'520'000 + 10'000 * (i % 7);
        flows.push_back(std::move(f));
    }
    return flows;
}

void BM_SolveMaxMin(benchmark::State& state) {
    const auto links = make_links();
    const auto flows = make_flows(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(dcbsim::solve_max_min_ubps(flows, links));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK(BM_SolveMaxMin)->Arg(10)->Arg(100)->Arg(500);
