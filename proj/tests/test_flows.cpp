#include <doctest.h>

#include <vector>

#include "dcbsim/engine.hpp"
#include "dcbsim/flow_network.hpp"
#include "dcbsim/rng.hpp"

using namespace dcbsim;

namespace {

constexpr std::int64_t mbit(double m) { return static_cast<std::int64_t>(m * 1e6); }

} // namespace

// 16 GB through a dedicated 500 Mbit/s path: 16e9 * 8 / 500e6 = 256 s.
TEST_CASE("dedicated transfer completes at the exact arithmetic time") {
    Engine engine;
    FlowNetwork net(engine);
    net.add_link({"path", mbit(500)});
    SimTime completed_at;
    net.open_flow("xfer", {"path"}, kUnboundedBps, 16'000'000'000ULL,
                  [&](FlowNetwork::FlowId) { completed_at = engine.now(); });
    engine.run_until(SimTime::from_seconds(400));
    CHECK(completed_at.us() == 256 * kUsPerSecond);
}

TEST_CASE("zero-byte flow completes immediately") {
    Engine engine;
    FlowNetwork net(engine);
    net.add_link({"path", mbit(100)});
    engine.run_until(SimTime::from_us(5));
    SimTime completed_at = SimTime::max();
    net.open_flow("empty", {"path"}, kUnboundedBps, 0,
                  [&](FlowNetwork::FlowId) { completed_at = engine.now(); });
    engine.run_until(SimTime::from_us(10));
    CHECK(completed_at.us() == 5);
}

TEST_CASE("two equal flows sharing one link complete simultaneously") {
    Engine engine;
    FlowNetwork net(engine);
    net.add_link({"shared", mbit(100)});
    std::vector<std::int64_t> done;
    for (int i = 0; i < 2; ++i) {
        net.open_flow("f" + std::to_string(i), {"shared"}, kUnboundedBps, 1'000'000'000ULL,
                      [&](FlowNetwork::FlowId) { done.push_back(engine.now().us()); });
    }
    engine.run_until(SimTime::from_seconds(1000));
    REQUIRE(done.size() == 2);
    CHECK(done[0] == done[1]);
    // each gets 50 Mbit/s: 1e9 * 8 / 50e6 = 160 s
    CHECK(done[0] == 160 * kUsPerSecond);
}

TEST_CASE("a joining flow slows an in-flight transfer") {
    Engine engine;
    FlowNetwork net(engine);
    net.add_link({"l", mbit(100)});
    SimTime first_done, second_done;
    net.open_flow("first", {"l"}, kUnboundedBps, 1'000'000'000ULL,
                  [&](FlowNetwork::FlowId) { first_done = engine.now(); });
    engine.schedule(SimTime::from_seconds(40), EventKind::Generic, [&] {
        net.open_flow("second", {"l"}, kUnboundedBps, 1'000'000'000ULL,
                      [&](FlowNetwork::FlowId) { second_done = engine.now(); });
    });
    engine.run_until(SimTime::from_seconds(1000));
    // First runs 40 s at 100 Mbit/s (4e9 bits of 8e9), then both at 50:
    // remaining 4e9 bits -> +80 s => 120 s total.
    CHECK(first_done.us() == 120 * kUsPerSecond);
    // Second: 40 s..120 s at 50 (4e9 bits), then alone at 100: +40 s = 160 s.
    CHECK(second_done.us() == 160 * kUsPerSecond);
}

TEST_CASE("cancelled flow stops moving bytes but keeps its accounting") {
    Engine engine;
    FlowNetwork net(engine);
    net.add_link({"l", mbit(100)});
    bool completed = false;
    auto id = net.open_flow("doomed", {"l"}, kUnboundedBps, 1'000'000'000ULL,
                            [&](FlowNetwork::FlowId) { completed = true; });
    engine.schedule(SimTime::from_seconds(10), EventKind::Generic, [&] { net.cancel_flow(id); });
    engine.run_until(SimTime::from_seconds(500));
    CHECK_FALSE(completed);
    // 10 s at 100 Mbit/s = 125 MB
    CHECK(net.stats(id)->moved_pb == bytes_to_pb(125'000'000ULL));
    CHECK(net.link_moved_pb("l") == bytes_to_pb(125'000'000ULL));
}

TEST_CASE("demand cap limits a flow below link capacity") {
    Engine engine;
    FlowNetwork net(engine);
    net.add_link({"l", mbit(1000)});
    SimTime done;
    net.open_flow("capped", {"l"}, mbit(10), 1'000'000'000ULL,
                  [&](FlowNetwork::FlowId) { done = engine.now(); });
    engine.run_until(SimTime::from_seconds(2000));
    CHECK(done.us() == 800 * kUsPerSecond); // 8e9 bits / 10e6 bps
}

// Byte conservation under churn: flows joining and leaving at odd times must
// deliver exactly their declared volume, and link totals must equal the sum.
TEST_CASE("byte conservation is exact under churn") {
    RngStream rng(0x5eed);
    for (int iter = 0; iter < 20; ++iter) {
        Engine engine;
        FlowNetwork net(engine);
        net.add_link({"a", mbit(static_cast<double>(rng.next_in(50, 500)))});
        net.add_link({"b", mbit(static_cast<double>(rng.next_in(50, 500)))});

        int128 expected_on_a = 0;
        const int n = static_cast<int>(rng.next_in(2, 8));
        std::vector<std::uint64_t> ids;
        for (int f = 0; f < n; ++f) {
            const std::uint64_t bytes = rng.next_in(1, 2'000'000'000ULL);
            const bool both = rng.bernoulli(0.5);
            std::vector<std::string> path = both ? std::vector<std::string>{"a", "b"}
                                                 : std::vector<std::string>{"a"};
            const std::int64_t start_us =
                static_cast<std::int64_t>(rng.next_in(0, 20 * kUsPerSecond));
            expected_on_a += bytes_to_pb(bytes);
            engine.schedule(SimTime::from_us(start_us), EventKind::Generic, [&, path, bytes] {
                ids.push_back(net.open_flow("f", path, kUnboundedBps, bytes, nullptr));
            });
        }
        engine.run_until(SimTime::from_seconds(4000));
        CHECK(net.active_flow_count() == 0);
        CHECK(net.link_moved_pb("a") == expected_on_a);
        for (auto id : ids) {
            CHECK(net.stats(id)->completed);
            CHECK(net.stats(id)->moved_pb == net.stats(id)->volume_pb);
        }
        CHECK(net.capacity_violations() == 0);
    }
}

TEST_CASE("advance_to reports completions without the event loop") {
    Engine engine;
    FlowNetwork net(engine);
    net.add_link({"l", mbit(8)});
    auto id = net.open_flow("f", {"l"}, kUnboundedBps, 1'000'000ULL, nullptr);
    engine.run_until(SimTime::from_us(1)); // let allocations settle
    auto done = net.advance_to(SimTime::from_seconds(1));
    REQUIRE(done.size() == 1);
    CHECK(done[0] == id);
}
