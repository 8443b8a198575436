#include <doctest.h>

#include <string>
#include <vector>

#include "dcbsim/engine.hpp"
#include "dcbsim/errors.hpp"

using namespace dcbsim;

TEST_CASE("scheduled event fires at its time") {
    Engine engine;
    std::vector<std::int64_t> fired;
    engine.schedule(SimTime::from_us(10), EventKind::Generic,
                    [&] { fired.push_back(engine.now().us()); });
    engine.run_until(SimTime::from_us(100));
    REQUIRE(fired == std::vector<std::int64_t>{10});
    CHECK(engine.now().us() == 100);
}

TEST_CASE("same-time events fire in scheduling order") {
    Engine engine;
    std::vector<int> order;
    engine.schedule(SimTime::from_us(10), EventKind::Generic, [&] { order.push_back(1); });
    engine.schedule(SimTime::from_us(10), EventKind::Generic, [&] { order.push_back(2); });
    engine.schedule(SimTime::from_us(5), EventKind::Generic, [&] { order.push_back(0); });
    engine.run_until(SimTime::from_us(20));
    CHECK(order == std::vector<int>{0, 1, 2});
}

TEST_CASE("cancelled event never fires") {
    Engine engine;
    bool fired = false;
    auto handle = engine.schedule(SimTime::from_us(10), EventKind::Generic, [&] { fired = true; });
    CHECK(engine.cancel(handle));
    CHECK_FALSE(engine.cancel(handle)); // second cancel is a no-op
    engine.run_until(SimTime::from_us(100));
    CHECK_FALSE(fired);
}

TEST_CASE("scheduling into the past is rejected") {
    Engine engine;
    engine.run_until(SimTime::from_us(50));
    CHECK_THROWS_AS(engine.schedule(SimTime::from_us(10), EventKind::Generic, [] {}),
                    PastEventError);
}

TEST_CASE("run_until with empty queue advances the clock") {
    Engine engine;
    CHECK(engine.run_until(SimTime::from_us(100)) == 0);
    CHECK(engine.now().us() == 100);
}

TEST_CASE("run_until fires only events at or before t_end") {
    Engine engine;
    int count = 0;
    for (std::int64_t t : {10, 20, 30, 200}) {
        engine.schedule(SimTime::from_us(t), EventKind::Generic, [&] { ++count; });
    }
    CHECK(engine.run_until(SimTime::from_us(100)) == 3);
    CHECK(count == 3);
    CHECK(engine.now().us() == 100);
    CHECK(engine.run_until(SimTime::from_us(300)) == 1);
}

TEST_CASE("handlers observe non-decreasing time") {
    Engine engine;
    std::int64_t last = -1;
    bool ordered = true;
    for (std::int64_t t : {40, 10, 30, 10, 20, 50, 10}) {
        engine.schedule(SimTime::from_us(t), EventKind::Generic, [&, t] {
            (void)t;
            if (engine.now().us() < last) ordered = false;
            last = engine.now().us();
        });
    }
    engine.run_until(SimTime::from_us(100));
    CHECK(ordered);
}

TEST_CASE("events scheduled from handlers fire in the same run") {
    Engine engine;
    std::vector<std::string> trace;
    engine.schedule(SimTime::from_us(10), EventKind::Generic, [&] {
        trace.push_back("outer");
        engine.schedule(SimTime::from_us(10), EventKind::Generic,
                        [&] { trace.push_back("inner-same-time"); });
        engine.schedule(SimTime::from_us(15), EventKind::Generic,
                        [&] { trace.push_back("inner-later"); });
    });
    engine.run_until(SimTime::from_us(20));
    CHECK(trace == std::vector<std::string>{"outer", "inner-same-time", "inner-later"});
}

// Two engines fed the same schedule produce an identical firing trace.
TEST_CASE("event sequencing is deterministic") {
    auto run_once = [] {
        Engine engine;
        std::vector<std::pair<std::int64_t, int>> trace;
        for (int i = 0; i < 50; ++i) {
            const std::int64_t t = (i * 37) % 97;
            engine.schedule(SimTime::from_us(t), EventKind::Generic,
                            [&trace, &engine, i] { trace.emplace_back(engine.now().us(), i); });
        }
        engine.run_until(SimTime::from_us(1000));
        return trace;
    };
    CHECK(run_once() == run_once());
}
