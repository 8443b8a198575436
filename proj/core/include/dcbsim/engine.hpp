#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_map>
#include <vector>

#include "dcbsim/time.hpp"

namespace dcbsim {

enum class EventKind {
    Generic,
    TransferComplete,
    VmBootComplete,
    VmTeardownComplete,
    SchedulerTick,
    JobSubmitted,
    FaultTrigger,
    MetricsSample,
};

const char* to_string(EventKind kind);

// Discrete-event engine: a virtual clock and an ordered event queue.
// Total event order is (fire_at, sequence); the sequence number is assigned
// at scheduling time, so same-time events fire in scheduling order.
class Engine {
public:
    struct Handle {
        std::uint64_t seq = 0;
        bool valid() const { return seq != 0; }
    };

    using Action = std::function<void()>;

    SimTime now() const { return now_; }

    // Throws PastEventError if fire_at < now().
    Handle schedule(SimTime fire_at, EventKind kind, Action action);

    // True if the event was pending and is now cancelled.
    bool cancel(Handle handle);

    // Fires every event with fire_at <= t_end in order and leaves now() at
    // t_end (or at the stopping event when stop() was called). Returns the
    // number of events fired.
    std::uint64_t run_until(SimTime t_end);

    // Stops the run after the current event; run_until returns early.
    void stop() { stopped_ = true; }
    bool stopped() const { return stopped_; }

    // Invoked after every fired event; the flow network uses this to settle
    // allocations exactly once per event.
    void set_post_event_hook(std::function<void()> hook) { post_event_ = std::move(hook); }

    std::size_t pending_events() const { return pending_.size(); }

private:
    struct HeapItem {
        std::int64_t at_us;
        std::uint64_t seq;
        bool operator>(const HeapItem& other) const {
            if (at_us != other.at_us) return at_us > other.at_us;
            return seq > other.seq;
        }
    };

    struct Pending {
        SimTime at;
        EventKind kind;
        Action action;
    };

    SimTime now_;
    bool stopped_ = false;
    std::uint64_t next_seq_ = 1;
    std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>> heap_;
    std::unordered_map<std::uint64_t, Pending> pending_;
    std::function<void()> post_event_;
};

} // namespace dcbsim
