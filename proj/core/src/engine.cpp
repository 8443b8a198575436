#include "dcbsim/engine.hpp"

#include "dcbsim/errors.hpp"

namespace dcbsim {

const char* to_string(EventKind kind) {
    switch (kind) {
    case EventKind::Generic: return "generic";
    case EventKind::TransferComplete: return "transfer-complete";
    case EventKind::VmBootComplete: return "vm-boot-complete";
    case EventKind::VmTeardownComplete: return "vm-teardown-complete";
    case EventKind::SchedulerTick: return "scheduler-tick";
    case EventKind::JobSubmitted: return "job-submitted";
    case EventKind::FaultTrigger: return "fault-trigger";
    case EventKind::MetricsSample: return "metrics-sample";
    }
    return "unknown";
}

Engine::Handle Engine::schedule(SimTime fire_at, EventKind kind, Action action) {
    if (fire_at < now_) {
        throw PastEventError("cannot schedule event at t=" + std::to_string(fire_at.us()) +
                             "us before now=" + std::to_string(now_.us()) + "us");
    }
    const std::uint64_t seq = next_seq_++;
    heap_.push(HeapItem{fire_at.us(), seq});
    pending_.emplace(seq, Pending{fire_at, kind, std::move(action)});
    return Handle{seq};
}

bool Engine::cancel(Handle handle) {
    return pending_.erase(handle.seq) > 0;
}

std::uint64_t Engine::run_until(SimTime t_end) {
    if (t_end < now_) {
        throw PastEventError("run_until target precedes now()");
    }
    std::uint64_t fired = 0;
    while (!stopped_ && !heap_.empty() && heap_.top().at_us <= t_end.us()) {
        const HeapItem item = heap_.top();
        heap_.pop();
        auto it = pending_.find(item.seq);
        if (it == pending_.end()) {
            continue; // cancelled
        }
        Action action = std::move(it->second.action);
        now_ = it->second.at;
        pending_.erase(it);
        action();
        if (post_event_) post_event_();
        ++fired;
    }
    if (!stopped_) {
        now_ = t_end;
    }
    return fired;
}

} // namespace dcbsim
