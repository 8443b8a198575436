#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dcbsim/engine.hpp"
#include "dcbsim/time.hpp"

namespace dcbsim {

using int128 = __int128;

// Rates are carried internally in micro-bits-per-second (ubps) and flow
// volumes in picobits (pb): 1 ubps sustained for 1 us moves exactly 1 pb,
// so all transfer accounting is integer-exact.
constexpr std::int64_t kUbpsPerBps = 1'000'000;
constexpr int128 kPbPerBit = 1'000'000'000'000LL;
constexpr std::int64_t kUnboundedBps = std::numeric_limits<std::int64_t>::max();

constexpr int128 bytes_to_pb(std::uint64_t bytes) {
    return static_cast<int128>(bytes) * 8 * kPbPerBit;
}

inline double pb_to_bytes(int128 pb) {
    return static_cast<double>(pb) / (8.0 * static_cast<double>(kPbPerBit));
}

struct LinkSpec {
    std::string link_id;
    std::int64_t capacity_bps = 0;
};

// Solver input record; also the shape the CLI oracle bridge parses into.
struct FlowDemand {
    std::string flow_id;
    std::vector<std::string> path;
    std::int64_t demand_bps = kUnboundedBps;
};

// Progressive water-filling: repeatedly raise all unfrozen flows together,
// freeze flows that hit their demand and flows crossing a saturated link,
// recurse on the rest. Runs in integer ubps, so equal shares are exact and
// identical across runs. Throws UnknownLink if a path names a missing link.
std::map<std::string, std::int64_t> solve_max_min_ubps(const std::vector<FlowDemand>& flows,
                                                       const std::vector<LinkSpec>& links);

// Convenience wrapper returning bits/s as double.
std::map<std::string, double> solve_max_min(const std::vector<FlowDemand>& flows,
                                            const std::vector<LinkSpec>& links);

// Point-to-point fluid transfers over capacitated links. Allocations are
// recomputed on every flow creation, completion, cancellation or demand
// change, never on a timer. Completion events fire at the exact microsecond
// the last picobit moves.
class FlowNetwork {
public:
    using FlowId = std::uint64_t;
    using CompletionFn = std::function<void(FlowId)>;

    struct FlowStats {
        FlowId flow_id = 0;
        std::string label;
        int128 volume_pb = 0;
        int128 moved_pb = 0;
        std::int64_t rate_ubps = 0;
        std::int64_t demand_bps = kUnboundedBps;
        SimTime opened_at;
        SimTime completed_at;
        bool completed = false;
    };

    explicit FlowNetwork(Engine& engine);

    void add_link(const LinkSpec& link);
    bool has_link(const std::string& link_id) const;
    const std::vector<LinkSpec>& links() const { return links_; }

    // demand_bps = kUnboundedBps means capped only by the links on the path.
    // An empty path with unbounded demand completes instantaneously.
    FlowId open_flow(std::string label, const std::vector<std::string>& path,
                     std::int64_t demand_bps, std::uint64_t volume_bytes,
                     CompletionFn on_complete);

    // Removes an in-flight flow; bytes already moved stay accounted.
    void cancel_flow(FlowId id);

    void set_demand(FlowId id, std::int64_t demand_bps);

    bool is_active(FlowId id) const { return flows_.count(id) > 0; }
    std::int64_t allocated_ubps(FlowId id) const;
    double allocated_bps(FlowId id) const;

    // Moves every flow forward to t at its current rate and returns the ids
    // that reached zero remaining volume, in ascending id order. Normally
    // driven by the engine's event loop; exposed for direct kernel tests.
    std::vector<FlowId> advance_to(SimTime t);

    std::size_t active_flow_count() const { return flows_.size(); }

    // Cumulative traffic through a link since construction.
    int128 link_moved_pb(const std::string& link_id) const;
    double link_moved_bytes(const std::string& link_id) const;

    // Lifetime stats for any flow ever opened (completed ones included).
    const FlowStats* stats(FlowId id) const;
    const std::map<FlowId, FlowStats>& all_stats() const { return archive_; }

    // Post-solve capacity audits: every re-solve checks sum(alloc) <= capacity
    // on every link and counts violations (expected to stay zero).
    std::uint64_t solve_count() const { return solve_count_; }
    std::uint64_t capacity_violations() const { return capacity_violations_; }

private:
    struct Flow {
        FlowId id = 0;
        std::string label;
        std::vector<std::size_t> link_idx;
        std::int64_t demand_bps = kUnboundedBps;
        int128 remaining_pb = 0;
        std::int64_t rate_ubps = 0;
        SimTime last_advance;
        bool instantaneous = false; // empty path + unbounded demand
        CompletionFn on_complete;
    };

    void mark_dirty();
    void settle();
    void on_completion_event();
    void resolve_and_reschedule();
    void record_moved(Flow& flow, int128 moved_pb);

    Engine& engine_;
    std::vector<LinkSpec> links_;
    std::map<std::string, std::size_t> link_index_;
    std::vector<int128> link_moved_pb_;
    std::map<FlowId, Flow> flows_;
    std::map<FlowId, FlowStats> archive_;
    FlowId next_flow_id_ = 1;
    bool dirty_ = false;
    bool kick_pending_ = false;
    Engine::Handle completion_event_{};
    std::uint64_t solve_count_ = 0;
    std::uint64_t capacity_violations_ = 0;
};

} // namespace dcbsim
