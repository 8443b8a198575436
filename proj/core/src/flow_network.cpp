#include "dcbsim/flow_network.hpp"

#include <algorithm>
#include <cassert>

#include "dcbsim/errors.hpp"

namespace dcbsim {

namespace {

constexpr std::int64_t kUnboundedUbps = std::numeric_limits<std::int64_t>::max();
// Completion times beyond this are treated as "never" (rate effectively zero).
constexpr std::int64_t kMaxEventHorizonUs = std::int64_t{1} << 58;

std::int64_t demand_bps_to_ubps(std::int64_t demand_bps) {
    if (demand_bps == kUnboundedBps) return kUnboundedUbps;
    if (demand_bps > kUnboundedBps / kUbpsPerBps) return kUnboundedUbps;
    return demand_bps * kUbpsPerBps;
}

struct SolveFlow {
    std::int64_t demand_ubps;
    const std::vector<std::size_t>* links;
};

// Integer progressive filling. All unfrozen flows rise by the same delta;
// a link freezes its flows once it cannot grant one more ubps to each.
void solve_indexed(std::vector<SolveFlow>& flows, std::vector<std::int64_t> cap_left,
                   std::vector<std::int64_t>& rates) {
    const std::size_t n = flows.size();
    rates.assign(n, 0);
    std::vector<bool> active(n);
    std::vector<std::int64_t> active_on(cap_left.size(), 0);
    std::size_t active_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        active[i] = flows[i].demand_ubps > 0;
        if (active[i]) {
            ++active_count;
            for (std::size_t l : *flows[i].links) ++active_on[l];
        }
    }

    while (active_count > 0) {
        std::int64_t delta = kUnboundedUbps;
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            if (flows[i].demand_ubps != kUnboundedUbps) {
                delta = std::min(delta, flows[i].demand_ubps - rates[i]);
            }
        }
        for (std::size_t l = 0; l < cap_left.size(); ++l) {
            if (active_on[l] > 0) {
                delta = std::min(delta, cap_left[l] / active_on[l]);
            }
        }
        if (delta == kUnboundedUbps) {
            // Only unbounded flows on uncapacitated paths remain; they are
            // instantaneous and handled by the caller, not here.
            break;
        }

        if (delta > 0) {
            for (std::size_t i = 0; i < n; ++i) {
                if (active[i]) rates[i] += delta;
            }
            for (std::size_t l = 0; l < cap_left.size(); ++l) {
                cap_left[l] -= delta * active_on[l];
            }
        }

        // Freeze demand-satisfied flows and flows on saturated links.
        std::vector<bool> freeze(n, false);
        bool froze_any = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (active[i] && flows[i].demand_ubps != kUnboundedUbps &&
                rates[i] >= flows[i].demand_ubps) {
                freeze[i] = true;
                froze_any = true;
            }
        }
        for (std::size_t l = 0; l < cap_left.size(); ++l) {
            if (active_on[l] > 0 && cap_left[l] < active_on[l]) {
                for (std::size_t i = 0; i < n; ++i) {
                    if (!active[i] || freeze[i]) continue;
                    const auto& path = *flows[i].links;
                    if (std::find(path.begin(), path.end(), l) != path.end()) {
                        freeze[i] = true;
                        froze_any = true;
                    }
                }
            }
        }
        if (!froze_any) {
            break; // defensive; cannot happen with integer deltas
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (freeze[i]) {
                active[i] = false;
                --active_count;
                for (std::size_t l : *flows[i].links) --active_on[l];
            }
        }
    }
}

} // namespace

std::map<std::string, std::int64_t> solve_max_min_ubps(const std::vector<FlowDemand>& flows,
                                                       const std::vector<LinkSpec>& links) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < links.size(); ++i) {
        index[links[i].link_id] = i;
    }
    std::vector<std::vector<std::size_t>> paths(flows.size());
    std::vector<SolveFlow> solve_flows(flows.size());
    for (std::size_t i = 0; i < flows.size(); ++i) {
        for (const auto& link_id : flows[i].path) {
            auto it = index.find(link_id);
            if (it == index.end()) {
                throw UnknownLinkError("flow '" + flows[i].flow_id +
                                       "' references unknown link '" + link_id + "'");
            }
            if (std::find(paths[i].begin(), paths[i].end(), it->second) == paths[i].end()) {
                paths[i].push_back(it->second);
            }
        }
        solve_flows[i] = SolveFlow{demand_bps_to_ubps(flows[i].demand_bps), &paths[i]};
    }
    std::vector<std::int64_t> caps(links.size());
    for (std::size_t i = 0; i < links.size(); ++i) {
        caps[i] = demand_bps_to_ubps(links[i].capacity_bps);
    }
    std::vector<std::int64_t> rates;
    solve_indexed(solve_flows, caps, rates);

    std::map<std::string, std::int64_t> out;
    for (std::size_t i = 0; i < flows.size(); ++i) {
        out[flows[i].flow_id] = rates[i];
    }
    return out;
}

std::map<std::string, double> solve_max_min(const std::vector<FlowDemand>& flows,
                                            const std::vector<LinkSpec>& links) {
    std::map<std::string, double> out;
    for (const auto& [id, ubps] : solve_max_min_ubps(flows, links)) {
        out[id] = static_cast<double>(ubps) / static_cast<double>(kUbpsPerBps);
    }
    return out;
}

FlowNetwork::FlowNetwork(Engine& engine) : engine_(engine) {
    // Allocations settle exactly once after every fired event.
    engine_.set_post_event_hook([this] { settle(); });
}

void FlowNetwork::add_link(const LinkSpec& link) {
    if (link.capacity_bps <= 0) {
        throw BadParamsError("link '" + link.link_id + "' must have positive capacity");
    }
    if (link_index_.count(link.link_id)) {
        throw BadParamsError("duplicate link '" + link.link_id + "'");
    }
    link_index_[link.link_id] = links_.size();
    links_.push_back(link);
    link_moved_pb_.push_back(0);
}

bool FlowNetwork::has_link(const std::string& link_id) const {
    return link_index_.count(link_id) > 0;
}

FlowNetwork::FlowId FlowNetwork::open_flow(std::string label,
                                           const std::vector<std::string>& path,
                                           std::int64_t demand_bps,
                                           std::uint64_t volume_bytes,
                                           CompletionFn on_complete) {
    Flow flow;
    flow.id = next_flow_id_++;
    flow.label = std::move(label);
    for (const auto& link_id : path) {
        auto it = link_index_.find(link_id);
        if (it == link_index_.end()) {
            throw UnknownLinkError("flow '" + flow.label + "' references unknown link '" +
                                   link_id + "'");
        }
        if (std::find(flow.link_idx.begin(), flow.link_idx.end(), it->second) ==
            flow.link_idx.end()) {
            flow.link_idx.push_back(it->second);
        }
    }
    flow.demand_bps = demand_bps;
    flow.remaining_pb = bytes_to_pb(volume_bytes);
    flow.last_advance = engine_.now();
    flow.instantaneous = flow.link_idx.empty() && demand_bps == kUnboundedBps;
    flow.on_complete = std::move(on_complete);

    FlowStats st;
    st.flow_id = flow.id;
    st.label = flow.label;
    st.volume_pb = flow.remaining_pb;
    st.demand_bps = demand_bps;
    st.opened_at = engine_.now();
    archive_[flow.id] = std::move(st);

    flows_.emplace(flow.id, std::move(flow));
    mark_dirty();
    return next_flow_id_ - 1;
}

void FlowNetwork::cancel_flow(FlowId id) {
    auto it = flows_.find(id);
    if (it == flows_.end()) return;
    // Account what moved up to now before dropping the flow.
    Flow& flow = it->second;
    const std::int64_t dt_us = engine_.now() - flow.last_advance;
    if (dt_us > 0 && flow.rate_ubps > 0) {
        int128 moved = static_cast<int128>(flow.rate_ubps) * dt_us;
        if (moved > flow.remaining_pb) moved = flow.remaining_pb;
        record_moved(flow, moved);
        flow.remaining_pb -= moved;
    }
    flows_.erase(it);
    mark_dirty();
}

void FlowNetwork::set_demand(FlowId id, std::int64_t demand_bps) {
    auto it = flows_.find(id);
    if (it == flows_.end()) return;
    advance_to(engine_.now());
    it->second.demand_bps = demand_bps;
    it->second.instantaneous = it->second.link_idx.empty() && demand_bps == kUnboundedBps;
    archive_[id].demand_bps = demand_bps;
    mark_dirty();
}

std::int64_t FlowNetwork::allocated_ubps(FlowId id) const {
    auto it = flows_.find(id);
    return it == flows_.end() ? 0 : it->second.rate_ubps;
}

double FlowNetwork::allocated_bps(FlowId id) const {
    return static_cast<double>(allocated_ubps(id)) / static_cast<double>(kUbpsPerBps);
}

void FlowNetwork::record_moved(Flow& flow, int128 moved_pb) {
    if (moved_pb <= 0) return;
    for (std::size_t l : flow.link_idx) {
        link_moved_pb_[l] += moved_pb;
    }
    archive_[flow.id].moved_pb += moved_pb;
}

std::vector<FlowNetwork::FlowId> FlowNetwork::advance_to(SimTime t) {
    std::vector<FlowId> completed;
    for (auto& [id, flow] : flows_) {
        const std::int64_t dt_us = t - flow.last_advance;
        if (dt_us < 0) continue;
        if (flow.instantaneous) {
            record_moved(flow, flow.remaining_pb);
            flow.remaining_pb = 0;
        } else if (dt_us > 0 && flow.rate_ubps > 0 && flow.remaining_pb > 0) {
            int128 moved = static_cast<int128>(flow.rate_ubps) * dt_us;
            if (moved > flow.remaining_pb) moved = flow.remaining_pb;
            record_moved(flow, moved);
            flow.remaining_pb -= moved;
        }
        flow.last_advance = t;
        if (flow.remaining_pb == 0) {
            completed.push_back(id);
        }
    }
    return completed;
}

int128 FlowNetwork::link_moved_pb(const std::string& link_id) const {
    auto it = link_index_.find(link_id);
    if (it == link_index_.end()) {
        throw UnknownLinkError("unknown link '" + link_id + "'");
    }
    return link_moved_pb_[it->second];
}

double FlowNetwork::link_moved_bytes(const std::string& link_id) const {
    return pb_to_bytes(link_moved_pb(link_id));
}

const FlowNetwork::FlowStats* FlowNetwork::stats(FlowId id) const {
    auto it = archive_.find(id);
    return it == archive_.end() ? nullptr : &it->second;
}

void FlowNetwork::mark_dirty() {
    dirty_ = true;
    if (!kick_pending_) {
        // Ensures a settle happens even when the mutation comes from outside
        // an event handler (e.g. scenario setup before the run starts).
        kick_pending_ = true;
        engine_.schedule(engine_.now(), EventKind::TransferComplete,
                         [this] { kick_pending_ = false; });
    }
}

void FlowNetwork::settle() {
    if (!dirty_) return;
    dirty_ = false;
    resolve_and_reschedule();
}

void FlowNetwork::on_completion_event() {
    const SimTime now = engine_.now();
    std::vector<FlowId> completed = advance_to(now);
    for (FlowId id : completed) {
        auto it = flows_.find(id);
        if (it == flows_.end()) continue;
        CompletionFn cb = std::move(it->second.on_complete);
        flows_.erase(it);
        FlowStats& st = archive_[id];
        st.completed = true;
        st.completed_at = now;
        if (cb) cb(id);
    }
    mark_dirty();
}

void FlowNetwork::resolve_and_reschedule() {
    const SimTime now = engine_.now();
    advance_to(now);

    // Assemble solver input over flows that still have volume to move.
    std::vector<SolveFlow> solve_flows;
    std::vector<Flow*> ordered;
    solve_flows.reserve(flows_.size());
    ordered.reserve(flows_.size());
    for (auto& [id, flow] : flows_) {
        ordered.push_back(&flow);
        solve_flows.push_back(SolveFlow{
            flow.instantaneous ? std::int64_t{0} : demand_bps_to_ubps(flow.demand_bps),
            &flow.link_idx});
    }
    std::vector<std::int64_t> caps(links_.size());
    for (std::size_t i = 0; i < links_.size(); ++i) {
        caps[i] = demand_bps_to_ubps(links_[i].capacity_bps);
    }
    std::vector<std::int64_t> rates;
    solve_indexed(solve_flows, caps, rates);
    ++solve_count_;

    std::vector<int128> used(links_.size(), 0);
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        ordered[i]->rate_ubps = rates[i];
        archive_[ordered[i]->id].rate_ubps = rates[i];
        for (std::size_t l : ordered[i]->link_idx) {
            used[l] += rates[i];
        }
    }
    for (std::size_t l = 0; l < links_.size(); ++l) {
        if (used[l] > static_cast<int128>(demand_bps_to_ubps(links_[l].capacity_bps))) {
            ++capacity_violations_;
        }
    }

    // Earliest completion across all flows.
    SimTime earliest = SimTime::max();
    for (const Flow* flow : ordered) {
        if (flow->remaining_pb == 0 || flow->instantaneous) {
            earliest = now;
            break;
        }
        if (flow->rate_ubps <= 0) continue;
        const int128 dt = (flow->remaining_pb + flow->rate_ubps - 1) / flow->rate_ubps;
        if (dt > kMaxEventHorizonUs) continue;
        const SimTime candidate = now + static_cast<std::int64_t>(dt);
        if (candidate < earliest) earliest = candidate;
    }

    if (completion_event_.valid()) {
        engine_.cancel(completion_event_);
        completion_event_ = Engine::Handle{};
    }
    if (earliest != SimTime::max()) {
        completion_event_ = engine_.schedule(earliest, EventKind::TransferComplete,
                                             [this] { on_completion_event(); });
    }
}

} // namespace dcbsim
