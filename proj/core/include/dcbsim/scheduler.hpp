#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dcbsim/cloud.hpp"
#include "dcbsim/time.hpp"

namespace dcbsim {

struct SchedulerPolicy {
    std::int64_t tick_interval_us = 30 * kUsPerSecond;
    enum class Placement { RoundRobin, FirstFit };
    Placement placement = Placement::RoundRobin;
    int max_boots_per_tick = 0; // 0 = unlimited
};

struct VmView {
    std::uint64_t vm_id = 0;
    std::string site_id;
    std::string image_id;
    VmState state = VmState::Propagating;
    bool bound = false;
};

// What the scheduler believes; equals ground truth except that every VM on
// an unreachable site reports Error until the link comes back.
struct SchedulerView {
    SimTime at;
    std::vector<VmView> vms; // ascending vm id
    std::map<std::string, int> queued_by_image;
    std::map<std::string, int> free_slots; // per site, from viewed states
};

struct SchedulerAction {
    enum class Kind { Boot, Shutdown, Terminate };
    Kind kind;
    std::string image_id; // Boot
    std::string site_id;  // Boot
    std::uint64_t vm_id = 0; // Shutdown / Terminate
};

// The provisioning policy: scan the queue, boot image-matching VMs on sites
// with free slots, retire idle VMs whose image has no queued work, and
// replace errored VMs (a Terminate followed by an ordinary Boot, so slot
// accounting has no special path).
class CloudScheduler {
public:
    using ReachableFn = std::function<bool(const std::string& site)>;

    CloudScheduler(SchedulerPolicy policy, std::vector<std::string> site_order,
                   std::map<std::string, int> slot_capacity);

    // Builds the view from ground truth, distorted by unreachable sites.
    SchedulerView reconcile(const std::map<std::uint64_t, VmInstance>& truth,
                            const std::map<std::string, int>& queued_by_image,
                            const ReachableFn& reachable, SimTime now) const;

    std::vector<SchedulerAction> tick(const SchedulerView& view);

    // Per-image round-robin cursor over sites with a free slot; deterministic
    // given history. Throws NoCapacity when nothing has room.
    std::string select_site(const std::string& image_id,
                            const std::map<std::string, int>& free_slots);

    const SchedulerPolicy& policy() const { return policy_; }

private:
    SchedulerPolicy policy_;
    std::vector<std::string> site_order_;
    std::map<std::string, int> slot_capacity_;
    std::map<std::string, std::size_t> cursor_; // per image
    std::string boot_cursor_; // image where the next tick's boot pass resumes
};

} // namespace dcbsim
