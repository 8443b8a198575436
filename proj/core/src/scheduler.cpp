#include "dcbsim/scheduler.hpp"

#include <algorithm>
#include <limits>

#include "dcbsim/errors.hpp"

namespace dcbsim {

CloudScheduler::CloudScheduler(SchedulerPolicy policy, std::vector<std::string> site_order,
                               std::map<std::string, int> slot_capacity)
    : policy_(policy), site_order_(std::move(site_order)),
      slot_capacity_(std::move(slot_capacity)) {}

SchedulerView CloudScheduler::reconcile(const std::map<std::uint64_t, VmInstance>& truth,
                                        const std::map<std::string, int>& queued_by_image,
                                        const ReachableFn& reachable, SimTime now) const {
    SchedulerView view;
    view.at = now;
    view.queued_by_image = queued_by_image;

    std::map<std::string, int> occupied;
    for (const auto& site : site_order_) occupied[site] = 0;

    for (const auto& [vm_id, vm] : truth) {
        if (vm.state == VmState::Terminated) continue;
        VmView vv;
        vv.vm_id = vm_id;
        vv.site_id = vm.site_id;
        vv.image_id = vm.image_id;
        vv.bound = !vm.bound_job.empty();
        const bool site_ok = !reachable || reachable(vm.site_id);
        vv.state = site_ok ? vm.state : VmState::Error;
        switch (vv.state) {
        case VmState::Propagating:
        case VmState::Booting:
        case VmState::Running:
        case VmState::ShuttingDown:
            occupied[vv.site_id]++;
            break;
        default:
            break;
        }
        view.vms.push_back(std::move(vv));
    }
    for (const auto& site : site_order_) {
        view.free_slots[site] = slot_capacity_.at(site) - occupied[site];
    }
    return view;
}

std::string CloudScheduler::select_site(const std::string& image_id,
                                        const std::map<std::string, int>& free_slots) {
    if (policy_.placement == SchedulerPolicy::Placement::FirstFit) {
        for (const auto& site : site_order_) {
            auto it = free_slots.find(site);
            if (it != free_slots.end() && it->second > 0) return site;
        }
        throw NoCapacityError("no site has a free slot");
    }
    std::size_t& cursor = cursor_[image_id];
    for (std::size_t step = 0; step < site_order_.size(); ++step) {
        const std::size_t idx = (cursor + step) % site_order_.size();
        const std::string& site = site_order_[idx];
        auto it = free_slots.find(site);
        if (it != free_slots.end() && it->second > 0) {
            cursor = (idx + 1) % site_order_.size();
            return site;
        }
    }
    throw NoCapacityError("no site has a free slot");
}

std::vector<SchedulerAction> CloudScheduler::tick(const SchedulerView& view) {
    std::vector<SchedulerAction> actions;

    // Replace errored VMs: terminate now, the demand pass below boots anew.
    for (const auto& vm : view.vms) {
        if (vm.state == VmState::Error) {
            actions.push_back({SchedulerAction::Kind::Terminate, "", "", vm.vm_id});
        }
    }

    // Retire idle VMs whose image has no queued work.
    for (const auto& vm : view.vms) {
        if (vm.state == VmState::Running && !vm.bound &&
            view.queued_by_image.count(vm.image_id) == 0) {
            actions.push_back({SchedulerAction::Kind::Shutdown, "", "", vm.vm_id});
        }
    }

    // Demand per image: queued jobs not yet covered by a live VM.
    std::map<std::string, int> live_by_image;
    for (const auto& vm : view.vms) {
        if (vm.state == VmState::Propagating || vm.state == VmState::Booting ||
            vm.state == VmState::Running) {
            live_by_image[vm.image_id]++;
        }
    }
    std::map<std::string, int> need;
    std::vector<std::string> images;
    for (const auto& [image, queued] : view.queued_by_image) {
        const int deficit = queued - live_by_image[image];
        if (deficit > 0) {
            need[image] = deficit;
            images.push_back(image);
        }
    }
    // Resume the boot pass after the image served last tick, so a per-tick
    // budget rotates fairly across images instead of favoring the first.
    if (!images.empty()) {
        std::size_t start = 0;
        for (std::size_t i = 0; i < images.size(); ++i) {
            if (images[i] >= boot_cursor_) {
                start = i;
                break;
            }
        }
        std::rotate(images.begin(), images.begin() + start, images.end());
    }

    std::map<std::string, int> free = view.free_slots;
    int budget = policy_.max_boots_per_tick > 0 ? policy_.max_boots_per_tick
                                                : std::numeric_limits<int>::max();
    // One boot per image per round keeps any single image from starving the
    // others when a per-tick budget is set.
    std::size_t last_served = images.size();
    bool progressed = true;
    while (progressed && budget > 0) {
        progressed = false;
        for (std::size_t i = 0; i < images.size(); ++i) {
            const std::string& image = images[i];
            if (need[image] <= 0 || budget <= 0) continue;
            std::string site;
            try {
                site = select_site(image, free);
            } catch (const NoCapacityError&) {
                continue;
            }
            actions.push_back({SchedulerAction::Kind::Boot, image, site, 0});
            free[site]--;
            need[image]--;
            --budget;
            progressed = true;
            last_served = i;
        }
    }
    if (last_served < images.size()) {
        boot_cursor_ = images[(last_served + 1) % images.size()];
    }
    return actions;
}

} // namespace dcbsim
