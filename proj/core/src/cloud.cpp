#include "dcbsim/cloud.hpp"

#include <algorithm>

#include "dcbsim/errors.hpp"

namespace dcbsim {

const char* to_string(VmState state) {
    switch (state) {
    case VmState::Propagating: return "Propagating";
    case VmState::Booting: return "Booting";
    case VmState::Running: return "Running";
    case VmState::Error: return "Error";
    case VmState::ShuttingDown: return "ShuttingDown";
    case VmState::Terminated: return "Terminated";
    }
    return "?";
}

CloudModel::CloudModel(Engine& engine, FlowNetwork& network, const Topology& topology,
                       EventLog& log, CloudModelConfig config)
    : engine_(engine), network_(network), topology_(topology), log_(log),
      config_(std::move(config)) {
    for (const auto& image : config_.images) {
        images_[image.image_id] = image;
    }
    for (const auto& site : config_.sites) {
        capacity_[site.site_id] = site.slot_capacity;
        occupancy_[site.site_id] = 0;
        for (const auto& img : site.cached_images) {
            cache_[site.site_id].insert(img);
        }
    }
}

const VmInstance& CloudModel::vm(std::uint64_t vm_id) const {
    auto it = vms_.find(vm_id);
    if (it == vms_.end()) throw SimError("unknown vm " + std::to_string(vm_id));
    return it->second;
}

const VmImageSpec& CloudModel::image(const std::string& image_id) const {
    auto it = images_.find(image_id);
    if (it == images_.end()) throw UnknownImageError("unknown image '" + image_id + "'");
    return it->second;
}

int CloudModel::slot_capacity(const std::string& site_id) const {
    auto it = capacity_.find(site_id);
    if (it == capacity_.end()) throw UnknownSiteError("unknown site '" + site_id + "'");
    return it->second;
}

std::map<std::string, int> CloudModel::slot_capacities() const {
    return capacity_;
}

int CloudModel::free_slots(const std::string& site_id) const {
    return slot_capacity(site_id) - occupancy_.at(site_id);
}

bool CloudModel::cache_lookup(const std::string& site_id, const std::string& image_id) const {
    if (!capacity_.count(site_id)) throw UnknownSiteError("unknown site '" + site_id + "'");
    auto it = cache_.find(site_id);
    return it != cache_.end() && it->second.count(image_id) > 0;
}

void CloudModel::transition(VmInstance& vm, VmState to, const std::string& cause) {
    log_.vm_transition(engine_.now(), vm.vm_id, vm.site_id, to_string(vm.state), to_string(to),
                       cause);
    vm.state = to;
    vm.state_entered_at = engine_.now();
    if (to == VmState::Terminated) {
        occupancy_[vm.site_id]--;
        --live_count_;
    }
}

std::uint64_t CloudModel::request_boot(const std::string& image_id, const std::string& site_id) {
    if (!capacity_.count(site_id)) {
        throw UnknownSiteError("unknown site '" + site_id + "'");
    }
    if (!images_.count(image_id)) {
        throw UnknownImageError("unknown image '" + image_id + "'");
    }
    const bool cached = cache_lookup(site_id, image_id);
    if (!cached) {
        if (!config_.repository || !config_.repository->hosted_images.count(image_id)) {
            throw UnknownImageError("image '" + image_id + "' not cached at '" + site_id +
                                    "' and not hosted by any repository");
        }
    }
    if (free_slots(site_id) <= 0) {
        throw NoFreeSlotError("no free slot at '" + site_id + "'");
    }

    VmInstance vm;
    vm.vm_id = next_vm_id_++;
    vm.image_id = image_id;
    vm.site_id = site_id;
    vm.requested_at = engine_.now();
    vm.state_entered_at = engine_.now();
    occupancy_[site_id]++;
    ++live_count_;

    const std::uint64_t id = vm.vm_id;
    if (cached) {
        vm.state = VmState::Booting;
        log_.vm_transition(engine_.now(), id, site_id, "none", "Booting", "boot-request-cached");
        vms_.emplace(id, std::move(vm));
        engine_.schedule(engine_.now() + config_.boot_delay_us, EventKind::VmBootComplete,
                         [this, id] { on_boot_complete(id); });
    } else {
        vm.state = VmState::Propagating;
        log_.vm_transition(engine_.now(), id, site_id, "none", "Propagating", "boot-request");
        auto [it, ok] = vms_.emplace(id, std::move(vm));
        start_propagation(it->second);
    }
    return id;
}

void CloudModel::start_propagation(VmInstance& vm) {
    const auto key = std::make_pair(vm.site_id, vm.image_id);
    if (config_.single_copy_cache) {
        auto it = inflight_.find(key);
        if (it != inflight_.end()) {
            // Join the transfer already in flight; one copy serves everyone.
            propagations_[it->second].vm_ids.push_back(vm.vm_id);
            vm.prop_flow = it->second;
            return;
        }
    }
    const VmImageSpec& image = images_.at(vm.image_id);
    const std::string label = "prop:vm-" + std::to_string(vm.vm_id);
    const std::uint64_t flow_id =
        network_.open_flow(label, topology_.propagation_path(vm.site_id), kUnboundedBps,
                           image.size_bytes,
                           [this](std::uint64_t fid) { on_propagation_complete(fid); });
    log_.flow_event(engine_.now(), "open", label + " dst=" + vm.site_id);
    propagations_[flow_id] = Propagation{flow_id, vm.site_id, vm.image_id, {vm.vm_id}};
    if (config_.single_copy_cache) {
        inflight_[key] = flow_id;
    }
    vm.prop_flow = flow_id;
}

void CloudModel::on_propagation_complete(std::uint64_t flow_id) {
    auto it = propagations_.find(flow_id);
    if (it == propagations_.end()) return;
    Propagation prop = std::move(it->second);
    propagations_.erase(it);
    inflight_.erase(std::make_pair(prop.site_id, prop.image_id));
    log_.flow_event(engine_.now(), "close", "prop dst=" + prop.site_id);

    if (config_.single_copy_cache) {
        cache_[prop.site_id].insert(prop.image_id);
    }
    std::sort(prop.vm_ids.begin(), prop.vm_ids.end());
    for (std::uint64_t vm_id : prop.vm_ids) {
        auto vit = vms_.find(vm_id);
        if (vit == vms_.end() || vit->second.state != VmState::Propagating) continue;
        vit->second.prop_flow = 0;
        to_booting(vit->second, "propagation-complete");
    }
}

void CloudModel::to_booting(VmInstance& vm, const std::string& cause) {
    transition(vm, VmState::Booting, cause);
    const std::uint64_t id = vm.vm_id;
    engine_.schedule(engine_.now() + config_.boot_delay_us, EventKind::VmBootComplete,
                     [this, id] { on_boot_complete(id); });
}

void CloudModel::on_boot_complete(std::uint64_t vm_id) {
    auto it = vms_.find(vm_id);
    if (it == vms_.end() || it->second.state != VmState::Booting) return;
    VmInstance& vm = it->second;
    if (boot_failure_) {
        if (auto cause = boot_failure_(vm.site_id)) {
            vm.error_cause = *cause;
            transition(vm, VmState::Error, *cause);
            return;
        }
    }
    transition(vm, VmState::Running, "boot-complete");
    vm.running_at = engine_.now();
    if (vm.shutdown_deferred && vm.bound_job.empty()) {
        vm.shutdown_deferred = false;
        begin_teardown(vm, "deferred-shutdown");
    }
}

void CloudModel::begin_teardown(VmInstance& vm, const std::string& cause) {
    transition(vm, VmState::ShuttingDown, cause);
    const std::uint64_t id = vm.vm_id;
    engine_.schedule(engine_.now() + config_.teardown_delay_us, EventKind::VmTeardownComplete,
                     [this, id] {
                         auto it = vms_.find(id);
                         if (it == vms_.end() || it->second.state != VmState::ShuttingDown) return;
                         transition(it->second, VmState::Terminated, "teardown-complete");
                     });
}

void CloudModel::shutdown_vm(std::uint64_t vm_id, const std::string& cause) {
    auto it = vms_.find(vm_id);
    if (it == vms_.end()) throw SimError("unknown vm " + std::to_string(vm_id));
    VmInstance& vm = it->second;
    switch (vm.state) {
    case VmState::Running:
        if (!vm.bound_job.empty()) {
            throw IllegalStateError("vm " + std::to_string(vm_id) + " is job-bound");
        }
        begin_teardown(vm, cause);
        return;
    case VmState::Error:
        transition(vm, VmState::Terminated, cause);
        return;
    case VmState::Propagating:
    case VmState::Booting:
        vm.shutdown_deferred = true;
        throw IllegalStateError("vm " + std::to_string(vm_id) +
                                " is still starting; shutdown deferred until Running");
    case VmState::ShuttingDown:
    case VmState::Terminated:
        throw IllegalStateError("vm " + std::to_string(vm_id) + " already shutting down");
    }
}

bool CloudModel::mark_error(std::uint64_t vm_id, const std::string& cause) {
    auto it = vms_.find(vm_id);
    if (it == vms_.end()) throw SimError("unknown vm " + std::to_string(vm_id));
    VmInstance& vm = it->second;
    if (vm.state == VmState::Terminated || vm.state == VmState::ShuttingDown ||
        vm.state == VmState::Error) {
        return false;
    }
    if (vm.state == VmState::Propagating) {
        detach_from_propagation(vm);
    }
    const std::string job = vm.bound_job;
    vm.bound_job.clear();
    vm.error_cause = cause;
    transition(vm, VmState::Error, cause);
    if (!job.empty() && on_vm_error_) {
        on_vm_error_(vm_id, job);
    }
    return true;
}

void CloudModel::detach_from_propagation(VmInstance& vm) {
    auto it = propagations_.find(vm.prop_flow);
    vm.prop_flow = 0;
    if (it == propagations_.end()) return;
    auto& ids = it->second.vm_ids;
    ids.erase(std::remove(ids.begin(), ids.end(), vm.vm_id), ids.end());
    if (ids.empty()) {
        network_.cancel_flow(it->second.flow_id);
        log_.flow_event(engine_.now(), "cancel", "prop dst=" + it->second.site_id);
        inflight_.erase(std::make_pair(it->second.site_id, it->second.image_id));
        propagations_.erase(it);
    }
}

void CloudModel::bind_job(std::uint64_t vm_id, const std::string& job_id) {
    auto it = vms_.find(vm_id);
    if (it == vms_.end()) throw SimError("unknown vm " + std::to_string(vm_id));
    if (it->second.state != VmState::Running || !it->second.bound_job.empty()) {
        throw IllegalStateError("vm " + std::to_string(vm_id) + " cannot take a job");
    }
    it->second.bound_job = job_id;
}

void CloudModel::release_job(std::uint64_t vm_id) {
    auto it = vms_.find(vm_id);
    if (it == vms_.end()) return;
    it->second.bound_job.clear();
}

} // namespace dcbsim
