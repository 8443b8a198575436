#include "dcbsim/faults.hpp"

#include "dcbsim/errors.hpp"

namespace dcbsim {

const char* to_string(FaultKind kind) {
    switch (kind) {
    case FaultKind::BootError: return "boot-error";
    case FaultKind::PeriodicKill: return "periodic-kill";
    case FaultKind::CommBlackout: return "comm-blackout";
    case FaultKind::MonitorGap: return "monitor-gap";
    }
    return "?";
}

FaultInjector::FaultInjector(Engine& engine, std::uint64_t root_seed)
    : engine_(engine), root_seed_(root_seed) {}

void FaultInjector::attach(CloudModel* cloud, EventLog* log) {
    cloud_ = cloud;
    log_ = log;
    if (cloud_) {
        cloud_->set_boot_failure_hook(
            [this](const std::string& site) { return boot_failure(site); });
    }
}

std::uint64_t FaultInjector::arm(const FaultSpec& spec) {
    if (spec.kind != FaultKind::MonitorGap) {
        if (!cloud_ || !cloud_->slot_capacities().count(spec.site_id)) {
            throw UnknownSiteError("fault targets unknown site '" + spec.site_id + "'");
        }
    }
    switch (spec.kind) {
    case FaultKind::BootError:
        if (spec.probability < 0.0 || spec.probability > 1.0) {
            throw BadParamsError("boot-error probability must be in [0,1]");
        }
        break;
    case FaultKind::PeriodicKill:
        if (spec.period_us <= 0) throw BadParamsError("periodic-kill period must be positive");
        break;
    case FaultKind::CommBlackout:
    case FaultKind::MonitorGap:
        if (spec.window_end_us < spec.window_start_us) {
            throw BadParamsError("fault window must be well-ordered");
        }
        break;
    }

    const std::uint64_t handle = next_handle_++;
    Armed armed{spec, RngStream(root_seed_, spec.seed_stream), true, {}};
    armed_.emplace(handle, std::move(armed));

    if (spec.kind == FaultKind::PeriodicKill) {
        const std::int64_t first =
            spec.first_at_us > 0 ? spec.first_at_us : spec.period_us;
        schedule_kill(handle, SimTime::from_us(std::max(first, engine_.now().us())));
    }
    return handle;
}

void FaultInjector::disarm(std::uint64_t handle) {
    auto it = armed_.find(handle);
    if (it == armed_.end() || !it->second.active) {
        throw UnknownHandleError("unknown fault handle " + std::to_string(handle));
    }
    it->second.active = false;
    if (it->second.pending.valid()) {
        engine_.cancel(it->second.pending);
        it->second.pending = Engine::Handle{};
    }
}

void FaultInjector::schedule_kill(std::uint64_t handle, SimTime at) {
    auto it = armed_.find(handle);
    if (it == armed_.end() || !it->second.active) return;
    it->second.pending = engine_.schedule(at, EventKind::FaultTrigger,
                                          [this, handle] { fire_kill(handle); });
}

void FaultInjector::fire_kill(std::uint64_t handle) {
    auto it = armed_.find(handle);
    if (it == armed_.end() || !it->second.active) return;
    Armed& armed = it->second;

    // Deterministic victim: lowest-id Running VM at the target site.
    std::uint64_t victim = 0;
    for (const auto& [vm_id, vm] : cloud_->vms()) {
        if (vm.site_id == armed.spec.site_id && vm.state == VmState::Running) {
            victim = vm_id;
            break;
        }
    }
    if (victim != 0) {
        const std::string cause =
            armed.spec.cause.empty() ? "external-destroy" : armed.spec.cause;
        if (log_) {
            log_->fault_event(engine_.now(), "periodic-kill",
                              "site=" + armed.spec.site_id + " vm=vm-" + std::to_string(victim));
        }
        cloud_->mark_error(victim, cause);
    }
    schedule_kill(handle, engine_.now() + armed.spec.period_us);
}

std::optional<std::string> FaultInjector::boot_failure(const std::string& site_id) {
    // Every matching fault draws exactly once per boot, whatever the other
    // faults rolled, so streams stay isolated even when targets overlap.
    std::optional<std::string> cause;
    for (auto& [handle, armed] : armed_) {
        if (!armed.active || armed.spec.kind != FaultKind::BootError) continue;
        if (armed.spec.site_id != site_id) continue;
        const bool failed = armed.rng.bernoulli(armed.spec.probability);
        if (failed && !cause) {
            cause = armed.spec.cause.empty() ? "nimbus-boot-bug" : armed.spec.cause;
        }
    }
    if (cause && log_) {
        log_->fault_event(engine_.now(), "boot-error", "site=" + site_id);
    }
    return cause;
}

bool FaultInjector::reachable(const std::string& site_id) const {
    const std::int64_t now = engine_.now().us();
    for (const auto& [handle, armed] : armed_) {
        if (!armed.active || armed.spec.kind != FaultKind::CommBlackout) continue;
        if (armed.spec.site_id != site_id) continue;
        if (now >= armed.spec.window_start_us && now < armed.spec.window_end_us) {
            return false;
        }
    }
    return true;
}

bool FaultInjector::metrics_suppressed(SimTime t) const {
    for (const auto& [handle, armed] : armed_) {
        if (!armed.active || armed.spec.kind != FaultKind::MonitorGap) continue;
        if (t.us() >= armed.spec.window_start_us && t.us() < armed.spec.window_end_us) {
            return true;
        }
    }
    return false;
}

} // namespace dcbsim
