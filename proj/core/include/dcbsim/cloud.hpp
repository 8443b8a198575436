#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dcbsim/engine.hpp"
#include "dcbsim/event_log.hpp"
#include "dcbsim/flow_network.hpp"
#include "dcbsim/time.hpp"
#include "dcbsim/topology.hpp"

namespace dcbsim {

enum class VmState { Propagating, Booting, Running, Error, ShuttingDown, Terminated };

const char* to_string(VmState state);

struct VmImageSpec {
    std::string image_id;
    std::uint64_t size_bytes = 16'000'000'000ULL;
    int ram_mb = 1024;
    std::string software_tag;
};

struct VmInstance {
    std::uint64_t vm_id = 0;
    std::string image_id;
    std::string site_id;
    VmState state = VmState::Propagating;
    SimTime state_entered_at;
    SimTime requested_at;
    SimTime running_at;
    std::string bound_job;    // non-empty only while Running
    std::string error_cause;
    bool shutdown_deferred = false;
    std::uint64_t prop_flow = 0;
};

struct CloudModelConfig {
    struct Site {
        std::string site_id;
        int slot_capacity = 0;
        std::string flavor = "nimbus-like"; // nimbus-like | ec2-like
        std::vector<std::string> cached_images;
    };
    struct Repository {
        std::string site_id;
        std::set<std::string> hosted_images;
    };

    std::vector<Site> sites;
    std::vector<VmImageSpec> images;
    std::optional<Repository> repository;
    std::int64_t boot_delay_us = 120 * kUsPerSecond;
    std::int64_t teardown_delay_us = 30 * kUsPerSecond;
    bool single_copy_cache = false;
};

// IaaS sites, the image repository and caches, and the VM lifecycle:
//   Propagating -> {Booting, Error}
//   Booting     -> {Running, Error}
//   Running     -> {ShuttingDown, Error}
//   Error       -> Terminated
//   ShuttingDown-> Terminated
// A slot is held from boot request until Terminated.
class CloudModel {
public:
    CloudModel(Engine& engine, FlowNetwork& network, const Topology& topology, EventLog& log,
               CloudModelConfig config);

    // Creates a VM in Propagating (opens a repository flow) or directly in
    // Booting when the image is already cached at the site.
    // Throws NoFreeSlot / UnknownImage / UnknownSite.
    std::uint64_t request_boot(const std::string& image_id, const std::string& site_id);

    // Running+unbound -> ShuttingDown -> Terminated; Error -> Terminated now.
    // Propagating/Booting: records a deferred shutdown, then throws
    // IllegalState so the caller knows it did not take effect yet.
    void shutdown_vm(std::uint64_t vm_id, const std::string& cause = "shutdown");

    // Any live state -> Error; a bound job is handed back through the error
    // hook. Returns false (no-op) for ShuttingDown/Terminated VMs.
    bool mark_error(std::uint64_t vm_id, const std::string& cause);

    bool cache_lookup(const std::string& site_id, const std::string& image_id) const;

    // Job binding surface used by the job system.
    void bind_job(std::uint64_t vm_id, const std::string& job_id);
    void release_job(std::uint64_t vm_id);

    // Wiring.
    using BootFailureHook = std::function<std::optional<std::string>(const std::string& site)>;
    using VmErrorHook = std::function<void(std::uint64_t vm_id, const std::string& job_id)>;
    void set_boot_failure_hook(BootFailureHook hook) { boot_failure_ = std::move(hook); }
    void set_on_vm_error(VmErrorHook hook) { on_vm_error_ = std::move(hook); }

    // Queries.
    const std::map<std::uint64_t, VmInstance>& vms() const { return vms_; }
    const VmInstance& vm(std::uint64_t vm_id) const;
    int free_slots(const std::string& site_id) const;
    int slot_capacity(const std::string& site_id) const;
    std::map<std::string, int> slot_capacities() const;
    const std::vector<CloudModelConfig::Site>& sites() const { return config_.sites; }
    bool has_image(const std::string& image_id) const { return images_.count(image_id) > 0; }
    const VmImageSpec& image(const std::string& image_id) const;
    bool all_terminated() const { return live_count_ == 0; }
    std::uint64_t vm_count() const { return vms_.size(); }
    bool single_copy_cache() const { return config_.single_copy_cache; }

private:
    struct Propagation {
        std::uint64_t flow_id = 0;
        std::string site_id;
        std::string image_id;
        std::vector<std::uint64_t> vm_ids;
    };

    void transition(VmInstance& vm, VmState to, const std::string& cause);
    void start_propagation(VmInstance& vm);
    void on_propagation_complete(std::uint64_t flow_id);
    void to_booting(VmInstance& vm, const std::string& cause);
    void on_boot_complete(std::uint64_t vm_id);
    void begin_teardown(VmInstance& vm, const std::string& cause);
    void detach_from_propagation(VmInstance& vm);

    Engine& engine_;
    FlowNetwork& network_;
    const Topology& topology_;
    EventLog& log_;
    CloudModelConfig config_;

    std::map<std::string, VmImageSpec> images_;
    std::map<std::string, int> capacity_;
    std::map<std::string, int> occupancy_; // VMs not yet Terminated, per site
    std::map<std::string, std::set<std::string>> cache_;
    std::map<std::uint64_t, VmInstance> vms_;
    std::map<std::uint64_t, Propagation> propagations_;            // by flow id
    std::map<std::pair<std::string, std::string>, std::uint64_t> inflight_; // (site,image)->flow
    std::uint64_t next_vm_id_ = 1;
    std::uint64_t live_count_ = 0;

    BootFailureHook boot_failure_;
    VmErrorHook on_vm_error_;
};

} // namespace dcbsim
