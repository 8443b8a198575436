#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "dcbsim/cloud.hpp"
#include "dcbsim/engine.hpp"
#include "dcbsim/event_log.hpp"
#include "dcbsim/rng.hpp"
#include "dcbsim/time.hpp"

namespace dcbsim {

enum class FaultKind { BootError, PeriodicKill, CommBlackout, MonitorGap };

const char* to_string(FaultKind kind);

struct FaultSpec {
    FaultKind kind = FaultKind::BootError;
    std::string site_id;        // unused for MonitorGap
    double probability = 0.0;   // BootError
    std::int64_t period_us = 0; // PeriodicKill
    std::int64_t first_at_us = 0;
    std::int64_t window_start_us = 0; // CommBlackout / MonitorGap
    std::int64_t window_end_us = 0;
    std::string seed_stream;    // each spec draws from its own named stream
    std::string cause = "";     // error cause tag; defaults per kind
};

// Seeded fault processes:
//   BootError    - each boot at the site independently fails at Booting
//                  completion with probability p.
//   PeriodicKill - every period the lowest-id Running VM at the site is
//                  marked Error (cause external-destroy).
//   CommBlackout - the scheduler sees every VM at the site as Error during
//                  the window; commands to the site are undeliverable.
//                  Ground truth is untouched.
//   MonitorGap   - metrics rows inside the window are suppressed; pure
//                  observation fault.
class FaultInjector {
public:
    FaultInjector(Engine& engine, std::uint64_t root_seed);

    void attach(CloudModel* cloud, EventLog* log);

    // Throws UnknownSite / BadParams.
    std::uint64_t arm(const FaultSpec& spec);

    // Throws UnknownHandle. In-flight effects unwind naturally.
    void disarm(std::uint64_t handle);

    // Hook surfaces consumed by the other modules.
    std::optional<std::string> boot_failure(const std::string& site_id);
    bool reachable(const std::string& site_id) const;
    bool metrics_suppressed(SimTime t) const;

    std::size_t armed_count() const { return armed_.size(); }

private:
    struct Armed {
        FaultSpec spec;
        RngStream rng;
        bool active = true;
        Engine::Handle pending{};
    };

    void schedule_kill(std::uint64_t handle, SimTime at);
    void fire_kill(std::uint64_t handle);

    Engine& engine_;
    std::uint64_t root_seed_;
    CloudModel* cloud_ = nullptr;
    EventLog* log_ = nullptr;
    std::map<std::uint64_t, Armed> armed_;
    std::uint64_t next_handle_ = 1;
};

} // namespace dcbsim
