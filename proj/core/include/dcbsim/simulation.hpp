#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dcbsim/cloud.hpp"
#include "dcbsim/engine.hpp"
#include "dcbsim/event_log.hpp"
#include "dcbsim/faults.hpp"
#include "dcbsim/flow_network.hpp"
#include "dcbsim/jobs.hpp"
#include "dcbsim/metrics.hpp"
#include "dcbsim/scenario.hpp"
#include "dcbsim/scheduler.hpp"
#include "dcbsim/topology.hpp"

namespace dcbsim {

struct RunResult {
    int jobs_completed = 0;
    int jobs_total = 0;
    SimTime ended_at;
    double horizon_s = 0.0;
    bool horizon_reached = false;
    double wall_seconds = 0.0;
    std::uint64_t events_fired = 0;
    bool all_completed() const { return jobs_completed == jobs_total; }
};

// Wires a scenario into a runnable system: one engine, one flow network,
// cloud + jobs + scheduler + faults, and the metrics recorder. The run ends
// at the horizon or as soon as every job is Completed and every VM has
// reached Terminated, whichever comes first.
class Simulation {
public:
    explicit Simulation(const ScenarioConfig& config); // throws ValidationError

    // Runs to the scenario horizon, optionally truncated to `until`.
    RunResult run(std::optional<SimTime> until = std::nullopt);

    // Writes metrics.csv, events.log and summary.txt. Throws IoError.
    void write_outputs(const std::string& out_dir) const;
    std::string summary_text() const;

    const ScenarioConfig& config() const { return config_; }
    const std::vector<MetricsFrame>& frames() const { return recorder_->frames(); }
    const std::vector<std::string>& link_ids() const { return recorder_->link_ids(); }
    std::string metrics_csv() const { return recorder_->to_csv(); }
    const EventLog& event_log() const { return log_; }
    const CloudModel& cloud() const { return *cloud_; }
    const JobSystem& jobs() const { return *jobs_; }
    const FlowNetwork& network() const { return network_; }
    const Topology& topology() const { return topology_; }
    SimTime now() const { return engine_.now(); }

private:
    void on_tick();
    void deliver(const SchedulerAction& action);
    std::array<int, 4> viewed_vm_counts() const;

    ScenarioConfig config_;
    RunResult result_;

    Engine engine_;
    EventLog log_;
    FlowNetwork network_;
    Topology topology_;
    std::unique_ptr<CloudModel> cloud_;
    std::unique_ptr<JobSystem> jobs_;
    std::unique_ptr<CloudScheduler> scheduler_;
    std::unique_ptr<FaultInjector> faults_;
    std::unique_ptr<MetricsRecorder> recorder_;
    SchedulerView last_view_;
    SimTime horizon_;
};

} // namespace dcbsim
