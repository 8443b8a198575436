#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dcbsim/engine.hpp"
#include "dcbsim/flow_network.hpp"
#include "dcbsim/time.hpp"

namespace dcbsim {

struct MetricsFrame {
    std::int64_t t_us = 0;
    int vms_propagating = 0;
    int vms_booting = 0;
    int vms_running = 0;
    int vms_error = 0;
    int jobs_queued = 0;
    int jobs_running = 0;
    int jobs_completed = 0;
    std::vector<double> link_mbps; // one per declared link, declaration order
};

// Samples VM-state counts (as the scheduler sees them), job counts, and
// per-link traffic averaged over the sample interval. A suppressed sample
// (monitor gap) leaves a hole in the rows but still advances the traffic
// baseline, so the first row after a gap covers one interval only.
class MetricsRecorder {
public:
    struct Sources {
        // propagating, booting, running, error - from the scheduler's view
        std::function<std::array<int, 4>()> vm_counts;
        // queued, running, completed
        std::function<std::array<int, 3>()> job_counts;
        std::function<bool(SimTime)> suppressed; // monitor gap predicate
    };

    MetricsRecorder(Engine& engine, FlowNetwork& network, std::int64_t interval_us,
                    std::vector<std::string> link_ids, Sources sources);

    // Schedules the first sample at t = interval.
    void start();

    const std::vector<MetricsFrame>& frames() const { return frames_; }
    const std::vector<std::string>& link_ids() const { return link_ids_; }

    // Header + one row per frame; every value printed with three fractional
    // digits, LF newlines.
    std::string to_csv() const;

private:
    void sample();

    Engine& engine_;
    FlowNetwork& network_;
    std::int64_t interval_us_;
    std::vector<std::string> link_ids_;
    Sources sources_;
    std::vector<int128> last_link_pb_;
    std::vector<MetricsFrame> frames_;
};

} // namespace dcbsim
