#include "dcbsim/metrics.hpp"

#include <array>
#include <cstdio>

namespace dcbsim {

MetricsRecorder::MetricsRecorder(Engine& engine, FlowNetwork& network, std::int64_t interval_us,
                                 std::vector<std::string> link_ids, Sources sources)
    : engine_(engine), network_(network), interval_us_(interval_us),
      link_ids_(std::move(link_ids)), sources_(std::move(sources)) {
    last_link_pb_.assign(link_ids_.size(), 0);
}

void MetricsRecorder::start() {
    engine_.schedule(engine_.now() + interval_us_, EventKind::MetricsSample,
                     [this] { sample(); });
}

void MetricsRecorder::sample() {
    const SimTime now = engine_.now();
    network_.advance_to(now); // settle traffic counters to the sample instant

    std::vector<double> mbps(link_ids_.size(), 0.0);
    for (std::size_t i = 0; i < link_ids_.size(); ++i) {
        const int128 total = network_.link_moved_pb(link_ids_[i]);
        const int128 delta = total - last_link_pb_[i];
        last_link_pb_[i] = total;
        // pb over us: mbit/s = pb / (us * 1e12)
        mbps[i] = static_cast<double>(static_cast<long double>(delta) /
                                      (static_cast<long double>(interval_us_) * 1e12L));
    }

    if (!sources_.suppressed || !sources_.suppressed(now)) {
        MetricsFrame frame;
        frame.t_us = now.us();
        const auto vm = sources_.vm_counts();
        frame.vms_propagating = vm[0];
        frame.vms_booting = vm[1];
        frame.vms_running = vm[2];
        frame.vms_error = vm[3];
        const auto jobs = sources_.job_counts();
        frame.jobs_queued = jobs[0];
        frame.jobs_running = jobs[1];
        frame.jobs_completed = jobs[2];
        frame.link_mbps = std::move(mbps);
        frames_.push_back(std::move(frame));
    }

    engine_.schedule(now + interval_us_, EventKind::MetricsSample, [this] { sample(); });
}

std::string MetricsRecorder::to_csv() const {
    std::string out = "t_seconds,vms_propagating,vms_booting,vms_running,vms_error,"
                      "jobs_queued,jobs_running,jobs_completed";
    for (const auto& id : link_ids_) {
        out += ",link_" + id + "_mbps";
    }
    out += '\n';

    char buf[64];
    auto put = [&out, &buf](double v, bool lead_comma) {
        std::snprintf(buf, sizeof(buf), "%s%.3f", lead_comma ? "," : "", v);
        out += buf;
    };
    for (const auto& f : frames_) {
        put(static_cast<double>(f.t_us) / 1e6, false);
        put(f.vms_propagating, true);
        put(f.vms_booting, true);
        put(f.vms_running, true);
        put(f.vms_error, true);
        put(f.jobs_queued, true);
        put(f.jobs_running, true);
        put(f.jobs_completed, true);
        for (double v : f.link_mbps) put(v, true);
        out += '\n';
    }
    return out;
}

} // namespace dcbsim
