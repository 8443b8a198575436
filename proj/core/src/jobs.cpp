#include "dcbsim/jobs.hpp"

#include <cmath>

#include "dcbsim/errors.hpp"

namespace dcbsim {

const char* to_string(JobState state) {
    switch (state) {
    case JobState::Queued: return "Queued";
    case JobState::Running: return "Running";
    case JobState::Completed: return "Completed";
    case JobState::Requeued: return "Requeued";
    }
    return "?";
}

JobSystem::JobSystem(Engine& engine, FlowNetwork& network, CloudModel& cloud,
                     const Topology& topology, EventLog& log, JobSystemConfig config)
    : engine_(engine), network_(network), cloud_(cloud), topology_(topology), log_(log),
      config_(std::move(config)) {
    for (const auto& sample : config_.samples) {
        samples_[sample.sample_id] = sample;
    }
}

void JobSystem::attach_to_cloud() {
    cloud_.set_on_vm_error([this](std::uint64_t, const std::string& job_id) {
        requeue_on_failure(job_id);
    });
}

const SampleSpec& JobSystem::sample(const std::string& sample_id) const {
    auto it = samples_.find(sample_id);
    if (it == samples_.end()) throw UnknownSampleError("unknown sample '" + sample_id + "'");
    return it->second;
}

const Job& JobSystem::job(const std::string& job_id) const {
    auto it = jobs_.find(job_id);
    if (it == jobs_.end()) throw SimError("unknown job '" + job_id + "'");
    return it->second;
}

std::int64_t JobSystem::demand_bps_for(const std::string& sample_id) const {
    const SampleSpec& s = sample(sample_id);
    return static_cast<std::int64_t>(
        std::llround(static_cast<double>(s.event_size_bytes) * s.cpu_events_per_s * 8.0));
}

void JobSystem::submit(const JobConfig& config) {
    if (jobs_.count(config.job_id)) {
        throw DuplicateIdError("duplicate job id '" + config.job_id + "'");
    }
    if (!cloud_.has_image(config.required_image)) {
        throw UnknownImageError("job '" + config.job_id + "' references unknown image '" +
                                config.required_image + "'");
    }
    const SampleSpec& s = sample(config.sample); // throws UnknownSample
    if (!config_.sample_site.count(config.sample)) {
        throw UnknownSampleError("sample '" + config.sample + "' is hosted by no storage site");
    }

    Job job;
    job.job_id = config.job_id;
    job.required_image = config.required_image;
    job.sample = config.sample;
    job.events_total = config.events_total ? config.events_total : s.events_per_job;
    job.submit_at = config.submit_at;
    job.output_fraction = config.output_fraction;
    job.submit_seq = next_submit_seq_++;
    jobs_.emplace(job.job_id, std::move(job));

    const std::string id = config.job_id;
    if (config.submit_at <= engine_.now()) {
        insert_into_queue(id);
    } else {
        engine_.schedule(config.submit_at, EventKind::JobSubmitted,
                         [this, id] { insert_into_queue(id); });
    }
}

void JobSystem::insert_into_queue(const std::string& job_id) {
    Job& job = jobs_.at(job_id);
    const QueueKey key{job.submit_at.us(), job.state == JobState::Requeued ? 0 : 1,
                       job.submit_seq};
    queues_[job.required_image].emplace(key, job_id);
    if (job.attempts == 0) {
        log_.job_transition(engine_.now(), job_id, "none", "Queued", 0);
    }
}

std::map<std::string, int> JobSystem::queued_by_image() const {
    std::map<std::string, int> out;
    for (const auto& [image, queue] : queues_) {
        if (!queue.empty()) out[image] = static_cast<int>(queue.size());
    }
    return out;
}

int JobSystem::queued_count() const {
    int n = 0;
    for (const auto& [image, queue] : queues_) n += static_cast<int>(queue.size());
    return n;
}

std::vector<JobSystem::Binding> JobSystem::match_and_dispatch() {
    std::vector<Binding> bindings;
    for (auto& [image, queue] : queues_) {
        if (queue.empty()) continue;
        // Idle Running VMs booted from this image, lowest id first.
        std::vector<std::uint64_t> idle;
        for (const auto& [vm_id, vm] : cloud_.vms()) {
            if (vm.state == VmState::Running && vm.bound_job.empty() && vm.image_id == image) {
                idle.push_back(vm_id);
            }
        }
        std::size_t next_vm = 0;
        while (!queue.empty() && next_vm < idle.size()) {
            auto front = queue.begin();
            const std::string job_id = front->second;
            queue.erase(front);
            Job& job = jobs_.at(job_id);
            dispatch(job, idle[next_vm]);
            bindings.push_back(Binding{job_id, idle[next_vm]});
            ++next_vm;
        }
    }
    return bindings;
}

void JobSystem::dispatch(Job& job, std::uint64_t vm_id) {
    cloud_.bind_job(vm_id, job.job_id);
    log_.job_transition(engine_.now(), job.job_id, to_string(job.state), "Running", vm_id);
    job.state = JobState::Running;
    job.vm_id = vm_id;
    job.attempts++;
    ++running_count_;

    if (config_.calibration_enabled && config_.calibration_fetch_bytes > 0 &&
        !config_.calibration_site.empty()) {
        const std::string id = job.job_id;
        const std::string& site = cloud_.vm(vm_id).site_id;
        job.calib_flow = network_.open_flow(
            "calib:" + job.job_id, topology_.transfer_path(config_.calibration_site, site),
            kUnboundedBps, config_.calibration_fetch_bytes, [this, id](std::uint64_t) {
                Job& j = jobs_.at(id);
                j.calib_flow = 0;
                if (j.state == JobState::Running) open_stream(j);
            });
        return;
    }
    open_stream(job);
}

void JobSystem::open_stream(Job& job) {
    const SampleSpec& s = samples_.at(job.sample);
    const std::string& storage_site = config_.sample_site.at(job.sample);
    const std::string& vm_site = cloud_.vm(job.vm_id).site_id;
    const std::uint64_t volume = job.events_total * s.event_size_bytes;
    const std::string id = job.job_id;
    job.stream_flow = network_.open_flow(
        "stream:" + job.job_id, topology_.transfer_path(storage_site, vm_site),
        demand_bps_for(job.sample), volume,
        [this, id](std::uint64_t) { on_stream_complete(id); });
    log_.flow_event(engine_.now(), "open", "stream:" + job.job_id + " dst=" + vm_site);
}

void JobSystem::on_stream_complete(const std::string& job_id) {
    Job& job = jobs_.at(job_id);
    if (job.state != JobState::Running) return;
    const FlowNetwork::FlowStats* st = network_.stats(job.stream_flow);
    if (st) job.streamed_pb += st->moved_pb;
    job.stream_flow = 0;
    job.events_done = job.events_total;
    log_.flow_event(engine_.now(), "close", "stream:" + job_id);

    const auto out_bytes = static_cast<std::uint64_t>(std::llround(
        job.output_fraction * static_cast<double>(job.events_total) *
        static_cast<double>(samples_.at(job.sample).event_size_bytes)));
    if (config_.user_site.empty() || out_bytes == 0) {
        complete(job);
        return;
    }
    const std::string& vm_site = cloud_.vm(job.vm_id).site_id;
    job.output_flow = network_.open_flow(
        "output:" + job_id, topology_.transfer_path(vm_site, config_.user_site), kUnboundedBps,
        out_bytes, [this, job_id](std::uint64_t) { on_output_complete(job_id); });
}

void JobSystem::on_output_complete(const std::string& job_id) {
    Job& job = jobs_.at(job_id);
    if (job.state != JobState::Running) return;
    job.output_flow = 0;
    complete(job);
}

void JobSystem::complete(Job& job) {
    log_.job_transition(engine_.now(), job.job_id, "Running", "Completed", job.vm_id);
    job.state = JobState::Completed;
    job.completed_at = engine_.now();
    --running_count_;
    ++completed_count_;
    cloud_.release_job(job.vm_id);
    job.vm_id = 0;
}

void JobSystem::close_flows(Job& job) {
    if (job.stream_flow != 0) {
        // cancel_flow settles movement up to now; the archive keeps the total.
        network_.cancel_flow(job.stream_flow);
        if (const FlowNetwork::FlowStats* st = network_.stats(job.stream_flow)) {
            job.streamed_pb += st->moved_pb;
        }
        job.stream_flow = 0;
    }
    if (job.calib_flow != 0) {
        network_.cancel_flow(job.calib_flow);
        job.calib_flow = 0;
    }
    if (job.output_flow != 0) {
        network_.cancel_flow(job.output_flow);
        job.output_flow = 0;
    }
}

void JobSystem::requeue_on_failure(const std::string& job_id) {
    Job& job = jobs_.at(job_id);
    if (job.state != JobState::Running) return;
    close_flows(job);
    log_.job_transition(engine_.now(), job.job_id, "Running", "Requeued", job.vm_id);
    job.state = JobState::Requeued;
    job.vm_id = 0;
    job.events_done = 0; // completed work is discarded, the job restarts from zero
    job.progress_delivered_pb = 0;
    --running_count_;
    insert_into_queue(job_id);
}

std::uint64_t JobSystem::progress(const std::string& job_id, std::int64_t dt_us,
                                  std::int64_t achieved_bps) {
    Job& job = jobs_.at(job_id);
    const SampleSpec& s = samples_.at(job.sample);
    const std::int64_t demand_bps = demand_bps_for(job.sample);
    const std::int64_t effective_bps = std::min(achieved_bps, demand_bps);
    const std::uint64_t before = job.events_done;

    const int128 pb_per_event = static_cast<int128>(s.event_size_bytes) * 8 * kPbPerBit;
    job.progress_delivered_pb +=
        static_cast<int128>(effective_bps) * kUbpsPerBps * dt_us;
    std::uint64_t done = static_cast<std::uint64_t>(job.progress_delivered_pb / pb_per_event);
    if (done > job.events_total) done = job.events_total;
    job.events_done = done;
    return job.events_done - before;
}

} // namespace dcbsim
