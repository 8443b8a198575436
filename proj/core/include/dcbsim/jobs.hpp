#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dcbsim/cloud.hpp"
#include "dcbsim/engine.hpp"
#include "dcbsim/event_log.hpp"
#include "dcbsim/flow_network.hpp"
#include "dcbsim/topology.hpp"

namespace dcbsim {

enum class JobState { Queued, Running, Completed, Requeued };

const char* to_string(JobState state);

struct SampleSpec {
    std::string sample_id;
    std::uint64_t event_size_bytes = 0;
    std::uint64_t total_size_bytes = 0;
    std::uint64_t events_per_job = 0;
    double cpu_events_per_s = 0.0;
};

struct JobConfig {
    std::string job_id;
    std::string required_image;
    std::string sample;
    std::uint64_t events_total = 0; // 0 = use the sample's events_per_job
    SimTime submit_at;
    double output_fraction = 0.02;
};

struct Job {
    std::string job_id;
    std::string required_image;
    std::string sample;
    std::uint64_t events_total = 0;
    std::uint64_t events_done = 0;
    JobState state = JobState::Queued;
    SimTime submit_at;
    double output_fraction = 0.02;
    std::uint64_t submit_seq = 0;
    std::uint64_t vm_id = 0;
    std::uint64_t stream_flow = 0;
    std::uint64_t output_flow = 0;
    std::uint64_t calib_flow = 0;
    std::uint32_t attempts = 0;
    SimTime completed_at;
    int128 streamed_pb = 0;            // across all attempts
    int128 progress_delivered_pb = 0;  // incremental accounting (progress())
};

struct JobSystemConfig {
    std::vector<SampleSpec> samples;
    std::map<std::string, std::string> sample_site; // sample -> storage site
    std::string user_site;                          // output destination ("" = no output stage)
    bool calibration_enabled = false;
    std::uint64_t calibration_fetch_bytes = 0;
    std::string calibration_site;
};

// Condor-style queue: jobs wait per required image, FIFO by submit time, and
// run as a storage->site streaming flow whose demand is the CPU-equivalent
// rate (event size * events/s). Event throughput is therefore
// min(cpu rate, delivered bandwidth / event size) by construction.
class JobSystem {
public:
    JobSystem(Engine& engine, FlowNetwork& network, CloudModel& cloud, const Topology& topology,
              EventLog& log, JobSystemConfig config);

    // Registers the vm-error hook that requeues bound jobs.
    void attach_to_cloud();

    // Validates and enqueues; the job becomes visible at submit_at.
    // Throws UnknownImage / UnknownSample / DuplicateId.
    void submit(const JobConfig& config);

    struct Binding {
        std::string job_id;
        std::uint64_t vm_id;
    };

    // Pairs queued jobs with idle Running VMs of the matching image, oldest
    // job first, lowest vm id first. Called from the scheduler tick.
    std::vector<Binding> match_and_dispatch();

    // Incremental accrual surface: events_done advances by
    // min(cpu_events_per_s, achieved_bps / (8 * event_size)) * dt, capped at
    // events_total. Returns events processed by this call.
    std::uint64_t progress(const std::string& job_id, std::int64_t dt_us,
                           std::int64_t achieved_bps);

    // Bound VM died: discard all progress and put the job back, ahead of
    // never-run jobs with the same submit time.
    void requeue_on_failure(const std::string& job_id);

    // Queries.
    const Job& job(const std::string& job_id) const;
    const std::map<std::string, Job>& jobs() const { return jobs_; }
    const SampleSpec& sample(const std::string& sample_id) const;
    std::map<std::string, int> queued_by_image() const; // Queued + Requeued, visible only
    int queued_count() const;
    int running_count() const { return running_count_; }
    int completed_count() const { return completed_count_; }
    std::size_t total_jobs() const { return jobs_.size(); }
    bool all_completed() const { return completed_count_ == static_cast<int>(jobs_.size()); }

    // CPU-equivalent streaming demand for a sample, in bits/s.
    std::int64_t demand_bps_for(const std::string& sample_id) const;

private:
    struct QueueKey {
        std::int64_t submit_at_us;
        int fresh; // requeued jobs (0) sort ahead of fresh ones (1)
        std::uint64_t submit_seq;
        auto operator<=>(const QueueKey&) const = default;
    };

    void insert_into_queue(const std::string& job_id);
    void dispatch(Job& job, std::uint64_t vm_id);
    void open_stream(Job& job);
    void on_stream_complete(const std::string& job_id);
    void on_output_complete(const std::string& job_id);
    void complete(Job& job);
    void close_flows(Job& job);

    Engine& engine_;
    FlowNetwork& network_;
    CloudModel& cloud_;
    const Topology& topology_;
    EventLog& log_;
    JobSystemConfig config_;

    std::map<std::string, SampleSpec> samples_;
    std::map<std::string, Job> jobs_;
    std::map<std::string, std::map<QueueKey, std::string>> queues_; // image -> ordered jobs
    std::uint64_t next_submit_seq_ = 1;
    int running_count_ = 0;
    int completed_count_ = 0;
};

} // namespace dcbsim
