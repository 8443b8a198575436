#include "dcbsim/simulation.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dcbsim/errors.hpp"

namespace dcbsim {

namespace {

std::int64_t mbps_to_bps(double mbps) {
    return static_cast<std::int64_t>(std::llround(mbps * 1e6));
}

SchedulerPolicy to_policy(const SchedulerConfig& sc) {
    SchedulerPolicy policy;
    policy.tick_interval_us = seconds_to_us(sc.tick_interval_s);
    policy.placement = sc.placement == "first-fit" ? SchedulerPolicy::Placement::FirstFit
                                                   : SchedulerPolicy::Placement::RoundRobin;
    policy.max_boots_per_tick = sc.max_boots_per_tick;
    return policy;
}

} // namespace

Simulation::Simulation(const ScenarioConfig& config)
    : config_(config), network_(engine_), horizon_(SimTime::from_seconds(config.horizon_s)) {
    auto issues = validate_scenario(config_);
    if (!issues.empty()) {
        throw ValidationError(std::move(issues));
    }

    // Links in declaration order: per site uplink then downlink, plus the
    // repository server cap directly after its site's pair.
    for (const auto& site : config_.sites) {
        const std::string up = site.site_id + "_up";
        const std::string down = site.site_id + "_down";
        network_.add_link(LinkSpec{up, mbps_to_bps(site.uplink_mbps)});
        network_.add_link(LinkSpec{down, mbps_to_bps(site.downlink_mbps)});
        topology_.add_site(site.site_id, up, down);
        if (site.repository) {
            const std::string server = site.site_id + "_repo";
            network_.add_link(LinkSpec{server, mbps_to_bps(site.repository->server_throughput_mbps)});
            topology_.set_repository(site.site_id, server);
        }
    }

    CloudModelConfig cloud_config;
    for (const auto& site : config_.sites) {
        cloud_config.sites.push_back(CloudModelConfig::Site{site.site_id, site.slots, site.flavor,
                                                            site.cached_images});
        if (site.repository) {
            CloudModelConfig::Repository repo;
            repo.site_id = site.site_id;
            repo.hosted_images.insert(site.repository->hosted_images.begin(),
                                      site.repository->hosted_images.end());
            cloud_config.repository = std::move(repo);
        }
    }
    for (const auto& image : config_.images) {
        cloud_config.images.push_back(
            VmImageSpec{image.image_id, image.size_bytes, image.ram_mb, image.software_tag});
    }
    cloud_config.boot_delay_us = seconds_to_us(config_.boot_delay_s);
    cloud_config.teardown_delay_us = seconds_to_us(config_.teardown_delay_s);
    cloud_config.single_copy_cache = config_.single_copy_cache;
    cloud_ = std::make_unique<CloudModel>(engine_, network_, topology_, log_,
                                          std::move(cloud_config));

    JobSystemConfig job_config;
    for (const auto& sample : config_.samples) {
        job_config.samples.push_back(SampleSpec{sample.sample_id, sample.event_size_bytes,
                                                sample.total_size_bytes, sample.events_per_job,
                                                sample.cpu_events_per_s});
    }
    for (const auto& site : config_.sites) {
        if (site.storage) {
            for (const auto& sample : site.storage->hosted_samples) {
                job_config.sample_site[sample] = site.site_id;
            }
        }
        if (site.user_storage) {
            job_config.user_site = site.site_id;
        }
    }
    job_config.calibration_enabled = config_.calibration.enabled;
    job_config.calibration_fetch_bytes = config_.calibration.fetch_bytes;
    job_config.calibration_site = config_.calibration.site;
    jobs_ = std::make_unique<JobSystem>(engine_, network_, *cloud_, topology_, log_,
                                        std::move(job_config));
    jobs_->attach_to_cloud();

    std::vector<std::string> site_order;
    for (const auto& site : config_.sites) site_order.push_back(site.site_id);
    scheduler_ = std::make_unique<CloudScheduler>(to_policy(config_.scheduler), site_order,
                                                  cloud_->slot_capacities());

    faults_ = std::make_unique<FaultInjector>(engine_, config_.seed);
    faults_->attach(cloud_.get(), &log_);
    for (const auto& f : config_.faults) {
        FaultSpec spec;
        if (f.kind == "boot-error") spec.kind = FaultKind::BootError;
        else if (f.kind == "periodic-kill") spec.kind = FaultKind::PeriodicKill;
        else if (f.kind == "comm-blackout") spec.kind = FaultKind::CommBlackout;
        else spec.kind = FaultKind::MonitorGap;
        spec.site_id = f.site;
        spec.probability = f.probability;
        spec.period_us = seconds_to_us(f.period_s);
        spec.first_at_us = seconds_to_us(f.first_at_s);
        spec.window_start_us = seconds_to_us(f.window_start_s);
        spec.window_end_us = seconds_to_us(f.window_end_s);
        spec.seed_stream = f.seed_stream.empty() ? f.kind + ":" + f.site : f.seed_stream;
        faults_->arm(spec);
    }

    // Jobs are registered up front; each becomes visible at its submit time.
    for (const auto& group : config_.jobs) {
        for (const auto& job_id : expand_job_ids(group)) {
            JobConfig jc;
            jc.job_id = job_id;
            jc.required_image = group.image;
            jc.sample = group.sample;
            jc.submit_at = SimTime::from_seconds(group.submit_at_s);
            jc.output_fraction = group.output_fraction;
            jobs_->submit(jc);
        }
    }

    std::vector<std::string> link_ids;
    for (const auto& link : network_.links()) link_ids.push_back(link.link_id);
    MetricsRecorder::Sources sources;
    sources.vm_counts = [this] { return viewed_vm_counts(); };
    sources.job_counts = [this] {
        return std::array<int, 3>{jobs_->queued_count(), jobs_->running_count(),
                                  jobs_->completed_count()};
    };
    sources.suppressed = [this](SimTime t) { return faults_->metrics_suppressed(t); };
    recorder_ = std::make_unique<MetricsRecorder>(
        engine_, network_, seconds_to_us(config_.sample_interval_s), std::move(link_ids),
        std::move(sources));

    result_.jobs_total = static_cast<int>(jobs_->total_jobs());
    result_.horizon_s = config_.horizon_s;
}

std::array<int, 4> Simulation::viewed_vm_counts() const {
    std::array<int, 4> counts{0, 0, 0, 0};
    for (const auto& vm : last_view_.vms) {
        switch (vm.state) {
        case VmState::Propagating: counts[0]++; break;
        case VmState::Booting: counts[1]++; break;
        case VmState::Running: counts[2]++; break;
        case VmState::Error: counts[3]++; break;
        default: break;
        }
    }
    return counts;
}

void Simulation::deliver(const SchedulerAction& action) {
    const SimTime now = engine_.now();
    switch (action.kind) {
    case SchedulerAction::Kind::Boot: {
        if (!faults_->reachable(action.site_id)) {
            log_.sched_action(now, "boot-dropped", "site=" + action.site_id + " unreachable");
            return;
        }
        try {
            const std::uint64_t vm = cloud_->request_boot(action.image_id, action.site_id);
            log_.sched_action(now, "boot", "image=" + action.image_id + " site=" +
                                               action.site_id + " vm=vm-" + std::to_string(vm));
        } catch (const SimError&) {
            log_.sched_action(now, "boot-dropped", "site=" + action.site_id + " stale");
        }
        return;
    }
    case SchedulerAction::Kind::Shutdown: {
        const auto& vms = cloud_->vms();
        auto it = vms.find(action.vm_id);
        if (it == vms.end()) return;
        if (!faults_->reachable(it->second.site_id)) {
            log_.sched_action(now, "shutdown-dropped",
                              "vm=vm-" + std::to_string(action.vm_id) + " unreachable");
            return;
        }
        try {
            cloud_->shutdown_vm(action.vm_id, "idle-shutdown");
            log_.sched_action(now, "shutdown", "vm=vm-" + std::to_string(action.vm_id));
        } catch (const IllegalStateError&) {
            log_.sched_action(now, "shutdown-dropped",
                              "vm=vm-" + std::to_string(action.vm_id) + " stale");
        }
        return;
    }
    case SchedulerAction::Kind::Terminate: {
        const auto& vms = cloud_->vms();
        auto it = vms.find(action.vm_id);
        if (it == vms.end()) return;
        if (!faults_->reachable(it->second.site_id)) {
            log_.sched_action(now, "terminate-dropped",
                              "vm=vm-" + std::to_string(action.vm_id) + " unreachable");
            return;
        }
        if (it->second.state != VmState::Error) {
            log_.sched_action(now, "terminate-dropped",
                              "vm=vm-" + std::to_string(action.vm_id) + " stale");
            return;
        }
        cloud_->shutdown_vm(action.vm_id, "kill-and-replace");
        log_.sched_action(now, "terminate", "vm=vm-" + std::to_string(action.vm_id));
        return;
    }
    }
}

void Simulation::on_tick() {
    // Condor path first: bind queued jobs to idle VMs, so the provisioning
    // pass below sees the post-dispatch queue.
    jobs_->match_and_dispatch();

    auto reachable = [this](const std::string& site) { return faults_->reachable(site); };
    last_view_ = scheduler_->reconcile(cloud_->vms(), jobs_->queued_by_image(), reachable,
                                       engine_.now());
    const auto actions = scheduler_->tick(last_view_);
    for (const auto& action : actions) {
        deliver(action);
    }

    if (jobs_->all_completed() && cloud_->all_terminated()) {
        engine_.stop();
        return;
    }
    engine_.schedule(engine_.now() + scheduler_->policy().tick_interval_us,
                     EventKind::SchedulerTick, [this] { on_tick(); });
}

RunResult Simulation::run(std::optional<SimTime> until) {
    const auto wall_start = std::chrono::steady_clock::now();

    SimTime t_end = horizon_;
    if (until && *until < t_end) t_end = *until;
    result_.horizon_s = t_end.seconds();

    engine_.schedule(SimTime::from_us(scheduler_->policy().tick_interval_us),
                     EventKind::SchedulerTick, [this] { on_tick(); });
    recorder_->start();

    result_.events_fired = engine_.run_until(t_end);
    result_.ended_at = engine_.now();
    result_.horizon_reached = !engine_.stopped();
    result_.jobs_completed = jobs_->completed_count();
    result_.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return result_;
}

std::string Simulation::summary_text() const {
    char buf[128];
    std::string out;
    out += "jobs_completed: " + std::to_string(result_.jobs_completed) + "/" +
           std::to_string(result_.jobs_total) + "\n";
    out += std::string("all_completed: ") + (result_.all_completed() ? "true" : "false") + "\n";
    std::snprintf(buf, sizeof(buf), "ended_at_s: %.6f\n", result_.ended_at.seconds());
    out += buf;
    std::snprintf(buf, sizeof(buf), "horizon_s: %.6f\n", result_.horizon_s);
    out += buf;
    out += std::string("horizon_reached: ") + (result_.horizon_reached ? "true" : "false") + "\n";
    out += "vms_created: " + std::to_string(cloud_->vm_count()) + "\n";
    out += "link_bytes:\n";
    for (const auto& link : network_.links()) {
        std::snprintf(buf, sizeof(buf), "  %s %.3f\n", link.link_id.c_str(),
                      network_.link_moved_bytes(link.link_id));
        out += buf;
    }
    return out;
}

void Simulation::write_outputs(const std::string& out_dir) const {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());
    }
    auto write_file = [&out_dir](const std::string& name, const std::string& content) {
        const std::string path = out_dir + "/" + name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot open '" + path + "' for writing");
        out << content;
        if (!out) throw IoError("failed writing '" + path + "'");
    };
    write_file("metrics.csv", recorder_->to_csv());
    write_file("events.log", log_.text());
    write_file("summary.txt", summary_text());
}

} // namespace dcbsim
