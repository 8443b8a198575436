#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dcbsim {

struct RepositoryConfig {
    double server_throughput_mbps = 500.0;
    std::vector<std::string> hosted_images;
};

struct StorageConfig {
    std::vector<std::string> hosted_samples;
};

struct SiteConfig {
    std::string site_id;
    int slots = 0;
    std::string flavor = "nimbus-like";
    double uplink_mbps = 1000.0;
    double downlink_mbps = 1000.0;
    std::vector<std::string> cached_images;
    std::optional<RepositoryConfig> repository;
    std::optional<StorageConfig> storage;
    bool user_storage = false;
};

struct ImageConfig {
    std::string image_id;
    std::uint64_t size_bytes = 16'000'000'000ULL;
    int ram_mb = 1024;
    std::string software_tag;
};

struct SampleConfig {
    std::string sample_id;
    std::uint64_t event_size_bytes = 0;
    std::uint64_t total_size_bytes = 0;
    std::uint64_t events_per_job = 0;
    double cpu_events_per_s = 0.0;
};

struct JobGroupConfig {
    std::string group;
    int count = 1;
    std::string image;
    std::string sample;
    double submit_at_s = 0.0;
    double output_fraction = 0.02;
};

struct FaultConfig {
    std::string kind; // boot-error | periodic-kill | comm-blackout | monitor-gap
    std::string site;
    double probability = 0.0;
    double period_s = 0.0;
    double first_at_s = 0.0;
    double window_start_s = 0.0;
    double window_end_s = 0.0;
    std::string seed_stream;
};

struct SchedulerConfig {
    double tick_interval_s = 30.0;
    std::string placement = "round-robin"; // round-robin | first-fit
    int max_boots_per_tick = 0;            // 0 = unlimited
};

struct CalibrationConfig {
    bool enabled = false;
    std::uint64_t fetch_bytes = 0;
    std::string site;
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    double horizon_s = 3600.0;
    double sample_interval_s = 60.0;
    bool single_copy_cache = false;
    double boot_delay_s = 120.0;
    double teardown_delay_s = 30.0;
    SchedulerConfig scheduler;
    CalibrationConfig calibration;
    std::vector<SiteConfig> sites;
    std::vector<ImageConfig> images;
    std::vector<SampleConfig> samples;
    std::vector<JobGroupConfig> jobs;
    std::vector<FaultConfig> faults;
    std::string metadata_json = "{}"; // free-form, carried through round-trips
};

// Empty result means the config is sound; otherwise one entry per violation,
// each naming the offending field.
std::vector<std::string> validate_scenario(const ScenarioConfig& config);

// Throws ParseError (bad JSON) or ValidationError (every violation listed).
ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario(const std::string& json_text);

std::string serialize_scenario(const ScenarioConfig& config);

// Built-in preset: four clouds (30/20/40/20 slots), a 16 GB image hosted at
// the repository site and pre-seeded at the EC2-like site, three event
// samples, 77+64+114 jobs staggered two hours apart, and the full fault set.
ScenarioConfig paper_scenario();
void emit_paper_scenario(const std::string& path); // throws IoError

// Expanded per-job view of a group entry: "<group>-NNN".
std::vector<std::string> expand_job_ids(const JobGroupConfig& group);

} // namespace dcbsim
