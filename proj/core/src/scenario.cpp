#include "dcbsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dcbsim/errors.hpp"

namespace dcbsim {

using nlohmann::json;

namespace {

json to_json(const ScenarioConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["horizon_s"] = c.horizon_s;
    j["sample_interval_s"] = c.sample_interval_s;
    j["single_copy_cache"] = c.single_copy_cache;
    j["boot_delay_s"] = c.boot_delay_s;
    j["teardown_delay_s"] = c.teardown_delay_s;
    j["scheduler"] = {{"tick_interval_s", c.scheduler.tick_interval_s},
                      {"placement", c.scheduler.placement},
                      {"max_boots_per_tick", c.scheduler.max_boots_per_tick}};
    j["calibration"] = {{"enabled", c.calibration.enabled},
                        {"fetch_bytes", c.calibration.fetch_bytes},
                        {"site", c.calibration.site}};
    j["sites"] = json::array();
    for (const auto& s : c.sites) {
        json js = {{"site_id", s.site_id},
                   {"slots", s.slots},
                   {"flavor", s.flavor},
                   {"uplink_mbps", s.uplink_mbps},
                   {"downlink_mbps", s.downlink_mbps}};
        if (!s.cached_images.empty()) js["cached_images"] = s.cached_images;
        if (s.repository) {
            js["repository"] = {{"server_throughput_mbps", s.repository->server_throughput_mbps},
                                {"hosted_images", s.repository->hosted_images}};
        }
        if (s.storage) {
            js["storage"] = {{"hosted_samples", s.storage->hosted_samples}};
        }
        if (s.user_storage) js["user_storage"] = true;
        j["sites"].push_back(std::move(js));
    }
    j["images"] = json::array();
    for (const auto& i : c.images) {
        j["images"].push_back({{"image_id", i.image_id},
                               {"size_bytes", i.size_bytes},
                               {"ram_mb", i.ram_mb},
                               {"software_tag", i.software_tag}});
    }
    j["samples"] = json::array();
    for (const auto& s : c.samples) {
        j["samples"].push_back({{"sample_id", s.sample_id},
                                {"event_size_bytes", s.event_size_bytes},
                                {"total_size_bytes", s.total_size_bytes},
                                {"events_per_job", s.events_per_job},
                                {"cpu_events_per_s", s.cpu_events_per_s}});
    }
    j["jobs"] = json::array();
    for (const auto& g : c.jobs) {
        j["jobs"].push_back({{"group", g.group},
                             {"count", g.count},
                             {"image", g.image},
                             {"sample", g.sample},
                             {"submit_at_s", g.submit_at_s},
                             {"output_fraction", g.output_fraction}});
    }
    j["faults"] = json::array();
    for (const auto& f : c.faults) {
        json jf = {{"kind", f.kind}, {"seed_stream", f.seed_stream}};
        if (!f.site.empty()) jf["site"] = f.site;
        if (f.kind == "boot-error") jf["probability"] = f.probability;
        if (f.kind == "periodic-kill") {
            jf["period_s"] = f.period_s;
            jf["first_at_s"] = f.first_at_s;
        }
        if (f.kind == "comm-blackout" || f.kind == "monitor-gap") {
            jf["window_start_s"] = f.window_start_s;
            jf["window_end_s"] = f.window_end_s;
        }
        j["faults"].push_back(std::move(jf));
    }
    j["metadata"] = json::parse(c.metadata_json);
    return j;
}

ScenarioConfig from_json(const json& j) {
    ScenarioConfig c;
    c.seed = j.value("seed", std::uint64_t{1});
    c.horizon_s = j.value("horizon_s", 3600.0);
    c.sample_interval_s = j.value("sample_interval_s", 60.0);
    c.single_copy_cache = j.value("single_copy_cache", false);
    c.boot_delay_s = j.value("boot_delay_s", 120.0);
    c.teardown_delay_s = j.value("teardown_delay_s", 30.0);
    if (j.contains("scheduler")) {
        const auto& js = j.at("scheduler");
        c.scheduler.tick_interval_s = js.value("tick_interval_s", 30.0);
        c.scheduler.placement = js.value("placement", std::string("round-robin"));
        c.scheduler.max_boots_per_tick = js.value("max_boots_per_tick", 0);
    }
    if (j.contains("calibration")) {
        const auto& jc = j.at("calibration");
        c.calibration.enabled = jc.value("enabled", false);
        c.calibration.fetch_bytes = jc.value("fetch_bytes", std::uint64_t{0});
        c.calibration.site = jc.value("site", std::string());
    }
    for (const auto& js : j.value("sites", json::array())) {
        SiteConfig s;
        s.site_id = js.value("site_id", std::string());
        s.slots = js.value("slots", 0);
        s.flavor = js.value("flavor", std::string("nimbus-like"));
        s.uplink_mbps = js.value("uplink_mbps", 1000.0);
        s.downlink_mbps = js.value("downlink_mbps", 1000.0);
        s.cached_images = js.value("cached_images", std::vector<std::string>{});
        if (js.contains("repository")) {
            RepositoryConfig r;
            r.server_throughput_mbps = js.at("repository").value("server_throughput_mbps", 500.0);
            r.hosted_images =
                js.at("repository").value("hosted_images", std::vector<std::string>{});
            s.repository = std::move(r);
        }
        if (js.contains("storage")) {
            StorageConfig st;
            st.hosted_samples = js.at("storage").value("hosted_samples", std::vector<std::string>{});
            s.storage = std::move(st);
        }
        s.user_storage = js.value("user_storage", false);
        c.sites.push_back(std::move(s));
    }
    for (const auto& ji : j.value("images", json::array())) {
        ImageConfig i;
        i.image_id = ji.value("image_id", std::string());
        i.size_bytes = ji.value("size_bytes", std::uint64_t{16'000'000'000ULL});
        i.ram_mb = ji.value("ram_mb", 1024);
        i.software_tag = ji.value("software_tag", std::string());
        c.images.push_back(std::move(i));
    }
    for (const auto& js : j.value("samples", json::array())) {
        SampleConfig s;
        s.sample_id = js.value("sample_id", std::string());
        s.event_size_bytes = js.value("event_size_bytes", std::uint64_t{0});
        s.total_size_bytes = js.value("total_size_bytes", std::uint64_t{0});
        s.events_per_job = js.value("events_per_job", std::uint64_t{0});
        s.cpu_events_per_s = js.value("cpu_events_per_s", 0.0);
        c.samples.push_back(std::move(s));
    }
    for (const auto& jg : j.value("jobs", json::array())) {
        JobGroupConfig g;
        g.group = jg.value("group", std::string());
        g.count = jg.value("count", 1);
        g.image = jg.value("image", std::string());
        g.sample = jg.value("sample", std::string());
        g.submit_at_s = jg.value("submit_at_s", 0.0);
        g.output_fraction = jg.value("output_fraction", 0.02);
        c.jobs.push_back(std::move(g));
    }
    for (const auto& jf : j.value("faults", json::array())) {
        FaultConfig f;
        f.kind = jf.value("kind", std::string());
        f.site = jf.value("site", std::string());
        f.probability = jf.value("probability", 0.0);
        f.period_s = jf.value("period_s", 0.0);
        f.first_at_s = jf.value("first_at_s", 0.0);
        f.window_start_s = jf.value("window_start_s", 0.0);
        f.window_end_s = jf.value("window_end_s", 0.0);
        f.seed_stream = jf.value("seed_stream", std::string());
        c.faults.push_back(std::move(f));
    }
    c.metadata_json = j.value("metadata", json::object()).dump();
    return c;
}

} // namespace

std::vector<std::string> expand_job_ids(const JobGroupConfig& group) {
    std::vector<std::string> ids;
    ids.reserve(group.count);
    for (int i = 1; i <= group.count; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%03d", i);
        ids.push_back(group.group + "-" + buf);
    }
    return ids;
}

std::vector<std::string> validate_scenario(const ScenarioConfig& c) {
    std::vector<std::string> issues;
    auto complain = [&issues](const std::string& msg) { issues.push_back(msg); };

    if (c.horizon_s <= 0) complain("horizon_s: must be positive");
    if (c.sample_interval_s <= 0) complain("sample_interval_s: must be positive");
    if (c.scheduler.tick_interval_s <= 0) complain("scheduler.tick_interval_s: must be positive");
    if (c.scheduler.placement != "round-robin" && c.scheduler.placement != "first-fit") {
        complain("scheduler.placement: must be 'round-robin' or 'first-fit'");
    }
    if (c.scheduler.max_boots_per_tick < 0) {
        complain("scheduler.max_boots_per_tick: must be >= 0");
    }
    if (c.boot_delay_s < 0) complain("boot_delay_s: must be >= 0");
    if (c.teardown_delay_s < 0) complain("teardown_delay_s: must be >= 0");

    std::set<std::string> site_ids, image_ids, sample_ids;
    std::set<std::string> hosted_images, hosted_samples;
    int repositories = 0, user_sites = 0;
    for (std::size_t i = 0; i < c.sites.size(); ++i) {
        const auto& s = c.sites[i];
        const std::string where = "sites[" + s.site_id + "]";
        if (s.site_id.empty()) complain("sites[" + std::to_string(i) + "].site_id: empty");
        if (!site_ids.insert(s.site_id).second) complain(where + ": duplicate site_id");
        if (s.slots < 0) complain(where + ".slots: must be >= 0");
        if (s.uplink_mbps <= 0) complain(where + ".uplink_mbps: must be positive");
        if (s.downlink_mbps <= 0) complain(where + ".downlink_mbps: must be positive");
        if (s.flavor != "nimbus-like" && s.flavor != "ec2-like") {
            complain(where + ".flavor: must be 'nimbus-like' or 'ec2-like'");
        }
        if (s.repository) {
            ++repositories;
            if (s.repository->server_throughput_mbps <= 0) {
                complain(where + ".repository.server_throughput_mbps: must be positive");
            }
            if (s.repository->server_throughput_mbps > s.uplink_mbps) {
                complain(where + ".repository.server_throughput_mbps: exceeds site uplink");
            }
            hosted_images.insert(s.repository->hosted_images.begin(),
                                 s.repository->hosted_images.end());
        }
        if (s.storage) {
            hosted_samples.insert(s.storage->hosted_samples.begin(),
                                  s.storage->hosted_samples.end());
        }
        if (s.user_storage) ++user_sites;
    }
    if (c.sites.empty()) complain("sites: at least one site required");
    if (repositories > 1) complain("sites: at most one repository site supported");
    if (user_sites > 1) complain("sites: at most one user-storage site supported");

    for (const auto& img : c.images) {
        const std::string where = "images[" + img.image_id + "]";
        if (!image_ids.insert(img.image_id).second) complain(where + ": duplicate image_id");
        if (img.size_bytes == 0) complain(where + ".size_bytes: must be positive");
        if (img.ram_mb <= 0) complain(where + ".ram_mb: must be positive");
    }
    for (const auto& s : c.samples) {
        const std::string where = "samples[" + s.sample_id + "]";
        if (!sample_ids.insert(s.sample_id).second) complain(where + ": duplicate sample_id");
        if (s.event_size_bytes == 0) complain(where + ".event_size_bytes: must be positive");
        if (s.cpu_events_per_s <= 0) complain(where + ".cpu_events_per_s: must be positive");
        if (s.events_per_job == 0) complain(where + ".events_per_job: must be positive");
    }

    // Referential integrity.
    for (const auto& s : c.sites) {
        const std::string where = "sites[" + s.site_id + "]";
        for (const auto& img : s.cached_images) {
            if (!image_ids.count(img)) complain(where + ".cached_images: unknown image '" + img + "'");
        }
        if (s.repository) {
            for (const auto& img : s.repository->hosted_images) {
                if (!image_ids.count(img)) {
                    complain(where + ".repository.hosted_images: unknown image '" + img + "'");
                }
            }
        }
        if (s.storage) {
            for (const auto& smp : s.storage->hosted_samples) {
                if (!sample_ids.count(smp)) {
                    complain(where + ".storage.hosted_samples: unknown sample '" + smp + "'");
                }
            }
        }
    }

    double max_submit = 0.0;
    std::set<std::string> groups;
    for (const auto& g : c.jobs) {
        const std::string where = "jobs[" + g.group + "]";
        if (g.group.empty()) complain("jobs: group name must not be empty");
        if (!groups.insert(g.group).second) complain(where + ": duplicate group");
        if (g.count < 1) complain(where + ".count: must be >= 1");
        if (!image_ids.count(g.image)) complain(where + ".image: unknown image '" + g.image + "'");
        if (!sample_ids.count(g.sample)) {
            complain(where + ".sample: unknown sample '" + g.sample + "'");
        } else if (!hosted_samples.count(g.sample)) {
            complain(where + ".sample: sample '" + g.sample + "' is hosted by no storage site");
        }
        if (g.submit_at_s < 0) complain(where + ".submit_at_s: must be >= 0");
        if (g.output_fraction < 0 || g.output_fraction > 1) {
            complain(where + ".output_fraction: must be in [0,1]");
        }
        max_submit = std::max(max_submit, g.submit_at_s);

        // A boot may land on any site; the image must be obtainable everywhere.
        if (image_ids.count(g.image)) {
            for (const auto& s : c.sites) {
                if (s.slots <= 0) continue;
                const bool cached = std::find(s.cached_images.begin(), s.cached_images.end(),
                                              g.image) != s.cached_images.end();
                if (!cached && !hosted_images.count(g.image)) {
                    complain(where + ".image: '" + g.image + "' is neither cached at site '" +
                             s.site_id + "' nor hosted by a repository");
                }
            }
        }
    }
    if (!c.jobs.empty() && c.horizon_s <= max_submit) {
        complain("horizon_s: must exceed the latest submit_at_s");
    }

    for (std::size_t i = 0; i < c.faults.size(); ++i) {
        const auto& f = c.faults[i];
        const std::string where = "faults[" + std::to_string(i) + "]";
        const bool known = f.kind == "boot-error" || f.kind == "periodic-kill" ||
                           f.kind == "comm-blackout" || f.kind == "monitor-gap";
        if (!known) {
            complain(where + ".kind: unknown kind '" + f.kind + "'");
            continue;
        }
        if (f.kind != "monitor-gap" && !site_ids.count(f.site)) {
            complain(where + ".site: unknown site '" + f.site + "'");
        }
        if (f.kind == "boot-error" && (f.probability < 0 || f.probability > 1)) {
            complain(where + ".probability: must be in [0,1]");
        }
        if (f.kind == "periodic-kill" && f.period_s <= 0) {
            complain(where + ".period_s: must be positive");
        }
        if ((f.kind == "comm-blackout" || f.kind == "monitor-gap") &&
            f.window_end_s < f.window_start_s) {
            complain(where + ": window must be well-ordered");
        }
    }

    if (c.calibration.enabled) {
        if (c.calibration.fetch_bytes == 0) {
            complain("calibration.fetch_bytes: must be positive when enabled");
        }
        if (!site_ids.count(c.calibration.site)) {
            complain("calibration.site: unknown site '" + c.calibration.site + "'");
        }
    }
    return issues;
}

ScenarioConfig parse_scenario(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario parse error: ") + e.what());
    }
    ScenarioConfig c = from_json(j);
    auto issues = validate_scenario(c);
    if (!issues.empty()) {
        throw ValidationError(std::move(issues));
    }
    return c;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open scenario file '" + path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const ScenarioConfig& config) {
    return to_json(config).dump(2) + "\n";
}

ScenarioConfig paper_scenario() {
    ScenarioConfig c;
    c.seed = 42;
    c.horizon_s = 259200; // generous backstop; the run ends at quiescence
    c.sample_interval_s = 60;
    c.single_copy_cache = false;
    c.boot_delay_s = 120;
    c.teardown_delay_s = 30;
    c.scheduler = SchedulerConfig{30, "round-robin", 0};

    const std::string image = "babar-analysis";

    SiteConfig nrc;
    nrc.site_id = "nrc";
    nrc.slots = 30;
    nrc.flavor = "nimbus-like";
    nrc.cached_images = {image};
    nrc.repository = RepositoryConfig{500.0, {image}};
    SiteConfig ec2;
    ec2.site_id = "ec2";
    ec2.slots = 20;
    ec2.flavor = "ec2-like";
    ec2.cached_images = {image};
    SiteConfig uvic_a;
    uvic_a.site_id = "uvic-a";
    uvic_a.slots = 40;
    uvic_a.storage = StorageConfig{{"tau1n-data", "tau1n-mc", "tau11-mc"}};
    SiteConfig uvic_b;
    uvic_b.site_id = "uvic-b";
    uvic_b.slots = 20;
    SiteConfig user;
    user.site_id = "user";
    user.slots = 0;
    user.user_storage = true;
    c.sites = {nrc, ec2, uvic_a, uvic_b, user};

    c.images = {ImageConfig{image, 16'000'000'000ULL, 1024, "scientific-linux-5.5"}};

    c.samples = {
        SampleConfig{"tau1n-data", 4000, 1'158'000'000'000ULL, 4'752'000, 110.0},
        SampleConfig{"tau1n-mc", 4000, 615'000'000'000ULL, 2'376'000, 55.0},
        SampleConfig{"tau11-mc", 3000, 1'386'000'000'000ULL, 18'576'000, 430.0},
    };

    c.jobs = {
        JobGroupConfig{"tau1n-data", 77, image, "tau1n-data", 0.0, 0.02},
        JobGroupConfig{"tau1n-mc", 64, image, "tau1n-mc", 7200.0, 0.02},
        JobGroupConfig{"tau11-mc", 114, image, "tau11-mc", 14400.0, 0.02},
    };

    FaultConfig boot_error;
    boot_error.kind = "boot-error";
    boot_error.site = "nrc";
    boot_error.probability = 0.2;
    boot_error.seed_stream = "nrc-boot";
    FaultConfig periodic_kill;
    periodic_kill.kind = "periodic-kill";
    periodic_kill.site = "uvic-b";
    periodic_kill.period_s = 3600;
    periodic_kill.first_at_s = 21600;
    periodic_kill.seed_stream = "uvic-b-kill";
    FaultConfig blackout;
    blackout.kind = "comm-blackout";
    blackout.site = "uvic-a";
    blackout.window_start_s = 64800;
    blackout.window_end_s = 66600;
    blackout.seed_stream = "uvic-a-link";
    FaultConfig gap;
    gap.kind = "monitor-gap";
    gap.window_start_s = 61200;
    gap.window_end_s = 63000;
    gap.seed_stream = "monitor";
    c.faults = {boot_error, periodic_kill, blackout, gap};

    c.metadata_json = json{{"xrootd_read_ahead_bytes", 1'000'000},
                           {"xrootd_read_ahead_cache_bytes", 10'000'000},
                           {"calibration_database_bytes", 24'000'000'000ULL},
                           {"event_store_bytes", 8'700'000'000'000ULL}}
                          .dump();
    return c;
}

void emit_paper_scenario(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write scenario file '" + path + "'");
    }
    out << serialize_scenario(paper_scenario());
    if (!out) {
        throw IoError("failed writing scenario file '" + path + "'");
    }
}

} // namespace dcbsim
