// dcbsim command line: scenario runs, validation, the bundled preset, and a
// direct bridge to the max-min reference solver for cross-checks.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dcbsim/errors.hpp"
#include "dcbsim/oracle/maxmin_reference.hpp"
#include "dcbsim/scenario.hpp"
#include "dcbsim/simulation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIncomplete = 2;
constexpr int kExitIo = 3;

std::string read_arg_or_file(const std::string& arg) {
    if (!arg.empty() && arg[0] == '@') {
        std::ifstream in(arg.substr(1));
        if (!in) throw dcbsim::IoError("cannot open '" + arg.substr(1) + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        return buf.str();
    }
    return arg;
}

int cmd_run(const std::string& scenario_path, std::uint64_t seed, bool seed_set,
            const std::string& out_dir, double until_hours, double sample_interval_s) {
    dcbsim::ScenarioConfig config;
    try {
        config = dcbsim::load_scenario(scenario_path);
    } catch (const dcbsim::IoError& e) {
        std::cerr << e.what() << "\n";
        return kExitIo;
    } catch (const dcbsim::SimError& e) {
        std::cerr << e.what() << "\n";
        return kExitValidation;
    }
    if (seed_set) config.seed = seed;
    if (sample_interval_s > 0) config.sample_interval_s = sample_interval_s;
    std::optional<dcbsim::SimTime> until;
    if (until_hours > 0) until = dcbsim::SimTime::from_seconds(until_hours * 3600.0);

    try {
        dcbsim::Simulation sim(config);
        const dcbsim::RunResult result = sim.run(until);
        sim.write_outputs(out_dir);
        std::printf("completed %d/%d jobs, ended at %.1f s (wall %.2f s), outputs in %s\n",
                    result.jobs_completed, result.jobs_total, result.ended_at.seconds(),
                    result.wall_seconds, out_dir.c_str());
        return result.all_completed() ? kExitOk : kExitIncomplete;
    } catch (const dcbsim::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return kExitValidation;
    } catch (const dcbsim::IoError& e) {
        std::cerr << e.what() << "\n";
        return kExitIo;
    }
}

int cmd_validate(const std::string& scenario_path) {
    try {
        dcbsim::load_scenario(scenario_path);
    } catch (const dcbsim::IoError& e) {
        std::cerr << e.what() << "\n";
        return kExitIo;
    } catch (const dcbsim::SimError& e) {
        std::cerr << e.what() << "\n";
        return kExitValidation;
    }
    std::printf("scenario ok\n");
    return kExitOk;
}

int cmd_paper_scenario(const std::string& out_path) {
    try {
        dcbsim::emit_paper_scenario(out_path);
    } catch (const dcbsim::IoError& e) {
        std::cerr << e.what() << "\n";
        return kExitIo;
    }
    std::printf("wrote %s\n", out_path.c_str());
    return kExitOk;
}

int cmd_oracle_maxmin(const std::string& flows_arg, const std::string& links_arg) {
    using nlohmann::json;
    try {
        const json jf = json::parse(read_arg_or_file(flows_arg));
        const json jl = json::parse(read_arg_or_file(links_arg));
        std::vector<dcbsim::oracle::OracleFlow> flows;
        for (const auto& f : jf) {
            dcbsim::oracle::OracleFlow flow;
            flow.flow_id = f.at("flow_id").get<std::string>();
            flow.path = f.value("path", std::vector<std::string>{});
            flow.demand_bps = f.contains("demand_mbps") ? f.at("demand_mbps").get<double>() * 1e6
                                                        : -1.0;
            flows.push_back(std::move(flow));
        }
        std::vector<dcbsim::oracle::OracleLink> links;
        for (const auto& l : jl) {
            links.push_back(dcbsim::oracle::OracleLink{
                l.at("link_id").get<std::string>(), l.at("capacity_mbps").get<double>() * 1e6});
        }
        for (const auto& [id, bps] : dcbsim::oracle::max_min_reference(flows, links)) {
            std::printf("%s %.9f\n", id.c_str(), bps / 1e6);
        }
        return kExitOk;
    } catch (const dcbsim::IoError& e) {
        std::cerr << "oracle maxmin: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "oracle maxmin: " << e.what() << "\n";
        return kExitValidation;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dcbsim - distributed-cloud batch system simulator"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a scenario and write metrics/logs");
    std::string scenario_path, out_dir;
    std::uint64_t seed = 0;
    double until_hours = 0, sample_interval = 0;
    run->add_option("--scenario", scenario_path, "scenario file")->required();
    auto* seed_opt = run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--until", until_hours, "override the horizon, in hours");
    run->add_option("--sample-interval", sample_interval, "metrics sample interval, seconds");

    auto* preset = app.add_subcommand("paper-scenario", "write the bundled preset scenario");
    std::string preset_out;
    preset->add_option("--out", preset_out, "output path")->required();

    auto* validate = app.add_subcommand("validate", "check a scenario file");
    std::string validate_path;
    validate->add_option("--scenario", validate_path, "scenario file")->required();

    auto* oracle = app.add_subcommand("oracle", "reference computations");
    auto* maxmin = oracle->add_subcommand("maxmin", "brute-force max-min fair allocation");
    std::string flows_arg, links_arg;
    maxmin->add_option("--flows", flows_arg, "JSON array of flows, or @file")->required();
    maxmin->add_option("--links", links_arg, "JSON array of links, or @file")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        return cmd_run(scenario_path, seed, seed_opt->count() > 0, out_dir, until_hours,
                       sample_interval);
    }
    if (preset->parsed()) {
        return cmd_paper_scenario(preset_out);
    }
    if (validate->parsed()) {
        return cmd_validate(validate_path);
    }
    if (oracle->parsed() && maxmin->parsed()) {
        return cmd_oracle_maxmin(flows_arg, links_arg);
    }
    std::cerr << app.help() << "\n";
    return kExitValidation;
}
