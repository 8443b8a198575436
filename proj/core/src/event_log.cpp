#include "dcbsim/event_log.hpp"

#include <cstdio>
#include <set>
#include <sstream>

namespace dcbsim {

namespace {

std::string format_time(SimTime t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%014.6f", t.seconds());
    return buf;
}

} // namespace

void EventLog::append(SimTime t, const std::string& body) {
    lines_.push_back(format_time(t) + " " + body);
}

void EventLog::vm_transition(SimTime t, std::uint64_t vm_id, const std::string& site,
                             const std::string& from, const std::string& to,
                             const std::string& cause) {
    append(t, "vm vm-" + std::to_string(vm_id) + " site=" + site + " " + from + "->" + to +
                  " cause=" + cause);
}

void EventLog::job_transition(SimTime t, const std::string& job_id, const std::string& from,
                              const std::string& to, std::uint64_t vm_id) {
    std::string line = "job " + job_id + " " + from + "->" + to;
    if (vm_id != 0) line += " vm=vm-" + std::to_string(vm_id);
    append(t, line);
}

void EventLog::flow_event(SimTime t, const std::string& what, const std::string& label) {
    append(t, "flow " + what + " " + label);
}

void EventLog::sched_action(SimTime t, const std::string& what, const std::string& detail) {
    append(t, "sched " + what + " " + detail);
}

void EventLog::fault_event(SimTime t, const std::string& what, const std::string& detail) {
    append(t, "fault " + what + " " + detail);
}

std::string EventLog::text() const {
    std::string out;
    for (const auto& line : lines_) {
        out += line;
        out += '\n';
    }
    return out;
}

AuditResult audit_event_log(const std::vector<std::string>& lines,
                            const std::map<std::string, int>& slot_capacity) {
    static const std::set<std::pair<std::string, std::string>> kLegalEdges = {
        {"none", "Propagating"},    {"none", "Booting"},
        {"Propagating", "Booting"}, {"Propagating", "Error"},
        {"Booting", "Running"},     {"Booting", "Error"},
        {"Running", "ShuttingDown"},{"Running", "Error"},
        {"Error", "Terminated"},    {"ShuttingDown", "Terminated"},
    };
    // States that consume a slot for admission purposes.
    auto occupies = [](const std::string& s) {
        return s == "Propagating" || s == "Booting" || s == "Running";
    };

    AuditResult result;
    std::map<std::string, std::string> vm_state; // vm token -> state
    std::map<std::string, std::string> vm_site;
    std::map<std::string, int> occupancy;

    for (const auto& line : lines) {
        std::istringstream in(line);
        std::string t, tag, vm, site_kv, edge;
        in >> t >> tag;
        if (tag != "vm") continue;
        in >> vm >> site_kv >> edge;
        const std::string site = site_kv.substr(site_kv.find('=') + 1);
        const auto arrow = edge.find("->");
        if (arrow == std::string::npos) continue;
        const std::string from = edge.substr(0, arrow);
        const std::string to = edge.substr(arrow + 2);
        ++result.vm_transitions;

        std::string known = vm_state.count(vm) ? vm_state[vm] : "none";
        if (known != from || !kLegalEdges.count({from, to})) {
            ++result.illegal_transitions;
            result.problems.push_back("illegal transition: " + line);
        }
        if (occupies(known)) occupancy[vm_site[vm]]--;
        vm_state[vm] = to;
        vm_site[vm] = site;
        if (occupies(to)) occupancy[site]++;

        auto cap = slot_capacity.find(site);
        if (cap != slot_capacity.end() && occupancy[site] > cap->second) {
            ++result.slot_violations;
            result.problems.push_back("slot capacity exceeded at " + site + ": " + line);
        }
    }
    return result;
}

} // namespace dcbsim
