#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dcbsim/time.hpp"

namespace dcbsim {

// Append-only, human-greppable transition log. One line per state change;
// the acceptance audit replays vm lines to re-check transition legality and
// slot accounting from scratch.
class EventLog {
public:
    void vm_transition(SimTime t, std::uint64_t vm_id, const std::string& site,
                       const std::string& from, const std::string& to,
                       const std::string& cause);
    void job_transition(SimTime t, const std::string& job_id, const std::string& from,
                        const std::string& to, std::uint64_t vm_id);
    void flow_event(SimTime t, const std::string& what, const std::string& label);
    void sched_action(SimTime t, const std::string& what, const std::string& detail);
    void fault_event(SimTime t, const std::string& what, const std::string& detail);

    const std::vector<std::string>& lines() const { return lines_; }
    std::string text() const;

private:
    void append(SimTime t, const std::string& body);
    std::vector<std::string> lines_;
};

struct AuditResult {
    std::uint64_t vm_transitions = 0;
    std::uint64_t illegal_transitions = 0;
    std::uint64_t slot_violations = 0;
    std::vector<std::string> problems;
    bool clean() const { return illegal_transitions == 0 && slot_violations == 0; }
};

// Replays the vm lines of an events log against the legal lifecycle edges
// and per-site slot capacities. Independent of the live state machine: it
// parses the text back and recounts occupancy from nothing.
AuditResult audit_event_log(const std::vector<std::string>& lines,
                            const std::map<std::string, int>& slot_capacity);

} // namespace dcbsim
