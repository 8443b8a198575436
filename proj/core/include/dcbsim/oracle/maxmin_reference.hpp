#pragma once

#include <map>
#include <string>
#include <vector>

namespace dcbsim::oracle {

struct OracleFlow {
    std::string flow_id;
    std::vector<std::string> path;
    double demand_bps = -1.0; // negative = unbounded
};

struct OracleLink {
    std::string link_id;
    double capacity_bps = 0.0;
};

// Brute-force water-filling reference: raise one global water level; a flow
// freezes when the level reaches its demand, a link freezes all its unfrozen
// flows when frozen usage plus level * unfrozen count reaches its capacity.
// Kept deliberately separate from the production solver so the two can
// cross-check each other.
std::map<std::string, double> max_min_reference(const std::vector<OracleFlow>& flows,
                                                const std::vector<OracleLink>& links);

} // namespace dcbsim::oracle
