#include "dcbsim/oracle/maxmin_reference.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace dcbsim::oracle {

std::map<std::string, double> max_min_reference(const std::vector<OracleFlow>& flows,
                                                const std::vector<OracleLink>& links) {
    const double kInf = std::numeric_limits<double>::infinity();

    std::map<std::string, std::size_t> link_index;
    for (std::size_t i = 0; i < links.size(); ++i) {
        link_index[links[i].link_id] = i;
    }

    const std::size_t n = flows.size();
    std::vector<std::vector<std::size_t>> paths(n);
    std::vector<double> demand(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& id : flows[i].path) {
            auto it = link_index.find(id);
            if (it == link_index.end()) {
                throw std::invalid_argument("oracle: unknown link '" + id + "'");
            }
            if (std::find(paths[i].begin(), paths[i].end(), it->second) == paths[i].end()) {
                paths[i].push_back(it->second);
            }
        }
        demand[i] = flows[i].demand_bps < 0 ? kInf : flows[i].demand_bps;
    }

    std::vector<double> rate(n, 0.0);
    std::vector<bool> frozen(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (demand[i] == 0.0) frozen[i] = true;
    }

    double level = 0.0;
    while (true) {
        // Level at which each link would saturate if all unfrozen flows keep
        // rising together.
        double next_level = kInf;
        for (std::size_t l = 0; l < links.size(); ++l) {
            double frozen_usage = 0.0;
            std::size_t unfrozen_count = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto& p = paths[i];
                if (std::find(p.begin(), p.end(), l) == p.end()) continue;
                if (frozen[i]) {
                    frozen_usage += rate[i];
                } else {
                    ++unfrozen_count;
                }
            }
            if (unfrozen_count > 0) {
                next_level = std::min(next_level,
                                      (links[l].capacity_bps - frozen_usage) /
                                          static_cast<double>(unfrozen_count));
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!frozen[i]) next_level = std::min(next_level, demand[i]);
        }
        if (next_level == kInf) break; // only unconstrained flows remain

        level = std::max(level, next_level);
        bool froze_any = false;
        // Freeze demand-limited flows at their demand.
        for (std::size_t i = 0; i < n; ++i) {
            if (!frozen[i] && demand[i] <= level) {
                rate[i] = demand[i];
                frozen[i] = true;
                froze_any = true;
            }
        }
        // Freeze flows on links saturated at this level.
        for (std::size_t l = 0; l < links.size(); ++l) {
            double frozen_usage = 0.0;
            std::size_t unfrozen_count = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto& p = paths[i];
                if (std::find(p.begin(), p.end(), l) == p.end()) continue;
                if (frozen[i]) {
                    frozen_usage += rate[i];
                } else {
                    ++unfrozen_count;
                }
            }
            if (unfrozen_count == 0) continue;
            const double saturation_level =
                (links[l].capacity_bps - frozen_usage) / static_cast<double>(unfrozen_count);
            if (saturation_level <= level * (1.0 + 1e-12)) {
                for (std::size_t i = 0; i < n; ++i) {
                    const auto& p = paths[i];
                    if (frozen[i] || std::find(p.begin(), p.end(), l) == p.end()) continue;
                    rate[i] = saturation_level;
                    frozen[i] = true;
                    froze_any = true;
                }
            }
        }
        if (!froze_any) break;
        bool all_frozen = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (!frozen[i]) { all_frozen = false; break; }
        }
        if (all_frozen) break;
    }

    std::map<std::string, double> out;
    for (std::size_t i = 0; i < n; ++i) {
        out[flows[i].flow_id] = frozen[i] ? rate[i] : kInf;
    }
    return out;
}

} // namespace dcbsim::oracle
