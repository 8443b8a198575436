#pragma once

#include <map>
#include <string>
#include <vector>

#include "dcbsim/errors.hpp"

namespace dcbsim {

// Site-level connectivity: every site exposes one uplink and one downlink,
// and the image repository adds a server-throughput link in front of its
// uplink. Transfers between co-located endpoints bypass the links entirely.
class Topology {
public:
    struct Ports {
        std::string uplink;
        std::string downlink;
    };

    void add_site(const std::string& site_id, std::string uplink_id, std::string downlink_id) {
        ports_[site_id] = Ports{std::move(uplink_id), std::move(downlink_id)};
        order_.push_back(site_id);
    }

    void set_repository(const std::string& site_id, std::string server_link_id) {
        repo_site_ = site_id;
        repo_server_link_ = std::move(server_link_id);
    }

    bool has_site(const std::string& site_id) const { return ports_.count(site_id) > 0; }

    const Ports& ports(const std::string& site_id) const {
        auto it = ports_.find(site_id);
        if (it == ports_.end()) throw UnknownSiteError("unknown site '" + site_id + "'");
        return it->second;
    }

    const std::string& repository_site() const { return repo_site_; }
    const std::string& repository_server_link() const { return repo_server_link_; }

    // Repository -> destination; the server cap applies even to local boots.
    std::vector<std::string> propagation_path(const std::string& to_site) const {
        std::vector<std::string> path{repo_server_link_};
        if (to_site != repo_site_) {
            path.push_back(ports(repo_site_).uplink);
            path.push_back(ports(to_site).downlink);
        }
        return path;
    }

    // Generic site-to-site path; empty when both ends are the same site.
    std::vector<std::string> transfer_path(const std::string& from_site,
                                           const std::string& to_site) const {
        if (from_site == to_site) return {};
        return {ports(from_site).uplink, ports(to_site).downlink};
    }

    const std::vector<std::string>& site_order() const { return order_; }

private:
    std::map<std::string, Ports> ports_;
    std::vector<std::string> order_;
    std::string repo_site_;
    std::string repo_server_link_;
};

} // namespace dcbsim
