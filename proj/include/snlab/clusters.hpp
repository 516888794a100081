#pragma once

#include <absl/container/flat_hash_map.h>

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "snlab/field.hpp"

namespace snlab {

// Union-find over walker ids with timestamped links (union by size, no path
// compression). A link made at time t stays visible to queries at times >= t,
// so one forest answers "same component at time t" for every t.
class FriendClusters {
public:
    static constexpr std::uint32_t kNever = std::numeric_limits<std::uint32_t>::max();

    explicit FriendClusters(std::size_t n = 0);

    std::size_t size() const { return parent_.size(); }
    // Records a meeting of a and b at time t. Times must be nondecreasing across calls.
    bool unite(std::size_t a, std::size_t b, std::uint32_t t);
    std::size_t find(std::size_t w) const;
    std::size_t find_at(std::size_t w, std::uint32_t t) const;
    bool same_at(std::size_t a, std::size_t b, std::uint32_t t) const {
        return find_at(a, t) == find_at(b, t);
    }
    // Members of w's component at time t, ascending.
    std::vector<std::size_t> component_at(std::size_t w, std::uint32_t t) const;
    // Time of the link that made w part of its current root's tree (kNever for roots).
    std::uint32_t link_time(std::size_t w) const { return link_time_[w]; }
    std::uint32_t last_time() const { return last_time_; }
    // Excludes a walker from the structure's notion of membership (mark filter).
    void set_active(std::size_t w, bool on) { active_[w] = on ? 1 : 0; }
    bool active(std::size_t w) const { return active_[w] != 0; }

private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> size_;
    std::vector<std::uint32_t> link_time_;
    std::vector<std::uint8_t> active_;
    std::uint32_t last_time_ = 0;
};

// Vertex-level graph on initially occupied vertices (as sites): an edge joins
// the origins of two walkers with the time they first shared a position.
class AcquaintanceGraph {
public:
    void record(Site a, Site b, std::uint32_t t);
    // First-meeting time of the edge, or FriendClusters::kNever.
    std::uint32_t tag(Site a, Site b) const;
    std::size_t edge_count() const { return edges_.size(); }
    // (a, b, tag) with a <= b, sorted.
    std::vector<std::tuple<Site, Site, std::uint32_t>> edges() const;

private:
    static std::uint64_t pack(Site a, Site b) {
        if (a > b) std::swap(a, b);
        return (static_cast<std::uint64_t>(a) << 32) | b;
    }
    absl::flat_hash_map<std::uint64_t, std::uint32_t> edges_;
};

struct Meetings {
    FriendClusters clusters;
    AcquaintanceGraph graph;
};

// Scans t = 0..horizon, grouping alive walkers by position; every group is a
// clique of meetings, unioned onto its lowest walker id. Walkers whose mark
// exceeds `max_mark` are ignored (they stay singleton and inactive).
Meetings simulate_meetings(const WalkerField& field,
                           double max_mark = std::numeric_limits<double>::infinity());

// Walkers of FC_t(u): everything linked by time t to a walker starting at u.
// Empty when u has no walker (with mark <= max_mark).
std::vector<std::size_t> friend_cluster(const WalkerField& field, const FriendClusters& fc, Site u,
                                        std::uint32_t t,
                                        double max_mark = std::numeric_limits<double>::infinity());

// True if some walker from u and some walker from v share a component at time t.
bool connected(const WalkerField& field, const FriendClusters& fc, Site u, Site v, std::uint32_t t,
               double max_mark = std::numeric_limits<double>::infinity());

struct ClusterSize {
    std::size_t size = 0;
    bool touches_boundary = false;
};

// Largest active component at time t. The boundary flag is raised when a member
// started on, visited by time t, or was frozen at, the window boundary.
ClusterSize max_cluster_size(const WalkerField& field, const FriendClusters& fc, std::uint32_t t);

// True if any walker in `members` touched the boundary by time t.
bool touches_boundary(const WalkerField& field, const std::vector<std::size_t>& members, std::uint32_t t);

}  // namespace snlab
