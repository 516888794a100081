#include "snlab/clusters.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace snlab {

FriendClusters::FriendClusters(std::size_t n)
    : parent_(n), size_(n, 1), link_time_(n, kNever), active_(n, 1) {
    for (std::size_t i = 0; i < n; ++i) parent_[i] = static_cast<std::uint32_t>(i);
}

std::size_t FriendClusters::find(std::size_t w) const {
    while (parent_[w] != w) w = parent_[w];
    return w;
}

std::size_t FriendClusters::find_at(std::size_t w, std::uint32_t t) const {
    while (parent_[w] != w && link_time_[w] <= t) w = parent_[w];
    return w;
}

bool FriendClusters::unite(std::size_t a, std::size_t b, std::uint32_t t) {
    if (t < last_time_) throw std::logic_error("meetings must be recorded in time order");
    last_time_ = t;
    std::size_t ra = find(a), rb = find(b);
    if (ra == rb) return false;
    if (size_[ra] < size_[rb] || (size_[ra] == size_[rb] && ra > rb)) std::swap(ra, rb);
    parent_[rb] = static_cast<std::uint32_t>(ra);
    link_time_[rb] = t;
    size_[ra] += size_[rb];
    return true;
}

std::vector<std::size_t> FriendClusters::component_at(std::size_t w, std::uint32_t t) const {
    std::size_t r = find_at(w, t);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < parent_.size(); ++i)
        if (active_[i] && find_at(i, t) == r) out.push_back(i);
    return out;
}

void AcquaintanceGraph::record(Site a, Site b, std::uint32_t t) {
    if (a == b) return;
    edges_.try_emplace(pack(a, b), t);
}

std::uint32_t AcquaintanceGraph::tag(Site a, Site b) const {
    auto it = edges_.find(pack(a, b));
    return it == edges_.end() ? FriendClusters::kNever : it->second;
}

std::vector<std::tuple<Site, Site, std::uint32_t>> AcquaintanceGraph::edges() const {
    std::vector<std::tuple<Site, Site, std::uint32_t>> out;
    out.reserve(edges_.size());
    for (const auto& [k, t] : edges_)
        out.emplace_back(static_cast<Site>(k >> 32), static_cast<Site>(k & 0xFFFFFFFFULL), t);
    std::sort(out.begin(), out.end());
    return out;
}

Meetings simulate_meetings(const WalkerField& field, double max_mark) {
    const std::size_t n = field.size();
    Meetings m{FriendClusters(n), {}};
    std::size_t sites = field.space().size();
    std::vector<std::uint32_t> stamp(sites, 0);
    std::vector<std::uint32_t> head(sites), tail(sites), count(sites);
    std::vector<std::uint32_t> next(n);
    std::vector<Site> crowded;
    std::vector<std::size_t> members;

    std::vector<std::size_t> live;
    for (std::size_t w = 0; w < n; ++w) {
        if (field.walker(w).mark <= max_mark)
            live.push_back(w);
        else
            m.clusters.set_active(w, false);
    }

    for (int t = 0; t <= field.horizon(); ++t) {
        const std::uint32_t tag = static_cast<std::uint32_t>(t) + 1;
        crowded.clear();
        for (std::size_t w : live) {
            if (!field.alive(w, t)) continue;
            Site s = field.position(w, t);
            if (stamp[s] != tag) {
                stamp[s] = tag;
                head[s] = tail[s] = static_cast<std::uint32_t>(w);
                count[s] = 1;
            } else {
                next[tail[s]] = static_cast<std::uint32_t>(w);
                tail[s] = static_cast<std::uint32_t>(w);
                if (++count[s] == 2) crowded.push_back(s);
            }
        }
        for (Site s : crowded) {
            members.clear();
            std::uint32_t w = head[s];
            for (std::uint32_t i = 0; i < count[s]; ++i) {
                members.push_back(w);
                w = next[w];
            }
            for (std::size_t i = 1; i < members.size(); ++i)
                m.clusters.unite(members[0], members[i], static_cast<std::uint32_t>(t));
            for (std::size_t i = 0; i < members.size(); ++i)
                for (std::size_t j = i + 1; j < members.size(); ++j)
                    m.graph.record(field.walker(members[i]).origin, field.walker(members[j]).origin,
                                   static_cast<std::uint32_t>(t));
        }
    }
    return m;
}

std::vector<std::size_t> friend_cluster(const WalkerField& field, const FriendClusters& fc, Site u,
                                        std::uint32_t t, double max_mark) {
    std::vector<std::size_t> roots;
    for (std::size_t w : field.walkers_at_origin(u, max_mark))
        if (fc.active(w)) roots.push_back(fc.find_at(w, t));
    std::vector<std::size_t> out;
    if (roots.empty()) return out;
    std::sort(roots.begin(), roots.end());
    for (std::size_t w = 0; w < fc.size(); ++w)
        if (fc.active(w) && field.walker(w).mark <= max_mark &&
            std::binary_search(roots.begin(), roots.end(), fc.find_at(w, t)))
            out.push_back(w);
    return out;
}

bool connected(const WalkerField& field, const FriendClusters& fc, Site u, Site v, std::uint32_t t,
               double max_mark) {
    std::vector<std::size_t> ru;
    for (std::size_t w : field.walkers_at_origin(u, max_mark))
        if (fc.active(w)) ru.push_back(fc.find_at(w, t));
    if (ru.empty()) return false;
    for (std::size_t w : field.walkers_at_origin(v, max_mark))
        if (fc.active(w) && std::find(ru.begin(), ru.end(), fc.find_at(w, t)) != ru.end()) return true;
    return false;
}

namespace {

bool walker_touches(const WalkerField& field, std::size_t w, std::uint32_t t) {
    const auto& sp = field.space();
    if (field.walker(w).alive_until <= t) return true;
    int last = std::min<int>(static_cast<int>(t), field.horizon());
    for (int s = 0; s <= last; ++s)
        if (sp.on_boundary(field.position(w, s))) return true;
    return false;
}

}  // namespace

bool touches_boundary(const WalkerField& field, const std::vector<std::size_t>& members, std::uint32_t t) {
    for (std::size_t w : members)
        if (walker_touches(field, w, t)) return true;
    return false;
}

ClusterSize max_cluster_size(const WalkerField& field, const FriendClusters& fc, std::uint32_t t) {
    const std::size_t n = fc.size();
    std::vector<std::uint32_t> sz(n, 0);
    std::vector<std::uint8_t> edge(n, 0);
    for (std::size_t w = 0; w < n; ++w) {
        if (!fc.active(w)) continue;
        std::size_t r = fc.find_at(w, t);
        ++sz[r];
        if (!edge[r] && walker_touches(field, w, t)) edge[r] = 1;
    }
    ClusterSize best;
    for (std::size_t r = 0; r < n; ++r) {
        if (sz[r] > best.size || (sz[r] == best.size && sz[r] > 0 && edge[r] && !best.touches_boundary)) {
            best.size = sz[r];
            best.touches_boundary = edge[r] != 0;
        }
    }
    return best;
}

}  // namespace snlab
