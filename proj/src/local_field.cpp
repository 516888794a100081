#include "snlab/local_field.hpp"

#include <absl/container/flat_hash_map.h>
#include <absl/container/flat_hash_set.h>

#include <algorithm>
#include <queue>
#include <stdexcept>

#include "snlab/clusters.hpp"

namespace snlab {

namespace {

std::uint64_t point_key(Site s, int t) {
    return (static_cast<std::uint64_t>(s) << 32) | static_cast<std::uint32_t>(t);
}

struct Pending {
    double level;
    std::uint64_t seq;
    std::uint64_t point;
    bool operator>(const Pending& o) const {
        return level != o.level ? level > o.level : seq > o.seq;
    }
};

class Explorer {
public:
    Explorer(const CouplingStream& stream, std::shared_ptr<SiteSpace> space, const WalkKernel& kernel,
             const LocalFieldConfig& cfg)
        : stream_(stream), space_(*space), kernel_(kernel), cfg_(cfg) {
        res_.field = WalkerField(std::move(space), kernel, cfg.horizon, cfg.lambda_max);
    }

    LocalFieldResult run() {
        for (Site s : cfg_.sources) push(s, 0, 0.0);
        std::size_t next_level = 0;
        bool stopped = false;
        double frontier = std::numeric_limits<double>::infinity();
        while (!heap_.empty()) {
            Pending top = heap_.top();
            auto q = queued_.find(top.point);
            if (q == queued_.end() || q->second < top.level) {
                heap_.pop();
                continue;
            }
            while (next_level < cfg_.levels.size() && top.level > cfg_.levels[next_level]) {
                evaluate(cfg_.levels[next_level], true);
                ++next_level;
                if (cfg_.stop_when_connected && res_.levels.back().connected) {
                    stopped = true;
                    break;
                }
            }
            if (stopped) {
                frontier = top.level;
                break;
            }
            if (res_.field.size() >= cfg_.max_walkers || res_.points >= cfg_.max_points) {
                res_.budget_hit = true;
                frontier = top.level;
                break;
            }
            heap_.pop();
            queued_.erase(q);
            process(static_cast<Site>(top.point >> 32), static_cast<int>(top.point & 0xFFFFFFFFULL), top.level);
        }
        res_.exhausted = heap_.empty() && !stopped && !res_.budget_hit;
        res_.complete_below = res_.exhausted ? std::numeric_limits<double>::infinity() : frontier;
        for (; next_level < cfg_.levels.size(); ++next_level) {
            double g = cfg_.levels[next_level];
            bool already = !res_.levels.empty() && res_.levels.back().connected && cfg_.stop_when_connected;
            if (already) {
                LevelOutcome lo = res_.levels.back();
                lo.lambda = g;
                lo.complete = false;
                lo.u_occupied = occupied(cfg_.u, g);
                lo.v_occupied = occupied(cfg_.v, g);
                res_.levels.push_back(lo);
            } else {
                evaluate(g, g < res_.complete_below);
            }
        }
        return std::move(res_);
    }

private:
    void push(Site s, int t, double level) {
        std::uint64_t p = point_key(s, t);
        if (processed_.contains(p)) return;
        auto [it, fresh] = queued_.try_emplace(p, level);
        if (!fresh) {
            if (it->second <= level) return;
            it->second = level;
        }
        heap_.push({level, seq_++, p});
    }

    bool seen(const Cursor& c, int t) const {
        return c.excess == 0 && processed_.contains(point_key(c.anchor, t));
    }

    bool occupied(Site s, double g) const {
        for (const auto& w : res_.field.walkers())
            if (w.origin == s && w.mark <= g) return true;
        return false;
    }

    void process(Site x, int t, double level) {
        processed_.insert(point_key(x, t));
        ++res_.points;
        const std::uint64_t key = space_.key(x);
        std::vector<double> marks;
        const Conditioning* cond = nullptr;
        if (t == 0)
            for (const auto& c : cfg_.conditioned)
                if (c.site == x) cond = &c;
        marks = cond ? stream_.arrivals_conditioned(key, cfg_.lambda_max, cond->level)
                     : point_arrivals(stream_, key, t, cfg_.lambda_max);
        const int T = cfg_.horizon;
        for (std::size_t i = 0; i < marks.size(); ++i) {
            ++res_.candidates;
            rng::Stream back{rng::derive(stream_.seed(), rng::Tag::Backward, key, static_cast<std::uint64_t>(t), i)};
            rng::Stream fwd{rng::derive(stream_.seed(), rng::Tag::Forward, key, static_cast<std::uint64_t>(t), i)};
            Cursor c{x, 0};
            bool keep = true;
            for (int j = 1; j <= t && keep; ++j) {
                int slot = kernel_.slot(back.at(static_cast<std::uint64_t>(j - 1)));
                if (slot >= 0 && !space_.step(c, slot)) keep = false;
                else if (seen(c, t - j)) keep = false;
            }
            if (!keep) continue;
            c = {x, 0};
            std::uint32_t alive_until = static_cast<std::uint32_t>(T) + 1;
            for (int s = t + 1; s <= T && keep; ++s) {
                int slot = kernel_.slot(fwd.at(static_cast<std::uint64_t>(s - t - 1)));
                if (slot >= 0 && !space_.step(c, slot)) {
                    alive_until = static_cast<std::uint32_t>(s);
                    break;
                }
                if (seen(c, s)) keep = false;
            }
            if (!keep) continue;
            admit(x, t, i, marks[i], alive_until, back, fwd, std::max(level, marks[i]));
        }
    }

    void admit(Site x, int t, std::size_t index, double mark, std::uint32_t alive_until, const rng::Stream& back,
               const rng::Stream& fwd, double level) {
        const int T = cfg_.horizon;
        traj_.assign(static_cast<std::size_t>(T) + 1, x);
        Site cur = x;
        for (int j = 1; j <= t; ++j) {
            int slot = kernel_.slot(back.at(static_cast<std::uint64_t>(j - 1)));
            if (slot >= 0) cur = space_.neighbor(cur, slot);
            traj_[static_cast<std::size_t>(t - j)] = cur;
        }
        cur = x;
        for (int s = t + 1; s <= T; ++s) {
            if (static_cast<std::uint32_t>(s) < alive_until) {
                int slot = kernel_.slot(fwd.at(static_cast<std::uint64_t>(s - t - 1)));
                if (slot >= 0) cur = space_.neighbor(cur, slot);
            }
            traj_[static_cast<std::size_t>(s)] = cur;
        }
        Walker w{traj_[0], static_cast<std::uint32_t>(index), mark, alive_until};
        res_.field.add(w, traj_);
        for (int s = 0; s <= T && static_cast<std::uint32_t>(s) < alive_until; ++s)
            if (s != t) push(traj_[static_cast<std::size_t>(s)], s, level);
    }

    void evaluate(double g, bool complete) {
        LevelOutcome lo;
        lo.lambda = g;
        lo.complete = complete;
        if (cfg_.has_pair) {
            lo.u_occupied = occupied(cfg_.u, g);
            lo.v_occupied = occupied(cfg_.v, g);
            if (lo.u_occupied && lo.v_occupied) {
                Meetings m = simulate_meetings(res_.field, g);
                auto T = static_cast<std::uint32_t>(cfg_.horizon);
                lo.connected = connected(res_.field, m.clusters, cfg_.u, cfg_.v, T, g);
                if (!lo.connected) {
                    auto cu = friend_cluster(res_.field, m.clusters, cfg_.u, T, g);
                    auto cv = friend_cluster(res_.field, m.clusters, cfg_.v, T, g);
                    cu.insert(cu.end(), cv.begin(), cv.end());
                    lo.touches_boundary = touches_boundary(res_.field, cu, T);
                }
            }
        }
        res_.levels.push_back(lo);
    }

    const CouplingStream& stream_;
    SiteSpace& space_;
    const WalkKernel& kernel_;
    const LocalFieldConfig& cfg_;
    LocalFieldResult res_;
    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> heap_;
    absl::flat_hash_set<std::uint64_t> processed_;
    absl::flat_hash_map<std::uint64_t, double> queued_;
    std::uint64_t seq_ = 0;
    std::vector<Site> traj_;
};

}  // namespace

std::vector<double> point_arrivals(const CouplingStream& stream, std::uint64_t key, int t, double lambda) {
    rng::Stream s{rng::derive(stream.seed(), rng::Tag::Arrivals, key, static_cast<std::uint64_t>(t) + 1)};
    std::vector<double> out;
    double a = 0.0;
    for (std::uint64_t i = 0;; ++i) {
        a += s.exp1(i);
        if (a > lambda) break;
        out.push_back(a);
    }
    return out;
}

LocalFieldResult explore_local_field(const CouplingStream& stream, std::shared_ptr<SiteSpace> space,
                                     const WalkKernel& kernel, const LocalFieldConfig& cfg) {
    if (!(cfg.lambda_max > 0.0)) throw std::domain_error("lambda_max must be positive");
    if (cfg.horizon < 0) throw std::domain_error("horizon must be nonnegative");
    if (space->window().policy() != BoundaryPolicy::Reject)
        throw std::domain_error("local exploration supports the Reject policy only");
    if (kernel.degree != space->degree()) throw std::invalid_argument("kernel degree does not match the graph");
    if (!std::is_sorted(cfg.levels.begin(), cfg.levels.end()))
        throw std::invalid_argument("levels must be ascending");
    for (double g : cfg.levels)
        if (g > cfg.lambda_max) throw std::invalid_argument("level above lambda_max");
    validate_holding(kernel.holding);
    return Explorer(stream, std::move(space), kernel, cfg).run();
}

}  // namespace snlab
