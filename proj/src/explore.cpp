#include "snlab/explore.hpp"

#include <absl/container/flat_hash_map.h>
#include <absl/container/flat_hash_set.h>

#include <cmath>
#include <set>
#include <stdexcept>
#include <tuple>

#include "snlab/clusters.hpp"
#include "snlab/local_field.hpp"

namespace snlab {

ExploreParams ExploreParams::make(double K, double lambda, double rho) {
    if (!(K >= 3.0)) throw std::domain_error("K must be at least 3");
    if (!(lambda > 0.0)) throw std::domain_error("lambda must be positive");
    if (!(rho >= 0.0 && rho < 1.0)) throw std::domain_error("exploration needs rho < 1");
    ExploreParams p;
    p.K = K;
    p.lambda = lambda;
    p.rho = rho;
    p.s = static_cast<int>(std::ceil(8.0 * K / (1.0 - rho)));
    p.M = static_cast<int>(std::ceil(32.0 * K / lambda));
    if (p.rho_s() > std::exp(-8.0 * K) * (1.0 + 1e-12)) throw std::logic_error("rho^s exceeds e^{-8K}");
    return p;
}

ExploreParams ExploreParams::make(double K, double lambda, const GraphFamily& family, double h) {
    return make(K, lambda, spectral_radius_lazy(family, h));
}

double ExploreParams::rho_s() const { return std::pow(rho, s); }
double ExploreParams::good_level() const { return std::exp(-4.0 * K); }

bool SWalkKernel::step(const SiteSpace& space, Cursor& c, const rng::Stream& stream, std::uint64_t offset) const {
    for (int i = 0; i < s; ++i) {
        int slot = base.slot(stream.at(offset + static_cast<std::uint64_t>(i)));
        if (slot >= 0 && !space.step(c, slot)) return false;
    }
    return true;
}

SWalkKernel s_walk_kernel(const WalkKernel& kernel, int s) {
    if (s < 1) throw std::domain_error("s must be at least 1");
    validate_holding(kernel.holding);
    return {kernel, s};
}

double GoodSet::good_fraction() const {
    if (entries.empty()) return 0.0;
    std::size_t g = 0;
    for (const auto& e : entries) g += e.good;
    return static_cast<double>(g) / static_cast<double>(entries.size());
}

namespace {

using SiteSet = absl::flat_hash_set<Site>;

bool in_set(const SiteSet& A, const Cursor& c) { return c.excess == 0 && A.contains(c.anchor); }

// One s-walk of M steps from a; true if it enters A at some step >= 1.
bool returns(const SiteSpace& space, const SWalkKernel& q, int M, Site a, const SiteSet& A,
             const rng::Stream& stream) {
    Cursor c{a, 0};
    for (int j = 0; j < M; ++j) {
        if (!q.step(space, c, stream, static_cast<std::uint64_t>(j) * static_cast<std::uint64_t>(q.s))) return false;
        if (in_set(A, c)) return true;
    }
    return false;
}

RunningStats return_stats(const SiteSpace& space, const SWalkKernel& q, int M, Site a, const SiteSet& A,
                          std::uint64_t n_mc, std::uint64_t seed, std::uint64_t salt) {
    RunningStats st;
    for (std::uint64_t i = 0; i < n_mc; ++i) {
        rng::Stream s{rng::derive(seed, rng::Tag::GoodSet, space.key(a), salt, i)};
        st.add(returns(space, q, M, a, A, s) ? 1.0 : 0.0);
    }
    return st;
}

bool is_good(const RunningStats& st, double level) { return st.mean + 2.0 * st.stderr_mean() <= level; }

}  // namespace

GoodSet estimate_good_set(SiteSpace& space, const std::vector<Site>& A, const ExploreParams& params,
                          const WalkKernel& kernel, std::uint64_t n_mc, std::uint64_t seed) {
    if (n_mc == 0) throw std::domain_error("n_mc must be positive");
    if (A.empty()) throw std::domain_error("A must be nonempty");
    if (!(params.rho < 1.0)) throw std::domain_error("exploration needs rho < 1");
    SWalkKernel q = s_walk_kernel(kernel, params.s);
    SiteSet set(A.begin(), A.end());
    GoodSet g;
    g.level = params.good_level();
    for (Site a : A) {
        GoodSetEntry e;
        e.site = a;
        e.hit = return_stats(space, q, params.M, a, set, n_mc, seed, 0);
        e.good = is_good(e.hit, g.level);
        g.averaged.merge(e.hit);
        g.entries.push_back(e);
    }
    return g;
}

namespace {

constexpr int kGoodProbeLimit = 64;

struct PairState {
    int t = 0;
    int stage = 0;
    bool checked = false;
};

class Exploration {
public:
    Exploration(int degree, const ExploreConfig& cfg)
        : cfg_(cfg), p_(cfg.params), q_(s_walk_kernel(cfg.kernel, cfg.params.s)),
          stream_(rng::derive(cfg.seed, rng::Tag::Replica, 0)) {
        if (cfg.kernel.degree != degree) throw std::invalid_argument("kernel degree does not match the tree");
        if (cfg.stage_cap < 1) throw std::domain_error("stage cap must be positive");
        Window w(GraphFamily::regular_tree(degree), 2 * p_.horizon() + 2);
        space_ = std::make_shared<SiteSpace>(SiteSpace::lazy_tree(w));
        trace_.recruits = WalkerField(space_, cfg.kernel, p_.horizon(), p_.lambda);
    }

    ExplorationTrace run() {
        const Site root = space_->root();
        state_[root] = {0, 0, false};
        unchecked_.insert({0, 0, root});
        row(0, 0, 0, false);
        auto marks = cfg_.condition_root
                         ? stream_.arrivals_conditioned(space_->key(root), p_.lambda, p_.lambda)
                         : point_arrivals(stream_, space_->key(root), 0, p_.lambda);
        trace_.root_occupied = !marks.empty();
        if (!trace_.root_occupied) return std::move(trace_);

        // Stage 1: the first walker of W_root.
        unchecked_.erase({0, 0, root});
        state_.erase(root);
        rng::Stream fwd{rng::derive(stream_.seed(), rng::Tag::Forward, space_->key(root), 0, 0)};
        recruit(root, 0, 0, marks[0], rng::Stream{0}, fwd, 1);
        state_[root].checked = true;
        checked_ = 1;
        row(1, marks.size(), trace_.distinct_positions.back() - 1, false);

        for (int stage = 2; stage <= cfg_.stage_cap && !unchecked_.empty(); ++stage) {
            bool flagged = false;
            Key pick = select(stage, flagged);
            const int t = std::get<1>(pick);
            const Site u = std::get<2>(pick);
            unchecked_.erase(pick);
            std::size_t exposed = 0;
            std::size_t added = expose(u, t, stage, exposed);
            state_[u].checked = true;
            ++checked_;
            row(stage, exposed, added, flagged);
        }
        trace_.exhausted = unchecked_.empty();
        return std::move(trace_);
    }

private:
    using Key = std::tuple<int, int, Site>;  // discovery stage, time index, site

    Key select(int stage, bool& flagged) {
        SiteSet A;
        for (const auto& [s, st] : state_) A.insert(s);
        int probed = 0;
        for (const Key& k : unchecked_) {
            if (probed++ >= kGoodProbeLimit) break;
            Site u = std::get<2>(k);
            auto st = return_stats(*space_, q_, p_.M, u, A, cfg_.n_mc, cfg_.seed, static_cast<std::uint64_t>(stage));
            if (is_good(st, p_.good_level())) return k;
        }
        flagged = true;
        return *unchecked_.begin();
    }

    // Draws the walkers through (u, s t), keeps those avoiding A at every other
    // multiple of s, recruits the first kept one. Returns the pairs added.
    std::size_t expose(Site u, int t, int stage, std::size_t& exposed) {
        const int st = p_.s * t;
        const std::uint64_t key = space_->key(u);
        SiteSet A;
        for (const auto& [x, ps] : state_) A.insert(x);
        auto marks = point_arrivals(stream_, key, st, p_.lambda);
        std::size_t before = state_.size();
        bool recruited = false;
        for (std::size_t i = 0; i < marks.size(); ++i) {
            rng::Stream back{rng::derive(stream_.seed(), rng::Tag::Backward, key, static_cast<std::uint64_t>(st), i)};
            rng::Stream fwd{rng::derive(stream_.seed(), rng::Tag::Forward, key, static_cast<std::uint64_t>(st), i)};
            if (!avoids(u, st, back, fwd, A)) continue;
            ++exposed;
            if (!recruited) {
                recruit(u, st, i, marks[i], back, fwd, stage);
                recruited = true;
            }
        }
        return state_.size() - before;
    }

    bool avoids(Site u, int st, const rng::Stream& back, const rng::Stream& fwd, const SiteSet& A) const {
        const int s = p_.s, T = p_.horizon();
        Cursor c{u, 0};
        for (int j = 1; j <= st; ++j) {
            int slot = cfg_.kernel.slot(back.at(static_cast<std::uint64_t>(j - 1)));
            if (slot >= 0 && !space_->step(c, slot)) return false;
            if ((st - j) % s == 0 && in_set(A, c)) return false;
        }
        c = {u, 0};
        for (int j = st + 1; j <= T; ++j) {
            int slot = cfg_.kernel.slot(fwd.at(static_cast<std::uint64_t>(j - st - 1)));
            if (slot >= 0 && !space_->step(c, slot)) return false;
            if (j % s == 0 && in_set(A, c)) return false;
        }
        return true;
    }

    void recruit(Site u, int st, std::size_t index, double mark, const rng::Stream& back, const rng::Stream& fwd,
                 int stage) {
        const int s = p_.s, T = p_.horizon();
        traj_.assign(static_cast<std::size_t>(T) + 1, u);
        Site cur = u;
        for (int j = 1; j <= st; ++j) {
            int slot = cfg_.kernel.slot(back.at(static_cast<std::uint64_t>(j - 1)));
            if (slot >= 0) cur = space_->neighbor(cur, slot);
            traj_[static_cast<std::size_t>(st - j)] = cur;
        }
        cur = u;
        for (int j = st + 1; j <= T; ++j) {
            int slot = cfg_.kernel.slot(fwd.at(static_cast<std::uint64_t>(j - st - 1)));
            if (slot >= 0) cur = space_->neighbor(cur, slot);
            traj_[static_cast<std::size_t>(j)] = cur;
        }
        auto id = std::make_tuple(space_->key(u), st, index);
        if (!seen_.insert(id).second) throw std::logic_error("walker recruited twice");
        if (cfg_.keep_field) {
            Walker w{traj_[0], static_cast<std::uint32_t>(index), mark, static_cast<std::uint32_t>(T) + 1};
            trace_.recruits.add(w, traj_);
        }
        SiteSet distinct;
        const int t = st / s;
        for (int i = 0; i <= p_.M; ++i) {
            Site x = traj_[static_cast<std::size_t>(i * s)];
            if (!distinct.insert(x).second) continue;
            if (i == t) continue;
            if (state_.contains(x)) throw std::logic_error("recruit revisits the explored set");
            state_[x] = {i, stage, false};
            unchecked_.insert({stage, i, x});
        }
        trace_.distinct_positions.push_back(distinct.size());
    }

    void row(int stage, std::size_t exposed, std::size_t added, bool flagged) {
        StageRow r;
        r.stage = stage;
        r.A = state_.size();
        r.U = unchecked_.size();
        r.C = checked_;
        r.exposed = exposed;
        r.added = added;
        r.flagged = flagged;
        if (r.C != static_cast<std::size_t>(stage)) throw std::logic_error("|C_l| differs from l");
        if (r.A != r.U + r.C) throw std::logic_error("A_l is not the disjoint union of C_l and U_l");
        std::size_t u_count = 0;
        for (const auto& [x, ps] : state_) u_count += !ps.checked;
        if (u_count != r.U) throw std::logic_error("unchecked bookkeeping out of sync");
        trace_.stages.push_back(r);
    }

    const ExploreConfig& cfg_;
    ExploreParams p_;
    SWalkKernel q_;
    CouplingStream stream_;
    std::shared_ptr<SiteSpace> space_;
    absl::flat_hash_map<Site, PairState> state_;
    std::set<Key> unchecked_;
    std::size_t checked_ = 0;
    std::set<std::tuple<std::uint64_t, int, std::size_t>> seen_;
    std::vector<Site> traj_;
    ExplorationTrace trace_;
};

}  // namespace

ExplorationTrace run_exploration(int degree, const ExploreConfig& cfg) {
    if (!(cfg.params.rho < 1.0)) throw std::domain_error("exploration needs rho < 1");
    return Exploration(degree, cfg).run();
}

double ExplorationTrace::mean_growth(int first_stages) const {
    RunningStats g;
    for (std::size_t i = 1; i + 1 < stages.size() && static_cast<int>(i) <= first_stages; ++i)
        g.add(static_cast<double>(stages[i + 1].A) - static_cast<double>(stages[i].A));
    return g.mean;
}

void ExplorationTrace::write_csv(std::ostream& os) const {
    os << "stage,A,U,C,exposed,added,flagged\n";
    for (const auto& r : stages)
        os << r.stage << ',' << r.A << ',' << r.U << ',' << r.C << ',' << r.exposed << ',' << r.added << ','
           << (r.flagged ? 1 : 0) << '\n';
}

bool recruits_in_one_cluster(const ExplorationTrace& trace) {
    const auto& f = trace.recruits;
    if (f.size() <= 1) return true;
    Meetings m = simulate_meetings(f);
    auto T = static_cast<std::uint32_t>(f.horizon());
    for (std::size_t w = 1; w < f.size(); ++w)
        if (!m.clusters.same_at(0, w, T)) return false;
    return true;
}

std::int64_t t_threshold(double C, double lambda, double rho) {
    if (!(rho < 1.0)) throw std::domain_error("t threshold needs rho < 1");
    if (!(lambda > 0.0 && lambda <= 1.0)) throw std::domain_error("lambda must lie in (0, 1]");
    if (!(C > 0.0)) throw std::domain_error("C must be positive");
    return static_cast<std::int64_t>(std::ceil(C / (lambda * (1.0 - rho))));
}

}  // namespace snlab
