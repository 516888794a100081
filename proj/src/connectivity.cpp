#include "snlab/connectivity.hpp"

#include <algorithm>
#include <stdexcept>

#include "snlab/clusters.hpp"
#include "snlab/field.hpp"
#include "snlab/local_field.hpp"

namespace snlab {

void PairEstimate::finish() {
    std::uint64_t n = eligible - censored;
    defined = n > 0;
    estimate = defined ? static_cast<double>(connected) / static_cast<double>(n) : 0.0;
    ci = wilson(connected, n);
    if (eligible > 0) {
        lower = static_cast<double>(connected) / static_cast<double>(eligible);
        upper = static_cast<double>(connected + censored) / static_cast<double>(eligible);
    }
}

namespace {

struct Outcome {
    std::vector<std::uint8_t> connected, censored;
};

Engine resolve(const PairQuery& q) {
    if (q.engine != Engine::Auto) return q.engine;
    return q.window.family().is_tree() ? Engine::Local : Engine::Explicit;
}

Outcome run_explicit(const PairQuery& q, const std::shared_ptr<SiteSpace>& space, Site su, Site sv,
                     std::uint64_t r) {
    int T = *std::max_element(q.horizons.begin(), q.horizons.end());
    auto stream = CouplingStream::for_replica(q.seed, r);
    std::vector<Conditioning> cond{{su, q.lambda}};
    if (sv != su) cond.push_back({sv, q.lambda});
    WalkerField f = realize_field(stream, space, q.kernel, q.lambda, T, cond, Exec::Serial);
    Meetings m = simulate_meetings(f);
    Outcome out;
    for (int H : q.horizons) {
        auto t = static_cast<std::uint32_t>(H);
        bool c = connected(f, m.clusters, su, sv, t);
        bool cen = false;
        if (!c) {
            auto cu = friend_cluster(f, m.clusters, su, t);
            auto cv = friend_cluster(f, m.clusters, sv, t);
            cu.insert(cu.end(), cv.begin(), cv.end());
            cen = touches_boundary(f, cu, t);
        }
        out.connected.push_back(c);
        out.censored.push_back(cen);
    }
    return out;
}

Outcome run_local(const PairQuery& q, std::uint64_t r) {
    Outcome out;
    for (int H : q.horizons) {
        auto space = std::make_shared<SiteSpace>(q.window.family().is_tree() ? SiteSpace::lazy_tree(q.window)
                                                                              : SiteSpace::explicit_window(q.window));
        Site su = space->site_of(q.u), sv = space->site_of(q.v);
        LocalFieldConfig cfg;
        cfg.horizon = H;
        cfg.lambda_max = q.lambda;
        cfg.sources = {su};
        cfg.conditioned = {{su, q.lambda}};
        if (sv != su) {
            cfg.sources.push_back(sv);
            cfg.conditioned.push_back({sv, q.lambda});
        }
        cfg.levels = {q.lambda};
        cfg.has_pair = true;
        cfg.u = su;
        cfg.v = sv;
        cfg.stop_when_connected = true;
        cfg.max_walkers = q.max_walkers;
        auto res = explore_local_field(CouplingStream::for_replica(q.seed, r), space, q.kernel, cfg);
        const auto& lo = res.levels.back();
        out.connected.push_back(lo.connected);
        out.censored.push_back(!lo.connected && (lo.touches_boundary || !lo.complete));
    }
    return out;
}

}  // namespace

std::vector<PairEstimate> pair_connectivity(const PairQuery& q) {
    if (!(q.lambda > 0.0)) throw std::domain_error("lambda must be positive");
    if (q.horizons.empty()) throw std::invalid_argument("at least one horizon is required");
    if (q.replicas == 0) throw std::invalid_argument("replicas must be positive");
    if (!q.window.contains(q.u) || !q.window.contains(q.v)) throw std::domain_error("pair outside the window");
    Engine engine = resolve(q);
    std::shared_ptr<SiteSpace> space;
    Site su = 0, sv = 0;
    if (engine == Engine::Explicit) {
        space = std::make_shared<SiteSpace>(SiteSpace::explicit_window(q.window));
        su = space->site_of(q.u);
        sv = space->site_of(q.v);
    }
    auto outcomes = map_indexed<Outcome>(
        q.replicas,
        [&](std::size_t r) {
            return engine == Engine::Explicit ? run_explicit(q, space, su, sv, r) : run_local(q, r);
        },
        q.exec);
    std::vector<PairEstimate> est(q.horizons.size());
    for (std::size_t i = 0; i < q.horizons.size(); ++i) {
        est[i].horizon = q.horizons[i];
        est[i].replicas = q.replicas;
        est[i].eligible = q.replicas;
        for (const auto& o : outcomes) {
            est[i].connected += o.connected[i];
            est[i].censored += o.censored[i];
        }
        est[i].finish();
    }
    return est;
}

}  // namespace snlab
