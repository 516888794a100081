#include "snlab/brw.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "snlab/clusters.hpp"
#include "snlab/local_field.hpp"

namespace snlab {

BrwPopulation::BrwPopulation(int degree, double lambda, int max_generations, std::uint64_t cap)
    : lambda_(lambda), cap_(cap) {
    if (!(lambda >= 0.0)) throw std::domain_error("lambda must be nonnegative");
    if (max_generations < 0) throw std::domain_error("generations must be nonnegative");
    if (cap == 0) throw std::domain_error("population cap must be positive");
    Window w(GraphFamily::regular_tree(degree), max_generations + 1);
    space_ = std::make_shared<SiteSpace>(SiteSpace::lazy_tree(w));
}

std::uint64_t BrwPopulation::Q(int n, Site v) const {
    if (n < 0 || n > stages()) throw std::out_of_range("stage not simulated");
    std::uint64_t c = 0;
    if (n == 0) {
        for (const auto& p : gens_[0]) c += p.born == v;
        return c;
    }
    for (const auto& p : gens_[static_cast<std::size_t>(n - 1)]) c += p.stepped == v;
    return c;
}

std::vector<std::uint64_t> BrwPopulation::root_visits() const {
    std::vector<std::uint64_t> out;
    for (int n = 0; n <= stages(); ++n) out.push_back(Q(n, space_->root()));
    return out;
}

GenerationMean expected_generation_mean(int n, double lambda, int k, const KernelTable& table) {
    if (n < 0 || k < 0) throw std::domain_error("n and k must be nonnegative");
    GenerationMean g;
    double rho = spectral_radius_lazy(GraphFamily::regular_tree(table.d), table.h);
    g.bound = std::pow((1.0 + 2.0 * lambda) * rho, n);
    if (n == 0) {
        g.value = k == 0 ? 1.0 + lambda : 0.0;
        g.bound = std::max(g.bound, g.value);
        return g;
    }
    g.value = (1.0 + lambda) * std::pow(1.0 + 2.0 * lambda, n - 1) * table.transition(n, k);
    g.within_bound = g.value <= g.bound * (1.0 + 1e-12);
    if (!g.within_bound) throw std::logic_error("generation mean exceeds the spectral bound");
    return g;
}

SubcriticalVerdict subcritical_check(double lambda, const GraphFamily& family, double h) {
    if (!(lambda >= 0.0)) throw std::domain_error("lambda must be nonnegative");
    SubcriticalVerdict v;
    v.rho = spectral_radius_lazy(family, h);
    if (v.rho >= 1.0) {
        v.threshold = 0.0;
        v.vacuous = true;
        v.note = "always supercritical bound vacuous";
        return v;
    }
    v.threshold = (1.0 / v.rho - 1.0) / 2.0;
    v.subcritical = (1.0 + 2.0 * lambda) * v.rho < 1.0;
    v.note = v.subcritical ? "subcritical" : "bound not applicable";
    return v;
}

namespace {

std::vector<std::uint64_t> run_population(const BrwQuery& q, int stages, std::uint64_t stream, bool* truncated) {
    rng::Counter rng(q.seed, rng::Tag::Brw, stream);
    BrwPopulation pop(q.degree, q.lambda, stages, q.cap);
    pop.start(rng);
    WalkKernel k{q.degree, q.holding};
    for (int n = 0; n < stages; ++n)
        if (!step_generation(pop, k, rng)) break;
    if (truncated) *truncated = pop.truncated();
    auto v = pop.root_visits();
    v.resize(static_cast<std::size_t>(stages) + 1, 0);
    return v;
}

struct Visits {
    std::vector<std::uint64_t> q;
    bool truncated = false;
};

}  // namespace

BrwMeansReport brw_root_means(const BrwQuery& q) {
    if (q.replicas == 0) throw std::domain_error("replicas must be positive");
    validate_holding(q.holding);
    auto runs = map_indexed<Visits>(
        q.replicas,
        [&](std::size_t r) {
            Visits v;
            v.q = run_population(q, q.generations, r, &v.truncated);
            return v;
        },
        q.exec);
    KernelTable table = tree_kernel(q.degree, q.holding, q.generations);
    BrwMeansReport rep;
    rep.rows.resize(static_cast<std::size_t>(q.generations) + 1);
    for (const auto& v : runs) {
        rep.truncated += v.truncated;
        double sum = 0;
        for (std::size_t n = 0; n < v.q.size(); ++n) {
            rep.rows[n].q.add(static_cast<double>(v.q[n]));
            sum += static_cast<double>(v.q[n]);
        }
        rep.total.add(sum);
    }
    rep.pass = rep.truncated == 0;
    for (int n = 0; n <= q.generations; ++n) {
        auto& row = rep.rows[static_cast<std::size_t>(n)];
        row.n = n;
        row.formula = expected_generation_mean(n, q.lambda, 0, table);
        row.within_3se = std::abs(row.q.mean - row.formula.value) <= 3.0 * row.q.stderr_mean() + 1e-12;
        rep.pass = rep.pass && row.within_3se && row.formula.within_bound;
    }
    return rep;
}

HorizonStability total_visits_stability(const BrwQuery& q, int horizon) {
    if (horizon < 1) throw std::domain_error("horizon must be positive");
    if (q.replicas == 0) throw std::domain_error("replicas must be positive");
    auto totals = [&](int stages, std::uint64_t offset) {
        auto runs = map_indexed<double>(
            q.replicas,
            [&](std::size_t r) {
                auto v = run_population(q, stages, offset + r, nullptr);
                double s = 0;
                for (auto x : v) s += static_cast<double>(x);
                return s;
            },
            q.exec);
        RunningStats st;
        for (double s : runs) st.add(s);
        return st;
    };
    HorizonStability hs;
    hs.horizon = horizon;
    hs.short_run = totals(horizon, 0);
    hs.long_run = totals(2 * horizon, q.replicas);
    hs.diff = hs.long_run.mean - hs.short_run.mean;
    hs.joint_stderr = std::hypot(hs.short_run.stderr_mean(), hs.long_run.stderr_mean());
    hs.stable = hs.diff <= 3.0 * hs.joint_stderr;
    return hs;
}

namespace {

struct DomSample {
    double x = 0;
    double y = 0;
    bool complete = true;
};

double cdf_at(const std::vector<double>& sorted, double z) {
    auto it = std::upper_bound(sorted.begin(), sorted.end(), z);
    return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

}  // namespace

DominationReport domination_experiment(const DominationQuery& q) {
    if (!q.window.family().is_tree()) throw std::domain_error("domination experiment needs a tree window");
    if (!(q.lambda >= 0.0)) throw std::domain_error("lambda must be nonnegative");
    if (q.replicas == 0) throw std::domain_error("replicas must be positive");
    if (q.window.radius() <= q.horizon) throw std::domain_error("window radius must exceed the horizon");
    const double lam_max = std::max(q.lambda, 1e-300);
    BrwQuery bq;
    bq.degree = q.kernel.degree;
    bq.holding = q.kernel.holding;
    bq.lambda = q.lambda;
    bq.seed = q.seed;

    auto samples = map_indexed<DomSample>(
        q.replicas,
        [&](std::size_t r) {
            DomSample s;
            auto space = std::make_shared<SiteSpace>(SiteSpace::lazy_tree(q.window));
            Site o = space->root();
            LocalFieldConfig cfg;
            cfg.horizon = q.horizon;
            cfg.lambda_max = lam_max;
            cfg.sources = {o};
            cfg.conditioned = {{o, q.lambda}};
            cfg.levels = {q.lambda};
            auto res = explore_local_field(CouplingStream::for_replica(q.seed, r), space, q.kernel, cfg);
            s.complete = res.complete_below > q.lambda;
            const auto& f = res.field;
            Meetings m = simulate_meetings(f, q.lambda);
            auto T = static_cast<std::uint32_t>(q.horizon);
            for (std::size_t w : friend_cluster(f, m.clusters, o, T, q.lambda))
                for (int t = 0; t <= q.horizon; ++t)
                    if (f.alive(w, t) && f.position(w, t) == o) s.x += 1;
            for (auto c : run_population(bq, q.horizon, r, nullptr)) s.y += static_cast<double>(c);
            return s;
        },
        q.exec);

    DominationReport rep;
    std::vector<double> xs, ys;
    for (const auto& s : samples) {
        rep.x.add(s.x);
        rep.y.add(s.y);
        rep.incomplete += !s.complete;
        xs.push_back(s.x);
        ys.push_back(s.y);
    }
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    rep.joint_stderr = std::hypot(rep.x.stderr_mean(), rep.y.stderr_mean());
    rep.mean_ok = rep.x.mean <= rep.y.mean + 2.0 * rep.joint_stderr;
    double n = static_cast<double>(xs.size());
    bool all = true;
    for (double level : q.quantiles) {
        QuantileCheck c;
        c.level = level;
        auto idx = static_cast<std::size_t>(std::min(n - 1.0, std::floor(level * n)));
        c.at = xs[idx];
        c.cdf_x = cdf_at(xs, c.at);
        c.cdf_y = cdf_at(ys, c.at);
        c.margin = 2.0 * std::sqrt((c.cdf_x * (1 - c.cdf_x) + c.cdf_y * (1 - c.cdf_y)) / n) + 1.0 / n;
        c.ok = c.cdf_y <= c.cdf_x + c.margin;
        all = all && c.ok;
        rep.quantiles.push_back(c);
    }
    rep.pass = rep.mean_ok && all && rep.incomplete == 0;
    return rep;
}

}  // namespace snlab
