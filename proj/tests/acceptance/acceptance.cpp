// Acceptance runner: one PASS/FAIL line per criterion.
//
//   acceptance            run all criteria
//   acceptance 3 7        run a subset

#include <absl/container/flat_hash_map.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "snlab/analysis.hpp"
#include "snlab/brw.hpp"
#include "snlab/clusters.hpp"
#include "snlab/connectivity.hpp"
#include "snlab/explore.hpp"
#include "snlab/field.hpp"
#include "snlab/graphs.hpp"
#include "snlab/kernels.hpp"
#include "snlab/local_field.hpp"
#include "snlab/treeperc.hpp"

using namespace snlab;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string format(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ---- 1 -------------------------------------------------------------------------

using EdgeSet = std::map<std::pair<Site, Site>, std::uint32_t>;

EdgeSet edges_of(const Meetings& m) {
    EdgeSet out;
    for (auto [a, b, t] : m.graph.edges()) out[{a, b}] = t;
    return out;
}

// AC(lo) must embed in AC(hi) with tags no later; components at lo must sit
// inside components at hi. `map` sends walker ids of `lo` to ids of `hi`.
bool nested(const WalkerField& flo, const Meetings& lo, const WalkerField& fhi, const Meetings& hi,
            const std::vector<std::size_t>& map, std::uint32_t T, double mlo, double mhi) {
    EdgeSet a = edges_of(lo), b = edges_of(hi);
    for (const auto& [e, t] : a) {
        auto it = b.find(e);
        if (it == b.end() || it->second > t) return false;
    }
    absl::flat_hash_map<std::size_t, std::size_t> image;
    for (std::size_t w = 0; w < flo.size(); ++w) {
        if (flo.walker(w).mark > mlo) continue;
        std::size_t v = map[w];
        if (fhi.walker(v).mark > mhi) return false;
        auto [it, fresh] = image.try_emplace(lo.clusters.find_at(w, T), hi.clusters.find_at(v, T));
        if (!fresh && it->second != hi.clusters.find_at(v, T)) return false;
    }
    return true;
}

Verdict crit1() {
    const std::vector<double> grid{0.1, 0.3, 1.0, 3.0};
    const int T = 32;
    const WalkKernel kernel{4, 0.2};
    const Window deep(GraphFamily::regular_tree(4), 20);
    const Window small(GraphFamily::regular_tree(4), 6);
    auto small_space = std::make_shared<SiteSpace>(SiteSpace::explicit_window(small));
    std::size_t failures = 0, revealed = 0, edges = 0;

    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto stream = CouplingStream::for_replica(20240601, seed);

        // R = 20: one local exploration up to lambda = 3, filtered by mark.
        auto space = std::make_shared<SiteSpace>(SiteSpace::lazy_tree(deep));
        LocalFieldConfig cfg;
        cfg.horizon = T;
        cfg.lambda_max = grid.back();
        cfg.sources = {space->root(), space->descend(std::vector<int>{0, 0})};
        cfg.max_walkers = 5000;
        LocalFieldResult res = explore_local_field(stream, space, kernel, cfg);
        revealed += res.field.size();
        std::vector<Meetings> ms;
        for (double l : grid) ms.push_back(simulate_meetings(res.field, l));
        std::vector<std::size_t> id(res.field.size());
        for (std::size_t i = 0; i < id.size(); ++i) id[i] = i;
        for (std::size_t i = 0; i + 1 < grid.size(); ++i)
            if (!nested(res.field, ms[i], res.field, ms[i + 1], id, T, grid[i], grid[i + 1])) ++failures;

        // R = 6: independent full realizations at each density.
        std::vector<WalkerField> fields;
        std::vector<Meetings> full;
        for (double l : grid) {
            fields.push_back(realize_field(stream, small_space, kernel, l, T));
            full.push_back(simulate_meetings(fields.back()));
        }
        edges += full.back().graph.edge_count();
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            const auto& lo = fields[i];
            const auto& hi = fields[i + 1];
            std::map<std::pair<Site, std::uint32_t>, std::size_t> where;
            for (std::size_t w = 0; w < hi.size(); ++w) where[{hi.walker(w).origin, hi.walker(w).index}] = w;
            std::vector<std::size_t> map(lo.size());
            bool ok = true;
            for (std::size_t w = 0; w < lo.size() && ok; ++w) {
                auto it = where.find({lo.walker(w).origin, lo.walker(w).index});
                if (it == where.end()) {
                    ok = false;
                    break;
                }
                map[w] = it->second;
                auto a = lo.trajectory(w), b = hi.trajectory(it->second);
                ok = lo.walker(w).mark == hi.walker(it->second).mark && std::equal(a.begin(), a.end(), b.begin());
            }
            if (!ok || !nested(lo, full[i], hi, full[i + 1], map, T, grid[i], grid[i + 1])) ++failures;
        }
    }
    return {failures == 0, format("100 seeds x 3 grid steps x 2 fields, %zu violations (R=20 local: %zu walkers; "
                                  "R=6 full: %zu AC edges at lambda=3)",
                                  failures, revealed, edges)};
}

// ---- 2 -------------------------------------------------------------------------

Verdict crit2() {
    double worst = 0.0;
    bool exact = true, bounds = true;
    for (int d : {3, 4}) {
        for (Rational h : {Rational(0), Rational(1, 2), Rational(1, d + 1)}) {
            double hd = boost::rational_cast<double>(h);
            RationalTable brute = enumerate_tree_walks(d, h, 6);
            KernelTable tab = tree_kernel(d, hd, 64);
            exact = exact && tree_kernel_exact(d, h, 6) == brute;
            for (int t = 0; t <= 6; ++t)
                for (int k = 0; k <= t; ++k) {
                    double b = boost::rational_cast<double>(brute[t][k]) / KernelTable::sphere_size(d, k);
                    worst = std::max(worst, std::abs(tab.transition(t, k) - b));
                    worst = std::max(worst, std::abs(tab.q[t][k] - boost::rational_cast<double>(brute[t][k])));
                }
            bounds = bounds && check_kernel_bounds(tab, hd).ok;
        }
    }
    return {exact && worst <= 1e-12 && bounds,
            format("max |table - enumeration| = %.2e, rational recursion exact: %s, bounds to t=64: %s", worst,
                   exact ? "yes" : "no", bounds ? "hold" : "violated")};
}

// ---- 3 -------------------------------------------------------------------------

Verdict crit3() {
    StationarityQuery q;  // cycle(1000), lambda 1, t in {1, 10, 50}, N = 1e5
    StationarityReport r = stationarity_test(q);
    bool ok = true;
    std::string s;
    for (const auto& row : r.rows) {
        ok = ok && std::abs(row.mean - 1.0) <= 0.01 && row.dispersion >= 0.95 && row.dispersion <= 1.05;
        s += format(" t=%d mean %.4f disp %.4f;", row.t, row.mean, row.dispersion);
    }
    return {ok, s};
}

// ---- 4 -------------------------------------------------------------------------

Verdict crit4() {
    RegenerationQuery q;  // cycle(1000), A = {0}, lambda 1, t in {10, 30, 100}
    RegenerationReport r = regeneration_test(q);
    bool ok = r.deficit_monotone;
    std::string s;
    for (const auto& row : r.rows) {
        if (row.t == 100) ok = ok && row.mean >= 0.95 && row.mean <= 1.05;
        s += format(" t=%d mean %.4f+-%.4f deficit %.4f;", row.t, row.mean, row.stderr_mean, row.deficit);
    }
    return {ok, s + (r.deficit_monotone ? " deficits nonincreasing" : " deficits increase")};
}

// ---- 5 -------------------------------------------------------------------------

Verdict crit5() {
    MeetingQuery q;  // cycle(4000), lambda 1, t in [10, 1000], 1000 replicas
    q.slope_bounds = std::pair{0.45, 0.55};
    MeetingReport r = meeting_count_test(q);
    bool disp = true;
    double lo = 1e9, hi = -1e9;
    for (const auto& row : r.rows) {
        disp = disp && row.dispersion >= 0.9 && row.dispersion <= 1.1;
        lo = std::min(lo, row.dispersion);
        hi = std::max(hi, row.dispersion);
    }
    bool slope = r.fit.slope >= 0.45 && r.fit.slope <= 0.55;
    return {slope && disp, format("slope %.4f (+-%.4f), dispersion range [%.3f, %.3f] over %zu times", r.fit.slope,
                                  r.fit.slope_stderr, lo, hi, r.rows.size())};
}

// ---- 6 -------------------------------------------------------------------------

Verdict crit6() {
    BrwQuery q;  // d 3, h 1/2, lambda 0.5, n <= 5, 1e5 populations
    BrwMeansReport r = brw_root_means(q);
    bool within = true;
    std::string s;
    for (const auto& row : r.rows) {
        within = within && row.within_3se;
        s += format(" n=%d %.4f/%.4f;", row.n, row.q.mean, row.formula.value);
    }
    bool bounded = true;
    KernelTable tab = tree_kernel(3, 0.5, 5);
    for (int n = 0; n <= 5; ++n)
        for (int k = 0; k <= n; ++k) {
            try {
                bounded = bounded && expected_generation_mean(n, 0.5, k, tab).within_bound;
            } catch (const std::logic_error&) {
                bounded = false;
            }
        }
    return {within && bounded && r.truncated == 0,
            s + format(" bound holds for all (n,k): %s", bounded ? "yes" : "no")};
}

// ---- 7 -------------------------------------------------------------------------

Verdict crit7() {
    SubcriticalVerdict v = subcritical_check(0.03, GraphFamily::regular_tree(4), 0.2);
    BrwQuery q{4, 0.2, 0.03, 5, 20'000, 7, 10'000'000, Exec::Parallel};
    HorizonStability hs = total_visits_stability(q, 32);
    DominationQuery dq;  // tree(4) window R=14, h 1/5, lambda 0.03, T 10, 2e4 replicas
    DominationReport dr = domination_experiment(dq);
    bool ok = v.subcritical && hs.stable && dr.mean_ok;
    return {ok, format("lambda 0.03 < %.4f; sum Q_n(o): H=32 %.4f, H=64 %.4f, diff %.4f <= 3*%.4f: %s; "
                       "E[X_o] %.4f <= E[Y_o] %.4f + 2*%.4f: %s",
                       v.threshold, hs.short_run.mean, hs.long_run.mean, hs.diff, hs.joint_stderr,
                       hs.stable ? "yes" : "no", dr.x.mean, dr.y.mean, dr.joint_stderr, dr.mean_ok ? "yes" : "no")};
}

// ---- 8 -------------------------------------------------------------------------

Verdict crit8() {
    bool ordered = true;
    for (int d = 3; d <= 64; ++d)
        for (double h : {1.0 / (d + 1), 0.5}) {
            Bracket b = lambda_c_bracket(d, h);
            ordered = ordered && b.lower < b.upper;
        }
    SweepQuery q;  // tree(4), R 40, h 1/5, T 64
    q.grid = {0.02, 0.04, 0.06, 0.08, 0.1, 0.15, 0.2, 0.3, 0.5, 0.7, 1.0, 1.5, 2.0, 3.0};
    q.u = q.window.root();
    q.v = tree_code::encode(4, std::vector<int>{0, 0, 0, 0});
    q.replicas = 200;
    q.max_walkers = 20'000;
    q.seed = 11;
    SweepResult r = lambda_sweep(q);
    Bracket b = lambda_c_bracket(4, 0.2);
    bool inside = r.crossover && *r.crossover >= b.lower && *r.crossover <= b.upper;
    return {ordered && inside && r.monotone,
            format("scan d=3..64 ordered: %s; crossover %s in [%.4f, %.2f] (censored fraction %.2f)",
                   ordered ? "yes" : "no", r.crossover ? format("%.3f", *r.crossover).c_str() : "none", b.lower,
                   b.upper, r.censored_fraction)};
}

// ---- 9 -------------------------------------------------------------------------

Verdict crit9() {
    Window torus(GraphFamily::torus(2, 64), 64);
    PairQuery q;
    q.window = torus;
    q.kernel = WalkKernel{4, 0.95};
    q.lambda = 0.1;
    q.horizons = {128, 512, 2048};
    q.u = torus.from_coords(std::vector<std::int64_t>{0, 0});
    q.v = torus.from_coords(std::vector<std::int64_t>{32, 32});
    q.replicas = 400;
    q.seed = 5;
    auto est = pair_connectivity(q);
    auto se = [](const PairEstimate& e) {
        double n = static_cast<double>(e.eligible - e.censored);
        return std::sqrt(e.estimate * (1 - e.estimate) / n);
    };
    bool increasing = true;
    for (std::size_t i = 0; i + 1 < est.size(); ++i)
        increasing = increasing && est[i].defined && est[i + 1].defined &&
                     est[i + 1].estimate - est[i].estimate > 3.0 * std::hypot(se(est[i]), se(est[i + 1]));
    bool high = est.back().defined && est.back().estimate >= 0.9;

    Window tree(GraphFamily::regular_tree(16), 300);
    PairQuery t;
    t.window = tree;
    t.kernel = WalkKernel::uniform_hold(16);
    t.lambda = 0.05;
    t.horizons = {256};
    t.u = tree_code::encode(16, std::vector<int>{0, 0});
    t.v = tree_code::encode(16, std::vector<int>{1, 0});
    t.replicas = 60;
    t.max_walkers = 10'000;
    t.seed = 5;
    PairEstimate te = pair_connectivity(t).front();
    // Upper bound on P(u ~ v): expected branching walk visits to v.
    KernelTable tab = tree_kernel(16, 1.0 / 17, 256);
    const int k = tree.distance(t.u, t.v);
    double visits = 0.0;
    for (int n = 0; n <= 256; ++n) visits += expected_generation_mean(n, t.lambda, k, tab).value;
    bool small = te.lower <= 0.05 && (!te.defined || te.estimate <= 0.05) && visits <= 0.05;
    std::string tree_est = te.defined ? format("%.3f", te.estimate) : std::string("undefined");
    return {increasing && high && small,
            format("torus h=0.95 |u-v|=(32,32): %.3f < %.3f < %.3f (3-se separated: %s, >= 0.9: %s); "
                   "tree d=16 T=256: connected %llu/%llu eligible = %.3f, censored %llu, estimate %s, "
                   "branching bound on P(u~v) %.2e (d(u,v)=%d)",
                   est[0].estimate, est[1].estimate, est[2].estimate, increasing ? "yes" : "no", high ? "yes" : "no",
                   static_cast<unsigned long long>(te.connected), static_cast<unsigned long long>(te.eligible),
                   te.lower, static_cast<unsigned long long>(te.censored), tree_est.c_str(), visits, k)};
}

// ---- 10 ------------------------------------------------------------------------

// Every valid depth-t path in child-index order; the first is the certificate.
std::vector<std::vector<int>> all_certificates(const ArrivalStream& st, const PercTree& tree, int t) {
    std::vector<std::vector<int>> out;
    std::vector<int> path;
    std::function<void(std::uint64_t, int)> rec = [&](std::uint64_t key, int depth) {
        if (depth == t) {
            out.push_back(path);
            return;
        }
        for (int j = 0; j < tree.out_degree(depth); ++j) {
            path.push_back(j);
            bool excluded = !tree.excluded.empty() && path == tree.excluded;
            std::uint64_t child = PercTree::child_key(key, j);
            if (!excluded && st.count(child, false, depth) > 0 && st.count(child, true, 2 * t - depth - 1) > 0)
                rec(child, depth + 1);
            path.pop_back();
        }
    };
    rec(tree.root_key, 0);
    return out;
}

Verdict crit10() {
    // certificates
    std::size_t mismatches = 0, positives = 0, checks = 0;
    const int d = 5;
    PercTree tu = right_tree_u(d, {0, 0}, 24, 11);
    PercTree tv = right_tree_v(d, 24, 22);
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        ArrivalStream st(d, 3.0, 8, seed);
        for (const PercTree* tree : {&tu, &tv})
            for (int t = 0; t <= 4; ++t) {
                auto brute = all_certificates(st, *tree, t);
                auto dp = good_at_time(st, *tree, t);
                ++checks;
                positives += !brute.empty();
                bool same = dp.has_value() == !brute.empty() && (!dp || dp->path == brute.front());
                mismatches += !same;
            }
    }

    // survival against the finite-depth oracle
    std::string surv;
    bool surv_ok = true;
    const int depth = 20;
    const std::uint64_t n = 20'000;
    PercTree binary{2, 2, depth, 0, {}};
    for (double p : {0.3, 0.5, 0.75}) {
        auto alive = map_indexed<std::uint8_t>(n, [&](std::size_t r) {
            rng::Counter g(77, rng::Tag::Perc, static_cast<std::uint64_t>(p * 1000), r);
            return static_cast<std::uint8_t>(percolation_cluster(binary, p, g).reached_depth == depth);
        });
        double f = 0.0;
        for (auto a : alive) f += a;
        f /= static_cast<double>(n);
        double oracle = survival_probability(2, p, depth);
        double se = std::sqrt(std::max(oracle * (1 - oracle), 1e-12) / static_cast<double>(n));
        bool ok = std::abs(f - oracle) <= 3.0 * se;
        surv_ok = surv_ok && ok;
        surv += format(" p=%.2f %.4f vs %.4f;", p, f, oracle);
    }

    // independence of u- and v-goodness
    GoodnessQuery g;
    g.d = 5;
    g.lambda = 6.0;
    g.times = {1, 2, 3, 4};
    g.replicas = 10'000;
    g.seed = 3;
    GoodnessReport gr = simultaneous_goodness_rate(g);
    std::string ind;
    for (const auto& row : gr.rows)
        ind += format(" 2t=%d P_u %.3f P_v %.3f P_both %.3f;", 2 * row.t, row.p_u, row.p_v, row.p_both);

    return {mismatches == 0 && surv_ok && gr.pass,
            format("certificates: %zu/%zu agree (%zu nonempty);", checks - mismatches, checks, positives) + surv +
                ind + (gr.pass ? " independent within 3 se" : " dependence detected")};
}

// ---- 11 ------------------------------------------------------------------------

Verdict crit11() {
    ExploreConfig cfg;
    cfg.params = ExploreParams::make(3.0, 1.0, GraphFamily::regular_tree(6), 0.5);
    cfg.kernel = WalkKernel{6, 0.5};
    cfg.stage_cap = 10;
    bool books = true, one = true, bound = true;
    std::size_t runs = 20;
    double worst_small = 0.0, rho4 = std::pow(cfg.params.rho, 4);
    for (std::size_t r = 0; r < runs; ++r) {
        cfg.seed = 1000 + r;
        ExplorationTrace tr;
        try {
            tr = run_exploration(6, cfg);
        } catch (const std::logic_error&) {
            books = false;
            continue;
        }
        for (const auto& row : tr.stages) books = books && row.C == static_cast<std::size_t>(row.stage) && row.A == row.U + row.C;
        one = one && recruits_in_one_cluster(tr);

        // A: recruit positions at multiples of s.
        WalkerField& f = tr.recruits;
        std::set<Site> a;
        for (std::size_t w = 0; w < f.size(); ++w)
            for (int j = 0; j * cfg.params.s <= f.horizon(); ++j)
                if (f.alive(w, j * cfg.params.s)) a.insert(f.position(w, j * cfg.params.s));
        std::vector<Site> A(a.begin(), a.end());
        GoodSet g = estimate_good_set(f.space(), A, cfg.params, cfg.kernel, 16, 500 + r);
        bound = bound && g.averaged.mean <= cfg.params.rho_s() + 2.0 * g.averaged.stderr_mean();

        // Same inequality for a one-step 4-walk on a dense set.
        ExploreParams p4 = cfg.params;
        p4.s = 4;
        p4.M = 1;
        std::vector<Site> ball{f.space().root()};
        for (std::size_t i = 0; i < ball.size() && ball.size() < 187; ++i)
            for (int slot = 0; slot < 6; ++slot) {
                Site n = f.space().neighbor(ball[i], slot);
                if (n != kNoSite && f.space().depth(n) <= 3 && std::find(ball.begin(), ball.end(), n) == ball.end())
                    ball.push_back(n);
            }
        GoodSet g4 = estimate_good_set(f.space(), ball, p4, cfg.kernel, 64, 900 + r);
        worst_small = std::max(worst_small, g4.averaged.mean - 2.0 * g4.averaged.stderr_mean());
        bound = bound && g4.averaged.mean <= rho4 + 2.0 * g4.averaged.stderr_mean();
    }
    return {books && one && bound,
            format("%zu runs: bookkeeping %s, recruits in one cluster %s, pi_A return <= rho^s + 2 se %s "
                   "(s=%d; s=4 on the radius-3 ball: %.3f <= %.3f)",
                   runs, books ? "exact" : "violated", one ? "yes" : "no", bound ? "yes" : "no", cfg.params.s,
                   worst_small, rho4)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"coupling monotonicity", crit1},  {"kernel oracle", crit2},
        {"stationarity", crit3},           {"regeneration", crit4},
        {"meeting counts", crit5},         {"branching walk means", crit6},
        {"subcritical bound", crit7},      {"bracket coherence", crit8},
        {"amenable contrast", crit9},      {"tree percolation machinery", crit10},
        {"exploration process", crit11},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %2d %s [%.1fs]: %s\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), secs,
                    v.detail.c_str());
        std::fflush(stdout);
        failed += !v.pass;
    }
    return failed == 0 ? 0 : 1;
}
