#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "snlab/analysis.hpp"
#include "snlab/brw.hpp"
#include "snlab/connectivity.hpp"
#include "snlab/explore.hpp"
#include "snlab/graphs.hpp"
#include "snlab/io.hpp"
#include "snlab/kernels.hpp"
#include "snlab/treeperc.hpp"
#include "snlab/version.hpp"

using namespace snlab;
using io::json;

namespace {

enum Exit { kPass = 0, kInvalid = 1, kInvariant = 2, kStatistical = 3 };

// Raised by our own validation; the message starts with the offending field.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Outcome {
    json summary = json::object();
    std::map<std::string, std::string> files;  // name -> content, written in name order
    std::vector<std::string> warnings;
    bool pass = true;
    bool invariant_failure = false;
};

struct Common {
    std::uint64_t seed = 1;
    std::string out;
    std::string config;
    bool serial = false;
    Exec exec() const { return serial ? Exec::Serial : Exec::Parallel; }
};

std::string join(const std::vector<std::string>& parts) {
    std::string s;
    for (const auto& p : parts) s += p;
    return s;
}

std::string csv_row(std::initializer_list<std::string> cells) {
    std::string s;
    bool first = true;
    for (const auto& c : cells) {
        if (!first) s += ',';
        s += c;
        first = false;
    }
    return s + '\n';
}

std::string u64(std::uint64_t x) { return std::to_string(x); }

GraphFamily family_or_fail(const std::string& spec) {
    try {
        return io::parse_family(spec);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("family: ") + e.what());
    }
}

int periodic_radius(const GraphFamily& f) { return f.dim * static_cast<int>(f.side / 2); }

// Trees: child-index path from the root. Periodic families: coordinates.
VertexId locate(const Window& w, const std::vector<int>& spec, const char* field) {
    try {
        if (w.family().is_tree()) {
            VertexId v = tree_code::encode(w.degree(), spec);
            if (!w.contains(v)) throw std::domain_error("vertex outside the window");
            return v;
        }
        if (spec.empty()) return w.root();
        if (static_cast<int>(spec.size()) != w.family().dim) throw std::domain_error("expected one coordinate per axis");
        std::vector<std::int64_t> c(spec.begin(), spec.end());
        return w.from_coords(c);
    } catch (const std::exception& e) {
        throw ConfigError(std::string(field) + ": " + e.what());
    }
}

void require(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ConfigError(field + ": " + what);
}

// ---- bracket ----------------------------------------------------------------

struct BracketArgs {
    int d = 4;
    double h = 0.2;
    bool scan = false;
};

Outcome run_bracket(const BracketArgs& a, const Common&) {
    require(a.d >= 3, "d", "tree degree must be at least 3");
    Outcome o;
    Bracket b;
    try {
        b = lambda_c_bracket(a.d, a.h);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("h: ") + e.what());
    }
    char lo[32], hi[32];
    std::snprintf(lo, sizeof lo, "%.4f", b.lower);
    std::snprintf(hi, sizeof hi, "%.2f", b.upper);
    o.summary = {{"d", a.d}, {"h", a.h}, {"rho", b.rho}, {"lower", b.lower}, {"upper", b.upper},
                 {"lower_rounded", lo}, {"upper_rounded", hi}, {"ordered", b.lower < b.upper}};
    o.pass = b.lower < b.upper;
    if (a.scan) {
        json rows = json::array();
        bool ok = true;
        std::string csv = csv_row({"d", "h", "rho", "lower", "upper", "ordered"});
        for (int d = 3; d <= 64; ++d) {
            for (double h : {1.0 / (d + 1), 0.5}) {
                Bracket s = lambda_c_bracket(d, h);
                ok = ok && s.lower < s.upper;
                csv += csv_row({std::to_string(d), io::fmt(h), io::fmt(s.rho), io::fmt(s.lower), io::fmt(s.upper),
                                s.lower < s.upper ? "1" : "0"});
            }
        }
        o.files["scan.csv"] = csv;
        o.summary["scan_ordered"] = ok;
        o.pass = o.pass && ok;
    }
    o.files["bracket.json"] = o.summary.dump(2) + "\n";
    std::cout << o.summary.dump(2) << "\n";
    return o;
}

// ---- kernels ----------------------------------------------------------------

struct KernelArgs {
    int d = 3;
    double h = 0.5;
    int T = 6;
    int bound_horizon = 64;
    bool oracle = false;
};

Outcome run_kernels(const KernelArgs& a, const Common&) {
    require(a.d >= 3, "d", "tree degree must be at least 3");
    require(a.h >= 0.0 && a.h < 1.0, "h", "holding probability must lie in [0, 1)");
    require(a.T >= 0, "T", "must be nonnegative");
    require(a.bound_horizon >= 0, "bound-horizon", "must be nonnegative");
    Outcome o;
    KernelTable tab = tree_kernel(a.d, a.h, std::max(a.T, a.bound_horizon));
    std::ostringstream csv;
    KernelTable shown = tree_kernel(a.d, a.h, a.T);
    shown.write_csv(csv);
    o.files["kernel.csv"] = csv.str();

    KernelBoundReport rep = check_kernel_bounds(tab, a.h);
    o.summary = {{"d", a.d}, {"h", a.h}, {"T", a.T}, {"bound_horizon", tab.horizon},
                 {"rho", spectral_radius_lazy(GraphFamily::regular_tree(a.d), a.h)},
                 {"bounds_ok", rep.ok}, {"min_slack_rho", rep.min_slack_rho},
                 {"min_slack_diagonal", rep.min_slack_diagonal}, {"violations", rep.violations.size()}};
    if (!rep.ok) o.invariant_failure = true;

    if (a.oracle) {
        require(a.T <= 8, "T", "oracle enumeration is limited to T <= 8");
        Rational hr = rational_holding(a.h);
        require(std::abs(boost::rational_cast<double>(hr) - a.h) < 1e-12, "h",
                "oracle needs a holding probability with a small rational form");
        RationalTable exact = tree_kernel_exact(a.d, hr, a.T);
        RationalTable brute = enumerate_tree_walks(a.d, hr, a.T);
        bool same = exact == brute;
        double worst = 0.0;
        for (int t = 0; t <= a.T; ++t)
            for (int k = 0; k <= t; ++k)
                worst = std::max(worst, std::abs(shown.q[t][k] - boost::rational_cast<double>(exact[t][k])));
        bool match = same && worst <= 1e-12;
        o.summary["oracle"] = {{"rational_equal", same}, {"max_float_error", worst}, {"match", match}};
        std::cout << (match ? "oracle match: exact" : "oracle match: MISMATCH") << "\n";
        if (!match) o.invariant_failure = true;
    }
    o.pass = !o.invariant_failure;
    o.files["summary.json"] = o.summary.dump(2) + "\n";
    return o;
}

// ---- sweep --------------------------------------------------------------------

struct SweepArgs {
    std::string family = "tree:4";
    double h = 0.2;
    std::vector<double> grid{0.02, 0.04, 0.06, 0.1, 0.2, 0.3, 0.5, 1.0, 1.5, 2.0, 3.0};
    int T = 64;
    int R = 40;
    std::vector<int> u;
    std::vector<int> v{0, 0, 0, 0};
    std::uint64_t replicas = 200;
    std::uint64_t min_samples = 20;
    std::size_t max_walkers = 100'000;
};

Outcome run_sweep(const SweepArgs& a, const Common& c) {
    GraphFamily f = family_or_fail(a.family);
    require(a.h >= 0.0 && a.h < 1.0, "h", "holding probability must lie in [0, 1)");
    require(!a.grid.empty(), "grid", "needs at least one density");
    for (std::size_t i = 0; i < a.grid.size(); ++i) {
        require(a.grid[i] > 0.0, "grid", "densities must be positive");
        require(i == 0 || a.grid[i] > a.grid[i - 1], "grid", "densities must be strictly increasing");
    }
    require(a.T >= 0, "T", "must be nonnegative");
    require(a.replicas > 0, "replicas", "must be positive");
    SweepQuery q;
    q.window = Window(f, f.is_tree() ? a.R : periodic_radius(f));
    q.kernel = WalkKernel{f.degree, a.h};
    q.grid = a.grid;
    q.horizon = a.T;
    q.u = locate(q.window, a.u, "u");
    q.v = locate(q.window, a.v, "v");
    q.replicas = a.replicas;
    q.seed = c.seed;
    q.min_samples = a.min_samples;
    q.max_walkers = a.max_walkers;
    q.exec = c.exec();
    SweepResult r = lambda_sweep(q);

    Outcome o;
    std::vector<std::string> rows{csv_row({"seed", "replicas", "lambda", "T", "R", "eligible", "connected", "censored",
                                           "defined", "estimate", "lower", "upper", "ci_lo", "ci_hi"})};
    json curve = json::array();
    for (const auto& p : r.curve) {
        rows.push_back(csv_row({u64(c.seed), u64(a.replicas), io::fmt(p.lambda), std::to_string(a.T),
                                std::to_string(q.window.radius()), u64(p.est.eligible), u64(p.est.connected),
                                u64(p.est.censored), p.est.defined ? "1" : "0", io::fmt(p.est.estimate),
                                io::fmt(p.est.lower), io::fmt(p.est.upper), io::fmt(p.est.ci.lo),
                                io::fmt(p.est.ci.hi)}));
    }
    o.files["curve.csv"] = join(rows);
    o.summary = {{"family", io::to_json(f)}, {"h", a.h}, {"T", a.T}, {"window", io::to_json(q.window)},
                 {"censored_fraction", r.censored_fraction}, {"monotone", r.monotone}};
    if (r.crossover) o.summary["crossover"] = *r.crossover;
    else o.summary["crossover"] = nullptr;
    if (r.censored_fraction > 0.5)
        o.warnings.push_back("censored fraction " + io::fmt(r.censored_fraction) + " exceeds 0.5");
    if (f.is_tree()) {
        Bracket b = lambda_c_bracket(f, a.h);
        bool inside = r.crossover && *r.crossover >= b.lower && *r.crossover <= b.upper;
        o.summary["bracket"] = {{"lower", b.lower}, {"upper", b.upper}, {"crossover_inside", inside}};
        o.pass = inside;
    }
    o.files["summary.json"] = o.summary.dump(2) + "\n";
    return o;
}

// ---- stationarity / regen / meetings -----------------------------------------

struct StationarityArgs {
    std::string family = "cycle:1000";
    double h = 1.0 / 3.0;
    double lambda = 1.0;
    std::vector<int> times{1, 10, 50};
    std::uint64_t samples = 100'000;
    double mean_tol = -1.0;
    double dispersion_tol = 0.05;
};

Window periodic_window(const std::string& spec) {
    GraphFamily f = family_or_fail(spec);
    require(f.is_periodic(), "family", "needs a periodic family (cycle or torus)");
    return Window(f, periodic_radius(f));
}

Outcome run_stationarity(const StationarityArgs& a, const Common& c) {
    StationarityQuery q;
    q.window = periodic_window(a.family);
    q.kernel = WalkKernel{q.window.degree(), a.h};
    require(a.lambda > 0.0, "lambda", "must be positive");
    require(!a.times.empty(), "times", "needs at least one time");
    require(a.samples > 0, "samples", "must be positive");
    q.lambda = a.lambda;
    q.times = a.times;
    q.samples = a.samples;
    q.seed = c.seed;
    q.mean_tol = a.mean_tol;
    q.dispersion_tol = a.dispersion_tol;
    q.exec = c.exec();
    StationarityReport r = stationarity_test(q);

    Outcome o;
    std::vector<std::string> rows{csv_row({"seed", "t", "samples", "mean", "dispersion", "neighbor_corr", "mean_ok",
                                           "dispersion_ok", "corr_ok"})};
    for (const auto& row : r.rows)
        rows.push_back(csv_row({u64(c.seed), std::to_string(row.t), u64(row.samples), io::fmt(row.mean),
                                io::fmt(row.dispersion), io::fmt(row.neighbor_corr), row.mean_ok ? "1" : "0",
                                row.dispersion_ok ? "1" : "0", row.corr_ok ? "1" : "0"}));
    o.files["stationarity.csv"] = join(rows);
    o.warnings = r.warnings;
    o.pass = r.pass;
    o.summary = {{"window", io::to_json(q.window)}, {"lambda", a.lambda}, {"pass", r.pass}};
    o.files["summary.json"] = o.summary.dump(2) + "\n";
    return o;
}

struct RegenArgs {
    std::string family = "cycle:1000";
    double h = 1.0 / 3.0;
    double lambda = 1.0;
    std::vector<std::uint64_t> A{0};
    std::vector<int> times{10, 30, 100};
    std::uint64_t replicas = 20'000;
    double tolerance = 0.05;
};

Outcome run_regen(const RegenArgs& a, const Common& c) {
    RegenerationQuery q;
    q.window = periodic_window(a.family);
    q.kernel = WalkKernel{q.window.degree(), a.h};
    require(a.lambda > 0.0, "lambda", "must be positive");
    require(!a.times.empty(), "times", "needs at least one time");
    require(a.replicas > 0, "replicas", "must be positive");
    for (auto v : a.A) require(q.window.contains(v), "A", "vertex " + std::to_string(v) + " is outside the graph");
    q.lambda = a.lambda;
    q.A = a.A;
    q.times = a.times;
    q.replicas = a.replicas;
    q.seed = c.seed;
    q.tolerance = a.tolerance;
    q.exec = c.exec();
    RegenerationReport r = regeneration_test(q);

    Outcome o;
    std::vector<std::string> rows{
        csv_row({"seed", "replicas", "t", "v", "mean", "stderr", "expected", "deficit"})};
    for (const auto& row : r.rows)
        rows.push_back(csv_row({u64(c.seed), u64(a.replicas), std::to_string(row.t), u64(row.v), io::fmt(row.mean),
                                io::fmt(row.stderr_mean), io::fmt(row.expected), io::fmt(row.deficit)}));
    o.files["regeneration.csv"] = join(rows);
    o.pass = r.pass;
    o.summary = {{"window", io::to_json(q.window)}, {"lambda", a.lambda}, {"final_within", r.final_within},
                 {"deficit_monotone", r.deficit_monotone}, {"pass", r.pass}};
    o.files["summary.json"] = o.summary.dump(2) + "\n";
    return o;
}

struct MeetingArgs {
    std::string family = "cycle:4000";
    double h = 1.0 / 3.0;
    double lambda = 1.0;
    std::vector<int> times{10, 20, 50, 100, 200, 500, 1000};
    std::uint64_t replicas = 1000;
    std::uint64_t observers = 4;
    std::optional<double> slope_min, slope_max;
    double dispersion_min = 0.9;
    double dispersion_max = 1.1;
};

Outcome run_meetings(const MeetingArgs& a, const Common& c) {
    MeetingQuery q;
    q.window = periodic_window(a.family);
    q.kernel = WalkKernel{q.window.degree(), a.h};
    require(a.lambda > 0.0, "lambda", "must be positive");
    require(a.times.size() >= 2, "times", "needs at least two times for the fit");
    require(a.replicas > 1, "replicas", "needs at least two replicas");
    require(a.slope_min.has_value() == a.slope_max.has_value(), "slope-min",
            "slope-min and slope-max go together");
    q.lambda = a.lambda;
    q.times = a.times;
    q.replicas = a.replicas;
    q.observers = a.observers;
    q.seed = c.seed;
    if (a.slope_min) q.slope_bounds = std::pair{*a.slope_min, *a.slope_max};
    q.dispersion_bounds = {a.dispersion_min, a.dispersion_max};
    q.exec = c.exec();
    MeetingReport r = meeting_count_test(q);

    Outcome o;
    std::vector<std::string> rows{csv_row({"seed", "replicas", "t", "mean", "stderr", "dispersion"})};
    for (const auto& row : r.rows)
        rows.push_back(csv_row({u64(c.seed), u64(a.replicas), std::to_string(row.t), io::fmt(row.mean),
                                io::fmt(row.stderr_mean), io::fmt(row.dispersion)}));
    o.files["meetings.csv"] = join(rows);
    o.pass = r.pass;
    o.summary = {{"window", io::to_json(q.window)}, {"lambda", a.lambda},
                 {"slope", r.fit.slope}, {"slope_stderr", r.fit.slope_stderr},
                 {"nondecreasing", r.nondecreasing}, {"slope_ok", r.slope_ok},
                 {"dispersion_ok", r.dispersion_ok}, {"pass", r.pass}};
    o.files["summary.json"] = o.summary.dump(2) + "\n";
    return o;
}

// ---- explore ----------------------------------------------------------------

struct ExploreArgs {
    int d = 6;
    double h = 0.5;
    double K = 3.0;
    double lambda = 1.0;
    std::uint64_t replicas = 20;
    int stage_cap = 10;
    std::uint64_t n_mc = 16;
    std::optional<double> C;
};

Outcome run_explore(const ExploreArgs& a, const Common& c) {
    require(a.d >= 3, "d", "tree degree must be at least 3");
    require(a.replicas > 0, "replicas", "must be positive");
    require(a.stage_cap >= 1, "stage-cap", "must be positive");
    ExploreConfig cfg;
    try {
        cfg.params = ExploreParams::make(a.K, a.lambda, GraphFamily::regular_tree(a.d), a.h);
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("K/lambda/h: ") + e.what());
    }
    cfg.kernel = WalkKernel{a.d, a.h};
    cfg.stage_cap = a.stage_cap;
    cfg.n_mc = a.n_mc;

    auto traces = map_indexed<ExplorationTrace>(
        a.replicas,
        [&](std::size_t r) {
            ExploreConfig rc = cfg;
            rc.seed = rng::derive(c.seed, rng::Tag::Replica, r);
            return run_exploration(a.d, rc);
        },
        c.exec());

    Outcome o;
    std::vector<std::string> rows{
        csv_row({"seed", "replica", "stage", "A", "U", "C", "exposed", "added", "flagged"})};
    RunningStats growth;
    bool one = true;
    std::uint64_t flagged = 0, exhausted = 0;
    for (std::size_t r = 0; r < traces.size(); ++r) {
        const auto& tr = traces[r];
        for (const auto& s : tr.stages) {
            rows.push_back(csv_row({u64(c.seed), u64(r), std::to_string(s.stage), u64(s.A), u64(s.U), u64(s.C),
                                    u64(s.exposed), u64(s.added), s.flagged ? "1" : "0"}));
            flagged += s.flagged;
        }
        growth.add(tr.mean_growth(a.stage_cap));
        exhausted += tr.exhausted;
        one = one && recruits_in_one_cluster(tr);
    }
    o.files["stages.csv"] = join(rows);
    const auto& p = cfg.params;
    o.summary = {{"d", a.d}, {"h", a.h}, {"K", p.K}, {"lambda", p.lambda}, {"rho", p.rho}, {"s", p.s}, {"M", p.M},
                 {"rho_s", p.rho_s()}, {"good_level", p.good_level()}, {"mean_growth", io::to_json(growth)},
                 {"flagged_stages", flagged}, {"exhausted_runs", exhausted}, {"recruits_one_cluster", one}};
    if (a.C) {
        require(*a.C > 0.0, "C", "must be positive");
        o.summary["t_threshold"] = t_threshold(*a.C, p.lambda, p.rho);
    }
    if (flagged > 0) o.warnings.push_back(std::to_string(flagged) + " stages fell back to a non-good vertex");
    if (!one) o.invariant_failure = true;
    o.pass = one;
    o.files["summary.json"] = o.summary.dump(2) + "\n";
    return o;
}

// ---- brw ------------------------------------------------------------------------

struct BrwArgs {
    int d = 3;
    double h = 0.5;
    double lambda = 0.5;
    int generations = 5;
    std::uint64_t replicas = 100'000;
    int stability_horizon = 0;
    bool domination = false;
    int T = 10;
    int R = 14;
    std::uint64_t dom_replicas = 20'000;
};

Outcome run_brw(const BrwArgs& a, const Common& c) {
    require(a.d >= 3, "d", "tree degree must be at least 3");
    require(a.h >= 0.0 && a.h < 1.0, "h", "holding probability must lie in [0, 1)");
    require(a.lambda >= 0.0, "lambda", "must be nonnegative");
    require(a.generations >= 0, "generations", "must be nonnegative");
    require(a.replicas > 0, "replicas", "must be positive");
    BrwQuery q{a.d, a.h, a.lambda, a.generations, a.replicas, c.seed, 10'000'000, c.exec()};
    BrwMeansReport r = brw_root_means(q);
    SubcriticalVerdict verdict = subcritical_check(a.lambda, GraphFamily::regular_tree(a.d), a.h);

    Outcome o;
    std::vector<std::string> rows{
        csv_row({"seed", "replicas", "n", "mean", "stderr", "formula", "bound", "within_3se"})};
    for (const auto& row : r.rows)
        rows.push_back(csv_row({u64(c.seed), u64(a.replicas), std::to_string(row.n), io::fmt(row.q.mean),
                                io::fmt(row.q.stderr_mean()), io::fmt(row.formula.value), io::fmt(row.formula.bound),
                                row.within_3se ? "1" : "0"}));
    o.files["means.csv"] = join(rows);
    o.summary = {{"d", a.d}, {"h", a.h}, {"lambda", a.lambda},
                 {"subcritical", {{"rho", verdict.rho}, {"threshold", verdict.threshold},
                                  {"subcritical", verdict.subcritical}, {"note", verdict.note}}},
                 {"total_visits", io::to_json(r.total)}, {"truncated", r.truncated}, {"means_pass", r.pass}};
    if (r.truncated > 0) o.warnings.push_back(u64(r.truncated) + " populations hit the size cap");
    o.pass = r.pass;

    if (a.stability_horizon > 0) {
        HorizonStability s = total_visits_stability(q, a.stability_horizon);
        o.summary["stability"] = {{"horizon", s.horizon}, {"short", io::to_json(s.short_run)},
                                  {"long", io::to_json(s.long_run)}, {"diff", s.diff},
                                  {"joint_stderr", s.joint_stderr}, {"stable", s.stable}};
        o.pass = o.pass && s.stable;
    }
    if (a.domination) {
        require(a.T >= 0, "T", "must be nonnegative");
        require(a.R > a.T, "R", "window radius must exceed T");
        DominationQuery dq;
        dq.window = Window(GraphFamily::regular_tree(a.d), a.R);
        dq.kernel = WalkKernel{a.d, a.h};
        dq.lambda = a.lambda;
        dq.horizon = a.T;
        dq.replicas = a.dom_replicas;
        dq.seed = c.seed;
        dq.exec = c.exec();
        DominationReport d = domination_experiment(dq);
        json qs = json::array();
        for (const auto& qc : d.quantiles)
            qs.push_back({{"level", qc.level}, {"at", qc.at}, {"cdf_x", qc.cdf_x}, {"cdf_y", qc.cdf_y},
                          {"margin", qc.margin}, {"ok", qc.ok}});
        o.summary["domination"] = {{"x", io::to_json(d.x)}, {"y", io::to_json(d.y)},
                                   {"joint_stderr", d.joint_stderr}, {"mean_ok", d.mean_ok},
                                   {"quantiles", qs}, {"incomplete", d.incomplete}, {"pass", d.pass}};
        if (d.incomplete > 0) o.warnings.push_back(u64(d.incomplete) + " domination clusters were incomplete");
        o.pass = o.pass && d.pass;
    }
    o.files["summary.json"] = o.summary.dump(2) + "\n";
    return o;
}

// ---- treeperc -------------------------------------------------------------------

struct TreePercArgs {
    int d = 25;
    std::optional<double> lambda;
    std::optional<double> C;
    std::vector<int> times{1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<int> v_path{0, 0};
    std::uint64_t replicas = 10'000;
    int depth_cap = 24;
    std::uint64_t arrival_replicas = 0;
    int arrival_cap = 6;
};

Outcome run_treeperc(const TreePercArgs& a, const Common& c) {
    require(a.d >= 3, "d", "tree degree must be at least 3");
    require(!(a.lambda && a.C), "lambda", "give lambda or C, not both");
    require(a.replicas > 0, "replicas", "must be positive");
    for (int t : a.times) require(t >= 0 && t <= a.depth_cap, "times", "each time must lie in [0, depth-cap]");
    double C = 0.0;
    auto calibrated = calibrated_C(a.d);
    if (a.C) C = *a.C;
    else if (!a.lambda) {
        require(calibrated.has_value(), "C", "no calibrated constant for this d; give lambda or C");
        C = *calibrated;
    }
    double lambda = a.lambda ? *a.lambda : C * std::sqrt(static_cast<double>(a.d));
    require(lambda > 0.0, "lambda", "must be positive");

    GoodnessQuery q;
    q.d = a.d;
    q.lambda = lambda;
    q.times = a.times;
    q.v_path = a.v_path;
    q.replicas = a.replicas;
    q.seed = c.seed;
    q.depth_cap = a.depth_cap;
    q.exec = c.exec();
    GoodnessReport r;
    try {
        r = simultaneous_goodness_rate(q);
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("v-path: ") + e.what());
    }

    Outcome o;
    std::vector<std::string> rows{csv_row(
        {"seed", "replicas", "time", "p_u", "p_v", "p_both", "ci_lo", "ci_hi", "gap", "tol", "independent"})};
    for (const auto& row : r.rows)
        rows.push_back(csv_row({u64(c.seed), u64(row.n), std::to_string(2 * row.t), io::fmt(row.p_u),
                                io::fmt(row.p_v), io::fmt(row.p_both), io::fmt(row.both_ci.lo),
                                io::fmt(row.both_ci.hi), io::fmt(row.independence_gap),
                                io::fmt(row.independence_tol), row.independent ? "1" : "0"}));
    o.files["goodness.csv"] = join(rows);
    json at_least = json::array();
    for (double x : r.at_least) at_least.push_back(x);
    o.summary = {{"d", a.d}, {"lambda", lambda}, {"edge_open_target", edge_open_target(a.d)},
                 {"calibrated_C", calibrated ? json(*calibrated) : json(nullptr)},
                 {"both_good_at_least", at_least}, {"independent", r.pass}};
    o.pass = r.pass;

    if (a.arrival_replicas > 0) {
        require(a.arrival_cap >= 0, "arrival-cap", "must be nonnegative");
        auto fa = empirical_first_arrivals(a.d, lambda, a.arrival_cap, a.arrival_replicas, c.seed, c.exec());
        std::vector<std::string> arows{csv_row({"seed", "replicas", "t", "mean", "stderr", "alpha", "within_3se"})};
        bool ok = true;
        for (const auto& row : fa) {
            arows.push_back(csv_row({u64(c.seed), u64(a.arrival_replicas), std::to_string(row.t),
                                     io::fmt(row.count.mean), io::fmt(row.count.stderr_mean()), io::fmt(row.alpha),
                                     row.within_3se ? "1" : "0"}));
            ok = ok && row.within_3se;
        }
        o.files["first_arrivals.csv"] = join(arows);
        o.summary["first_arrivals_match"] = ok;
        o.pass = o.pass && ok;
    }
    o.files["summary.json"] = o.summary.dump(2) + "\n";
    return o;
}

// ---- driver ---------------------------------------------------------------------

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool given(const std::vector<std::string>& args, const std::string& key) {
    const std::string flag = "--" + key;
    for (const auto& a : args)
        if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
}

// Splices `--key=value` for every line of the --config file whose key was not
// given on the command line. Blank lines, [sections] and #/; comments are skipped.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (!path) return args;
    std::ifstream in(*path);
    if (!in) throw ConfigError("config: cannot read " + *path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " is not key=value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        if (key.empty() || key == "config") throw ConfigError("config: bad key on line " + std::to_string(lineno));
        if (!given(args, key)) args.push_back("--" + key + "=" + value);
    }
    return args;
}

void add_common(CLI::App* sub, Common& c, const std::string& name) {
    c.out = "snlab-out/" + name;
    sub->add_option("--config", c.config, "INI file with key=value lines; flags override it");
    sub->add_option("--seed", c.seed, "Master seed")->capture_default_str();
    sub->add_option("--out", c.out, "Output directory")->capture_default_str();
    sub->add_flag("--serial", c.serial, "Use the serial reference paths");
}

int emit(const std::string& name, CLI::App* sub, const Common& c, const Outcome& o) {
    json manifest;
    manifest["tool"] = "snlab";
    manifest["version"] = kVersion;
    manifest["subcommand"] = name;
    manifest["seed"] = c.seed;
    std::istringstream cfg(sub->config_to_str(true, false));
    std::string echoed, line;
    while (std::getline(cfg, line))
        if (line.rfind("config=", 0) != 0) echoed += line + "\n";
    manifest["config"] = echoed;
    json outputs = json::object();
    for (const auto& [file, content] : o.files) {
        io::write_file(std::filesystem::path(c.out) / file, content);
        outputs[file] = io::digest(content);
    }
    manifest["outputs"] = outputs;
    manifest["warnings"] = o.warnings;
    manifest["status"] = o.invariant_failure ? "invariant_failure" : (o.pass ? "pass" : "statistical_failure");
    io::write_file(std::filesystem::path(c.out) / "manifest.json", manifest.dump(2) + "\n");
    for (const auto& w : o.warnings) std::cerr << "warning: " << w << "\n";
    if (o.invariant_failure) return kInvariant;
    return o.pass ? kPass : kStatistical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo experiments for walker acquaintance clusters"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::string chosen;
    std::deque<Common> commons;
    Common* common = nullptr;
    std::function<Outcome()> job;
    CLI::App* active = nullptr;
    auto bind = [&](CLI::App* sub, const std::string& name, std::function<Outcome()> fn) {
        Common& c = commons.emplace_back();
        add_common(sub, c, name);
        sub->callback([&, sub, name, fn, pc = &c] {
            chosen = name;
            active = sub;
            common = pc;
            job = fn;
        });
    };

    BracketArgs br;
    auto* s_br = app.add_subcommand("bracket", "Critical density bracket for the regular tree");
    s_br->add_option("--d", br.d, "Tree degree")->capture_default_str();
    s_br->add_option("--h", br.h, "Holding probability")->capture_default_str();
    s_br->add_flag("--scan", br.scan, "Also check lower < upper for d in [3, 64] at both holdings");
    bind(s_br, "bracket", [&] { return run_bracket(br, *common); });

    KernelArgs kr;
    auto* s_k = app.add_subcommand("kernels", "Transition table of the lazy tree walk and its bounds");
    s_k->add_option("--d", kr.d, "Tree degree")->capture_default_str();
    s_k->add_option("--h", kr.h, "Holding probability")->capture_default_str();
    s_k->add_option("--T", kr.T, "Largest time in the table")->capture_default_str();
    s_k->add_option("--bound-horizon", kr.bound_horizon, "Largest time for the bound checks")->capture_default_str();
    s_k->add_flag("--oracle", kr.oracle, "Compare with exhaustive walk enumeration");
    bind(s_k, "kernels", [&] { return run_kernels(kr, *common); });

    SweepArgs sw;
    auto* s_sw = app.add_subcommand("sweep", "Pair connectivity over a density grid");
    s_sw->add_option("--family", sw.family, "tree:D, cycle:N or torus:DIM:SIDE")->capture_default_str();
    s_sw->add_option("--h", sw.h, "Holding probability")->capture_default_str();
    s_sw->add_option("--grid", sw.grid, "Increasing densities")->delimiter(',')->capture_default_str();
    s_sw->add_option("--T", sw.T, "Time horizon")->capture_default_str();
    s_sw->add_option("--R", sw.R, "Tree window radius")->capture_default_str();
    s_sw->add_option("--u", sw.u, "First vertex (tree path or coordinates)")->delimiter(',');
    s_sw->add_option("--v", sw.v, "Second vertex (tree path or coordinates)")->delimiter(',')->capture_default_str();
    s_sw->add_option("--replicas", sw.replicas, "Replicas")->capture_default_str();
    s_sw->add_option("--min-samples", sw.min_samples, "Uncensored samples needed for a crossover")
        ->capture_default_str();
    s_sw->add_option("--max-walkers", sw.max_walkers, "Walker budget per replica")->capture_default_str();
    bind(s_sw, "sweep", [&] { return run_sweep(sw, *common); });

    StationarityArgs st;
    auto* s_st = app.add_subcommand("stationarity", "Occupation counts at fixed times");
    s_st->add_option("--family", st.family, "cycle:N or torus:DIM:SIDE")->capture_default_str();
    s_st->add_option("--h", st.h, "Holding probability")->capture_default_str();
    s_st->add_option("--lambda", st.lambda, "Density")->capture_default_str();
    s_st->add_option("--times", st.times, "Times")->delimiter(',')->capture_default_str();
    s_st->add_option("--samples", st.samples, "Vertex draws per time")->capture_default_str();
    s_st->add_option("--mean-tol", st.mean_tol, "Mean tolerance (negative: 3 sqrt(lambda/N))")
        ->capture_default_str();
    s_st->add_option("--dispersion-tol", st.dispersion_tol, "Dispersion tolerance")->capture_default_str();
    bind(s_st, "stationarity", [&] { return run_stationarity(st, *common); });

    RegenArgs rg;
    auto* s_rg = app.add_subcommand("regen", "Occupation by walkers from outside a finite set");
    s_rg->add_option("--family", rg.family, "cycle:N or torus:DIM:SIDE")->capture_default_str();
    s_rg->add_option("--h", rg.h, "Holding probability")->capture_default_str();
    s_rg->add_option("--lambda", rg.lambda, "Density")->capture_default_str();
    s_rg->add_option("--A", rg.A, "Vertex ids of the set")->delimiter(',')->capture_default_str();
    s_rg->add_option("--times", rg.times, "Times")->delimiter(',')->capture_default_str();
    s_rg->add_option("--replicas", rg.replicas, "Replicas")->capture_default_str();
    s_rg->add_option("--tolerance", rg.tolerance, "Relative tolerance at the last time")->capture_default_str();
    bind(s_rg, "regen", [&] { return run_regen(rg, *common); });

    MeetingArgs mt;
    auto* s_mt = app.add_subcommand("meetings", "Distinct walkers met along a fixed path");
    s_mt->add_option("--family", mt.family, "cycle:N or torus:DIM:SIDE")->capture_default_str();
    s_mt->add_option("--h", mt.h, "Holding probability")->capture_default_str();
    s_mt->add_option("--lambda", mt.lambda, "Density")->capture_default_str();
    s_mt->add_option("--times", mt.times, "Times")->delimiter(',')->capture_default_str();
    s_mt->add_option("--replicas", mt.replicas, "Replicas")->capture_default_str();
    s_mt->add_option("--observers", mt.observers, "Fixed observers per replica")->capture_default_str();
    s_mt->add_option("--slope-min", mt.slope_min, "Lower bound on the log-log slope");
    s_mt->add_option("--slope-max", mt.slope_max, "Upper bound on the log-log slope");
    s_mt->add_option("--dispersion-min", mt.dispersion_min, "Lower dispersion bound")->capture_default_str();
    s_mt->add_option("--dispersion-max", mt.dispersion_max, "Upper dispersion bound")->capture_default_str();
    bind(s_mt, "meetings", [&] { return run_meetings(mt, *common); });

    ExploreArgs ex;
    auto* s_ex = app.add_subcommand("explore", "Staged cluster exploration on a regular tree");
    s_ex->add_option("--d", ex.d, "Tree degree")->capture_default_str();
    s_ex->add_option("--h", ex.h, "Holding probability")->capture_default_str();
    s_ex->add_option("--K", ex.K, "Goodness constant (>= 3)")->capture_default_str();
    s_ex->add_option("--lambda", ex.lambda, "Density")->capture_default_str();
    s_ex->add_option("--replicas", ex.replicas, "Independent explorations")->capture_default_str();
    s_ex->add_option("--stage-cap", ex.stage_cap, "Stages per exploration")->capture_default_str();
    s_ex->add_option("--n-mc", ex.n_mc, "Monte Carlo draws per goodness test")->capture_default_str();
    s_ex->add_option("--C", ex.C, "Constant for the time threshold");
    bind(s_ex, "explore", [&] { return run_explore(ex, *common); });

    BrwArgs bw;
    auto* s_bw = app.add_subcommand("brw", "Branching random walk means and domination");
    s_bw->add_option("--d", bw.d, "Tree degree")->capture_default_str();
    s_bw->add_option("--h", bw.h, "Holding probability")->capture_default_str();
    s_bw->add_option("--lambda", bw.lambda, "Density")->capture_default_str();
    s_bw->add_option("--generations", bw.generations, "Stages for the means")->capture_default_str();
    s_bw->add_option("--replicas", bw.replicas, "Populations")->capture_default_str();
    s_bw->add_option("--stability-horizon", bw.stability_horizon, "H for the H vs 2H check (0 skips)")
        ->capture_default_str();
    s_bw->add_flag("--domination", bw.domination, "Run the cluster vs branching walk comparison");
    s_bw->add_option("--T", bw.T, "Domination horizon")->capture_default_str();
    s_bw->add_option("--R", bw.R, "Domination window radius")->capture_default_str();
    s_bw->add_option("--dom-replicas", bw.dom_replicas, "Domination replicas")->capture_default_str();
    bind(s_bw, "brw", [&] { return run_brw(bw, *common); });

    TreePercArgs tp;
    auto* s_tp = app.add_subcommand("treeperc", "Goodness certificates on the right trees");
    s_tp->add_option("--d", tp.d, "Tree degree")->capture_default_str();
    s_tp->add_option("--lambda", tp.lambda, "Density (default C sqrt(d))");
    s_tp->add_option("--C", tp.C, "Constant in lambda = C sqrt(d) (default calibrated)");
    s_tp->add_option("--times", tp.times, "Times t (goodness at 2t)")->delimiter(',')->capture_default_str();
    s_tp->add_option("--v-path", tp.v_path, "Path from u to v among right children")->delimiter(',')
        ->capture_default_str();
    s_tp->add_option("--replicas", tp.replicas, "Replicas")->capture_default_str();
    s_tp->add_option("--depth-cap", tp.depth_cap, "Depth cap")->capture_default_str();
    s_tp->add_option("--arrival-replicas", tp.arrival_replicas, "Replicas for the first-arrival cross-check")
        ->capture_default_str();
    s_tp->add_option("--arrival-cap", tp.arrival_cap, "Largest time in the cross-check")->capture_default_str();
    bind(s_tp, "treeperc", [&] { return run_treeperc(tp, *common); });

    try {
        std::vector<std::string> args = expand_config(argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return kInvalid;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInvalid;
    }

    try {
        Outcome o = job();
        return emit(chosen, active, *common, o);
    } catch (const ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::domain_error& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::logic_error& e) {
        std::cerr << "invariant failure: " << e.what() << "\n";
        return kInvariant;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvariant;
    }
}
