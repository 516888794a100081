#include "snlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "snlab/clusters.hpp"
#include "snlab/field.hpp"
#include "snlab/local_field.hpp"

namespace snlab {

namespace {

// Visits every walker of the full field at density lambda (same walkers and
// trajectories as realize_field) without storing the field.
template <class Fn>
void for_each_walker(const CouplingStream& stream, SiteSpace& space, const WalkKernel& kernel, double lambda,
                     int horizon, std::vector<Site>& buf, Fn&& fn) {
    buf.resize(static_cast<std::size_t>(horizon) + 1);
    const std::size_t n = space.size();
    for (std::size_t s = 0; s < n; ++s) {
        Site site = static_cast<Site>(s);
        std::uint64_t key = space.key(site);
        rng::Stream arr{rng::derive(stream.seed(), rng::Tag::Arrivals, key)};
        double a = 0.0;
        for (std::uint64_t i = 0;; ++i) {
            a += arr.exp1(i);
            if (a > lambda) break;
            std::uint32_t alive = walk_path(space, kernel, stream.walk(key, i), site, horizon, buf);
            fn(site, std::span<const Site>(buf), alive);
        }
    }
}

void require_periodic_full(const Window& w, const char* what) {
    if (!w.family().is_periodic() || !w.covers_graph())
        throw std::domain_error(std::string(what) + " requires a periodic window covering the graph");
}

// (a + b - c) coordinate-wise modulo side, on vertex codes.
VertexId add_sub(const GraphFamily& f, VertexId a, VertexId b, VertexId c) {
    if (f.dim == 1) {
        std::uint64_t n = f.side;
        return (a + b + n - c) % n;
    }
    VertexId out = 0, stride = 1;
    for (int i = 0; i < f.dim; ++i) {
        std::uint64_t x = (a % f.side + b % f.side + f.side - c % f.side) % f.side;
        out += x * stride;
        stride *= f.side;
        a /= f.side;
        b /= f.side;
        c /= f.side;
    }
    return out;
}

}  // namespace

StationarityReport stationarity_test(const StationarityQuery& q) {
    if (!(q.lambda > 0.0)) throw std::domain_error("lambda must be positive");
    if (q.times.empty()) throw std::invalid_argument("no times given");
    StationarityReport rep;
    if (q.window.family().is_tree())
        rep.warnings.push_back("tree window: occupation near the boundary is biased");
    auto space = std::make_shared<SiteSpace>(SiteSpace::explicit_window(q.window));
    const std::size_t n = space->size();
    const std::uint64_t replicas = (q.samples + n - 1) / n;
    const int T = *std::max_element(q.times.begin(), q.times.end());
    const std::size_t nt = q.times.size();

    struct Acc {
        std::vector<RunningStats> counts;
        std::vector<double> sx, sy, sxx, syy, sxy;
        std::vector<std::uint64_t> pairs;
    };
    auto per_replica = map_indexed<Acc>(
        replicas,
        [&](std::size_t r) {
            auto stream = CouplingStream::for_replica(q.seed, r);
            std::vector<std::vector<std::uint32_t>> occ(nt, std::vector<std::uint32_t>(n, 0));
            std::vector<Site> buf;
            for_each_walker(stream, *space, q.kernel, q.lambda, T, buf,
                            [&](Site, std::span<const Site> traj, std::uint32_t alive) {
                                for (std::size_t j = 0; j < nt; ++j)
                                    if (static_cast<std::uint32_t>(q.times[j]) < alive) ++occ[j][traj[static_cast<std::size_t>(q.times[j])]];
                            });
            Acc a;
            a.counts.resize(nt);
            a.sx.assign(nt, 0);
            a.sy.assign(nt, 0);
            a.sxx.assign(nt, 0);
            a.syy.assign(nt, 0);
            a.sxy.assign(nt, 0);
            a.pairs.assign(nt, 0);
            for (std::size_t j = 0; j < nt; ++j) {
                for (std::size_t s = 0; s < n; ++s) {
                    double x = occ[j][s];
                    a.counts[j].add(x);
                    Site nb = space->neighbor(static_cast<Site>(s), 0);
                    if (nb == kNoSite) continue;
                    double y = occ[j][nb];
                    a.sx[j] += x;
                    a.sy[j] += y;
                    a.sxx[j] += x * x;
                    a.syy[j] += y * y;
                    a.sxy[j] += x * y;
                    ++a.pairs[j];
                }
            }
            return a;
        },
        q.exec);

    rep.pass = true;
    for (std::size_t j = 0; j < nt; ++j) {
        RunningStats st;
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        double np = 0;
        for (const auto& a : per_replica) {
            st.merge(a.counts[j]);
            sx += a.sx[j];
            sy += a.sy[j];
            sxx += a.sxx[j];
            syy += a.syy[j];
            sxy += a.sxy[j];
            np += static_cast<double>(a.pairs[j]);
        }
        StationarityRow row;
        row.t = q.times[j];
        row.samples = st.n;
        row.mean = st.mean;
        row.dispersion = st.dispersion();
        double cov = sxy / np - (sx / np) * (sy / np);
        double vx = sxx / np - (sx / np) * (sx / np), vy = syy / np - (sy / np) * (sy / np);
        row.neighbor_corr = vx > 0 && vy > 0 ? cov / std::sqrt(vx * vy) : 0.0;
        double mean_tol = q.mean_tol > 0 ? q.mean_tol : 3.0 * std::sqrt(q.lambda / static_cast<double>(st.n));
        row.mean_ok = std::abs(row.mean - q.lambda) <= mean_tol;
        row.dispersion_ok = std::abs(row.dispersion - 1.0) <= q.dispersion_tol;
        row.corr_ok = std::abs(row.neighbor_corr) <= 3.0 / std::sqrt(np);
        rep.pass = rep.pass && row.mean_ok && row.dispersion_ok && row.corr_ok;
        rep.rows.push_back(row);
    }
    return rep;
}

std::vector<double> periodic_kernel_row(const Window& w, const WalkKernel& k, VertexId x, int t) {
    require_periodic_full(w, "periodic_kernel_row");
    SiteSpace sp = SiteSpace::explicit_window(w);
    const std::size_t n = sp.size();
    std::vector<double> p(n, 0.0), next(n, 0.0);
    p[sp.site_of(x)] = 1.0;
    const double move = (1.0 - k.holding) / k.degree;
    for (int s = 0; s < t; ++s) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (p[i] == 0.0) continue;
            next[i] += k.holding * p[i];
            for (int j = 0; j < k.degree; ++j) next[sp.neighbor(static_cast<Site>(i), j)] += move * p[i];
        }
        p.swap(next);
    }
    return p;
}

RegenerationReport regeneration_test(const RegenerationQuery& q) {
    require_periodic_full(q.window, "regeneration_test");
    if (q.times.empty()) throw std::invalid_argument("no times given");
    const GraphFamily& fam = q.window.family();
    std::vector<VertexId> A = q.A;
    std::sort(A.begin(), A.end());
    std::vector<VertexId> report = q.report;
    if (report.empty()) report = A.empty() ? std::vector<VertexId>{0} : A;
    auto space = std::make_shared<SiteSpace>(SiteSpace::explicit_window(q.window));
    const double n = static_cast<double>(space->size());
    const int T = *std::max_element(q.times.begin(), q.times.end());
    const std::size_t nt = q.times.size(), nv = report.size();

    auto per_replica = map_indexed<std::vector<double>>(
        q.replicas,
        [&](std::size_t r) {
            auto stream = CouplingStream::for_replica(q.seed, r);
            std::vector<double> acc(nt * nv, 0.0);
            std::vector<Site> buf;
            for_each_walker(stream, *space, q.kernel, q.lambda, T, buf,
                            [&](Site origin, std::span<const Site> traj, std::uint32_t) {
                                for (std::size_t j = 0; j < nt; ++j) {
                                    Site p = traj[static_cast<std::size_t>(q.times[j])];
                                    for (std::size_t k = 0; k < nv; ++k) {
                                        // Translation taking the walker's position to v moves its origin here.
                                        VertexId o = add_sub(fam, report[k], origin, p);
                                        if (!std::binary_search(A.begin(), A.end(), o)) acc[j * nv + k] += 1.0;
                                    }
                                }
                            });
            for (double& x : acc) x /= n;
            return acc;
        },
        q.exec);

    RegenerationReport rep;
    std::vector<std::vector<double>> rows_p(nv);
    for (std::size_t k = 0; k < nv; ++k) rows_p[k].resize(nt);
    for (std::size_t j = 0; j < nt; ++j) {
        for (std::size_t k = 0; k < nv; ++k) {
            RunningStats st;
            for (const auto& acc : per_replica) st.add(acc[j * nv + k]);
            auto row_kernel = periodic_kernel_row(q.window, q.kernel, report[k], q.times[j]);
            double pa = 0.0;
            for (VertexId a : A) pa += row_kernel[space->site_of(a)];
            RegenerationRow row;
            row.t = q.times[j];
            row.v = report[k];
            row.mean = st.mean;
            row.stderr_mean = st.stderr_mean();
            row.expected = q.lambda * (1.0 - pa);
            row.deficit = q.lambda - st.mean;
            rep.rows.push_back(row);
        }
    }
    // rows are time-major: index j * nv + k
    int last = T;
    rep.final_within = true;
    rep.deficit_monotone = true;
    std::vector<std::size_t> order(nt);
    for (std::size_t j = 0; j < nt; ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return q.times[a] < q.times[b]; });
    for (std::size_t k = 0; k < nv; ++k) {
        for (std::size_t i = 0; i < nt; ++i) {
            const auto& row = rep.rows[order[i] * nv + k];
            if (row.t == last && std::abs(row.mean - q.lambda) > q.tolerance * q.lambda) rep.final_within = false;
            if (i > 0) {
                const auto& prev = rep.rows[order[i - 1] * nv + k];
                double se = std::sqrt(prev.stderr_mean * prev.stderr_mean + row.stderr_mean * row.stderr_mean);
                if (row.deficit > prev.deficit + 3.0 * se) rep.deficit_monotone = false;
            }
        }
    }
    rep.pass = rep.final_within && rep.deficit_monotone;
    return rep;
}

MeetingReport meeting_count_test(const MeetingQuery& q) {
    require_periodic_full(q.window, "meeting_count_test");
    if (q.times.empty()) throw std::invalid_argument("no times given");
    std::vector<int> times = q.times;
    std::sort(times.begin(), times.end());
    const int T = times.back();
    const GraphFamily& fam = q.window.family();
    auto space = std::make_shared<SiteSpace>(SiteSpace::explicit_window(q.window));
    const std::size_t n = space->size();
    std::vector<VertexId> path = q.path;
    if (path.empty()) path.assign(static_cast<std::size_t>(T) + 1, 0);
    if (path.size() < static_cast<std::size_t>(T) + 1) throw std::invalid_argument("path shorter than the horizon");
    if (q.observers == 0 || q.observers > n) throw std::invalid_argument("bad observer count");
    // Observer m follows the path shifted by m * (side / observers) along the first axis.
    std::vector<std::int32_t> observer_of(n, -1);
    for (std::uint64_t m = 0; m < q.observers; ++m) observer_of[m * (fam.side / q.observers)] = static_cast<std::int32_t>(m);
    const std::size_t nt = times.size();

    struct Acc {
        std::vector<double> pooled;                 // per t
        std::vector<std::vector<double>> observed;  // per observer, per t
    };
    auto per_replica = map_indexed<Acc>(
        q.replicas,
        [&](std::size_t r) {
            auto stream = CouplingStream::for_replica(q.seed, r);
            Acc a;
            a.pooled.assign(nt, 0.0);
            a.observed.assign(q.observers, std::vector<double>(nt, 0.0));
            std::vector<std::uint32_t> stamp(n, 0);
            std::uint32_t tag = 0;
            std::vector<Site> buf;
            std::vector<int> first_hit(q.observers);
            for_each_walker(stream, *space, q.kernel, q.lambda, T, buf,
                            [&](Site, std::span<const Site> traj, std::uint32_t alive) {
                                ++tag;
                                std::fill(first_hit.begin(), first_hit.end(), -1);
                                std::uint64_t distinct = 0;
                                std::size_t j = 0;
                                for (int i = 0; i <= T; ++i) {
                                    if (static_cast<std::uint32_t>(i) < alive) {
                                        VertexId d = add_sub(fam, traj[static_cast<std::size_t>(i)], 0, path[static_cast<std::size_t>(i)]);
                                        if (stamp[d] != tag) {
                                            stamp[d] = tag;
                                            ++distinct;
                                            if (observer_of[d] >= 0) first_hit[static_cast<std::size_t>(observer_of[d])] = i;
                                        }
                                    }
                                    while (j < nt && times[j] == i) a.pooled[j++] += static_cast<double>(distinct);
                                }
                                for (std::uint64_t m = 0; m < q.observers; ++m) {
                                    if (first_hit[m] < 0) continue;
                                    for (std::size_t k = 0; k < nt; ++k)
                                        if (first_hit[m] <= times[k]) a.observed[m][k] += 1.0;
                                }
                            });
            for (double& x : a.pooled) x /= static_cast<double>(n);
            return a;
        },
        q.exec);

    MeetingReport rep;
    std::vector<double> lx, ly;
    rep.nondecreasing = true;
    rep.dispersion_ok = true;
    for (std::size_t k = 0; k < nt; ++k) {
        RunningStats pooled, obs;
        for (const auto& a : per_replica) {
            pooled.add(a.pooled[k]);
            for (const auto& o : a.observed) obs.add(o[k]);
        }
        MeetingRow row{times[k], pooled.mean, pooled.stderr_mean(), obs.dispersion()};
        if (!rep.rows.empty() && row.mean < rep.rows.back().mean) rep.nondecreasing = false;
        if (row.dispersion < q.dispersion_bounds.first || row.dispersion > q.dispersion_bounds.second)
            rep.dispersion_ok = false;
        rep.rows.push_back(row);
        if (times[k] > 0 && row.mean > 0) {
            lx.push_back(std::log(static_cast<double>(times[k])));
            ly.push_back(std::log(row.mean));
        }
    }
    if (lx.size() >= 2) rep.fit = ols(lx, ly);
    rep.slope_ok = !q.slope_bounds || (rep.fit.slope >= q.slope_bounds->first && rep.fit.slope <= q.slope_bounds->second);
    rep.pass = rep.nondecreasing && rep.dispersion_ok && rep.slope_ok;
    return rep;
}

Bracket lambda_c_bracket(const GraphFamily& family, double h) {
    validate_holding(h);
    Bracket b;
    b.rho = spectral_radius_lazy(family, h);
    if (!family.is_tree()) {
        b.lower = 0.0;
        b.upper = std::numeric_limits<double>::infinity();
        return b;
    }
    const int d = family.degree;
    b.lower = 0.5 * (1.0 / b.rho - 1.0);
    if (std::abs(h - 1.0 / (d + 1)) < 1e-12) {
        b.upper = (d + 1 + 2.0 / (1.0 - b.rho)) * std::log(8.0);
    } else if (std::abs(h - 0.5) < 1e-12) {
        b.upper = 20.0 * std::log(static_cast<double>(d)) / (1.0 - b.rho);
    } else {
        throw std::domain_error("bracket is available for h = 1/(d+1) or h = 1/2 only");
    }
    return b;
}

Bracket lambda_c_bracket(int d, double h) { return lambda_c_bracket(GraphFamily::regular_tree(d), h); }

SweepResult lambda_sweep(const SweepQuery& q) {
    if (q.grid.empty()) throw std::invalid_argument("empty lambda grid");
    if (!std::is_sorted(q.grid.begin(), q.grid.end()) || q.grid.front() <= 0.0)
        throw std::invalid_argument("lambda grid must be positive and ascending");
    const std::size_t ng = q.grid.size();
    const bool local = q.window.family().is_tree();
    std::shared_ptr<SiteSpace> shared;
    if (!local) shared = std::make_shared<SiteSpace>(SiteSpace::explicit_window(q.window));

    struct Rep {
        std::vector<std::uint8_t> eligible, connected, censored;
    };
    auto per_replica = map_indexed<Rep>(
        q.replicas,
        [&](std::size_t r) {
            auto stream = CouplingStream::for_replica(q.seed, r);
            Rep out;
            out.eligible.resize(ng);
            out.connected.resize(ng);
            out.censored.resize(ng);
            if (local) {
                auto space = std::make_shared<SiteSpace>(SiteSpace::lazy_tree(q.window));
                Site su = space->site_of(q.u), sv = space->site_of(q.v);
                LocalFieldConfig cfg;
                cfg.horizon = q.horizon;
                cfg.lambda_max = q.grid.back();
                cfg.sources = su == sv ? std::vector<Site>{su} : std::vector<Site>{su, sv};
                cfg.levels = q.grid;
                cfg.has_pair = true;
                cfg.u = su;
                cfg.v = sv;
                cfg.stop_when_connected = true;
                cfg.max_walkers = q.max_walkers;
                auto res = explore_local_field(stream, space, q.kernel, cfg);
                for (std::size_t i = 0; i < ng; ++i) {
                    const auto& lo = res.levels[i];
                    out.eligible[i] = lo.u_occupied && lo.v_occupied;
                    out.connected[i] = out.eligible[i] && lo.connected;
                    out.censored[i] = out.eligible[i] && !lo.connected && (lo.touches_boundary || !lo.complete);
                }
            } else {
                Site su = shared->site_of(q.u), sv = shared->site_of(q.v);
                WalkerField f = realize_field(stream, shared, q.kernel, q.grid.back(), q.horizon, {}, Exec::Serial);
                auto T = static_cast<std::uint32_t>(q.horizon);
                for (std::size_t i = 0; i < ng; ++i) {
                    double g = q.grid[i];
                    bool eu = !f.walkers_at_origin(su, g).empty(), ev = !f.walkers_at_origin(sv, g).empty();
                    out.eligible[i] = eu && ev;
                    if (!out.eligible[i]) continue;
                    Meetings m = simulate_meetings(f, g);
                    out.connected[i] = connected(f, m.clusters, su, sv, T, g);
                    if (!out.connected[i]) {
                        auto cu = friend_cluster(f, m.clusters, su, T, g);
                        auto cv = friend_cluster(f, m.clusters, sv, T, g);
                        cu.insert(cu.end(), cv.begin(), cv.end());
                        out.censored[i] = touches_boundary(f, cu, T);
                    }
                }
            }
            return out;
        },
        q.exec);

    SweepResult res;
    res.curve.resize(ng);
    std::uint64_t cens = 0, elig = 0;
    for (std::size_t r = 0; r < per_replica.size(); ++r) {
        const auto& rp = per_replica[r];
        for (std::size_t i = 1; i < ng; ++i)
            if (rp.connected[i - 1] && !rp.connected[i]) res.monotone = false;
    }
    if (!res.monotone) throw std::logic_error("coupled sweep indicator decreased along the lambda grid");
    for (std::size_t i = 0; i < ng; ++i) {
        auto& pt = res.curve[i];
        pt.lambda = q.grid[i];
        pt.est.horizon = q.horizon;
        pt.est.replicas = q.replicas;
        for (const auto& rp : per_replica) {
            pt.est.eligible += rp.eligible[i];
            pt.est.connected += rp.connected[i];
            pt.est.censored += rp.censored[i];
        }
        pt.est.finish();
        cens += pt.est.censored;
        elig += pt.est.eligible;
        if (!res.crossover && pt.est.defined && pt.est.eligible - pt.est.censored >= q.min_samples &&
            pt.est.estimate >= 0.5)
            res.crossover = pt.lambda;
    }
    res.censored_fraction = elig > 0 ? static_cast<double>(cens) / static_cast<double>(elig) : 0.0;
    return res;
}

}  // namespace snlab
