#include "snlab/treeperc.hpp"

#include <cmath>
#include <stdexcept>

#include "snlab/field.hpp"
#include "snlab/graphs.hpp"
#include "snlab/kernels.hpp"

namespace snlab {

PercTree right_tree_u(int d, std::vector<int> v_path, int depth_cap, std::uint64_t root_key) {
    if (d < 3) throw std::domain_error("tree degree must be at least 3");
    int l = left_count(d);
    PercTree t;
    t.root_children = d - l;
    t.children = d - l - 1;
    t.depth_cap = depth_cap;
    t.root_key = root_key;
    for (std::size_t i = 0; i < v_path.size(); ++i)
        if (v_path[i] < 0 || v_path[i] >= t.out_degree(static_cast<int>(i)))
            throw std::domain_error("v path leaves the right tree");
    t.excluded = std::move(v_path);
    return t;
}

PercTree right_tree_v(int d, int depth_cap, std::uint64_t root_key) {
    if (d < 3) throw std::domain_error("tree degree must be at least 3");
    int l = left_count(d);
    PercTree t;
    t.root_children = d - l - 1;
    t.children = d - l - 1;
    t.depth_cap = depth_cap;
    t.root_key = root_key;
    return t;
}

ArrivalStream::ArrivalStream(int d, double lambda, int time_cap, std::uint64_t seed)
    : d_(d), lambda_(lambda), seed_(seed) {
    if (d < 3) throw std::domain_error("tree degree must be at least 3");
    if (!(lambda >= 0.0)) throw std::domain_error("lambda must be nonnegative");
    if (time_cap < 0) throw std::domain_error("time cap must be nonnegative");
    const double h = 1.0 / (d + 1);
    const double move = (1.0 - h) / d;
    alpha_.resize(static_cast<std::size_t>(time_cap) + 1);
    alpha_[0] = lambda * move;
    for (int s = 1; s <= time_cap; ++s)
        alpha_[static_cast<std::size_t>(s)] = lambda * move * walk_survival_in_left_subtree(d, h, s);
}

double ArrivalStream::alpha(int s) const {
    if (s < 0 || s > time_cap()) throw std::out_of_range("time outside the arrival stream");
    return alpha_[static_cast<std::size_t>(s)];
}

std::uint64_t ArrivalStream::count(std::uint64_t edge_key, bool upward, int s) const {
    double a = alpha(s);
    std::uint64_t k = slot_key(edge_key, upward, s);
    if (!pinned_.empty()) {
        auto it = pinned_.find(k);
        if (it != pinned_.end()) return it->second;
    }
    if (default_) return *default_;
    rng::Stream st{rng::derive(seed_, rng::Tag::TreeArrivals, edge_key, upward ? 1 : 0, static_cast<std::uint64_t>(s))};
    return rng::poisson_inverse(a, st.at(0));
}

void ArrivalStream::set_count(std::uint64_t edge_key, bool upward, int s, std::uint64_t n) {
    pinned_[slot_key(edge_key, upward, s)] = n;
}

ArrivalStream sample_arrivals(int d, double h, double lambda, int time_cap, std::uint64_t seed) {
    if (std::abs(h - 1.0 / (d + 1)) > 1e-12) throw std::domain_error("arrival law requires h = 1/(d+1)");
    return ArrivalStream(d, lambda, time_cap, seed);
}

namespace {

struct Search {
    const ArrivalStream& stream;
    const PercTree& tree;
    int t;
    std::vector<int> path;

    bool dfs(std::uint64_t key, int depth, bool on_excluded) {
        if (depth == t) return true;
        const auto& ex = tree.excluded;
        for (int j = 0; j < tree.out_degree(depth); ++j) {
            bool follows = on_excluded && static_cast<std::size_t>(depth) < ex.size() && ex[static_cast<std::size_t>(depth)] == j;
            if (follows && static_cast<std::size_t>(depth) + 1 == ex.size()) continue;
            std::uint64_t child = PercTree::child_key(key, j);
            if (!stream.J(child, false, depth)) continue;
            if (!stream.J(child, true, 2 * t - depth - 1)) continue;
            path.push_back(j);
            if (dfs(child, depth + 1, follows)) return true;
            path.pop_back();
        }
        return false;
    }
};

}  // namespace

std::optional<GoodCertificate> good_at_time(const ArrivalStream& stream, const PercTree& tree, int t) {
    if (t < 0 || t > tree.depth_cap) throw std::domain_error("t outside the depth cap");
    if (2 * t - 1 > stream.time_cap()) throw std::domain_error("arrival stream too short for time 2t");
    Search s{stream, tree, t, {}};
    if (!s.dfs(tree.root_key, 0, !tree.excluded.empty())) return std::nullopt;
    return GoodCertificate{t, std::move(s.path)};
}

double survival_probability(int k, double p, int depth) {
    double s = 0.0;
    for (int i = 0; i < depth; ++i) s = std::pow(1.0 - p + p * s, k);
    return 1.0 - s;
}

double extinction_probability(int k, double p) {
    double s = 0.0;
    for (int i = 0; i < 100'000; ++i) {
        double next = std::pow(1.0 - p + p * s, k);
        if (std::abs(next - s) < 1e-15) return next;
        s = next;
    }
    return s;
}

GoodnessReport simultaneous_goodness_rate(const GoodnessQuery& q) {
    if (q.replicas == 0) throw std::domain_error("replicas must be positive");
    if (q.times.empty()) throw std::invalid_argument("no times given");
    int tmax = 0;
    for (int t : q.times) tmax = std::max(tmax, t);
    const std::uint64_t ku = rng::mix64(0x7511ULL), kv = rng::mix64(0x7522ULL);
    PercTree tu = right_tree_u(q.d, q.v_path, q.depth_cap, ku);
    PercTree tv = right_tree_v(q.d, q.depth_cap, kv);

    struct Flags {
        std::vector<std::uint8_t> u, v;
    };
    auto runs = map_indexed<Flags>(
        q.replicas,
        [&](std::size_t r) {
            ArrivalStream st(q.d, q.lambda, 2 * tmax, rng::derive(q.seed, rng::Tag::Replica, r));
            Flags f;
            for (int t : q.times) {
                f.u.push_back(good_at_time(st, tu, t).has_value());
                f.v.push_back(good_at_time(st, tv, t).has_value());
            }
            return f;
        },
        q.exec);

    GoodnessReport rep;
    rep.pass = true;
    const double n = static_cast<double>(q.replicas);
    std::vector<std::uint64_t> hits(q.times.size() + 1, 0);
    for (const auto& f : runs) {
        std::size_t m = 0;
        for (std::size_t i = 0; i < f.u.size(); ++i) m += f.u[i] && f.v[i];
        for (std::size_t j = 0; j <= m; ++j) ++hits[j];
    }
    for (auto h : hits) rep.at_least.push_back(static_cast<double>(h) / n);
    for (std::size_t i = 0; i < q.times.size(); ++i) {
        GoodnessRow row;
        row.t = q.times[i];
        row.n = q.replicas;
        std::uint64_t cu = 0, cv = 0, cb = 0;
        for (const auto& f : runs) {
            cu += f.u[i];
            cv += f.v[i];
            cb += f.u[i] && f.v[i];
        }
        row.p_u = static_cast<double>(cu) / n;
        row.p_v = static_cast<double>(cv) / n;
        row.p_both = static_cast<double>(cb) / n;
        row.both_ci = wilson(cb, q.replicas);
        row.independence_gap = std::abs(row.p_both - row.p_u * row.p_v);
        row.independence_tol = 3.0 * std::sqrt(row.p_u * (1 - row.p_u) * row.p_v * (1 - row.p_v) / n) + 1e-12;
        row.independent = row.independence_gap <= row.independence_tol;
        rep.pass = rep.pass && row.independent;
        rep.rows.push_back(row);
    }
    return rep;
}

double edge_open_target(int d) {
    return 2.0 / std::sqrt(static_cast<double>(d - left_count(d) - 1));
}

std::optional<double> calibrated_C(int d) {
    double b = edge_open_target(d);
    if (b >= 1.0) return std::nullopt;
    double h = 1.0 / (d + 1);
    double lambda = (d + 1) * -std::log1p(-b) / walk_survival_limit(d, h);
    return lambda / std::sqrt(static_cast<double>(d));
}

std::vector<FirstArrivalRow> empirical_first_arrivals(int d, double lambda, int time_cap, std::uint64_t replicas,
                                                      std::uint64_t seed, Exec exec) {
    if (replicas == 0) throw std::domain_error("replicas must be positive");
    const double h = 1.0 / (d + 1);
    Window w(GraphFamily::regular_tree(d), time_cap + 2);
    auto space = std::make_shared<SiteSpace>(SiteSpace::explicit_window(w));
    const int l = left_count(d);
    std::vector<std::uint8_t> left(space->size(), 0);
    for (Site s = 1; s < space->size(); ++s) left[s] = tree_code::decode(d, space->vertex(s)).front() < l;
    const Site a = space->root();
    const Site b = space->neighbor(a, l);
    WalkKernel kernel{d, h};

    auto counts = map_indexed<std::vector<double>>(
        replicas,
        [&](std::size_t r) {
            WalkerField f = realize_field(CouplingStream::for_replica(seed, r), space, kernel, lambda, time_cap + 1,
                                          {}, Exec::Serial);
            std::vector<double> c(static_cast<std::size_t>(time_cap) + 1, 0.0);
            for (std::size_t i = 0; i < f.size(); ++i) {
                for (int t = 0; t <= time_cap; ++t) {
                    if (!f.alive(i, t + 1)) break;
                    if (t > 0 && !left[f.position(i, t - 1)]) break;
                    if (f.position(i, t) == a && f.position(i, t + 1) == b) c[static_cast<std::size_t>(t)] += 1;
                }
            }
            return c;
        },
        exec);

    ArrivalStream ref(d, lambda, time_cap, 0);
    std::vector<FirstArrivalRow> rows(static_cast<std::size_t>(time_cap) + 1);
    for (int t = 0; t <= time_cap; ++t) {
        auto& row = rows[static_cast<std::size_t>(t)];
        row.t = t;
        for (const auto& c : counts) row.count.add(c[static_cast<std::size_t>(t)]);
        row.alpha = ref.alpha(t);
        row.within_3se = std::abs(row.count.mean - row.alpha) <= 3.0 * row.count.stderr_mean() + 1e-12;
    }
    return rows;
}

}  // namespace snlab
