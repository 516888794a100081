#include "snlab/kernels.hpp"

#include <cmath>
#include <functional>
#include <iomanip>
#include <stdexcept>

namespace snlab {

void validate_holding(double h) {
    if (!(h >= 0.0 && h < 1.0)) throw std::domain_error("holding probability must lie in [0,1)");
}

double spectral_radius_srw(const GraphFamily& family) {
    if (family.is_tree()) {
        double d = family.degree;
        return 2.0 * std::sqrt(d - 1.0) / d;
    }
    return 1.0;
}

double spectral_radius_lazy(const GraphFamily& family, double h) {
    validate_holding(h);
    return h + (1.0 - h) * spectral_radius_srw(family);
}

double KernelTable::sphere_size(int d, int k) {
    if (k == 0) return 1.0;
    return d * std::pow(d - 1.0, k - 1);
}

double KernelTable::transition(int t, int k) const {
    if (t < 0 || t > horizon) throw std::out_of_range("kernel time outside table");
    if (k < 0 || k > t) return 0.0;
    return q[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)] / sphere_size(d, k);
}

void KernelTable::write_csv(std::ostream& os) const {
    os << "t,k,q,P\n" << std::setprecision(17);
    for (int t = 0; t <= horizon; ++t)
        for (int k = 0; k <= t; ++k)
            os << t << ',' << k << ',' << q[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)] << ','
               << transition(t, k) << '\n';
}

KernelTable tree_kernel(int d, double h, int horizon) {
    if (d < 3) throw std::domain_error("tree kernel requires d >= 3");
    if (horizon < 0) throw std::domain_error("horizon must be nonnegative");
    validate_holding(h);
    KernelTable tab{d, h, horizon, {}};
    tab.q.assign(static_cast<std::size_t>(horizon) + 1, {});
    tab.q[0] = {1.0};
    const double in = (1.0 - h) / d;
    const double out = (1.0 - h) * (d - 1) / d;
    for (int t = 1; t <= horizon; ++t) {
        const auto& prev = tab.q[static_cast<std::size_t>(t - 1)];
        auto& cur = tab.q[static_cast<std::size_t>(t)];
        cur.assign(static_cast<std::size_t>(t) + 1, 0.0);
        cur[0] += h * prev[0];
        cur[1] += (1.0 - h) * prev[0];
        for (int k = 1; k < t; ++k) {
            double m = prev[static_cast<std::size_t>(k)];
            cur[static_cast<std::size_t>(k - 1)] += in * m;
            cur[static_cast<std::size_t>(k)] += h * m;
            cur[static_cast<std::size_t>(k + 1)] += out * m;
        }
    }
    return tab;
}

KernelBoundReport check_kernel_bounds(const KernelTable& table, double h) {
    constexpr double kRel = 1e-12;
    KernelBoundReport rep;
    double rho = spectral_radius_lazy(GraphFamily::regular_tree(table.d), h);
    rep.min_slack_rho = std::numeric_limits<double>::infinity();
    rep.min_slack_diagonal = std::numeric_limits<double>::infinity();
    for (int t = 0; t <= table.horizon; ++t) {
        double bound = std::pow(rho, t);
        double diag = table.ret(2 * (t / 2));
        double worst = 0.0;
        int worst_k = 0;
        for (int k = 0; k <= t; ++k) {
            double p = table.transition(t, k);
            rep.min_slack_rho = std::min(rep.min_slack_rho, bound - p);
            if (p > bound * (1.0 + kRel)) rep.violations.push_back({t, k, p, bound, "rho"});
            if (p > worst) {
                worst = p;
                worst_k = k;
            }
        }
        rep.min_slack_diagonal = std::min(rep.min_slack_diagonal, diag - worst);
        if (worst > diag * (1.0 + kRel)) rep.violations.push_back({t, worst_k, worst, diag, "diagonal"});
    }
    rep.ok = rep.violations.empty();
    return rep;
}

double walk_survival_in_left_subtree(int d, double h, int t) {
    if (t < 1) throw std::domain_error("survival needs t >= 1");
    if (d < 3) throw std::domain_error("survival needs d >= 3");
    validate_holding(h);
    const int l = left_count(d);
    const double up = (1.0 - h) / d;
    const double down = (1.0 - h) * (d - 1) / d;
    // mass[k]: surviving probability at depth k below a (k >= 1).
    std::vector<double> mass(static_cast<std::size_t>(t) + 2, 0.0), next(mass.size(), 0.0);
    mass[1] = (1.0 - h) * l / d;
    for (int step = 2; step <= t; ++step) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int k = 1; k < step; ++k) {
            double m = mass[static_cast<std::size_t>(k)];
            if (m == 0.0) continue;
            if (k > 1) next[static_cast<std::size_t>(k - 1)] += up * m;
            next[static_cast<std::size_t>(k)] += h * m;
            next[static_cast<std::size_t>(k + 1)] += down * m;
        }
        mass.swap(next);
    }
    double total = 0.0;
    for (double m : mass) total += m;
    return total;
}

double walk_survival_limit(int d, double h) {
    validate_holding(h);
    return (1.0 - h) * (static_cast<double>(left_count(d)) / d) * (d - 2.0) / (d - 1.0);
}

Rational rational_holding(double h, std::int64_t max_den) {
    validate_holding(h);
    for (std::int64_t den = 1; den <= max_den; ++den) {
        double num = std::round(h * static_cast<double>(den));
        if (std::abs(num / static_cast<double>(den) - h) < 1e-12)
            return Rational(static_cast<std::int64_t>(num), den);
    }
    throw std::domain_error("holding probability has no small rational form");
}

RationalTable tree_kernel_exact(int d, Rational h, int horizon) {
    if (d < 3) throw std::domain_error("tree kernel requires d >= 3");
    const Rational one(1), in = (one - h) / d, out = (one - h) * (d - 1) / d;
    RationalTable q(static_cast<std::size_t>(horizon) + 1);
    q[0] = {one};
    for (int t = 1; t <= horizon; ++t) {
        const auto& prev = q[static_cast<std::size_t>(t - 1)];
        auto& cur = q[static_cast<std::size_t>(t)];
        cur.assign(static_cast<std::size_t>(t) + 1, Rational(0));
        cur[0] += h * prev[0];
        cur[1] += (one - h) * prev[0];
        for (int k = 1; k < t; ++k) {
            const Rational& m = prev[static_cast<std::size_t>(k)];
            cur[static_cast<std::size_t>(k - 1)] += in * m;
            cur[static_cast<std::size_t>(k)] += h * m;
            cur[static_cast<std::size_t>(k + 1)] += out * m;
        }
    }
    return q;
}

RationalTable enumerate_tree_walks(int d, Rational h, int horizon) {
    Window w(GraphFamily::regular_tree(d), horizon + 1);
    const Rational move = (Rational(1) - h) / d;
    RationalTable q(static_cast<std::size_t>(horizon) + 1);
    for (int t = 0; t <= horizon; ++t) q[static_cast<std::size_t>(t)].assign(static_cast<std::size_t>(t) + 1, Rational(0));
    std::function<void(VertexId, int, Rational)> walk = [&](VertexId v, int t, Rational p) {
        q[static_cast<std::size_t>(t)][static_cast<std::size_t>(w.depth(v))] += p;
        if (t == horizon) return;
        if (h.numerator() != 0) walk(v, t + 1, p * h);
        for (const auto& n : w.neighbors(v)) walk(n.id, t + 1, p * move);
    };
    walk(w.root(), 0, Rational(1));
    return q;
}

}  // namespace snlab
