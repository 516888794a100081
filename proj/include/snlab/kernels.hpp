#pragma once

#include <boost/rational.hpp>

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "snlab/graphs.hpp"

namespace snlab {

// Lazy simple random walk: stay w.p. h, otherwise move to a uniform neighbor.
struct WalkKernel {
    int degree = 2;
    double holding = 0.5;

    static WalkKernel lazy_half(int d) { return {d, 0.5}; }
    static WalkKernel uniform_hold(int d) { return {d, 1.0 / (d + 1)}; }

    // Maps one uniform to a move: -1 means stay, otherwise a neighbor slot in
    // [0, degree). Slots follow the window's neighbor order.
    int slot(double u) const {
        if (u < holding) return -1;
        int s = static_cast<int>((u - holding) / (1.0 - holding) * degree);
        return std::min(s, degree - 1);
    }
    // Same map restricted to the first `k` admissible slots (Absorb policy).
    int slot_among(double u, int k) const {
        if (u < holding || k == 0) return -1;
        int s = static_cast<int>((u - holding) / (1.0 - holding) * k);
        return std::min(s, k - 1);
    }
};

void validate_holding(double h);

double spectral_radius_srw(const GraphFamily& family);
double spectral_radius_lazy(const GraphFamily& family, double h);

// q[t][k] = P(|S_t - S_0| = k) for the lazy walk on the d-regular tree.
struct KernelTable {
    int d = 3;
    double h = 0.5;
    int horizon = 0;
    std::vector<std::vector<double>> q;

    // Number of vertices at distance k from a fixed vertex.
    static double sphere_size(int d, int k);
    // P^t(x, y) for d(x, y) = k; zero when k > t.
    double transition(int t, int k) const;
    // P^t(x, x).
    double ret(int t) const { return transition(t, 0); }

    void write_csv(std::ostream& os) const;
};

KernelTable tree_kernel(int d, double h, int horizon);

struct BoundViolation {
    int t = 0;
    int k = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    std::string which;
};

struct KernelBoundReport {
    bool ok = true;
    double min_slack_rho = 0.0;      // min over (t,k) of rho^t - P^t
    double min_slack_diagonal = 0.0;  // min over t of P^{2 floor(t/2)}(x,x) - max_k P^t
    std::vector<BoundViolation> violations;
};

// Checks P^t(x,y) <= rho_h^t for all (t,k) and max_k P^t <= P^{2 floor(t/2)}(x,x).
// A relative slack of 1e-12 absorbs rounding.
KernelBoundReport check_kernel_bounds(const KernelTable& table, double h);

// Probability that a lazy walk from a stays inside V_a \ {a} for steps 1..t,
// where V_a is a together with its l = floor((d-1)/2) leftmost child subtrees.
double walk_survival_in_left_subtree(int d, double h, int t);
// t -> infinity value of the above, in closed form.
double walk_survival_limit(int d, double h);

using Rational = boost::rational<std::int64_t>;
using RationalTable = std::vector<std::vector<Rational>>;

Rational rational_holding(double h, std::int64_t max_den = 1000);
// Same recursion as tree_kernel, in exact arithmetic.
RationalTable tree_kernel_exact(int d, Rational h, int horizon);
// Brute force over all (d+1)^t step sequences on an explicit tree window.
RationalTable enumerate_tree_walks(int d, Rational h, int horizon);

}  // namespace snlab
