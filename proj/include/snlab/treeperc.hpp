#pragma once

#include <absl/container/flat_hash_map.h>

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "snlab/parallel.hpp"
#include "snlab/rng.hpp"
#include "snlab/stats.hpp"

namespace snlab {

// Subtree used for the goodness certificates: the root has `root_children`
// children, every other vertex `children`. An optional excluded child-index
// path removes one subtree (the other root's branch). Vertices are addressed
// by path keys: key(child j of x) = mix64(key(x) + (j+1) golden).
struct PercTree {
    int root_children = 2;
    int children = 2;
    int depth_cap = 24;
    std::uint64_t root_key = 0;
    std::vector<int> excluded;

    int out_degree(int depth) const { return depth == 0 ? root_children : children; }
    double p_c() const { return 1.0 / children; }
    static std::uint64_t child_key(std::uint64_t parent, int j) {
        return rng::mix64(parent + (static_cast<std::uint64_t>(j) + 1) * rng::kGolden);
    }
};

// Right-tree shapes around u = tree root and a vertex v of the right tree
// given by its child-index path from u.
PercTree right_tree_u(int d, std::vector<int> v_path, int depth_cap, std::uint64_t root_key);
PercTree right_tree_v(int d, int depth_cap, std::uint64_t root_key);

// Counts |W_(a,b),L(s)| of fresh first arrivals at a from its left subtree
// that step to b at time s, drawn as independent Pois(alpha_s) through a
// counter stream keyed by (edge, direction, s). Edges are named by the key of
// their lower endpoint; `upward` selects the (child, parent) direction.
class ArrivalStream {
public:
    ArrivalStream() = default;
    ArrivalStream(int d, double lambda, int time_cap, std::uint64_t seed);

    int degree() const { return d_; }
    double lambda() const { return lambda_; }
    int time_cap() const { return static_cast<int>(alpha_.size()) - 1; }
    double alpha(int s) const;

    std::uint64_t count(std::uint64_t edge_key, bool upward, int s) const;
    bool J(std::uint64_t edge_key, bool upward, int s) const { return count(edge_key, upward, s) > 0; }

    // Fixture hook: pins the count of one (edge, direction, time).
    void set_count(std::uint64_t edge_key, bool upward, int s, std::uint64_t n);
    // Fixture hook: every unpinned count becomes this value.
    void set_default(std::optional<std::uint64_t> n) { default_ = n; }

private:
    static std::uint64_t slot_key(std::uint64_t edge_key, bool upward, int s) {
        return rng::mix64(edge_key ^ (upward ? 0xA5A5A5A5ULL : 0x5A5A5A5AULL)) + static_cast<std::uint64_t>(s);
    }
    int d_ = 3;
    double lambda_ = 0.0;
    std::uint64_t seed_ = 0;
    std::vector<double> alpha_;
    std::optional<std::uint64_t> default_;
    absl::flat_hash_map<std::uint64_t, std::uint64_t> pinned_;
};

// alpha_s = lambda (1-h)/d * P(lazy walk from a stays in V_a \ {a} for steps
// 1..s), with alpha_0 = lambda (1-h)/d. Requires h = 1/(d+1).
ArrivalStream sample_arrivals(int d, double h, double lambda, int time_cap, std::uint64_t seed);

struct GoodCertificate {
    int t = 0;
    std::vector<int> path;  // child indices from the root, length t
};

// Depth-t search for a path gamma_0 = root, ..., gamma_t with
// J_(gamma_i, gamma_i+1)(i) = 1 and J_(gamma_i+1, gamma_i)(2t-i-1) = 1.
// Children are tried in index order, so the certificate is the leftmost one.
std::optional<GoodCertificate> good_at_time(const ArrivalStream& stream, const PercTree& tree, int t);

struct PercCluster {
    std::uint64_t size = 1;
    int reached_depth = 0;
    std::vector<std::uint64_t> generation_sizes;
};

// Bond percolation on the tree down to its depth cap. Generation sizes are
// drawn as Z_{i+1} ~ Binomial(out_degree * Z_i, p), which has the law of the
// root cluster's level sizes.
template <class Rng>
PercCluster percolation_cluster(const PercTree& tree, double p, Rng& rng);

// 1 - f^(D)(0) for f(s) = (1 - p + p s)^k: survival of the root cluster to
// depth D when every vertex has k children.
double survival_probability(int k, double p, int depth);
// Smallest root of q = (1 - p + p q)^k.
double extinction_probability(int k, double p);

struct GoodnessRow {
    int t = 0;               // good at time 2t
    std::uint64_t n = 0;
    double p_u = 0.0;
    double p_v = 0.0;
    double p_both = 0.0;
    Interval both_ci{};
    double independence_gap = 0.0;  // |P_both - P_u P_v|
    double independence_tol = 0.0;
    bool independent = false;
};

struct GoodnessReport {
    std::vector<GoodnessRow> rows;
    std::vector<double> at_least;   // at_least[m]: frequency both good at >= m listed times
    bool pass = false;
};

struct GoodnessQuery {
    int d = 5;
    double lambda = 1.0;
    std::vector<int> times{1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<int> v_path{0, 0};  // indices among right children, from u
    std::uint64_t replicas = 10'000;
    std::uint64_t seed = 1;
    int depth_cap = 24;
    Exec exec = Exec::Parallel;
};

GoodnessReport simultaneous_goodness_rate(const GoodnessQuery& q);

// Target p = 2/sqrt(d - l - 1) of the edge-open probability; values >= 1 are
// unreachable.
double edge_open_target(int d);
// Smallest C with 1 - exp(-alpha_inf) >= target at lambda = C sqrt(d), where
// alpha_inf is the t -> infinity limit of alpha_t (its infimum). Empty when
// the target is >= 1.
std::optional<double> calibrated_C(int d);

struct FirstArrivalRow {
    int t = 0;
    RunningStats count;
    double alpha = 0.0;
    bool within_3se = false;
};

// Counts W_(a,b),L(t) on realized fields over an explicit tree window with
// a = root and b its first right child, against alpha_t.
std::vector<FirstArrivalRow> empirical_first_arrivals(int d, double lambda, int time_cap,
                                                      std::uint64_t replicas, std::uint64_t seed,
                                                      Exec exec = Exec::Parallel);

template <class Rng>
PercCluster percolation_cluster(const PercTree& tree, double p, Rng& rng) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("p must lie in [0, 1]");
    PercCluster c;
    std::uint64_t z = 1;
    c.generation_sizes.push_back(1);
    for (int depth = 0; depth < tree.depth_cap && z > 0; ++depth) {
        std::binomial_distribution<std::uint64_t> bin(z * static_cast<std::uint64_t>(tree.out_degree(depth)), p);
        z = bin(rng);
        if (z == 0) break;
        c.generation_sizes.push_back(z);
        c.size += z;
        c.reached_depth = depth + 1;
    }
    return c;
}

}  // namespace snlab
