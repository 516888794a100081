#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <vector>

#include "snlab/field.hpp"
#include "snlab/graphs.hpp"
#include "snlab/kernels.hpp"
#include "snlab/parallel.hpp"
#include "snlab/rng.hpp"
#include "snlab/site_space.hpp"
#include "snlab/stats.hpp"

namespace snlab {

struct ExploreParams {
    double K = 3.0;
    double lambda = 1.0;
    double rho = 0.0;
    int s = 1;  // ceil(8K / (1 - rho))
    int M = 1;  // ceil(32K / lambda)

    // Throws std::domain_error unless K >= 3, lambda > 0 and rho < 1.
    static ExploreParams make(double K, double lambda, double rho);
    static ExploreParams make(double K, double lambda, const GraphFamily& family, double h);
    double rho_s() const;
    double good_level() const;  // e^{-4K}
    int horizon() const { return s * M; }
};

// Q = P^s. A Q-step is s steps of the base walk.
struct SWalkKernel {
    WalkKernel base;
    int s = 1;

    // Advances a cursor by one Q-step using draws [offset, offset + s) of the
    // stream. Returns false if the walk left the window.
    bool step(const SiteSpace& space, Cursor& c, const rng::Stream& stream, std::uint64_t offset) const;
    // Exact Q(x, y) for d(x, y) = k on the tree.
    double probability(const KernelTable& table, int k) const { return table.transition(s, k); }
};

SWalkKernel s_walk_kernel(const WalkKernel& kernel, int s);

struct GoodSetEntry {
    Site site = 0;
    RunningStats hit;   // indicator of an s-walk return to A within M steps
    bool good = false;
};

struct GoodSet {
    std::vector<GoodSetEntry> entries;
    RunningStats averaged;  // start drawn from pi_A
    double level = 0.0;
    double good_fraction() const;
};

// Monte Carlo return probabilities of s-walks to A, truncated at M steps.
// `a` is good when estimate + 2 stderr <= e^{-4K}. The pi_A average uses
// n_mc draws per element of A.
GoodSet estimate_good_set(SiteSpace& space, const std::vector<Site>& A, const ExploreParams& params,
                          const WalkKernel& kernel, std::uint64_t n_mc, std::uint64_t seed);

struct StageRow {
    int stage = 0;
    std::size_t A = 0;
    std::size_t U = 0;
    std::size_t C = 0;
    std::size_t exposed = 0;     // |W_u^l(st)|
    std::size_t added = 0;       // new space-time pairs from the recruit
    bool flagged = false;        // no good unchecked vertex, fell back to the least one
};

struct ExploreConfig {
    ExploreParams params;
    WalkKernel kernel{6, 0.5};
    std::uint64_t seed = 1;
    int stage_cap = 200;
    std::uint64_t n_mc = 16;
    bool condition_root = true;  // force the root occupied
    bool keep_field = true;      // materialize recruited trajectories
};

struct ExplorationTrace {
    std::vector<StageRow> stages;      // stages[0] is A_0 = {(root, 0)}
    bool root_occupied = false;
    bool exhausted = false;            // U emptied before the cap
    WalkerField recruits;              // one walker per recruitment, in order
    std::vector<std::size_t> distinct_positions;  // per recruit, distinct s-walk vertices

    double mean_growth(int first_stages) const;
    void write_csv(std::ostream& os) const;
};

// Staged exploration from the root of a regular tree. Walkers through a
// space-time point are drawn on demand (Poisson thinning) with backward and
// forward base-walk paths; only those avoiding A at every other multiple of s
// are exposed. Bookkeeping invariants are checked at every stage and a
// violation throws std::logic_error.
ExplorationTrace run_exploration(int degree, const ExploreConfig& cfg);

// True if every recruited walker lies in one component of the meetings among
// recruits by time sM.
bool recruits_in_one_cluster(const ExplorationTrace& trace);

// ceil(C / (lambda (1 - rho))).
std::int64_t t_threshold(double C, double lambda, double rho);

}  // namespace snlab
