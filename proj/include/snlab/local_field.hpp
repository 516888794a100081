#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include "snlab/field.hpp"

namespace snlab {

// Reveals only the walkers that matter for the clusters of a few source
// vertices, without realizing the rest of the field.
//
// Processing a space-time point (x, t) draws the walkers through it as a
// unit-rate Poisson process of marks on [0, lambda_max]; each candidate gets a
// backward path of t steps (a lazy walk, by reversibility) and a forward path
// of horizon - t steps. A candidate is discarded if its backward path leaves
// the window or if it passes through a point processed earlier (it was
// revealed there already, or it would have been). Every kept walker queues all
// points of its trajectory. The walkers with mark <= lambda form the field at
// density lambda, so one exploration serves a whole density grid.
//
// Points are processed in order of level = max(mark along the discovery
// chain). Once the smallest queued level exceeds lambda, the clusters of the
// sources in the lambda-subfield are complete.
//
// Only the Reject policy is supported.
struct LocalFieldConfig {
    int horizon = 0;
    double lambda_max = 1.0;
    std::vector<Site> sources;               // explored from time 0
    std::vector<Conditioning> conditioned;   // occupancy of (site, 0) forced at a level
    std::vector<double> levels;              // ascending densities to evaluate
    bool has_pair = false;
    Site u = 0, v = 0;
    bool stop_when_connected = false;
    std::size_t max_walkers = 200'000;
    std::size_t max_points = 20'000'000;
};

struct LevelOutcome {
    double lambda = 0.0;
    bool complete = false;
    bool u_occupied = false;
    bool v_occupied = false;
    bool connected = false;
    bool touches_boundary = false;
};

struct LocalFieldResult {
    WalkerField field;
    double complete_below = 0.0;  // clusters are exact for lambda below this
    bool exhausted = false;
    bool budget_hit = false;
    std::size_t points = 0;
    std::size_t candidates = 0;
    std::vector<LevelOutcome> levels;
};

LocalFieldResult explore_local_field(const CouplingStream& stream, std::shared_ptr<SiteSpace> space,
                                     const WalkKernel& kernel, const LocalFieldConfig& cfg);

// Arrivals attached to the space-time point (key, t).
std::vector<double> point_arrivals(const CouplingStream& stream, std::uint64_t key, int t, double lambda);

}  // namespace snlab
