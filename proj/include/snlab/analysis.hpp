#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "snlab/connectivity.hpp"
#include "snlab/graphs.hpp"
#include "snlab/kernels.hpp"
#include "snlab/parallel.hpp"
#include "snlab/stats.hpp"

namespace snlab {

// ---- occupation at fixed times -------------------------------------------

struct StationarityRow {
    int t = 0;
    std::uint64_t samples = 0;
    double mean = 0.0;
    double dispersion = 0.0;
    double neighbor_corr = 0.0;
    bool mean_ok = false;
    bool dispersion_ok = false;
    bool corr_ok = false;
};

struct StationarityReport {
    std::vector<StationarityRow> rows;
    std::vector<std::string> warnings;
    bool pass = false;
};

struct StationarityQuery {
    Window window{GraphFamily::cycle(1000), 500};
    WalkKernel kernel{2, 1.0 / 3.0};
    double lambda = 1.0;
    std::vector<int> times{1, 10, 50};
    std::uint64_t samples = 100'000;  // vertex-draws per time
    std::uint64_t seed = 1;
    double mean_tol = -1.0;           // defaults to 3 sqrt(lambda / N)
    double dispersion_tol = 0.05;
    Exec exec = Exec::Parallel;
};

// Per-vertex counts at each t: mean, index of dispersion and the correlation of
// counts at adjacent vertices.
StationarityReport stationarity_test(const StationarityQuery& q);

// ---- regeneration --------------------------------------------------------

struct RegenerationRow {
    int t = 0;
    VertexId v = 0;
    double mean = 0.0;
    double stderr_mean = 0.0;
    double expected = 0.0;  // lambda (1 - sum_a P^t(v, a))
    double deficit = 0.0;   // lambda - mean
};

struct RegenerationReport {
    std::vector<RegenerationRow> rows;
    bool final_within = false;     // every reported vertex at the largest t within tolerance
    bool deficit_monotone = false;  // deficits nonincreasing in t up to 3 stderr
    bool pass = false;
};

struct RegenerationQuery {
    Window window{GraphFamily::cycle(1000), 500};
    WalkKernel kernel{2, 1.0 / 3.0};
    double lambda = 1.0;
    std::vector<VertexId> A{0};
    std::vector<VertexId> report;  // defaults to A (or the root if A is empty)
    std::vector<int> times{10, 30, 100};
    std::uint64_t replicas = 20'000;
    std::uint64_t seed = 1;
    double tolerance = 0.05;  // relative, at the largest t
    Exec exec = Exec::Parallel;
};

// Counts, at each reported vertex v, the walkers that started outside A. The
// estimate is pooled over all translations of (A, v), which is exact in law on
// a vertex-transitive periodic window.
RegenerationReport regeneration_test(const RegenerationQuery& q);

// Exact P^t(x, .) on a periodic window by iterating the kernel.
std::vector<double> periodic_kernel_row(const Window& w, const WalkKernel& k, VertexId x, int t);

// ---- meetings along a fixed path -------------------------------------------

struct MeetingRow {
    int t = 0;
    double mean = 0.0;         // E[N_t], pooled over translations of the path
    double stderr_mean = 0.0;
    double dispersion = 0.0;   // var/mean of N_t at fixed observers across replicas
};

struct MeetingReport {
    std::vector<MeetingRow> rows;
    LinearFit fit;              // log E[N_t] against log t
    bool nondecreasing = false;
    bool slope_ok = false;      // only asserted when slope bounds are given
    bool dispersion_ok = false;
    bool pass = false;
};

struct MeetingQuery {
    Window window{GraphFamily::cycle(4000), 2000};
    WalkKernel kernel{2, 1.0 / 3.0};
    double lambda = 1.0;
    std::vector<VertexId> path;  // w_0..w_T; empty means constant at the root
    std::vector<int> times{10, 20, 50, 100, 200, 500, 1000};
    std::uint64_t replicas = 1000;
    std::uint64_t observers = 4;
    std::uint64_t seed = 1;
    std::optional<std::pair<double, double>> slope_bounds;
    std::pair<double, double> dispersion_bounds{0.9, 1.1};
    Exec exec = Exec::Parallel;
};

// N_t counts the distinct walkers that shared a position with the path at some
// time i <= t.
MeetingReport meeting_count_test(const MeetingQuery& q);

// ---- critical density bracket ---------------------------------------------

struct Bracket {
    double rho = 1.0;
    double lower = 0.0;
    double upper = 0.0;
};

// Lower bound (rho^-1 - 1)/2 and the holding-specific upper bound. Only
// h = 1/(d+1) and h = 1/2 are supported on trees; amenable families return
// lower 0 and an infinite upper bound.
Bracket lambda_c_bracket(const GraphFamily& family, double h);
Bracket lambda_c_bracket(int d, double h);

// ---- density sweep ----------------------------------------------------------

struct SweepPoint {
    double lambda = 0.0;
    PairEstimate est;
};

struct SweepQuery {
    Window window{GraphFamily::regular_tree(4), 40};
    WalkKernel kernel{4, 0.2};
    std::vector<double> grid;
    int horizon = 64;
    VertexId u = 0;
    VertexId v = 0;
    std::uint64_t replicas = 200;
    std::uint64_t seed = 1;
    std::uint64_t min_samples = 20;  // uncensored eligible replicas needed for a crossover
    std::size_t max_walkers = 100'000;
    Exec exec = Exec::Parallel;
};

struct SweepResult {
    std::vector<SweepPoint> curve;
    std::optional<double> crossover;  // heuristic: first lambda with estimate >= 0.5
    double censored_fraction = 0.0;
    bool monotone = true;             // per-replica joint indicator nondecreasing in lambda
};

// One coupled field per replica serves the whole grid; per lambda, replicas in
// which both endpoints are occupied are eligible. Throws std::logic_error if a
// replica's indicator ever decreases along the grid.
SweepResult lambda_sweep(const SweepQuery& q);

}  // namespace snlab
