#pragma once

#include <cstdint>
#include <vector>

#include "snlab/graphs.hpp"
#include "snlab/kernels.hpp"
#include "snlab/parallel.hpp"
#include "snlab/stats.hpp"

namespace snlab {

enum class Engine { Auto, Explicit, Local };

struct PairQuery {
    Window window{GraphFamily::cycle(3), 1};
    WalkKernel kernel{};
    double lambda = 1.0;
    std::vector<int> horizons;
    VertexId u = 0;
    VertexId v = 0;
    std::uint64_t replicas = 100;
    std::uint64_t seed = 1;
    Engine engine = Engine::Auto;
    std::size_t max_walkers = 200'000;
    Exec exec = Exec::Parallel;
};

struct PairEstimate {
    int horizon = 0;
    std::uint64_t replicas = 0;
    std::uint64_t eligible = 0;   // both endpoints occupied
    std::uint64_t connected = 0;
    std::uint64_t censored = 0;   // not connected and (boundary touched or exploration cut)
    bool defined = false;
    double estimate = 0.0;        // connected / (eligible - censored)
    double lower = 0.0;           // connected / eligible
    double upper = 0.0;           // (connected + censored) / eligible
    Interval ci{};

    void finish();
};

// Monte Carlo estimate of P[u ~_T v | u, v occupied] for every T in
// `horizons`. Occupancy of u and v is imposed through the coupling's first
// arrivals, so every replica is eligible. Tree windows use the local
// exploration engine by default; periodic windows realize the whole field.
std::vector<PairEstimate> pair_connectivity(const PairQuery& q);

}  // namespace snlab
