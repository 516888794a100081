#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "snlab/kernels.hpp"
#include "snlab/parallel.hpp"
#include "snlab/rng.hpp"
#include "snlab/site_space.hpp"

namespace snlab {

// All randomness of one replica. Vertex v carries a unit-rate Poisson process
// on the density axis (cumulative Exp(1) arrivals); the field at density
// lambda keeps the arrivals <= lambda, so fields are nested in lambda by
// construction. Walker (v, i) steps with its own stream keyed by (v, i), hence
// its trajectory does not depend on lambda.
class CouplingStream {
public:
    explicit CouplingStream(std::uint64_t seed) : seed_(seed) {}
    static CouplingStream for_replica(std::uint64_t master_seed, std::uint64_t replica) {
        return CouplingStream(rng::derive(master_seed, rng::Tag::Replica, replica));
    }

    std::uint64_t seed() const { return seed_; }

    // Arrival values at `vertex_key` not exceeding `lambda`, ascending.
    std::vector<double> arrivals(std::uint64_t vertex_key, double lambda) const;
    // Same, conditioned on at least one arrival <= cond (first arrival drawn
    // from Exp(1) truncated to [0, cond]).
    std::vector<double> arrivals_conditioned(std::uint64_t vertex_key, double lambda, double cond) const;
    std::uint64_t count(std::uint64_t vertex_key, double lambda) const {
        return arrivals(vertex_key, lambda).size();
    }
    rng::Stream walk(std::uint64_t vertex_key, std::uint64_t index) const {
        return {rng::derive(seed_, rng::Tag::Walk, vertex_key, index)};
    }

private:
    std::uint64_t seed_;
};

struct Walker {
    Site origin = 0;
    std::uint32_t index = 0;       // rank among walkers created at the same origin/source
    double mark = 0.0;             // density level at which the walker appears
    std::uint32_t alive_until = 0;  // first time the walker is frozen (horizon+1 if never)
};

// Realized walkers with trajectories over [0, horizon]. Under the Reject
// policy a walker that would step outside the window is frozen at its last
// position and takes part in no meeting from then on.
class WalkerField {
public:
    WalkerField() = default;
    WalkerField(std::shared_ptr<SiteSpace> space, WalkKernel kernel, int horizon, double lambda)
        : space_(std::move(space)), kernel_(kernel), horizon_(horizon), lambda_(lambda) {}

    const SiteSpace& space() const { return *space_; }
    SiteSpace& space() { return *space_; }
    std::shared_ptr<SiteSpace> space_ptr() const { return space_; }
    const WalkKernel& kernel() const { return kernel_; }
    int horizon() const { return horizon_; }
    double lambda() const { return lambda_; }
    std::size_t size() const { return walkers_.size(); }

    const Walker& walker(std::size_t w) const { return walkers_[w]; }
    const std::vector<Walker>& walkers() const { return walkers_; }
    Site position(std::size_t w, int t) const {
        return traj_[w * stride() + static_cast<std::size_t>(t)];
    }
    std::span<const Site> trajectory(std::size_t w) const {
        return {traj_.data() + w * stride(), stride()};
    }
    bool alive(std::size_t w, int t) const {
        return static_cast<std::uint32_t>(t) < walkers_[w].alive_until;
    }
    bool frozen(std::size_t w) const {
        return walkers_[w].alive_until <= static_cast<std::uint32_t>(horizon_);
    }

    // Appends a walker; returns its id.
    std::size_t add(const Walker& w, std::span<const Site> trajectory);
    // Walkers with mark <= lambda, preserving ids order; trajectories shared by value.
    WalkerField restrict_to(double lambda) const;
    // Ids of walkers whose origin is `s` and mark <= lambda.
    std::vector<std::size_t> walkers_at_origin(Site s, double lambda) const;

    void reserve(std::size_t n) {
        walkers_.reserve(n);
        traj_.reserve(n * stride());
    }

private:
    std::size_t stride() const { return static_cast<std::size_t>(horizon_) + 1; }

    std::shared_ptr<SiteSpace> space_;
    WalkKernel kernel_{};
    int horizon_ = 0;
    double lambda_ = 0.0;
    std::vector<Walker> walkers_;
    std::vector<Site> traj_;
};

struct Conditioning {
    Site site = 0;
    double level = 0.0;  // occupancy is forced at this density
};

// Walks `steps` steps from `start` with uniforms from `stream` (index offset
// `first`), writing positions to out[0..steps]. Returns the first time at which
// the walk was frozen (steps+1 if never).
std::uint32_t walk_path(SiteSpace& space, const WalkKernel& kernel, const rng::Stream& stream,
                        Site start, int steps, std::span<Site> out);

// Full field over an explicit window: every window vertex gets M_v(lambda)
// walkers. Trajectories are generated in parallel (Exec::Parallel) or by the
// serial reference loop; both produce identical fields.
WalkerField realize_field(const CouplingStream& stream, std::shared_ptr<SiteSpace> space,
                          const WalkKernel& kernel, double lambda, int horizon,
                          std::span<const Conditioning> conditioned = {},
                          Exec exec = Exec::Parallel);

inline WalkerField realize_field_serial(const CouplingStream& stream, std::shared_ptr<SiteSpace> space,
                                        const WalkKernel& kernel, double lambda, int horizon,
                                        std::span<const Conditioning> conditioned = {}) {
    return realize_field(stream, std::move(space), kernel, lambda, horizon, conditioned, Exec::Serial);
}

}  // namespace snlab
