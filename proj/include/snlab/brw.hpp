#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "snlab/graphs.hpp"
#include "snlab/kernels.hpp"
#include "snlab/parallel.hpp"
#include "snlab/rng.hpp"
#include "snlab/site_space.hpp"
#include "snlab/stats.hpp"

namespace snlab {

inline constexpr std::uint64_t kNoParent = ~std::uint64_t{0};

struct BrwParticle {
    std::uint64_t id = 0;
    std::uint64_t parent = kNoParent;
    Site born = 0;
    Site stepped = kNoSite;  // position after this particle's own step
};

// Lazy branching random walk on a regular tree, started from the root o.
//
// Generation 0 holds 1 + Pois(lambda) particles at o. At stage n every
// particle of generation n-1 takes one lazy step and leaves 1 + 2 Pois(lambda)
// offspring where it lands; those form generation n.
//
// Q_n(v) counts the particles present at v at time n: generation 0 for n = 0,
// and for n >= 1 the generation n-1 particles after their step, i.e. the
// litters of generation n born at v. With this reading
// E[Q_n(v)] = (1+lambda)(1+2 lambda)^(n-1) P^n(o, v).
class BrwPopulation {
public:
    BrwPopulation(int degree, double lambda, int max_generations, std::uint64_t cap = 10'000'000);

    template <class Rng>
    void start(Rng& rng);

    const SiteSpace& space() const { return *space_; }
    SiteSpace& space() { return *space_; }
    double lambda() const { return lambda_; }
    std::uint64_t cap() const { return cap_; }
    bool truncated() const { return truncated_; }
    std::uint64_t total() const { return total_; }

    const std::vector<std::vector<BrwParticle>>& generations() const { return gens_; }
    const std::vector<BrwParticle>& generation(std::size_t n) const { return gens_[n]; }
    // Steps taken so far; Q_n is available for n <= stages().
    int stages() const { return static_cast<int>(gens_.size()) - 1; }

    std::uint64_t Q(int n, Site v) const;
    // Q_n(o) for n = 0..stages().
    std::vector<std::uint64_t> root_visits() const;

    template <class Rng>
    friend bool step_generation(BrwPopulation& pop, const WalkKernel& kernel, Rng& rng);

private:
    std::shared_ptr<SiteSpace> space_;
    double lambda_;
    std::uint64_t cap_;
    std::uint64_t total_ = 0;
    std::uint64_t next_id_ = 0;
    bool truncated_ = false;
    std::vector<std::vector<BrwParticle>> gens_;
};

template <class Rng>
void BrwPopulation::start(Rng& rng) {
    gens_.assign(1, {});
    std::uint64_t n0 = 1 + rng.poisson(lambda_);
    for (std::uint64_t i = 0; i < n0; ++i) gens_[0].push_back({next_id_++, kNoParent, 0, kNoSite});
    total_ = n0;
    truncated_ = false;
}

// Advances one stage. Returns false (and sets truncated) when the population
// cap would be exceeded; the new generation is then kept partial.
template <class Rng>
bool step_generation(BrwPopulation& pop, const WalkKernel& kernel, Rng& rng) {
    if (pop.gens_.empty() || pop.gens_.back().empty()) throw std::logic_error("empty generation");
    if (kernel.degree != pop.space_->degree()) throw std::invalid_argument("kernel degree does not match the tree");
    std::vector<BrwParticle> next;
    auto& cur = pop.gens_.back();
    for (auto& p : cur) {
        int slot = kernel.slot(rng.uniform());
        p.stepped = slot < 0 ? p.born : pop.space_->neighbor(p.born, slot);
        if (p.stepped == kNoSite) throw std::length_error("branching walk left its tree window");
        std::uint64_t k = 1 + 2 * rng.poisson(pop.lambda_);
        if (pop.total_ + k > pop.cap_) {
            pop.truncated_ = true;
            k = pop.cap_ - pop.total_;
        }
        for (std::uint64_t j = 0; j < k; ++j) next.push_back({pop.next_id_++, p.id, p.stepped, kNoSite});
        pop.total_ += k;
        if (pop.truncated_) break;
    }
    pop.gens_.push_back(std::move(next));
    return !pop.truncated_;
}

struct GenerationMean {
    double value = 0.0;
    double bound = 0.0;  // ((1+2 lambda) rho)^n
    bool within_bound = true;
};

// (1+lambda)(1+2 lambda)^(n-1) P^n(o, v) for d(o, v) = k, with the spectral
// bound. n = 0 gives 1+lambda at o and 0 elsewhere. Throws std::logic_error if
// the value exceeds the bound.
GenerationMean expected_generation_mean(int n, double lambda, int k, const KernelTable& table);

struct SubcriticalVerdict {
    double rho = 1.0;
    double threshold = 0.0;  // (1/rho - 1)/2
    bool subcritical = false;
    bool vacuous = false;    // amenable: no lambda qualifies
    std::string note;
};

SubcriticalVerdict subcritical_check(double lambda, const GraphFamily& family, double h);

struct BrwQuery {
    int degree = 3;
    double holding = 0.5;
    double lambda = 0.5;
    int generations = 5;
    std::uint64_t replicas = 100'000;
    std::uint64_t seed = 1;
    std::uint64_t cap = 10'000'000;
    Exec exec = Exec::Parallel;
};

struct BrwMeanRow {
    int n = 0;
    RunningStats q;          // Q_n(o)
    GenerationMean formula;
    bool within_3se = false;
};

struct BrwMeansReport {
    std::vector<BrwMeanRow> rows;
    RunningStats total;      // sum over n of Q_n(o)
    std::uint64_t truncated = 0;
    bool pass = false;
};

BrwMeansReport brw_root_means(const BrwQuery& q);

struct HorizonStability {
    int horizon = 0;
    RunningStats short_run;  // sum_{n <= H} Q_n(o)
    RunningStats long_run;   // sum_{n <= 2H} Q_n(o), independent populations
    double diff = 0.0;
    double joint_stderr = 0.0;
    bool stable = false;
};

// Total visits to o over H and 2H stages on independent replica sets.
HorizonStability total_visits_stability(const BrwQuery& q, int horizon);

struct QuantileCheck {
    double level = 0.0;
    double at = 0.0;         // quantile of X_o
    double cdf_x = 0.0;
    double cdf_y = 0.0;
    double margin = 0.0;
    bool ok = false;
};

struct DominationQuery {
    Window window{GraphFamily::regular_tree(4), 14};
    WalkKernel kernel{4, 0.2};
    double lambda = 0.03;
    int horizon = 10;
    std::uint64_t replicas = 20'000;
    std::uint64_t seed = 1;
    std::vector<double> quantiles{0.5, 0.9};
    Exec exec = Exec::Parallel;
};

struct DominationReport {
    RunningStats x;          // visits to o by FC_T(o) walkers, o forced occupied
    RunningStats y;          // branching walk visits to o over T stages
    double joint_stderr = 0.0;
    bool mean_ok = false;
    std::vector<QuantileCheck> quantiles;
    std::uint64_t incomplete = 0;
    bool pass = false;
};

// X_o counts every time step at which a walker of FC_T(o) sits at o, including
// steps before it joined the cluster and repeated lazy stays.
DominationReport domination_experiment(const DominationQuery& q);

}  // namespace snlab
