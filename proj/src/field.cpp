#include "snlab/field.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace snlab {

std::vector<double> CouplingStream::arrivals(std::uint64_t vertex_key, double lambda) const {
    rng::Stream s{rng::derive(seed_, rng::Tag::Arrivals, vertex_key)};
    std::vector<double> out;
    double a = 0.0;
    for (std::uint64_t i = 0;; ++i) {
        a += s.exp1(i);
        if (a > lambda) break;
        out.push_back(a);
    }
    return out;
}

std::vector<double> CouplingStream::arrivals_conditioned(std::uint64_t vertex_key, double lambda,
                                                         double cond) const {
    if (!(cond > 0.0)) throw std::domain_error("conditioning level must be positive");
    rng::Stream s{rng::derive(seed_, rng::Tag::Conditioned, vertex_key)};
    // Inverse CDF of Exp(1) restricted to [0, cond].
    double a = -std::log1p(-s.at(0) * -std::expm1(-cond));
    std::vector<double> out;
    for (std::uint64_t i = 1;; ++i) {
        if (a > lambda) break;
        out.push_back(a);
        a += s.exp1(i);
    }
    return out;
}

std::size_t WalkerField::add(const Walker& w, std::span<const Site> trajectory) {
    if (trajectory.size() != stride()) throw std::invalid_argument("trajectory length must be horizon+1");
    walkers_.push_back(w);
    traj_.insert(traj_.end(), trajectory.begin(), trajectory.end());
    return walkers_.size() - 1;
}

WalkerField WalkerField::restrict_to(double lambda) const {
    WalkerField out(space_, kernel_, horizon_, lambda);
    for (std::size_t w = 0; w < walkers_.size(); ++w)
        if (walkers_[w].mark <= lambda) out.add(walkers_[w], trajectory(w));
    return out;
}

std::vector<std::size_t> WalkerField::walkers_at_origin(Site s, double lambda) const {
    std::vector<std::size_t> out;
    for (std::size_t w = 0; w < walkers_.size(); ++w)
        if (walkers_[w].origin == s && walkers_[w].mark <= lambda) out.push_back(w);
    return out;
}

std::uint32_t walk_path(SiteSpace& space, const WalkKernel& kernel, const rng::Stream& stream, Site start,
                        int steps, std::span<Site> out) {
    const bool absorb = space.window().policy() == BoundaryPolicy::Absorb;
    std::array<int, 64> slots{};
    Site cur = start;
    out[0] = cur;
    std::uint32_t alive_until = static_cast<std::uint32_t>(steps) + 1;
    int t = 1;
    for (; t <= steps; ++t) {
        double u = stream.at(static_cast<std::uint64_t>(t - 1));
        int slot;
        if (absorb && space.on_boundary(cur)) {
            int k = space.admissible_slots(cur, slots);
            int i = kernel.slot_among(u, k);
            slot = i < 0 ? -1 : slots[static_cast<std::size_t>(i)];
        } else {
            slot = kernel.slot(u);
        }
        if (slot >= 0) {
            Site next = space.neighbor(cur, slot);
            if (next == kNoSite) {
                alive_until = static_cast<std::uint32_t>(t);
                break;
            }
            cur = next;
        }
        out[static_cast<std::size_t>(t)] = cur;
    }
    for (; t <= steps; ++t) out[static_cast<std::size_t>(t)] = cur;
    return alive_until;
}

WalkerField realize_field(const CouplingStream& stream, std::shared_ptr<SiteSpace> space, const WalkKernel& kernel,
                          double lambda, int horizon, std::span<const Conditioning> conditioned, Exec exec) {
    if (!(lambda > 0.0)) throw std::domain_error("lambda must be positive");
    if (horizon < 0) throw std::domain_error("horizon must be nonnegative");
    if (space->lazy()) throw std::domain_error("realize_field needs an explicit window");
    if (kernel.degree != space->degree()) throw std::invalid_argument("kernel degree does not match the graph");
    if (kernel.degree > 64) throw std::invalid_argument("degree above 64 is not supported");
    validate_holding(kernel.holding);

    WalkerField field(space, kernel, horizon, lambda);
    std::vector<Walker> ws;
    const std::size_t n = space->size();
    for (std::size_t s = 0; s < n; ++s) {
        Site site = static_cast<Site>(s);
        std::uint64_t key = space->key(site);
        std::vector<double> marks;
        const Conditioning* c = nullptr;
        for (const auto& x : conditioned)
            if (x.site == site) c = &x;
        marks = c ? stream.arrivals_conditioned(key, lambda, c->level) : stream.arrivals(key, lambda);
        for (std::size_t i = 0; i < marks.size(); ++i)
            ws.push_back({site, static_cast<std::uint32_t>(i), marks[i], 0});
    }

    const std::size_t stride = static_cast<std::size_t>(horizon) + 1;
    std::vector<Site> traj(ws.size() * stride);
    SiteSpace& sp = *space;
    auto fill = [&](std::size_t w) {
        rng::Stream st = stream.walk(sp.key(ws[w].origin), ws[w].index);
        return walk_path(sp, kernel, st, ws[w].origin, horizon, {traj.data() + w * stride, stride});
    };
    auto alive = map_indexed<std::uint32_t>(ws.size(), fill, exec);
    field.reserve(ws.size());
    for (std::size_t w = 0; w < ws.size(); ++w) {
        ws[w].alive_until = alive[w];
        field.add(ws[w], {traj.data() + w * stride, stride});
    }
    return field;
}

}  // namespace snlab
