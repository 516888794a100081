#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "snlab/field.hpp"
#include "snlab/site_space.hpp"

using namespace snlab;

namespace {
std::shared_ptr<SiteSpace> explicit_space(const Window& w) {
    return std::make_shared<SiteSpace>(SiteSpace::explicit_window(w));
}
}  // namespace

TEST_CASE("arrivals are nested in lambda") {
    CouplingStream s(42);
    for (std::uint64_t key = 0; key < 200; ++key) {
        auto lo = s.arrivals(key, 0.7), hi = s.arrivals(key, 2.5);
        REQUIRE(lo.size() <= hi.size());
        for (std::size_t i = 0; i < lo.size(); ++i) CHECK(lo[i] == hi[i]);
        for (std::size_t i = 1; i < hi.size(); ++i) CHECK(hi[i] > hi[i - 1]);
        auto c = s.arrivals_conditioned(key, 2.5, 0.5);
        REQUIRE_FALSE(c.empty());
        CHECK(c.front() <= 0.5);
    }
    CHECK_THROWS(s.arrivals_conditioned(1, 1.0, 0.0));
}

TEST_CASE("occupation counts are Poisson(lambda)") {
    auto space = explicit_space(Window(GraphFamily::cycle(500), 250));
    const double lambda = 1.3;
    double sum = 0, sq = 0;
    int n = 0;
    for (std::uint64_t r = 0; r < 40; ++r) {
        WalkerField f = realize_field(CouplingStream::for_replica(7, r), space, WalkKernel{2, 1.0 / 3}, lambda, 0);
        std::vector<int> count(500, 0);
        for (std::size_t w = 0; w < f.size(); ++w) ++count[f.position(w, 0)];
        for (int c : count) {
            sum += c;
            sq += c * c;
            ++n;
        }
    }
    double mean = sum / n, var = sq / n - mean * mean;
    CHECK(std::abs(mean - lambda) < 4 * std::sqrt(lambda / n));
    CHECK(std::abs(var / mean - 1.0) < 0.05);
}

TEST_CASE("serial and parallel realizations are identical") {
    auto space = explicit_space(Window(GraphFamily::regular_tree(3), 6));
    CouplingStream s(9);
    Conditioning cond{space->root(), 0.5};
    auto a = realize_field(s, space, WalkKernel{3, 0.25}, 1.5, 20, {&cond, 1}, Exec::Parallel);
    auto b = realize_field_serial(s, space, WalkKernel{3, 0.25}, 1.5, 20, {&cond, 1});
    REQUIRE(a.size() == b.size());
    for (std::size_t w = 0; w < a.size(); ++w) {
        CHECK(a.walker(w).origin == b.walker(w).origin);
        CHECK(a.walker(w).mark == b.walker(w).mark);
        CHECK(a.walker(w).alive_until == b.walker(w).alive_until);
        auto ta = a.trajectory(w), tb = b.trajectory(w);
        CHECK(std::equal(ta.begin(), ta.end(), tb.begin()));
    }
    CHECK_FALSE(a.walkers_at_origin(space->root(), 0.5).empty());
}

TEST_CASE("trajectories move along edges and freeze at the boundary") {
    Window w(GraphFamily::regular_tree(3), 3);
    auto space = explicit_space(w);
    WalkerField f = realize_field(CouplingStream(3), space, WalkKernel{3, 0.1}, 2.0, 40);
    std::size_t frozen = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(f.position(i, 0) == f.walker(i).origin);
        for (int t = 1; t <= 40; ++t) {
            VertexId a = space->vertex(f.position(i, t - 1)), b = space->vertex(f.position(i, t));
            if (f.alive(i, t)) CHECK(w.distance(a, b) <= 1);
            else CHECK(a == b);
        }
        if (f.frozen(i)) {
            ++frozen;
            CHECK(space->on_boundary(f.position(i, f.horizon())));
        }
    }
    CHECK(frozen > 0);
}

TEST_CASE("restriction keeps marks below the level") {
    auto space = explicit_space(Window(GraphFamily::cycle(100), 50));
    WalkerField f = realize_field(CouplingStream(5), space, WalkKernel{2, 0.5}, 3.0, 5);
    WalkerField g = f.restrict_to(1.0);
    CHECK(g.size() < f.size());
    for (std::size_t w = 0; w < g.size(); ++w) CHECK(g.walker(w).mark <= 1.0);
    WalkerField direct = realize_field(CouplingStream(5), space, WalkKernel{2, 0.5}, 1.0, 5);
    CHECK(direct.size() == g.size());
    CHECK_THROWS(realize_field(CouplingStream(5), space, WalkKernel{2, 0.5}, 0.0, 5));
}
