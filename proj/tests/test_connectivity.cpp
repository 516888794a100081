#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "snlab/connectivity.hpp"

using namespace snlab;

TEST_CASE("pair estimate arithmetic") {
    PairEstimate e;
    e.eligible = 50;
    e.connected = 10;
    e.censored = 10;
    e.finish();
    CHECK(e.defined);
    CHECK(e.estimate == doctest::Approx(0.25));
    CHECK(e.lower == doctest::Approx(0.2));
    CHECK(e.upper == doctest::Approx(0.4));
    CHECK(e.ci.lo < 0.25);
    CHECK(e.ci.hi > 0.25);
    PairEstimate all;
    all.eligible = 5;
    all.censored = 5;
    all.finish();
    CHECK_FALSE(all.defined);
    CHECK(all.upper == 1.0);
}

TEST_CASE("periodic pairs: nothing at T=0, counts grow with T") {
    Window w(GraphFamily::cycle(24), 12);
    PairQuery q;
    q.window = w;
    q.kernel = WalkKernel{2, 0.3};
    q.lambda = 0.5;
    q.horizons = {0, 4, 16, 64};
    q.u = 0;
    q.v = 6;
    q.replicas = 300;
    auto est = pair_connectivity(q);
    REQUIRE(est.size() == 4);
    CHECK(est[0].connected == 0);
    for (std::size_t i = 0; i < est.size(); ++i) {
        CHECK(est[i].eligible == q.replicas);
        CHECK(est[i].censored == 0);
        if (i) CHECK(est[i].connected >= est[i - 1].connected);
    }
    CHECK(est.back().estimate > 0.5);
    q.exec = Exec::Serial;
    auto again = pair_connectivity(q);
    for (std::size_t i = 0; i < est.size(); ++i) CHECK(again[i].connected == est[i].connected);
}

TEST_CASE("explicit and local engines agree in law on a tree") {
    Window w(GraphFamily::regular_tree(3), 6);
    PairQuery q;
    q.window = w;
    q.kernel = WalkKernel{3, 0.25};
    q.lambda = 0.8;
    q.horizons = {5};
    q.u = w.child(0, 0);
    q.v = w.child(0, 1);
    q.replicas = 800;
    q.engine = Engine::Explicit;
    auto ex = pair_connectivity(q).front();
    q.engine = Engine::Local;
    q.seed = 99;
    auto lo = pair_connectivity(q).front();
    REQUIRE(ex.defined);
    REQUIRE(lo.defined);
    // Censoring differs between engines; compare the connected fraction of all eligible replicas.
    double p1 = ex.lower, p2 = lo.lower;
    double se = std::sqrt(p1 * (1 - p1) / ex.eligible + p2 * (1 - p2) / lo.eligible);
    CHECK(std::abs(p1 - p2) < 4 * se + 1e-9);
}
