#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "snlab/kernels.hpp"
#include "snlab/treeperc.hpp"

using namespace snlab;

TEST_CASE("arrival intensities") {
    const int d = 6;
    ArrivalStream s(d, 2.0, 10, 1);
    const double h = 1.0 / 7;
    CHECK(s.alpha(0) == doctest::Approx(2.0 * (1 - h) / d));
    for (int t = 1; t <= 10; ++t)
        CHECK(s.alpha(t) == doctest::Approx(s.alpha(0) * walk_survival_in_left_subtree(d, h, t)).epsilon(1e-14));
    CHECK_THROWS(s.alpha(11));
    CHECK_THROWS(sample_arrivals(6, 0.5, 1.0, 4, 1));
    CHECK_NOTHROW(sample_arrivals(6, h, 1.0, 4, 1));

    RunningStats c;
    for (std::uint64_t e = 0; e < 50'000; ++e) c.add(static_cast<double>(s.count(rng::mix64(e), e & 1, 3)));
    CHECK(std::abs(c.mean - s.alpha(3)) < 4 * c.stderr_mean());
    CHECK(c.variance() == doctest::Approx(s.alpha(3)).epsilon(0.05));
}

TEST_CASE("certificates on fixture streams") {
    const int d = 7;  // l = 3: u's root has 4 right children, others 3
    PercTree tu = right_tree_u(d, {0, 0}, 10, 100);
    PercTree tv = right_tree_v(d, 10, 200);
    CHECK(tu.out_degree(0) == 4);
    CHECK(tu.out_degree(1) == 3);
    CHECK(tv.out_degree(0) == 3);

    ArrivalStream all(d, 1.0, 20, 0);
    all.set_default(1);
    CHECK(good_at_time(all, tv, 3)->path == std::vector<int>{0, 0, 0});
    CHECK(good_at_time(all, tu, 2)->path == std::vector<int>{0, 1});  // the v branch is skipped
    CHECK(good_at_time(all, tu, 0)->path.empty());

    ArrivalStream none(d, 1.0, 20, 0);
    none.set_default(0);
    for (int t = 1; t <= 5; ++t) CHECK_FALSE(good_at_time(none, tv, t).has_value());

    // One open path 2,1,0 at t = 3: forward at times 0,1,2, backward at 5,4,3.
    std::uint64_t k1 = PercTree::child_key(tv.root_key, 2), k2 = PercTree::child_key(k1, 1),
                  k3 = PercTree::child_key(k2, 0);
    none.set_count(k1, false, 0, 1);
    none.set_count(k2, false, 1, 2);
    none.set_count(k3, false, 2, 1);
    none.set_count(k1, true, 5, 1);
    none.set_count(k2, true, 4, 1);
    CHECK_FALSE(good_at_time(none, tv, 3).has_value());
    none.set_count(k3, true, 3, 1);
    CHECK(good_at_time(none, tv, 3)->path == std::vector<int>{2, 1, 0});

    ArrivalStream shortcap(d, 1.0, 4, 0);
    CHECK_THROWS(good_at_time(shortcap, tv, 3));
    CHECK_THROWS(right_tree_u(d, {4}, 10, 1));
}

TEST_CASE("branching oracles") {
    CHECK(extinction_probability(2, 0.75) == doctest::Approx(1.0 / 9).epsilon(1e-10));
    CHECK(extinction_probability(2, 0.4) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(survival_probability(2, 0.75, 1) == doctest::Approx(1 - 0.25 * 0.25));
    for (int D = 1; D < 60; ++D)
        CHECK(survival_probability(3, 0.6, D + 1) <= survival_probability(3, 0.6, D) + 1e-15);
    CHECK(survival_probability(3, 0.6, 400) == doctest::Approx(1 - extinction_probability(3, 0.6)).epsilon(1e-9));
}

TEST_CASE("percolation clusters") {
    PercTree t{3, 2, 8, 0, {}};
    rng::Counter g(3, rng::Tag::Perc);
    auto full = percolation_cluster(t, 1.0, g);
    CHECK(full.size == 1 + 3 * (255));
    CHECK(full.reached_depth == 8);
    auto none = percolation_cluster(t, 0.0, g);
    CHECK(none.size == 1);
    CHECK(none.reached_depth == 0);
    CHECK_THROWS(percolation_cluster(t, 1.5, g));
    RunningStats gen1;
    for (int i = 0; i < 20'000; ++i) {
        auto c = percolation_cluster(t, 0.3, g);
        gen1.add(c.generation_sizes.size() > 1 ? static_cast<double>(c.generation_sizes[1]) : 0.0);
    }
    CHECK(std::abs(gen1.mean - 0.9) < 4 * gen1.stderr_mean());
}

TEST_CASE("calibration constants") {
    CHECK(edge_open_target(25) == doctest::Approx(2 / std::sqrt(12.0)));
    double b = 2 / std::sqrt(12.0), h = 1.0 / 26;
    double want = 26 * -std::log1p(-b) / walk_survival_limit(25, h) / 5.0;
    CHECK(*calibrated_C(25) == doctest::Approx(want).epsilon(1e-12));
    CHECK_FALSE(calibrated_C(5).has_value());
}

TEST_CASE("goodness frequencies") {
    GoodnessQuery q;
    q.d = 5;
    q.lambda = 6.0;
    q.times = {1, 2};
    q.replicas = 3000;
    auto r = simultaneous_goodness_rate(q);
    REQUIRE(r.at_least.size() == 3);
    CHECK(r.at_least[0] == 1.0);
    CHECK(r.at_least[1] >= r.at_least[2]);
    for (const auto& row : r.rows) {
        CHECK(row.p_both <= std::min(row.p_u, row.p_v));
        CHECK(row.both_ci.lo <= row.p_both);
    }
}

TEST_CASE("first arrivals on realized fields match alpha") {
    auto rows = empirical_first_arrivals(3, 2.0, 3, 1500, 4);
    for (const auto& r : rows) CHECK(std::abs(r.count.mean - r.alpha) < 4 * r.count.stderr_mean() + 1e-9);
}
