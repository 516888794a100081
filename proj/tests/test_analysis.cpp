#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "snlab/analysis.hpp"

using namespace snlab;

TEST_CASE("bracket closed forms") {
    double rho = 0.2 + 0.8 * std::sqrt(3.0) / 2.0;
    Bracket b = lambda_c_bracket(4, 0.2);
    CHECK(b.rho == doctest::Approx(rho).epsilon(1e-14));
    CHECK(b.lower == doctest::Approx((1 / rho - 1) / 2).epsilon(1e-14));
    CHECK(b.upper == doctest::Approx((5 + 2 / (1 - rho)) * std::log(8.0)).epsilon(1e-14));
    CHECK(std::round(b.lower * 1e4) / 1e4 == doctest::Approx(0.0600));
    double rh = 0.5 + 0.5 * 2 * std::sqrt(6.0) / 7;
    Bracket c = lambda_c_bracket(7, 0.5);
    CHECK(c.upper == doctest::Approx(20 * std::log(7.0) / (1 - rh)).epsilon(1e-14));
    for (int d = 3; d <= 64; ++d)
        for (double h : {1.0 / (d + 1), 0.5}) CHECK(lambda_c_bracket(d, h).lower < lambda_c_bracket(d, h).upper);
    CHECK_THROWS(lambda_c_bracket(4, 0.3));
    Bracket t = lambda_c_bracket(GraphFamily::torus(2, 16), 0.2);
    CHECK(t.lower == 0.0);
    CHECK(t.upper == std::numeric_limits<double>::infinity());
}

TEST_CASE("periodic kernel rows") {
    Window w(GraphFamily::cycle(9), 4);
    WalkKernel k{2, 1.0 / 3};
    // Test-side convolution on Z/9.
    std::vector<double> p(9, 0.0);
    p[2] = 1.0;
    for (int t = 0; t < 7; ++t) {
        std::vector<double> q(9, 0.0);
        for (int x = 0; x < 9; ++x) {
            q[x] += p[x] / 3;
            q[(x + 1) % 9] += p[x] / 3;
            q[(x + 8) % 9] += p[x] / 3;
        }
        p = q;
    }
    auto row = periodic_kernel_row(w, k, 2, 7);
    for (int x = 0; x < 9; ++x) CHECK(row[x] == doctest::Approx(p[x]).epsilon(1e-13));
}

TEST_CASE("regeneration expectation uses the kernel row") {
    RegenerationQuery q;
    q.window = Window(GraphFamily::cycle(200), 100);
    q.A = {0, 1};
    q.report = {0};
    q.times = {5, 20};
    q.replicas = 3000;
    auto r = regeneration_test(q);
    for (const auto& row : r.rows) {
        auto pr = periodic_kernel_row(q.window, q.kernel, row.v, row.t);
        CHECK(row.expected == doctest::Approx(1.0 - pr[0] - pr[1]).epsilon(1e-12));
        CHECK(std::abs(row.mean - row.expected) < 5 * row.stderr_mean + 1e-9);
    }
}

TEST_CASE("small stationarity and meeting runs") {
    StationarityQuery s;
    s.window = Window(GraphFamily::cycle(300), 150);
    s.samples = 30'000;
    s.times = {0, 5};
    auto sr = stationarity_test(s);
    CHECK(sr.rows.size() == 2);
    for (const auto& row : sr.rows) CHECK(std::abs(row.mean - 1.0) < 0.05);

    MeetingQuery m;
    m.window = Window(GraphFamily::cycle(600), 300);
    m.times = {5, 10, 20, 40};
    m.replicas = 100;
    auto mr = meeting_count_test(m);
    CHECK(mr.nondecreasing);
    CHECK(mr.fit.slope > 0.3);
    CHECK(mr.fit.slope < 0.7);
}

TEST_CASE("sweep curve is monotone per replica") {
    SweepQuery q;
    q.window = Window(GraphFamily::regular_tree(3), 10);
    q.kernel = WalkKernel{3, 0.25};
    q.grid = {0.1, 0.5, 1.0, 2.0};
    q.horizon = 8;
    q.u = 0;
    q.v = q.window.child(0, 0);
    q.replicas = 60;
    q.max_walkers = 20'000;
    q.min_samples = 5;
    auto r = lambda_sweep(q);
    CHECK(r.monotone);
    REQUIRE(r.curve.size() == 4);
    for (std::size_t i = 1; i < r.curve.size(); ++i) CHECK(r.curve[i].est.connected >= r.curve[i - 1].est.connected);
    q.grid = {0.5, 0.1};
    CHECK_THROWS(lambda_sweep(q));
}
