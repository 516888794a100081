#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "snlab/graphs.hpp"
#include "snlab/kernels.hpp"

using namespace snlab;

TEST_CASE("lazy spectral radius") {
    for (int d : {3, 4, 10})
        for (double h : {0.0, 0.2, 0.5}) {
            double want = h + (1 - h) * 2 * std::sqrt(d - 1.0) / d;
            CHECK(spectral_radius_lazy(GraphFamily::regular_tree(d), h) == doctest::Approx(want).epsilon(1e-15));
        }
    CHECK(spectral_radius_lazy(GraphFamily::torus(2, 64), 0.3) == 1.0);
    CHECK_THROWS(validate_holding(1.0));
    CHECK_THROWS(validate_holding(-0.1));
}

TEST_CASE("tree kernel rows are distributions and match enumeration") {
    for (int d : {3, 5}) {
        KernelTable t = tree_kernel(d, 0.25, 40);
        for (int s = 0; s <= 40; ++s) {
            double sum = 0;
            for (int k = 0; k <= s; ++k) sum += t.q[s][k];
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
            double mass = 0;
            for (int k = 0; k <= s; ++k) mass += t.transition(s, k) * KernelTable::sphere_size(d, k);
            CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
        }
        Rational h(1, 4);
        auto brute = enumerate_tree_walks(d, h, 5);
        CHECK(tree_kernel_exact(d, h, 5) == brute);
        for (int s = 0; s <= 5; ++s)
            for (int k = 0; k <= s; ++k) CHECK(std::abs(t.q[s][k] - boost::rational_cast<double>(brute[s][k])) < 1e-14);
    }
    CHECK(rational_holding(1.0 / 3.0) == Rational(1, 3));
    CHECK_THROWS(tree_kernel(2, 0.5, 3));
}

TEST_CASE("kernel bounds hold and catch a corrupted table") {
    for (int d : {3, 4, 8})
        for (double h : {0.0, 1.0 / (d + 1), 0.5}) CHECK(check_kernel_bounds(tree_kernel(d, h, 64), h).ok);
    KernelTable bad = tree_kernel(3, 0.5, 10);
    bad.q[10][0] *= 50;
    auto rep = check_kernel_bounds(bad, 0.5);
    CHECK_FALSE(rep.ok);
    CHECK_FALSE(rep.violations.empty());
}

// Enumerates step sequences from the root and keeps those inside the left
// subtrees at every step 1..t.
double survival_oracle(int d, double h, int t) {
    Window w(GraphFamily::regular_tree(d), t + 1);
    const int l = left_count(d);
    const double move = (1 - h) / d;
    std::function<double(VertexId, int)> go = [&](VertexId v, int step) -> double {
        if (step > 0) {
            auto p = tree_code::decode(d, v);
            if (p.empty() || p[0] >= l) return 0.0;
        }
        if (step == t) return 1.0;
        double s = h > 0 && step > 0 ? h * go(v, step + 1) : 0.0;
        for (auto n : w.neighbors(v)) s += move * go(n.id, step + 1);
        return s;
    };
    return go(0, 0);
}

TEST_CASE("left-subtree survival against enumeration") {
    for (int d : {3, 4, 5})
        for (double h : {1.0 / (d + 1), 0.5})
            for (int t = 1; t <= 6; ++t)
                CHECK(walk_survival_in_left_subtree(d, h, t) == doctest::Approx(survival_oracle(d, h, t)).epsilon(1e-12));
    double prev = 1.0;
    for (int t = 1; t <= 400; ++t) {
        double s = walk_survival_in_left_subtree(6, 1.0 / 7, t);
        CHECK(s <= prev + 1e-15);
        prev = s;
    }
    CHECK(prev == doctest::Approx(walk_survival_limit(6, 1.0 / 7)).epsilon(1e-6));
}

TEST_CASE("slot map") {
    WalkKernel k{4, 0.2};
    CHECK(k.slot(0.1) == -1);
    CHECK(k.slot(0.2) == 0);
    CHECK(k.slot(0.999999) == 3);
    CHECK(k.slot_among(0.99, 2) == 1);
    CHECK(k.slot_among(0.99, 0) == -1);
}
