#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "snlab/rng.hpp"

using namespace snlab;

TEST_CASE("derive is a pure function of its inputs") {
    CHECK(rng::derive(1, rng::Tag::Walk, 2, 3, 4) == rng::derive(1, rng::Tag::Walk, 2, 3, 4));
    std::set<std::uint64_t> keys;
    for (auto tag : {rng::Tag::Arrivals, rng::Tag::Walk, rng::Tag::Replica, rng::Tag::Brw})
        for (std::uint64_t a = 0; a < 50; ++a) keys.insert(rng::derive(9, tag, a));
    CHECK(keys.size() == 200);
    CHECK(rng::derive(1, rng::Tag::Walk, 1, 0) != rng::derive(1, rng::Tag::Walk, 0, 1));
}

TEST_CASE("stream draws are uniform on [0,1)") {
    rng::Stream s{rng::derive(3, rng::Tag::Sample)};
    const int n = 200'000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
        double u = s.at(static_cast<std::uint64_t>(i));
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sq += u * u;
    }
    CHECK(std::abs(sum / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
    CHECK(std::abs(sq / n - 1.0 / 3) < 0.005);
}

TEST_CASE("counter replays the stream and drives std distributions") {
    rng::Counter c(77, rng::Tag::Sample, 1);
    rng::Stream s{rng::derive(77, rng::Tag::Sample, 1)};
    for (std::uint64_t i = 0; i < 10; ++i) CHECK(c.uniform() == s.at(i));
    CHECK(c.position() == 10);
    std::uniform_int_distribution<int> die(1, 6);
    int counts[7] = {};
    for (int i = 0; i < 60'000; ++i) ++counts[die(c)];
    for (int k = 1; k <= 6; ++k) CHECK(std::abs(counts[k] - 10'000) < 500);
}

TEST_CASE("poisson inversion: pmf at zero, mean, monotone coupling") {
    rng::Stream s{rng::derive(5, rng::Tag::Sample)};
    for (double m : {0.05, 0.7, 3.0, 40.0}) {
        const int n = 100'000;
        double sum = 0;
        int zeros = 0;
        for (int i = 0; i < n; ++i) {
            auto k = rng::poisson_inverse(m, s.at(static_cast<std::uint64_t>(i)));
            sum += static_cast<double>(k);
            zeros += k == 0;
        }
        CHECK(std::abs(sum / n - m) < 5 * std::sqrt(m / n));
        double p0 = std::exp(-m);
        CHECK(std::abs(zeros / double(n) - p0) < 5 * std::sqrt(p0 * (1 - p0) / n) + 1e-9);
    }
    for (int i = 0; i < 1000; ++i) {
        double u = s.at(static_cast<std::uint64_t>(i));
        std::uint64_t prev = 0;
        for (double m = 0.0; m < 8.0; m += 0.25) {
            auto k = rng::poisson_inverse(m, u);
            CHECK(k >= prev);
            prev = k;
        }
    }
    CHECK(rng::poisson_inverse(0.0, 0.999) == 0);
}

TEST_CASE("large-mean poisson path") {
    rng::Counter c(1, rng::Tag::Sample);
    double sum = 0;
    for (int i = 0; i < 20'000; ++i) sum += static_cast<double>(c.poisson(1000.0));
    CHECK(std::abs(sum / 20'000 - 1000.0) < 5 * std::sqrt(1000.0 / 20'000));
}
