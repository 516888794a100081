#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

// Counter-based randomness. Every draw is a pure function of
// (seed, tag, a, b, c, counter), so any value can be regenerated in isolation.
//
//   key   = derive(seed, tag, a, b, c)
//   draw i = mix64(key + (i + 1) * golden)
//
// Tags separate independent purposes; (a, b, c) carry vertex, index and time.
namespace snlab::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

enum class Tag : std::uint64_t {
    Arrivals = 1,
    Walk = 2,
    Replica = 3,
    Backward = 4,
    Forward = 5,
    Brw = 6,
    Perc = 7,
    TreeArrivals = 8,
    GoodSet = 9,
    Conditioned = 10,
    Sample = 11,
};

constexpr std::uint64_t derive(std::uint64_t seed, Tag tag, std::uint64_t a = 0,
                               std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = mix64(seed ^ (static_cast<std::uint64_t>(tag) * kGolden));
    h = mix64(h ^ (a + 0x632BE59BD9B4E019ULL));
    h = mix64(h ^ (b + 0x8CB92BA72F3D8DD7ULL));
    h = mix64(h ^ (c + 0xD1B54A32D192ED03ULL));
    return h;
}

// Uniform on [0, 1) with 53 bits.
constexpr double to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

inline double exp1_from_unit(double u) { return -std::log1p(-u); }

struct Stream {
    std::uint64_t key = 0;

    constexpr std::uint64_t bits(std::uint64_t i) const {
        return mix64(key + (i + 1) * kGolden);
    }
    constexpr double at(std::uint64_t i) const { return to_unit(bits(i)); }
    double exp1(std::uint64_t i) const { return exp1_from_unit(at(i)); }
};

// Sequential view over a Stream. Satisfies UniformRandomBitGenerator so it can
// drive std:: distributions when needed.
class Counter {
public:
    using result_type = std::uint64_t;

    Counter() = default;
    explicit Counter(std::uint64_t key) : s_{key} {}
    Counter(std::uint64_t seed, Tag tag, std::uint64_t a = 0, std::uint64_t b = 0,
            std::uint64_t c = 0)
        : s_{derive(seed, tag, a, b, c)} {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() { return s_.bits(i_++); }

    double uniform() { return s_.at(i_++); }
    double exp1() { return s_.exp1(i_++); }
    inline std::uint64_t poisson(double mean);
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    }

    std::uint64_t position() const { return i_; }
    std::uint64_t key() const { return s_.key; }

private:
    Stream s_{};
    std::uint64_t i_ = 0;
};

// Poisson quantile by inversion from a single uniform. Nondecreasing in mean for
// fixed u, which makes counts drawn this way monotone under parameter coupling.
inline std::uint64_t poisson_inverse(double mean, double u) {
    if (!(mean > 0.0)) return 0;
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t k = 0;
    while (u >= cdf) {
        ++k;
        p *= mean / static_cast<double>(k);
        double next = cdf + p;
        if (next == cdf) break;  // tail exhausted in double precision
        cdf = next;
    }
    return k;
}

inline std::uint64_t Counter::poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    if (mean < 600.0) return poisson_inverse(mean, uniform());
    std::poisson_distribution<std::uint64_t> dist(mean);
    return dist(*this);
}

}  // namespace snlab::rng
