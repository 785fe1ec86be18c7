#pragma once

#include <cmath>
#include <cstdint>

namespace boxmatch {

// Counter-based deterministic generator. Every draw is a pure function of
// (seed, stream, counter), so generated data does not depend on call order
// across streams and is reproducible bit-for-bit.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream) {}

    std::uint64_t next_u64() {
        return mix(seed_ ^ rotl(stream_, 17), counter_++);
    }

    // in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // in [0, n); n must be positive
    int uniform_int(int n) {
        return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
    }

    double normal(double mean = 0.0, double sigma = 1.0) {
        // Box-Muller; consumes two counters
        double u1 = next_double();
        double u2 = next_double();
        if (u1 < 1e-300) u1 = 1e-300;
        return mean + sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // inversion method; fine for the small lambdas used here
    int poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        double l = std::exp(-lambda);
        double p = 1.0;
        int k = 0;
        do {
            ++k;
            p *= next_double();
        } while (p > l && k < 10000);
        return k - 1;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int r) {
        return (x << r) | (x >> (64 - r));
    }

    // splitmix64-style finalizer over the keyed counter
    static std::uint64_t mix(std::uint64_t key, std::uint64_t counter) {
        std::uint64_t z = key + 0x9e3779b97f4a7c15ull * (counter + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

}  // namespace boxmatch
