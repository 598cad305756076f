#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ihif {

/// Seeded random source with portable output.
///
/// std::mt19937_64 is bit-exact across implementations, but the standard
/// distributions are not, so the uniform/normal transforms are done here.
/// Every seeded run therefore produces the same stream on every platform,
/// which the reproducible-split and reproducible-model contracts rely on.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; caches the second variate.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 == 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * M_PI * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    /// Unit-variance Laplace variate (inverse CDF).
    double laplace() {
        const double u = uniform() - 0.5;
        const double b = 1.0 / std::sqrt(2.0);
        return u < 0 ? b * std::log1p(2.0 * u) : -b * std::log1p(-2.0 * u);
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Rejection sampling keeps the draw unbiased.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % n;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace ihif
