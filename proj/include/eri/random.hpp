#pragma once
// Counter-based pseudo-random numbers. Output i of a stream is a fixed
// function of (seed, stream, i), so results do not depend on the standard
// library's distribution implementations or on call interleaving elsewhere.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace eri {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : key_(mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL))) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    /// Value at an absolute position, independent of the current counter.
    [[nodiscard]] result_type at(std::uint64_t index) const noexcept {
        return mix64(key_ + (index + 1) * 0x9e3779b97f4a7c15ULL);
    }

    result_type operator()() noexcept { return at(counter_++); }

    void discard(std::uint64_t n) noexcept { counter_ += n; }
    [[nodiscard]] std::uint64_t position() const noexcept { return counter_; }

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    /// Standard normal by Box-Muller; the second variate of each pair is cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double exponential() noexcept { return -std::log(uniform()); }

    /// Gamma(shape, 1) by Marsaglia-Tsang; shape < 1 goes through Gamma(shape + 1) * U^(1/shape).
    double gamma(double shape) noexcept {
        if (shape < 1.0) return gamma(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = 0.0;
            double v = 0.0;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double chi_squared(double dof) noexcept { return 2.0 * gamma(0.5 * dof); }

    /// Pareto on [1, inf) with P(R > s) = s^(-alpha).
    double pareto(double alpha) noexcept { return std::pow(uniform(), -1.0 / alpha); }

    /// +1 or -1 with equal probability.
    double sign() noexcept { return ((*this)() >> 63) ? 1.0 : -1.0; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace eri
