#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace varsample {

// Seeded RNG with hand-rolled transforms so that a given seed produces the
// same stream on every standard library (std::*_distribution is unspecified).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    // uniform in [0,1) with 53-bit resolution
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // uniform in [-1,1] excluding the ball |x| < gap (used for randomization
    // coefficients that must stay away from zero)
    double uniform_away_from_zero(double gap = 0.1) {
        for (;;) {
            double x = uniform(-1.0, 1.0);
            if (std::abs(x) >= gap) return x;
        }
    }

    double gaussian() {
        // Box-Muller; one value per call keeps the stream simple
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    std::complex<double> unit_complex() {
        double phi = uniform(0.0, 2.0 * M_PI);
        return {std::cos(phi), std::sin(phi)};
    }

    std::complex<double> complex_gaussian() { return {gaussian(), gaussian()}; }

    // complex vector drawn uniformly from the unit sphere of C^n
    std::vector<std::complex<double>> unit_complex_vector(int n) {
        std::vector<std::complex<double>> v(n);
        double norm2 = 0.0;
        for (auto& z : v) {
            z = complex_gaussian();
            norm2 += std::norm(z);
        }
        double inv = 1.0 / std::sqrt(norm2);
        for (auto& z : v) z *= inv;
        return v;
    }

    // Fisher-Yates permutation of {0,...,n-1}
    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = i;
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(engine_() % i);
            std::swap(p[i - 1], p[j]);
        }
        return p;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace varsample
