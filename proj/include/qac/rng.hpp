#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace qac {

// Deterministic RNG wrapper. All randomized operations in the library take an
// explicit seed and derive their draws from mt19937_64, whose output sequence
// is fixed by the standard. Distribution shaping is done by hand so that the
// same seed produces the same circuit on every platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform integer in [0, bound). bound must be >= 1.
    std::uint64_t next_below(std::uint64_t bound) {
        // Rejection sampling over the top multiple of bound.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v = engine_();
        while (v >= limit) {
            v = engine_();
        }
        return v % bound;
    }

    std::size_t index(std::size_t bound) {
        return static_cast<std::size_t>(next_below(bound));
    }

    bool next_bit() { return (engine_() >> 63) & 1U; }

    // Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u = 0.0;
        while (u == 0.0) {
            u = next_double();
        }
        const double v = next_double();
        const double r = std::sqrt(-2.0 * std::log(u));
        spare_ = r * std::sin(2.0 * M_PI * v);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * v);
    }

    std::complex<double> next_complex_normal() {
        return {next_normal(), next_normal()};
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[index(i)]);
        }
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace qac
