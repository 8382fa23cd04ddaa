#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "qac/rng.hpp"

namespace qac {

using Complex = std::complex<double>;

inline constexpr double kNormTol = 1e-10;

// Single-qubit pure state; the per-qubit factor of a separable state.
struct QubitState {
    Complex amp0{1.0, 0.0};
    Complex amp1{0.0, 0.0};

    double norm2() const { return std::norm(amp0) + std::norm(amp1); }

    bool is_normalized(double tol = kNormTol) const {
        return std::abs(norm2() - 1.0) <= tol;
    }

    QubitState normalized() const {
        const double n = std::sqrt(norm2());
        if (n == 0.0) {
            throw std::invalid_argument("cannot normalize the zero state");
        }
        return {amp0 / n, amp1 / n};
    }

    // State orthogonal to this one (unique up to phase on a qubit).
    QubitState orthogonal() const {
        return {-std::conj(amp1), std::conj(amp0)};
    }

    Complex amplitude(int bit) const { return bit ? amp1 : amp0; }
};

inline Complex inner(const QubitState& a, const QubitState& b) {
    return std::conj(a.amp0) * b.amp0 + std::conj(a.amp1) * b.amp1;
}

inline QubitState ket0() { return {1.0, 0.0}; }
inline QubitState ket1() { return {0.0, 1.0}; }
inline QubitState ket_plus() { return {M_SQRT1_2, M_SQRT1_2}; }
inline QubitState ket_minus() { return {M_SQRT1_2, -M_SQRT1_2}; }

inline QubitState basis_state(int bit) { return bit ? ket1() : ket0(); }

// Haar-like random single-qubit state (normalized complex Gaussian pair).
inline QubitState random_qubit_state(Rng& rng) {
    QubitState s{rng.next_complex_normal(), rng.next_complex_normal()};
    return s.normalized();
}

} // namespace qac
