#pragma once

#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "qac/circuit.hpp"

namespace qac {

// Dense statevector cap; overridable through QAC_SIM_CAP.
inline std::size_t sim_cap() {
    static const std::size_t cap = [] {
        if (const char* env = std::getenv("QAC_SIM_CAP")) {
            const long v = std::atol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        }
        return static_cast<std::size_t>(22);
    }();
    return cap;
}

// Complex amplitude vector over all circuit qubits, qubit q <-> bit q of the
// amplitude index. Projected states are un-normalized and flagged.
struct DenseState {
    std::size_t n_qubits = 0;
    std::vector<Complex> amplitudes;
    bool normalized = true;

    static DenseState zero(std::size_t n) {
        DenseState s;
        s.n_qubits = n;
        s.amplitudes.assign(std::size_t{1} << n, Complex{0.0, 0.0});
        return s;
    }

    std::size_t dim() const { return amplitudes.size(); }

    double norm2() const {
        double n = 0.0;
        for (const auto& a : amplitudes) n += std::norm(a);
        return n;
    }

    DenseState scaled(double factor) const {
        DenseState out = *this;
        for (auto& a : out.amplitudes) a *= factor;
        return out;
    }

    DenseState normalized_copy() const {
        const double n = std::sqrt(norm2());
        if (n == 0.0) {
            throw std::invalid_argument("cannot normalize the zero state");
        }
        DenseState out = scaled(1.0 / n);
        out.normalized = true;
        return out;
    }
};

inline Complex inner(const DenseState& a, const DenseState& b) {
    if (a.n_qubits != b.n_qubits) {
        throw std::invalid_argument("state dimension mismatch");
    }
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.dim(); ++i) {
        acc += std::conj(a.amplitudes[i]) * b.amplitudes[i];
    }
    return acc;
}

// Fidelity |<a|b>| for normalized states; global-phase-blind equality test.
inline double fidelity(const DenseState& a, const DenseState& b) {
    return std::abs(inner(a, b));
}

inline bool states_equal_up_to_phase(const DenseState& a, const DenseState& b,
                                     double tol = 1e-9) {
    return fidelity(a, b) >= 1.0 - tol;
}

namespace detail {

// Scatters a compact gate-local index into a full amplitude index, and walks
// residual indices. qubits must be sorted ascending.
struct GateIndexer {
    std::vector<std::size_t> gate_bits;   // global bit positions of the gate
    std::size_t n_qubits;

    GateIndexer(const std::vector<std::size_t>& qubits, std::size_t n)
        : gate_bits(qubits), n_qubits(n) {
        std::sort(gate_bits.begin(), gate_bits.end());
    }

    std::size_t residual_count() const {
        return std::size_t{1} << (n_qubits - gate_bits.size());
    }

    std::size_t local_count() const {
        return std::size_t{1} << gate_bits.size();
    }

    // Expands residual index r (over non-gate bits) to a full index with all
    // gate bits zero.
    std::size_t expand_residual(std::size_t r) const {
        std::size_t idx = 0;
        std::size_t bit = 0;
        for (std::size_t q = 0; q < n_qubits; ++q) {
            if (std::binary_search(gate_bits.begin(), gate_bits.end(), q)) {
                continue;
            }
            if ((r >> bit) & 1U) idx |= std::size_t{1} << q;
            ++bit;
        }
        return idx;
    }

    // Full index offset of gate-local assignment s.
    std::size_t local_offset(std::size_t s) const {
        std::size_t idx = 0;
        for (std::size_t j = 0; j < gate_bits.size(); ++j) {
            if ((s >> j) & 1U) idx |= std::size_t{1} << gate_bits[j];
        }
        return idx;
    }
};

// Amplitudes of the separable gate state |theta>_S over the sorted gate
// qubits: entry s = prod_j theta_{q_j}(s_j).
inline std::vector<Complex> gate_axis_amplitudes(
    const ReflectionGate& gate, const std::vector<std::size_t>& sorted_qubits) {
    const std::size_t w = sorted_qubits.size();
    std::vector<Complex> axis(std::size_t{1} << w);
    for (std::size_t s = 0; s < axis.size(); ++s) {
        Complex v{1.0, 0.0};
        for (std::size_t j = 0; j < w; ++j) {
            v *= gate.state_of(sorted_qubits[j]).amplitude((s >> j) & 1U);
        }
        axis[s] = v;
    }
    return axis;
}

} // namespace detail

// Applies G(S) = I - 2|theta><theta|_S as a rank-1 update restricted to the
// gate subspace: per residual basis index, subtract twice the S-overlap.
inline DenseState apply_reflection(const DenseState& state,
                                   const ReflectionGate& gate) {
    for (auto q : gate.qubits) {
        if (q >= state.n_qubits) {
            throw std::out_of_range("gate qubit " + std::to_string(q) +
                                    " out of range");
        }
    }
    std::vector<std::size_t> sorted(gate.qubits.begin(), gate.qubits.end());
    std::sort(sorted.begin(), sorted.end());
    detail::GateIndexer ix(sorted, state.n_qubits);
    const auto axis = detail::gate_axis_amplitudes(gate, sorted);

    DenseState out = state;
    std::vector<std::size_t> offsets(axis.size());
    for (std::size_t s = 0; s < axis.size(); ++s) {
        offsets[s] = ix.local_offset(s);
    }
    for (std::size_t r = 0; r < ix.residual_count(); ++r) {
        const std::size_t base = ix.expand_residual(r);
        Complex overlap{0.0, 0.0};
        for (std::size_t s = 0; s < axis.size(); ++s) {
            overlap += std::conj(axis[s]) * state.amplitudes[base + offsets[s]];
        }
        if (overlap == Complex{0.0, 0.0}) continue;
        const Complex twice = 2.0 * overlap;
        for (std::size_t s = 0; s < axis.size(); ++s) {
            out.amplitudes[base + offsets[s]] -= twice * axis[s];
        }
    }
    return out;
}

// |x>|eta>_A per the circuit's ancilla initialization.
inline DenseState initial_state(const ReflectionCircuit& c,
                                const std::vector<int>& x) {
    if (x.size() != c.n_inputs) {
        throw std::invalid_argument("input length does not match n_inputs");
    }
    if (c.n_qubits() > sim_cap()) {
        throw std::invalid_argument("circuit exceeds simulator cap of " +
                                    std::to_string(sim_cap()) + " qubits");
    }
    DenseState s = DenseState::zero(c.n_qubits());
    std::size_t input_idx = 0;
    for (std::size_t i = 0; i < c.n_inputs; ++i) {
        if (x[i]) input_idx |= std::size_t{1} << i;
    }
    // Separable expansion over ancillae.
    std::vector<std::size_t> ancs;
    for (std::size_t a = c.n_inputs; a < c.n_qubits(); ++a) ancs.push_back(a);
    const std::size_t acount = ancs.size();
    for (std::size_t m = 0; m < (std::size_t{1} << acount); ++m) {
        Complex v{1.0, 0.0};
        std::size_t idx = input_idx;
        for (std::size_t j = 0; j < acount; ++j) {
            const int bit = (m >> j) & 1U;
            v *= c.init_of(ancs[j]).amplitude(bit);
            if (bit) idx |= std::size_t{1} << ancs[j];
        }
        s.amplitudes[idx] = v;
    }
    return s;
}

inline DenseState initial_state(const ReflectionCircuit& c, std::size_t x_bits) {
    std::vector<int> x(c.n_inputs);
    for (std::size_t i = 0; i < c.n_inputs; ++i) x[i] = (x_bits >> i) & 1U;
    return initial_state(c, x);
}

// C(x): ancilla initialization, then each layer's gates in sequence.
inline DenseState run(const ReflectionCircuit& c, const std::vector<int>& x) {
    DenseState s = initial_state(c, x);
    for (const auto& layer : c.layers) {
        for (const auto& g : layer) {
            s = apply_reflection(s, g);
        }
    }
    return s;
}

inline DenseState run(const ReflectionCircuit& c, std::size_t x_bits) {
    std::vector<int> x(c.n_inputs);
    for (std::size_t i = 0; i < c.n_inputs; ++i) x[i] = (x_bits >> i) & 1U;
    return run(c, x);
}

// ||(<mu| on qubit q (x) I) |psi>||^2 for a single-qubit bra.
inline double projected_norm2_on_qubit(const DenseState& state, std::size_t q,
                                       const QubitState& mu) {
    if (q >= state.n_qubits) {
        throw std::out_of_range("qubit out of range");
    }
    const std::size_t stride = std::size_t{1} << q;
    double total = 0.0;
    for (std::size_t i = 0; i < state.dim(); ++i) {
        if (i & stride) continue;
        const Complex v = std::conj(mu.amp0) * state.amplitudes[i] +
                          std::conj(mu.amp1) * state.amplitudes[i | stride];
        total += std::norm(v);
    }
    return total;
}

// Pr[C accepts x] = ||<mu_1| . C(x)||^2 on the declared output register.
inline double accept_prob(const ReflectionCircuit& c,
                          const std::vector<int>& x) {
    if (!c.output_qubit || !c.output_basis) {
        throw std::invalid_argument("circuit has no output declaration");
    }
    const DenseState s = run(c, x);
    return projected_norm2_on_qubit(s, *c.output_qubit, c.output_basis->second);
}

inline double accept_prob(const ReflectionCircuit& c, std::size_t x_bits) {
    std::vector<int> x(c.n_inputs);
    for (std::size_t i = 0; i < c.n_inputs; ++i) x[i] = (x_bits >> i) & 1U;
    return accept_prob(c, x);
}

// Debug dump of nonzero amplitudes, little-endian qubit order in the label.
inline std::string dump_nonzero(const DenseState& s, double tol = 1e-12) {
    std::ostringstream os;
    for (std::size_t i = 0; i < s.dim(); ++i) {
        if (std::abs(s.amplitudes[i]) <= tol) continue;
        os << '|';
        for (std::size_t q = 0; q < s.n_qubits; ++q) {
            os << (((i >> q) & 1U) ? '1' : '0');
        }
        os << "> " << s.amplitudes[i].real();
        if (s.amplitudes[i].imag() != 0.0) {
            os << (s.amplitudes[i].imag() >= 0 ? "+" : "") << s.amplitudes[i].imag()
               << 'i';
        }
        os << '\n';
    }
    return os.str();
}

} // namespace qac
