#pragma once

#include <catch2/catch_amalgamated.hpp>

#include "qac/circuit.hpp"
#include "qac/generate.hpp"
#include "qac/statevector.hpp"

namespace qact {

using namespace qac;

// Two-qubit fixture: CNOT(input 0 -> ancilla 1), ancilla starts in |0>.
// C(x) = |x>|x>, so reading either qubit in the computational basis gives x.
inline ReflectionCircuit cnot_fixture() {
    ReflectionCircuit c;
    c.n_inputs = 1;
    c.n_ancillae = 1;
    c.ancilla_init.emplace(1, ket0());
    c.layers.push_back({cnot_gate(0, 1)});
    return c;
}

// Phase-type fixture from the IR examples: G = I - 2|11><11| on (input 0,
// ancilla |1>). C(0) = |0>|1>, C(1) = -|1>|1>.
inline ReflectionCircuit cz_fixture() {
    ReflectionCircuit c;
    c.n_inputs = 1;
    c.n_ancillae = 1;
    c.ancilla_init.emplace(1, ket1());
    c.layers.push_back({make_gate({{0, ket1()}, {1, ket1()}})});
    return c;
}

// Cat_n on n qubits in synthesis mode (no inputs): |+>|0..0> then a CNOT
// cascade widened layer by layer (depth grows with n; fine for oracles).
inline ReflectionCircuit cat_circuit(std::size_t n) {
    ReflectionCircuit c;
    c.n_inputs = 0;
    c.n_ancillae = n;
    c.ancilla_init.emplace(0, ket_plus());
    for (std::size_t q = 1; q < n; ++q) c.ancilla_init.emplace(q, ket0());
    for (std::size_t q = 1; q < n; ++q) {
        c.layers.push_back({cnot_gate(q - 1, q)});
    }
    return c;
}

inline DenseState cat_state(std::size_t n) {
    DenseState s = DenseState::zero(n);
    s.amplitudes.front() = M_SQRT1_2;
    s.amplitudes.back() = M_SQRT1_2;
    return s;
}

inline std::vector<int> bits_of(std::size_t x, std::size_t n) {
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = (x >> i) & 1U;
    return out;
}

} // namespace qact
