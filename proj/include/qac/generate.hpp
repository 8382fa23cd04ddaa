#pragma once

#include "qac/circuit.hpp"
#include "qac/rng.hpp"
#include "qac/statevector.hpp"

namespace qac {

struct GeneratorOptions {
    std::size_t n_inputs = 0;
    std::size_t n_ancillae = 0;
    std::size_t depth = 1;
    std::size_t max_gate_width = 2;
    bool cleaned_up = false;     // layer-1 gates carry at most one input qubit
    bool with_output = false;    // attach a random output qubit and basis
    double coverage = 0.75;      // fraction of qubits a layer tries to gate
    // Probability that a gate or init state snaps to one of |0>, |1>, |+>,
    // |->. Snapped axes produce exact activation zeros (CNOT/CCZ-like
    // structure); the output basis always stays Haar-random.
    double snap_probability = 0.0;
};

namespace detail_gen {

inline QubitState draw_state(Rng& rng, double snap_probability) {
    if (snap_probability > 0.0 && rng.next_double() < snap_probability) {
        switch (rng.index(4)) {
            case 0: return ket0();
            case 1: return ket1();
            case 2: return ket_plus();
            default: return ket_minus();
        }
    }
    return random_qubit_state(rng);
}

} // namespace detail_gen

// Deterministic random circuit generator; identical seeds give identical
// circuits. Cleaned-up mode enforces at most one input per layer-1 gate by
// construction.
inline ReflectionCircuit random_circuit(const GeneratorOptions& opt,
                                        std::uint64_t seed) {
    const std::size_t total = opt.n_inputs + opt.n_ancillae;
    if (total == 0) throw std::invalid_argument("circuit needs qubits");
    if (opt.max_gate_width == 0) {
        throw std::invalid_argument("max_gate_width must be positive");
    }
    if (total > sim_cap()) {
        throw std::invalid_argument("requested circuit exceeds simulator cap");
    }
    if (opt.with_output && total < 1) {
        throw std::invalid_argument("output requires at least one qubit");
    }

    Rng rng(seed);
    ReflectionCircuit c;
    c.n_inputs = opt.n_inputs;
    c.n_ancillae = opt.n_ancillae;
    for (std::size_t a = opt.n_inputs; a < total; ++a) {
        c.ancilla_init.emplace(a, detail_gen::draw_state(rng, opt.snap_probability));
    }

    for (std::size_t layer = 0; layer < opt.depth; ++layer) {
        std::vector<std::size_t> pool(total);
        for (std::size_t q = 0; q < total; ++q) pool[q] = q;
        rng.shuffle(pool);
        const std::size_t target =
            std::max<std::size_t>(1, static_cast<std::size_t>(
                                         opt.coverage * static_cast<double>(total)));
        Layer nl;
        std::size_t used = 0;
        std::size_t cursor = 0;
        while (used < target && cursor < pool.size()) {
            std::size_t width =
                1 + rng.index(std::min(opt.max_gate_width,
                                       pool.size() - cursor));
            ReflectionGate g;
            std::size_t inputs_taken = 0;
            while (g.qubits.size() < width && cursor < pool.size()) {
                const std::size_t q = pool[cursor++];
                if (layer == 0 && opt.cleaned_up && c.is_input(q)) {
                    if (inputs_taken == 1) continue; // at most 1 input in layer 1
                    ++inputs_taken;
                }
                g.qubits.push_back(q);
                g.states.emplace(q, detail_gen::draw_state(rng, opt.snap_probability));
            }
            if (!g.qubits.empty()) {
                used += g.qubits.size();
                nl.push_back(std::move(g));
            }
        }
        c.layers.push_back(std::move(nl));
    }

    if (opt.with_output) {
        c.output_qubit = rng.index(total);
        const QubitState mu0 = random_qubit_state(rng);
        c.output_basis = {mu0, mu0.orthogonal()};
    }
    return c;
}

inline ReflectionCircuit random_circuit(std::size_t n_inputs,
                                        std::size_t n_ancillae, std::size_t depth,
                                        std::size_t max_gate_width,
                                        bool cleaned_up, std::uint64_t seed) {
    GeneratorOptions opt;
    opt.n_inputs = n_inputs;
    opt.n_ancillae = n_ancillae;
    opt.depth = depth;
    opt.max_gate_width = max_gate_width;
    opt.cleaned_up = cleaned_up;
    return random_circuit(opt, seed);
}

} // namespace qac
