#pragma once

#include "qac/circuit.hpp"
#include "qac/statevector.hpp"

namespace qac {

enum class CleanupMode { Parity, Majority, Structural };

// Record of one quantum restriction: inputs (i, j) of a deleted layer-1 gate
// hard-wired to |phi> = alpha|01> + beta|10>, prepared by a CNOT-style gate
// from the separable start (alpha|0> + beta|1>) (x) |1>.
struct QuantumPair {
    std::size_t gate_index = 0; // position of the deleted gate in layer 1
    std::size_t input_i = 0;    // original input indices, i < j
    std::size_t input_j = 0;
    Complex alpha{1.0, 0.0};
    Complex beta{0.0, 0.0};
};

struct CleanupResult {
    ReflectionCircuit circuit;
    CleanupMode mode = CleanupMode::Structural;
    std::vector<std::size_t> survivors;        // original input indices
    std::map<std::size_t, int> classical_fixed; // original index -> bit
    std::vector<QuantumPair> quantum_pairs;
    int parity_flip = 0;
    // new_index_of[q] = index of original qubit q in the transformed circuit.
    std::vector<std::size_t> new_index_of;
};

// Coefficients of the deactivating pair state: alpha = a/sqrt(|a|^2+|b|^2),
// beta = -b/sqrt(|a|^2+|b|^2) with a = <theta_{i,j}|10>, b = <theta_{i,j}|01>,
// and (1, 0) when a = b = 0.
inline std::pair<Complex, Complex> quantum_restriction_coeffs(
    const ReflectionGate& gate, std::size_t i, std::size_t j) {
    if (i == j || !gate.touches(i) || !gate.touches(j)) {
        throw std::invalid_argument("pair indices must be distinct gate qubits");
    }
    const QubitState& ti = gate.state_of(i);
    const QubitState& tj = gate.state_of(j);
    const Complex a = std::conj(ti.amp1) * std::conj(tj.amp0); // <theta|10>
    const Complex b = std::conj(ti.amp0) * std::conj(tj.amp1); // <theta|01>
    const double norm = std::sqrt(std::norm(a) + std::norm(b));
    if (norm == 0.0) {
        return {Complex{1.0, 0.0}, Complex{0.0, 0.0}};
    }
    return {a / norm, -b / norm};
}

// Clean-Up Lemma transformation: afterwards every layer-1 gate contains at
// most one input qubit. Gates with exactly two inputs lose one coordinate to
// a balanced classical restriction; gates with three or more inputs lose two
// coordinates to a quantum restriction realized by a CNOT on fresh ancilla
// states. PARITY mode records the net output-basis flip; MAJORITY mode pads
// the classical restriction to an even, balanced count; STRUCTURAL applies
// the same transformation with no semantic claim.
inline CleanupResult cleanup(const ReflectionCircuit& input, CleanupMode mode) {
    {
        const auto report = validate(input);
        if (!report.empty()) {
            throw std::invalid_argument("cleanup requires a valid circuit: " +
                                        report.front().message);
        }
    }
    CleanupResult res;
    res.mode = mode;

    std::map<std::size_t, int> fixed;
    std::vector<QuantumPair> pairs;
    std::set<std::size_t> converted; // inputs leaving the live set
    int alternator = 0;

    if (!input.layers.empty()) {
        const Layer& l1 = input.layers[0];
        for (std::size_t gi = 0; gi < l1.size(); ++gi) {
            const auto& g = l1[gi];
            std::vector<std::size_t> ins;
            for (auto q : g.qubits) {
                if (input.is_input(q)) ins.push_back(q);
            }
            std::sort(ins.begin(), ins.end());
            if (ins.size() == 2) {
                fixed[ins[0]] = alternator;
                alternator ^= 1;
                converted.insert(ins[0]);
            } else if (ins.size() >= 3) {
                QuantumPair p;
                p.gate_index = gi;
                p.input_i = ins[0];
                p.input_j = ins[1];
                std::tie(p.alpha, p.beta) =
                    quantum_restriction_coeffs(g, p.input_i, p.input_j);
                converted.insert(p.input_i);
                converted.insert(p.input_j);
                pairs.push_back(p);
            }
        }
    }

    if (mode == CleanupMode::Majority && fixed.size() % 2 == 1) {
        int zeros = 0, ones = 0;
        for (const auto& [q, b] : fixed) (b ? ones : zeros)++;
        for (std::size_t q = 0; q < input.n_inputs; ++q) {
            if (!converted.count(q)) {
                fixed[q] = zeros > ones ? 1 : 0;
                converted.insert(q);
                break;
            }
        }
    }

    // Remap: survivors first (ascending), every other qubit after.
    std::vector<std::size_t> remap(input.n_qubits());
    std::size_t next = 0;
    for (std::size_t q = 0; q < input.n_inputs; ++q) {
        if (!converted.count(q)) {
            remap[q] = next++;
            res.survivors.push_back(q);
        }
    }
    const std::size_t new_inputs = next;
    for (std::size_t q = 0; q < input.n_qubits(); ++q) {
        if (q < input.n_inputs && !converted.count(q)) continue;
        remap[q] = next++;
    }

    ReflectionCircuit out;
    out.n_inputs = new_inputs;
    out.n_ancillae = input.n_qubits() - new_inputs;
    for (const auto& [q, st] : input.ancilla_init) {
        out.ancilla_init.emplace(remap[q], st);
    }
    for (const auto& [q, b] : fixed) {
        out.ancilla_init.emplace(remap[q], basis_state(b));
    }
    for (const auto& p : pairs) {
        out.ancilla_init.emplace(remap[p.input_i],
                                 QubitState{p.alpha, p.beta});
        out.ancilla_init.emplace(remap[p.input_j], ket1());
    }

    std::set<std::size_t> deleted;
    for (const auto& p : pairs) deleted.insert(p.gate_index);
    for (std::size_t l = 0; l < input.layers.size(); ++l) {
        Layer nl;
        for (std::size_t gi = 0; gi < input.layers[l].size(); ++gi) {
            if (l == 0 && deleted.count(gi)) continue;
            const auto& g = input.layers[l][gi];
            ReflectionGate ng;
            for (auto q : g.qubits) {
                ng.qubits.push_back(remap[q]);
                ng.states.emplace(remap[q], g.state_of(q));
            }
            nl.push_back(std::move(ng));
        }
        if (l == 0) {
            for (const auto& p : pairs) {
                nl.push_back(cnot_gate(remap[p.input_i], remap[p.input_j]));
            }
        }
        out.layers.push_back(std::move(nl));
    }
    if (input.output_qubit) out.output_qubit = remap[*input.output_qubit];
    out.output_basis = input.output_basis;

    int ones = 0;
    for (const auto& [q, b] : fixed) ones += b;
    res.parity_flip = static_cast<int>((pairs.size() + ones) % 2);
    res.circuit = std::move(out);
    res.classical_fixed = std::move(fixed);
    res.quantum_pairs = std::move(pairs);
    res.new_index_of = std::move(remap);
    return res;
}

// Reference circuit for the equivalence oracle: the original gates (nothing
// deleted) on the transformed qubit layout, with the |phi>-pair preparation
// as an explicit layer prepended.
inline ReflectionCircuit cleanup_reference_circuit(
    const ReflectionCircuit& original, const CleanupResult& res) {
    ReflectionCircuit ref;
    ref.n_inputs = res.circuit.n_inputs;
    ref.n_ancillae = res.circuit.n_ancillae;
    ref.ancilla_init = res.circuit.ancilla_init;
    Layer prep;
    for (const auto& p : res.quantum_pairs) {
        prep.push_back(cnot_gate(res.new_index_of[p.input_i],
                                 res.new_index_of[p.input_j]));
    }
    ref.layers.push_back(std::move(prep));
    for (const auto& layer : original.layers) {
        Layer nl;
        for (const auto& g : layer) {
            ReflectionGate ng;
            for (auto q : g.qubits) {
                ng.qubits.push_back(res.new_index_of[q]);
                ng.states.emplace(res.new_index_of[q], g.state_of(q));
            }
            nl.push_back(std::move(ng));
        }
        ref.layers.push_back(std::move(nl));
    }
    ref.output_qubit = res.circuit.output_qubit;
    ref.output_basis = res.circuit.output_basis;
    return ref;
}

struct CleanupCheck {
    std::vector<std::string> failures;
    bool oracle_checked = false;
    double min_fidelity = 1.0;

    bool ok() const { return failures.empty(); }
};

// Mechanized postconditions of the lemma: structure, survivor count, pair
// orthogonality, and (within the simulator cap) exact state equality against
// the reference circuit over every survivor input.
inline CleanupCheck verify_cleanup(const ReflectionCircuit& original,
                                   const CleanupResult& res) {
    CleanupCheck check;
    auto fail = [&](std::string msg) { check.failures.push_back(std::move(msg)); };

    if (!res.circuit.layers.empty()) {
        for (const auto& g : res.circuit.layers[0]) {
            if (res.circuit.input_count(g) > 1) {
                fail("layer-1 gate with more than one input qubit");
            }
        }
    }

    const std::size_t n = original.n_inputs;
    const std::size_t bound = (n + 2) / 3; // ceil(n/3)
    if (res.mode != CleanupMode::Majority && res.survivors.size() < bound) {
        fail("survivor count " + std::to_string(res.survivors.size()) +
             " below ceil(n/3) = " + std::to_string(bound));
    }

    for (const auto& p : res.quantum_pairs) {
        const double norm = std::norm(p.alpha) + std::norm(p.beta);
        if (std::abs(norm - 1.0) > kNormTol) {
            fail("pair coefficients not normalized");
        }
        const auto& g = original.layers.at(0).at(p.gate_index);
        const QubitState& ti = g.state_of(p.input_i);
        const QubitState& tj = g.state_of(p.input_j);
        // <theta_{i,j} | phi> with |phi> = alpha|01> + beta|10>.
        const Complex overlap = std::conj(ti.amp0) * std::conj(tj.amp1) * p.alpha +
                                std::conj(ti.amp1) * std::conj(tj.amp0) * p.beta;
        if (std::abs(overlap) > kNormTol) {
            fail("pair state does not deactivate its gate (overlap " +
                 std::to_string(std::abs(overlap)) + ")");
        }
    }

    if (res.circuit.depth() > original.depth()) {
        fail("cleanup increased depth");
    }

    if (res.circuit.n_qubits() <= sim_cap() && res.circuit.n_inputs <= 16) {
        check.oracle_checked = true;
        const auto ref = cleanup_reference_circuit(original, res);
        for (std::size_t x = 0; x < (std::size_t{1} << res.circuit.n_inputs);
             ++x) {
            const auto a = run(res.circuit, x);
            const auto b = run(ref, x);
            const double f = fidelity(a, b);
            check.min_fidelity = std::min(check.min_fidelity, f);
            if (f < 1.0 - 1e-9) {
                fail("state mismatch on survivor input " + std::to_string(x));
                break;
            }
        }
    }
    return check;
}

} // namespace qac
