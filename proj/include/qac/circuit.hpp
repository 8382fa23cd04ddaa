#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qac/states.hpp"

namespace qac {

inline constexpr double kOrthoTol = 1e-10;

// Reflection gate G(S) = I - 2|theta><theta|_S about a separable state on the
// qubit set S. A single-qubit gate is a valid (single-qubit) reflection.
struct ReflectionGate {
    std::vector<std::size_t> qubits;           // ordered, duplicates invalid
    std::map<std::size_t, QubitState> states;  // per-qubit factor of |theta>

    const QubitState& state_of(std::size_t q) const {
        auto it = states.find(q);
        if (it == states.end()) {
            throw std::out_of_range("gate has no state for qubit " +
                                    std::to_string(q));
        }
        return it->second;
    }

    bool touches(std::size_t q) const {
        return states.count(q) != 0;
    }

    std::size_t width() const { return qubits.size(); }
};

inline ReflectionGate make_gate(
    std::vector<std::pair<std::size_t, QubitState>> entries) {
    ReflectionGate g;
    for (auto& [q, s] : entries) {
        g.qubits.push_back(q);
        g.states.emplace(q, s);
    }
    return g;
}

// CNOT(control, target) as a reflection: I - 2|1><1|_c (x) |-><-|_t.
inline ReflectionGate cnot_gate(std::size_t control, std::size_t target) {
    return make_gate({{control, ket1()}, {target, ket_minus()}});
}

using Layer = std::vector<ReflectionGate>;

// Partial assignment of classical values to input coordinates.
struct ClassicalRestriction {
    std::map<std::size_t, int> assignments; // input index -> bit
};

// Layered QAC0 circuit in reflection-gate normal form. Inputs occupy qubit
// indices 0..n_inputs-1, ancillae the next n_ancillae indices. output_qubit
// absent means state-synthesis mode.
struct ReflectionCircuit {
    std::size_t n_inputs = 0;
    std::size_t n_ancillae = 0;
    std::map<std::size_t, QubitState> ancilla_init; // ancilla index -> state
    std::vector<Layer> layers;
    std::optional<std::size_t> output_qubit;
    std::optional<std::pair<QubitState, QubitState>> output_basis;

    std::size_t n_qubits() const { return n_inputs + n_ancillae; }
    std::size_t depth() const { return layers.size(); }

    bool is_input(std::size_t q) const { return q < n_inputs; }

    const QubitState& init_of(std::size_t ancilla) const {
        auto it = ancilla_init.find(ancilla);
        if (it == ancilla_init.end()) {
            throw std::out_of_range("no ancilla init for qubit " +
                                    std::to_string(ancilla));
        }
        return it->second;
    }

    // Gate of layer `layer` acting on q, if any.
    const ReflectionGate* gate_on(std::size_t layer, std::size_t q) const {
        for (const auto& g : layers.at(layer)) {
            if (g.touches(q)) return &g;
        }
        return nullptr;
    }

    std::size_t input_count(const ReflectionGate& g) const {
        std::size_t c = 0;
        for (auto q : g.qubits) {
            if (is_input(q)) ++c;
        }
        return c;
    }
};

struct Violation {
    std::string location;
    std::string message;
};

using ValidationReport = std::vector<Violation>;

// Checks every normal-form invariant; violations are data, not failures.
inline ValidationReport validate(const ReflectionCircuit& c) {
    ValidationReport report;
    auto fail = [&](std::string where, std::string what) {
        report.push_back({std::move(where), std::move(what)});
    };

    const std::size_t total = c.n_qubits();
    for (std::size_t a = c.n_inputs; a < total; ++a) {
        auto it = c.ancilla_init.find(a);
        if (it == c.ancilla_init.end()) {
            fail("ancilla " + std::to_string(a), "missing ancilla init state");
        } else if (!it->second.is_normalized()) {
            fail("ancilla " + std::to_string(a), "init state not normalized");
        }
    }
    for (const auto& [a, st] : c.ancilla_init) {
        if (a < c.n_inputs || a >= total) {
            fail("ancilla " + std::to_string(a),
                 "ancilla init index outside the ancilla range");
        }
    }

    for (std::size_t l = 0; l < c.layers.size(); ++l) {
        std::set<std::size_t> used;
        for (std::size_t gi = 0; gi < c.layers[l].size(); ++gi) {
            const auto& g = c.layers[l][gi];
            const std::string loc =
                "layer " + std::to_string(l) + " gate " + std::to_string(gi);
            if (g.qubits.empty()) {
                fail(loc, "gate has no qubits");
            }
            std::set<std::size_t> own(g.qubits.begin(), g.qubits.end());
            if (own.size() != g.qubits.size()) {
                fail(loc, "duplicate qubit in gate");
            }
            for (auto q : g.qubits) {
                if (q >= total) {
                    fail(loc, "qubit index " + std::to_string(q) +
                                  " out of range");
                }
                if (!used.insert(q).second) {
                    fail(loc, "layer disjointness: qubit " + std::to_string(q) +
                                  " appears in more than one gate");
                }
                auto it = g.states.find(q);
                if (it == g.states.end()) {
                    fail(loc, "missing state for qubit " + std::to_string(q));
                } else if (!it->second.is_normalized()) {
                    fail(loc, "state on qubit " + std::to_string(q) +
                                  " not normalized");
                }
            }
            for (const auto& [q, st] : g.states) {
                if (own.count(q) == 0) {
                    fail(loc, "state entry for qubit " + std::to_string(q) +
                                  " not in gate qubit set");
                }
            }
        }
    }

    if (c.output_qubit && *c.output_qubit >= total) {
        fail("output", "output qubit index out of range");
    }
    if (c.output_basis) {
        const auto& [mu0, mu1] = *c.output_basis;
        if (!mu0.is_normalized() || !mu1.is_normalized()) {
            fail("output", "output basis state not normalized");
        }
        if (std::abs(inner(mu0, mu1)) > kOrthoTol) {
            fail("output", "output basis not orthogonal");
        }
    }
    if (c.output_qubit.has_value() != c.output_basis.has_value()) {
        fail("output", "output qubit and output basis must be declared together");
    }
    return report;
}

inline bool is_valid(const ReflectionCircuit& c) { return validate(c).empty(); }

// Fixes the inputs in `r` and treats them as ancillae. Surviving inputs are
// re-indexed contiguously in ascending order; fixed inputs and old ancillae
// follow, in ascending original order. Depth is unchanged.
inline ReflectionCircuit restrict_classical(const ReflectionCircuit& c,
                                            const ClassicalRestriction& r) {
    for (const auto& [idx, bit] : r.assignments) {
        if (idx >= c.n_inputs) {
            throw std::out_of_range("restricted index " + std::to_string(idx) +
                                    " is not an input");
        }
        if (bit != 0 && bit != 1) {
            throw std::invalid_argument("restriction value must be 0 or 1");
        }
    }

    std::vector<std::size_t> remap(c.n_qubits());
    std::size_t next = 0;
    for (std::size_t q = 0; q < c.n_inputs; ++q) {
        if (!r.assignments.count(q)) remap[q] = next++;
    }
    const std::size_t new_inputs = next;
    for (std::size_t q = 0; q < c.n_qubits(); ++q) {
        if (q < c.n_inputs && !r.assignments.count(q)) continue;
        remap[q] = next++;
    }

    ReflectionCircuit out;
    out.n_inputs = new_inputs;
    out.n_ancillae = c.n_qubits() - new_inputs;
    for (const auto& [q, st] : c.ancilla_init) {
        out.ancilla_init.emplace(remap[q], st);
    }
    for (const auto& [q, bit] : r.assignments) {
        out.ancilla_init.emplace(remap[q], basis_state(bit));
    }
    out.layers.reserve(c.layers.size());
    for (const auto& layer : c.layers) {
        Layer nl;
        nl.reserve(layer.size());
        for (const auto& g : layer) {
            ReflectionGate ng;
            for (auto q : g.qubits) {
                ng.qubits.push_back(remap[q]);
                ng.states.emplace(remap[q], g.state_of(q));
            }
            nl.push_back(std::move(ng));
        }
        out.layers.push_back(std::move(nl));
    }
    if (c.output_qubit) out.output_qubit = remap[*c.output_qubit];
    out.output_basis = c.output_basis;
    return out;
}

} // namespace qac
