#pragma once

#include "qac/boolfn.hpp"
#include "qac/compile.hpp"
#include "qac/density.hpp"

namespace qac {

inline constexpr double kIneqSlack = 1e-8;

// Acceptance-probability table f_C : {0,1}^n -> [0,1].
inline FuncTable acceptance_table(const ReflectionCircuit& c) {
    if (c.n_inputs > 16) {
        throw std::invalid_argument("table enumeration capped at 16 inputs");
    }
    FuncTable t = FuncTable::zeros(c.n_inputs);
    for (std::size_t x = 0; x < t.size(); ++x) {
        t.values[x] = accept_prob(c, x);
    }
    return t;
}

// Activation table of a projector on a circuit.
inline FuncTable activation_table(const ReflectionCircuit& c,
                                  const ProjectorExpr& proj) {
    if (c.n_inputs > 16) {
        throw std::invalid_argument("table enumeration capped at 16 inputs");
    }
    FuncTable t = FuncTable::zeros(c.n_inputs);
    for (std::size_t x = 0; x < t.size(); ++x) {
        t.values[x] = activation(c, proj, x);
    }
    return t;
}

// ---------------------------------------------------------------------
// Large layer-1 gate removal: gates reading more than b inputs are replaced
// with identity; the squared l2 error per gate is at most 4 * 2^{-inputs}.
// ---------------------------------------------------------------------

struct DroppedGate {
    std::size_t gate_index = 0;
    std::size_t input_count = 0;
    double l2_bound = 0.0; // 4 * 2^{-inputs}
};

struct DropLargeResult {
    ReflectionCircuit circuit;
    std::vector<DroppedGate> dropped;
};

// b = ceil(log2(16 n / eps)), the large-gate threshold of the pipeline.
inline std::size_t default_b_threshold(std::size_t n, double eps = 0.25) {
    return static_cast<std::size_t>(
        std::ceil(std::log2(16.0 * static_cast<double>(std::max<std::size_t>(
                                       n, 1)) / eps)));
}

inline DropLargeResult drop_large_layer1_gates(const ReflectionCircuit& c,
                                               std::size_t b_threshold);

inline DropLargeResult drop_large_layer1_gates_default(
    const ReflectionCircuit& c, double eps = 0.25) {
    return drop_large_layer1_gates(c, default_b_threshold(c.n_inputs, eps));
}

inline DropLargeResult drop_large_layer1_gates(const ReflectionCircuit& c,
                                               std::size_t b_threshold) {
    if (c.depth() > 2) {
        throw std::invalid_argument("expects a depth-<=2 circuit");
    }
    DropLargeResult res;
    res.circuit = c;
    if (c.layers.empty()) return res;
    Layer kept;
    for (std::size_t gi = 0; gi < c.layers[0].size(); ++gi) {
        const auto& g = c.layers[0][gi];
        const std::size_t ins = c.input_count(g);
        if (ins > b_threshold) {
            res.dropped.push_back(
                {gi, ins, 4.0 * std::pow(2.0, -static_cast<double>(ins))});
        } else {
            kept.push_back(g);
        }
    }
    res.circuit.layers[0] = std::move(kept);
    return res;
}

// ---------------------------------------------------------------------
// Structure-aware random-valued restriction: exactly one uniformly chosen
// live input per input-bearing layer-1 gate; untouched inputs stay alive;
// fixed values uniform.
// ---------------------------------------------------------------------

inline RandomValuedRestriction structure_restriction(const ReflectionCircuit& c,
                                                     std::uint64_t seed) {
    Rng rng(seed);
    RandomValuedRestriction r;
    std::set<std::size_t> decided;
    if (!c.layers.empty()) {
        for (const auto& g : c.layers[0]) {
            std::vector<std::size_t> ins;
            for (auto q : g.qubits) {
                if (c.is_input(q)) ins.push_back(q);
            }
            std::sort(ins.begin(), ins.end());
            if (ins.empty()) continue;
            const std::size_t live = ins[rng.index(ins.size())];
            for (auto i : ins) {
                decided.insert(i);
                if (i == live) {
                    r.live.insert(i);
                } else {
                    r.fixed[i] = rng.next_bit() ? 1 : 0;
                }
            }
        }
    }
    for (std::size_t i = 0; i < c.n_inputs; ++i) {
        if (!decided.count(i)) r.live.insert(i);
    }
    return r;
}

// ---------------------------------------------------------------------
// Mixed-state decomposition entering a layer-2 gate of a structured circuit:
// rho^x = rho_0 (x) rho_1^{x_1} (x) ... (x) rho_n^{x_n} over the per-input
// blocks Q_i = (layer-1 block of input i) inter (gate qubits).
// ---------------------------------------------------------------------

struct GateInputDecomposition {
    std::vector<std::size_t> q0;                 // ancilla-only block
    DensityMatrix rho0 = DensityMatrix::scalar();
    std::vector<std::vector<std::size_t>> q;     // q[i] = Q_{i+1}... indexed by input
    std::vector<DensityMatrix> rho_b0, rho_b1;   // per input, scalar when empty
    std::vector<DensityMatrix> rho_avg;          // (rho0 + rho1)/2
    std::vector<double> d_trace_norm;            // ||D_i||_1 = D(rho_i^0, rho_i^1)
};

inline GateInputDecomposition gate_input_decomposition(
    const ReflectionCircuit& c, const ReflectionGate& layer2_gate) {
    if (c.depth() < 2) {
        throw std::invalid_argument("expects a depth-2 circuit");
    }
    for (const auto& g : c.layers[0]) {
        if (c.input_count(g) > 1) {
            throw std::invalid_argument("circuit is not structured");
        }
    }
    ReflectionCircuit layer1_only = c;
    layer1_only.layers.resize(1);
    layer1_only.output_qubit.reset();
    layer1_only.output_basis.reset();

    const std::set<std::size_t> gate_qubits(layer2_gate.qubits.begin(),
                                            layer2_gate.qubits.end());
    const auto blocks = layer_blocks(c, 0);

    GateInputDecomposition dec;
    dec.q.assign(c.n_inputs, {});
    std::set<std::size_t> claimed;
    for (const auto& blk : blocks.blocks) {
        if (!blk.input()) continue;
        const std::size_t i = *blk.input();
        for (auto qq : blk.qubits) {
            if (gate_qubits.count(qq)) {
                dec.q[i].push_back(qq);
                claimed.insert(qq);
            }
        }
    }
    for (auto qq : layer2_gate.qubits) {
        if (!claimed.count(qq)) dec.q0.push_back(qq);
    }
    std::sort(dec.q0.begin(), dec.q0.end());

    auto reduced_for = [&](std::size_t input, int bit,
                           const std::vector<std::size_t>& qs) {
        std::vector<int> x(c.n_inputs, 0);
        if (input < c.n_inputs) x[input] = bit;
        const auto s = run(layer1_only, x);
        return reduced_density(s, qs);
    };

    if (!dec.q0.empty()) {
        dec.rho0 = reduced_for(c.n_inputs, 0, dec.q0);
    }
    for (std::size_t i = 0; i < c.n_inputs; ++i) {
        if (dec.q[i].empty()) {
            dec.rho_b0.push_back(DensityMatrix::scalar());
            dec.rho_b1.push_back(DensityMatrix::scalar());
            dec.rho_avg.push_back(DensityMatrix::scalar());
            dec.d_trace_norm.push_back(0.0);
            continue;
        }
        auto r0 = reduced_for(i, 0, dec.q[i]);
        auto r1 = reduced_for(i, 1, dec.q[i]);
        DensityMatrix avg;
        avg.n_qubits = r0.n_qubits;
        avg.entries = 0.5 * (r0.entries + r1.entries);
        dec.d_trace_norm.push_back(trace_distance(r0, r1));
        dec.rho_b0.push_back(std::move(r0));
        dec.rho_b1.push_back(std::move(r1));
        dec.rho_avg.push_back(std::move(avg));
    }
    return dec;
}

// Tensor-consistency of the decomposition on a concrete input.
inline double decomposition_tensor_error(const ReflectionCircuit& c,
                                         const ReflectionGate& layer2_gate,
                                         const GateInputDecomposition& dec,
                                         std::size_t x_bits) {
    ReflectionCircuit layer1_only = c;
    layer1_only.layers.resize(1);
    layer1_only.output_qubit.reset();
    layer1_only.output_basis.reset();
    const auto s = run(layer1_only, x_bits);
    std::vector<std::size_t> all(layer2_gate.qubits.begin(),
                                 layer2_gate.qubits.end());
    std::sort(all.begin(), all.end());
    const auto direct = reduced_density(s, all);

    std::vector<std::pair<std::vector<std::size_t>, DensityMatrix>> factors;
    if (!dec.q0.empty()) factors.emplace_back(dec.q0, dec.rho0);
    for (std::size_t i = 0; i < dec.q.size(); ++i) {
        if (dec.q[i].empty()) continue;
        const int bit = (x_bits >> i) & 1U;
        factors.emplace_back(dec.q[i], bit ? dec.rho_b1[i] : dec.rho_b0[i]);
    }
    if (factors.empty()) return 0.0;
    const auto joint = tensor_on_qubits(factors);
    return (joint.entries - direct.entries).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------
// Matrix Fourier bound |f_hat(R)| <= prod_{i in R} ||D_i||_1.
// ---------------------------------------------------------------------

struct FourierBoundRecord {
    std::size_t mask = 0;
    double coefficient = 0.0;
    double bound = 0.0;
    bool ok = true;
};

inline std::vector<FourierBoundRecord> matrix_fourier_bound(
    const GateInputDecomposition& dec, const ReflectionCircuit& c) {
    if (c.n_inputs > 10) {
        throw std::invalid_argument("exhaustive bound capped at 10 inputs");
    }
    const auto sp = fwht(acceptance_table(c));
    std::vector<FourierBoundRecord> out;
    out.reserve(sp.coeffs.size());
    for (std::size_t mask = 0; mask < sp.coeffs.size(); ++mask) {
        FourierBoundRecord rec;
        rec.mask = mask;
        rec.coefficient = sp.coeffs[mask];
        rec.bound = 1.0;
        for (std::size_t i = 0; i < c.n_inputs; ++i) {
            if ((mask >> i) & 1U) rec.bound *= dec.d_trace_norm[i];
        }
        rec.ok = std::abs(rec.coefficient) <= rec.bound + kIneqSlack;
        out.push_back(rec);
    }
    return out;
}

// ---------------------------------------------------------------------
// Trace-distance lemmas.
// ---------------------------------------------------------------------

struct PhaseDistanceReport {
    double distance = 0.0;
    double delta = 0.0;
    double bound = 0.0; // 2 sqrt(delta)
    bool ok = true;
};

// D(rho, Z rho Z) <= 2 sqrt(<1^m| rho |1^m>) for the phase flip about |1^m>.
inline PhaseDistanceReport cz_phase_distance(const DensityMatrix& rho) {
    PhaseDistanceReport rep;
    const Eigen::Index dim = rho.entries.rows();
    Eigen::MatrixXcd flipped = rho.entries;
    for (Eigen::Index i = 0; i + 1 < dim; ++i) {
        flipped(i, dim - 1) = -flipped(i, dim - 1);
        flipped(dim - 1, i) = -flipped(dim - 1, i);
    }
    DensityMatrix other;
    other.n_qubits = rho.n_qubits;
    other.entries = std::move(flipped);
    rep.distance = trace_distance(rho, other);
    rep.delta = rho.entries(dim - 1, dim - 1).real();
    rep.bound = 2.0 * std::sqrt(std::max(rep.delta, 0.0));
    rep.ok = rep.distance <= rep.bound + kIneqSlack;
    return rep;
}

struct CloseToAllOnesReport {
    bool precondition_ok = true;
    double distance = 0.0;
    double bound = 0.0; // 2 delta + 2 sqrt(delta)
    bool ok = true;
};

inline CloseToAllOnesReport close_to_all_ones(const DensityMatrix& rho1,
                                              const DensityMatrix& rho2,
                                              double delta) {
    CloseToAllOnesReport rep;
    const Eigen::Index last1 = rho1.entries.rows() - 1;
    const Eigen::Index last2 = rho2.entries.rows() - 1;
    if (rho1.entries(last1, last1).real() < 1.0 - delta - 1e-12 ||
        rho2.entries(last2, last2).real() < 1.0 - delta - 1e-12) {
        rep.precondition_ok = false;
    }
    rep.distance = trace_distance(rho1, rho2);
    rep.bound = 2.0 * delta + 2.0 * std::sqrt(std::max(delta, 0.0));
    rep.ok = !rep.precondition_ok || rep.distance <= rep.bound + kIneqSlack;
    return rep;
}

// ---------------------------------------------------------------------
// Layer-2 gate activation tables and kill machinery.
// ---------------------------------------------------------------------

// f_{C^2, H}(x) for every layer-2 gate H: the activation of the gate's axis
// on the depth-1 sub-circuit (the projector commutes with layer 2).
inline std::vector<FuncTable> layer2_activation_tables(
    const ReflectionCircuit& c) {
    if (c.depth() < 2) return {};
    ReflectionCircuit c1 = c;
    c1.layers.resize(1);
    c1.output_qubit.reset();
    c1.output_basis.reset();
    std::vector<FuncTable> tables;
    for (const auto& g : c.layers[1]) {
        tables.push_back(activation_table(c1, ProjectorExpr::axis_of(g)));
    }
    return tables;
}

inline bool table_is_trivial(const FuncTable& t) {
    bool any0 = false, any1 = false;
    for (double v : t.values) (v > 0.5 ? any1 : any0) = true;
    return !(any0 && any1);
}

// (i, b) kills a table when every input with x_i = b evaluates to 0.
inline bool restriction_kills(const FuncTable& t, std::size_t i, int b) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t x = 0; x < t.size(); ++x) {
        if ((((x >> i) & 1U) == static_cast<std::size_t>(b)) &&
            t.values[x] > 0.5) {
            return false;
        }
    }
    return true;
}

struct KillSet {
    // kills[j] = verified single-coordinate restrictions killing gate j.
    std::vector<std::vector<std::pair<std::size_t, int>>> kills;
    std::vector<bool> trivial; // activation identically 0 or 1
};

inline KillSet kill_sets(const ReflectionCircuit& c) {
    if (c.n_inputs > 8) {
        throw std::invalid_argument("kill sets capped at 8 inputs");
    }
    const auto tables = layer2_activation_tables(c);
    KillSet ks;
    ks.kills.resize(tables.size());
    ks.trivial.resize(tables.size());
    for (std::size_t j = 0; j < tables.size(); ++j) {
        ks.trivial[j] = table_is_trivial(tables[j]);
        for (std::size_t i = 0; i < c.n_inputs; ++i) {
            for (int b = 0; b < 2; ++b) {
                if (restriction_kills(tables[j], i, b)) {
                    ks.kills[j].emplace_back(i, b);
                }
            }
        }
    }
    return ks;
}

// ---------------------------------------------------------------------
// One-sided monotone assignment: z_i follows the layer-1 reflection
// component on coordinate i when it is a basis state, and 0 otherwise. Each
// (i, z_i) kills at most two non-trivially-activated layer-2 gates.
// ---------------------------------------------------------------------

struct OnesidedAssignment {
    std::vector<int> z;
    std::vector<std::size_t> kill_counts; // per coordinate, non-trivial gates
};

inline OnesidedAssignment onesided_assignment(const ReflectionCircuit& c) {
    if (c.depth() < 1) throw std::invalid_argument("expects depth >= 1");
    OnesidedAssignment res;
    res.z.assign(c.n_inputs, 0);
    for (std::size_t i = 0; i < c.n_inputs; ++i) {
        const ReflectionGate* gi = c.gate_on(0, i);
        if (!gi) continue;
        const QubitState& theta = gi->state_of(i);
        if (std::abs(theta.amp0) <= 1e-9) {
            res.z[i] = 1;
        } else {
            res.z[i] = 0; // covers both the |0> case and the generic case
        }
    }
    const auto tables = layer2_activation_tables(c);
    res.kill_counts.assign(c.n_inputs, 0);
    for (std::size_t i = 0; i < c.n_inputs; ++i) {
        for (const auto& t : tables) {
            if (table_is_trivial(t)) continue;
            if (restriction_kills(t, i, res.z[i])) ++res.kill_counts[i];
        }
    }
    return res;
}

// ---------------------------------------------------------------------
// Deterministic restriction builder (depth-3 size-independent argument):
// R0 picks one kill per heavily-aligned gate, R1 fixes a fraction of the
// remaining inputs against the assignment. At desk scale the thresholds are
// parameters and infeasibility is reported rather than asserted.
// ---------------------------------------------------------------------

struct RestrictionBuilderParams {
    double aligned_fraction = 0.1; // membership threshold for the B family
    double r1_fraction = 0.75;     // fraction of inputs fixed by R1
    std::size_t max_family = 20;   // size cap on B
};

struct RestrictionBuilderResult {
    bool feasible = false;
    std::string reason;
    ClassicalRestriction restriction;
    std::vector<std::size_t> family; // gates handled by R0
    std::size_t killed_gates = 0;
    std::size_t nontrivial_gates = 0;
};

inline RestrictionBuilderResult restriction_builder(
    const ReflectionCircuit& c,
    const RestrictionBuilderParams& params = {}) {
    RestrictionBuilderResult res;
    if (c.n_inputs > 8) {
        throw std::invalid_argument("restriction builder capped at 8 inputs");
    }
    const auto assign = onesided_assignment(c);
    const auto tables = layer2_activation_tables(c);
    const double n = static_cast<double>(c.n_inputs);

    std::vector<std::size_t> nontrivial;
    for (std::size_t j = 0; j < tables.size(); ++j) {
        if (!table_is_trivial(tables[j])) nontrivial.push_back(j);
    }
    res.nontrivial_gates = nontrivial.size();

    // Family B: gates with many kills aligned with z.
    std::map<std::size_t, std::vector<std::size_t>> aligned_kills;
    for (auto j : nontrivial) {
        for (std::size_t i = 0; i < c.n_inputs; ++i) {
            if (restriction_kills(tables[j], i, assign.z[i])) {
                aligned_kills[j].push_back(i);
            }
        }
    }
    for (auto j : nontrivial) {
        if (aligned_kills[j].size() >=
            std::max<std::size_t>(1, static_cast<std::size_t>(
                                         params.aligned_fraction * n))) {
            res.family.push_back(j);
        }
    }
    if (res.family.size() > params.max_family) {
        res.reason = "aligned family exceeds the gate cap";
        return res;
    }

    ClassicalRestriction r;
    for (auto j : res.family) {
        bool placed = false;
        for (auto i : aligned_kills[j]) {
            auto it = r.assignments.find(i);
            if (it == r.assignments.end()) {
                r.assignments[i] = assign.z[i];
                placed = true;
                break;
            }
            if (it->second == assign.z[i]) {
                placed = true; // an earlier pick already kills this gate
                break;
            }
        }
        if (!placed) {
            res.reason = "no compatible kill coordinate for a family gate";
            return res;
        }
    }
    const std::size_t r1_target =
        static_cast<std::size_t>(std::ceil(params.r1_fraction * n));
    std::size_t added = 0;
    for (std::size_t i = 0; i < c.n_inputs && added < r1_target; ++i) {
        if (r.assignments.count(i)) continue;
        r.assignments[i] = assign.z[i] ^ 1;
        ++added;
    }

    // Verify: every non-trivial layer-2 activation dies under R.
    for (auto j : nontrivial) {
        bool killed = true;
        for (std::size_t x = 0; x < tables[j].size() && killed; ++x) {
            bool consistent = true;
            for (const auto& [i, b] : r.assignments) {
                if (static_cast<int>((x >> i) & 1U) != b) consistent = false;
            }
            if (consistent && tables[j].values[x] > 0.5) killed = false;
        }
        if (killed) ++res.killed_gates;
    }
    if (res.killed_gates != nontrivial.size()) {
        res.reason = "restriction leaves a live layer-2 activation";
        res.restriction = std::move(r);
        return res;
    }
    res.feasible = true;
    res.restriction = std::move(r);
    return res;
}

// ---------------------------------------------------------------------
// Depth-2 exactness witness: either the final gate's control state is fixed
// (case 1, the output is a 1-junta) or a <=2-coordinate restriction forces a
// constant output bit (case 2).
// ---------------------------------------------------------------------

struct ExactnessWitness {
    int case_id = 0; // 1 or 2; 0 = no witness found
    // Case 1:
    std::optional<std::size_t> dictator; // input the output may depend on
    // Case 2:
    std::size_t q = 0;
    int forced_bit = 0;
    ClassicalRestriction restriction;
    bool verified = false;
};

inline ExactnessWitness depth2_exactness_witness(const ReflectionCircuit& c) {
    if (!c.output_qubit || !c.output_basis) {
        throw std::invalid_argument("witness requires an output declaration");
    }
    if (c.depth() > 2 || c.n_inputs > 8) {
        throw std::invalid_argument("witness expects depth <= 2, n <= 8");
    }
    const std::size_t t = *c.output_qubit;
    const ReflectionGate* fg = c.depth() == 2 ? c.gate_on(1, t) : nullptr;

    ExactnessWitness w;
    const std::size_t inputs = std::size_t{1} << c.n_inputs;

    std::vector<std::size_t> s_qubits;
    if (fg) {
        for (auto q : fg->qubits) {
            if (q != t) s_qubits.push_back(q);
        }
    }

    // Case 1: the complement of the final gate's control state never
    // activates (vacuously true when there is no final gate).
    bool case1 = true;
    if (!s_qubits.empty()) {
        const auto thetabar = ProjectorExpr::complement(
            detail_compile::restricted_axis(fg->states, s_qubits));
        for (std::size_t x = 0; x < inputs && case1; ++x) {
            if (activation(c, thetabar, x)) case1 = false;
        }
    }
    if (case1) {
        w.case_id = 1;
        // Light-cone of t in the depth-1 sub-circuit: at most one input.
        const ReflectionGate* g1 = c.depth() >= 1 ? c.gate_on(0, t) : nullptr;
        if (g1) {
            for (auto q : g1->qubits) {
                if (c.is_input(q)) w.dictator = q;
            }
        } else if (c.is_input(t)) {
            w.dictator = t;
        }
        // Verify the 1-junta claim against the oracle output bit.
        w.verified = true;
        for (std::size_t x = 0; x < inputs && w.verified; ++x) {
            for (std::size_t i = 0; i < c.n_inputs; ++i) {
                if (w.dictator && *w.dictator == i) continue;
                const double a = accept_prob(c, x);
                const double b = accept_prob(c, x ^ (std::size_t{1} << i));
                if (std::abs(a - b) > 1e-9) w.verified = false;
            }
        }
        return w;
    }

    // Case 2: find q in S whose orthogonal component activates, then a
    // mu-branch that stays active, then a <=2-coordinate restriction pinning
    // the corresponding activation to 1 everywhere.
    ReflectionCircuit c1 = c;
    c1.layers.resize(1);
    c1.output_qubit.reset();
    c1.output_basis.reset();
    for (auto q : s_qubits) {
        const auto perp = ProjectorExpr::sep_rank1_single(
            q, fg->state_of(q).orthogonal());
        bool perp_active = false;
        for (std::size_t x = 0; x < inputs && !perp_active; ++x) {
            if (activation(c, perp, x)) perp_active = true;
        }
        if (!perp_active) continue;
        for (int b = 0; b < 2; ++b) {
            const QubitState mu =
                b ? c.output_basis->second : c.output_basis->first;
            const auto pi_qt = ProjectorExpr::tensor(
                {ProjectorExpr::sep_rank1_single(t, mu),
                 ProjectorExpr::sep_rank1_single(
                     q, fg->state_of(q).orthogonal())});
            // pi_qt commutes past layer 2, so evaluate on the depth-1
            // sub-circuit where it is a <=2-junta.
            const auto table = activation_table(c1, pi_qt);
            if (table_is_trivial(table) && table.values[0] < 0.5) continue;

            // Junta coordinates: inputs in the layer-1 light-cone of {q, t}.
            std::vector<std::size_t> junta;
            for (auto qq : {q, t}) {
                const ReflectionGate* g1 = c.gate_on(0, qq);
                if (g1) {
                    for (auto gq : g1->qubits) {
                        if (c.is_input(gq)) junta.push_back(gq);
                    }
                } else if (c.is_input(qq)) {
                    junta.push_back(qq);
                }
            }
            std::sort(junta.begin(), junta.end());
            junta.erase(std::unique(junta.begin(), junta.end()), junta.end());
            if (junta.size() > 2) continue; // not the cleaned-up situation

            for (std::size_t a = 0; a < (std::size_t{1} << junta.size()); ++a) {
                ClassicalRestriction r;
                for (std::size_t j = 0; j < junta.size(); ++j) {
                    r.assignments[junta[j]] = (a >> j) & 1U;
                }
                bool always = true;
                for (std::size_t x = 0; x < inputs && always; ++x) {
                    bool consistent = true;
                    for (const auto& [i, bit] : r.assignments) {
                        if (static_cast<int>((x >> i) & 1U) != bit) {
                            consistent = false;
                        }
                    }
                    if (consistent && table.values[x] < 0.5) always = false;
                }
                if (always) {
                    w.case_id = 2;
                    w.q = q;
                    w.forced_bit = b;
                    w.restriction = std::move(r);
                    w.verified = true;
                    return w;
                }
            }
        }
    }
    return w; // case_id 0: no witness at this size
}

// ---------------------------------------------------------------------
// Section-5 case analysis on a structured fixture.
// ---------------------------------------------------------------------

struct Section5Record {
    int case_id = 0;
    double eps = 0.25;
    double axis_mass = 0.0; // <theta| rho |theta> for the final gate's axis
    // Case 1:
    double l2_diff = 0.0;
    double case1_bound = 0.0; // eps/8
    // Case 2:
    double delta_sum = 0.0;
    double lnsum_bound = 0.0; // ln(32/eps)
    // Unconditional:
    bool matrix_bound_ok = true;
    bool derivative_bound_ok = true; // ||D_i||_1 <= 8 sqrt(delta_i)
    std::vector<double> level_weights;    // W^l for l = 0..max
    std::vector<double> maclaurin_bounds; // (64 sum delta)^l / l!
    bool maclaurin_ok = true;
    bool ok = true;
};

inline Section5Record section5_experiment(const ReflectionCircuit& c,
                                          double eps = 0.25) {
    if (!c.output_qubit || !c.output_basis) {
        throw std::invalid_argument("experiment requires an output declaration");
    }
    const ReflectionGate* g = c.gate_on(1, *c.output_qubit);
    if (!g) {
        throw std::invalid_argument(
            "output qubit is not inside a layer-2 gate");
    }
    Section5Record rec;
    rec.eps = eps;
    const auto dec = gate_input_decomposition(c, *g);

    // Per-block axis masses <theta_{Q_i}| rho_i |theta_{Q_i}>.
    auto axis_vector = [&](const std::vector<std::size_t>& qs) {
        Eigen::VectorXcd v(Eigen::Index{1} << qs.size());
        for (Eigen::Index idx = 0; idx < v.size(); ++idx) {
            Complex amp{1.0, 0.0};
            for (std::size_t j = 0; j < qs.size(); ++j) {
                amp *= g->state_of(qs[j]).amplitude((idx >> j) & 1);
            }
            v(idx) = amp;
        }
        return v;
    };
    std::vector<double> deltas; // delta_i over blocks 0..n
    double mass = 1.0;
    if (!dec.q0.empty()) {
        const auto v = axis_vector(dec.q0);
        const double m0 = (v.adjoint() * dec.rho0.entries * v)(0, 0).real();
        mass *= m0;
        deltas.push_back(1.0 - m0);
    } else {
        deltas.push_back(0.0);
    }
    std::vector<double> input_deltas(c.n_inputs, 0.0);
    for (std::size_t i = 0; i < c.n_inputs; ++i) {
        if (dec.q[i].empty()) continue;
        const auto v = axis_vector(dec.q[i]);
        const double mi = (v.adjoint() * dec.rho_avg[i].entries * v)(0, 0).real();
        mass *= mi;
        input_deltas[i] = 1.0 - mi;
        deltas.push_back(1.0 - mi);
    }
    rec.axis_mass = mass;

    const auto table = acceptance_table(c);
    const auto sp = fwht(table);

    if (mass <= eps / 32.0) {
        rec.case_id = 1;
        ReflectionCircuit removed = c;
        Layer kept;
        for (const auto& other : c.layers[1]) {
            if (&other != g) kept.push_back(other);
        }
        removed.layers[1] = std::move(kept);
        const auto table2 = acceptance_table(removed);
        rec.l2_diff = (table - table2).mean_square();
        rec.case1_bound = eps / 8.0;
        rec.ok = rec.l2_diff <= rec.case1_bound + kIneqSlack;
    } else {
        rec.case_id = 2;
        for (double d : deltas) rec.delta_sum += d;
        rec.lnsum_bound = std::log(32.0 / eps);
        rec.ok = rec.delta_sum <= rec.lnsum_bound + kIneqSlack;
    }

    // Matrix Fourier bound and the derivative bound, unconditionally.
    for (const auto& fb : matrix_fourier_bound(dec, c)) {
        if (!fb.ok) rec.matrix_bound_ok = false;
    }
    for (std::size_t i = 0; i < c.n_inputs; ++i) {
        if (dec.q[i].empty()) continue;
        if (dec.d_trace_norm[i] >
            8.0 * std::sqrt(std::max(input_deltas[i], 0.0)) + kIneqSlack) {
            rec.derivative_bound_ok = false;
        }
    }

    // Maclaurin chain W^l <= (64 sum_i delta_i)^l / l!.
    double dsum = 0.0;
    for (std::size_t i = 0; i < c.n_inputs; ++i) dsum += 64.0 * input_deltas[i];
    double power = 1.0, factorial = 1.0;
    const std::size_t lmax = std::min<std::size_t>(c.n_inputs, 6);
    for (std::size_t l = 0; l <= lmax; ++l) {
        if (l > 0) {
            power *= dsum;
            factorial *= static_cast<double>(l);
        }
        rec.level_weights.push_back(level_weight(sp, l));
        rec.maclaurin_bounds.push_back(power / factorial);
        if (l >= 1 &&
            rec.level_weights[l] > rec.maclaurin_bounds[l] + kIneqSlack) {
            rec.maclaurin_ok = false;
        }
    }
    rec.ok = rec.ok && rec.matrix_bound_ok && rec.derivative_bound_ok &&
             rec.maclaurin_ok;
    return rec;
}

} // namespace qac
