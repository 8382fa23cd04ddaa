#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "qac/cleanup.hpp"
#include "qac/compile.hpp"
#include "qac/generate.hpp"
#include "test_helpers.hpp"

using namespace qac;
using namespace qact;
using Catch::Approx;

namespace {

GeneratorOptions compile_fixture_opts(std::size_t n, std::size_t anc,
                                      std::size_t depth) {
    GeneratorOptions opt;
    opt.n_inputs = n;
    opt.n_ancillae = anc;
    opt.depth = depth;
    opt.max_gate_width = 3;
    opt.cleaned_up = true;
    opt.with_output = true;
    opt.snap_probability = 0.7;
    return opt;
}

// Dense operator matrix of a callable acting on n-qubit states.
template <typename Apply>
Eigen::MatrixXcd operator_matrix(std::size_t n, Apply&& apply) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    Eigen::MatrixXcd m(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        DenseState basis = DenseState::zero(n);
        basis.amplitudes[static_cast<std::size_t>(col)] = 1.0;
        const DenseState out = apply(basis);
        for (Eigen::Index row = 0; row < dim; ++row) {
            m(row, col) = out.amplitudes[static_cast<std::size_t>(row)];
        }
    }
    return m;
}

} // namespace

TEST_CASE("block structure of a cleaned-up layer") {
    ReflectionCircuit c;
    c.n_inputs = 3;
    c.n_ancillae = 3;
    for (std::size_t a = 3; a < 6; ++a) c.ancilla_init.emplace(a, ket0());
    // Gate on (input 0, ancilla 3); gate on ancilla 4; inputs 1,2 bare.
    c.layers.push_back({make_gate({{0, ket1()}, {3, ket_minus()}}),
                        make_gate({{4, ket_plus()}})});
    const auto bs = layer_blocks(c, 0);
    // Blocks: {0,3}, {4}, {1}, {2}, {5}.
    REQUIRE(bs.blocks.size() == 5);
    std::size_t input_blocks = 0;
    for (const auto& b : bs.blocks) {
        if (b.input()) ++input_blocks;
    }
    CHECK(input_blocks == 3);
    std::set<std::size_t> all;
    for (const auto& b : bs.blocks) all.insert(b.qubits.begin(), b.qubits.end());
    CHECK(all.size() == 6);
}

TEST_CASE("compile_junta") {
    SECTION("projector on an input-free gate is constant") {
        ReflectionCircuit c;
        c.n_inputs = 1;
        c.n_ancillae = 2;
        c.ancilla_init.emplace(1, ket0());
        c.ancilla_init.emplace(2, ket0());
        c.layers.push_back({make_gate({{1, ket_plus()}, {2, ket_plus()}})});
        const auto proj = ProjectorExpr::sep_rank1_single(1, ket1());
        const auto bc = compile_junta(c, proj, 0);
        REQUIRE(bc.kind() == BoolCircuit::Kind::Const);
        CHECK(bc.const_bit() == activation(c, proj, std::size_t{0}));
    }
    SECTION("CNOT ancilla readout compiles to the literal x0") {
        const auto c = cnot_fixture();
        const auto proj = ProjectorExpr::sep_rank1_single(1, ket1());
        const auto bc = compile_junta(c, proj, 1);
        REQUIRE(bc.kind() == BoolCircuit::Kind::Literal);
        CHECK(bc.input() == 0);
        CHECK_FALSE(bc.negated());
        for (std::size_t x = 0; x < 2; ++x) {
            CHECK(bc.eval(x) == activation(c, proj, x));
        }
    }
    SECTION("clause count stays within 2^k on random fixtures") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            GeneratorOptions opt = compile_fixture_opts(4, 3, 1);
            opt.with_output = false;
            const auto c = random_circuit(opt, 3000 + seed);
            std::vector<std::pair<std::size_t, QubitState>> entries;
            Rng rng(seed);
            std::size_t gates_used = 0;
            for (const auto& g : c.layers[0]) {
                if (gates_used == 2) break;
                entries.emplace_back(g.qubits.front(), random_qubit_state(rng));
                ++gates_used;
            }
            if (entries.empty()) continue;
            const auto proj = ProjectorExpr::sep_rank1(entries);
            const auto piece = compile_junta_dnf(c, proj, 2);
            REQUIRE_FALSE(piece.bounds.empty());
            CHECK(piece.bounds[0].ok());
            const auto bc = piece.circuit();
            for (std::size_t x = 0; x < 16; ++x) {
                CHECK(bc.eval(x) == activation(c, proj, x));
            }
        }
    }
    SECTION("junta condition violations throw") {
        ReflectionCircuit c;
        c.n_inputs = 2;
        c.layers.push_back({make_gate({{0, ket_plus()}}),
                            make_gate({{1, ket_plus()}})});
        const auto proj = ProjectorExpr::sep_rank1({{0, ket0()}, {1, ket0()}});
        CHECK_THROWS_AS(compile_junta(c, proj, 1), std::invalid_argument);
    }
}

TEST_CASE("compile_separable AND and OR forms") {
    ReflectionCircuit c;
    c.n_inputs = 2;
    c.n_ancillae = 3;
    for (std::size_t a = 2; a < 5; ++a) c.ancilla_init.emplace(a, ket0());
    c.layers.push_back({cnot_gate(0, 2), cnot_gate(1, 3)});
    const auto blocks = layer_blocks(c, 0);

    std::size_t bi0 = 0, bi1 = 0;
    for (std::size_t i = 0; i < blocks.blocks.size(); ++i) {
        if (blocks.blocks[i].input() == std::size_t{0}) bi0 = i;
        if (blocks.blocks[i].input() == std::size_t{1}) bi1 = i;
    }

    // Ancilla 2 reads x0, ancilla 3 reads x1; ask for a2 = 1 and a3 = 0.
    std::map<std::size_t, ProjectorExpr> projs;
    projs.emplace(bi0, ProjectorExpr::sep_rank1_single(2, ket1()));
    projs.emplace(bi1, ProjectorExpr::sep_rank1_single(3, ket0()));

    SECTION("empty projector map folds to constant 1") {
        const auto bc = compile_separable(c, blocks, {}, false);
        REQUIRE(bc.kind() == BoolCircuit::Kind::Const);
        CHECK(bc.const_bit() == 1);
    }
    SECTION("AND of literals") {
        const auto bc = compile_separable(c, blocks, projs, false);
        for (std::size_t x = 0; x < 4; ++x) {
            const int expect = ((x & 1U) == 1 && ((x >> 1) & 1U) == 0) ? 1 : 0;
            CHECK(bc.eval(x) == expect);
        }
        CHECK(bc.depth() <= 1);
    }
    SECTION("complemented case gives the De Morgan OR") {
        const auto bc = compile_separable(c, blocks, projs, true);
        for (std::size_t x = 0; x < 4; ++x) {
            const int expect = ((x & 1U) == 0 || ((x >> 1) & 1U) == 1) ? 1 : 0;
            CHECK(bc.eval(x) == expect);
        }
        CHECK(bc.depth() <= 1);
    }
    SECTION("constant folding collapses impossible blocks") {
        std::map<std::size_t, ProjectorExpr> dead;
        std::size_t bare_block = 0;
        for (std::size_t i = 0; i < blocks.blocks.size(); ++i) {
            if (!blocks.blocks[i].input() &&
                blocks.blocks[i].qubits == std::vector<std::size_t>{4}) {
                bare_block = i;
            }
        }
        dead.emplace(bare_block, ProjectorExpr::sep_rank1_single(4, ket1()));
        const auto bc = compile_separable(c, blocks, dead, false);
        REQUIRE(bc.kind() == BoolCircuit::Kind::Const);
        CHECK(bc.const_bit() == 0);
    }
}

TEST_CASE("compile_sep_combination") {
    ReflectionCircuit c;
    c.n_inputs = 2;
    c.n_ancillae = 3;
    for (std::size_t a = 2; a < 5; ++a) c.ancilla_init.emplace(a, ket0());
    c.layers.push_back({cnot_gate(0, 2), cnot_gate(1, 3)});

    SECTION("k = 0 reduces to the separable case") {
        const auto theta0 = ProjectorExpr::sep_rank1_single(2, ket1());
        const auto piece = compile_sep_combination_dnf(c, theta0, {});
        const auto bc = piece.circuit();
        for (std::size_t x = 0; x < 4; ++x) {
            CHECK(bc.eval(x) == activation(c, theta0, x));
        }
    }
    SECTION("k = 1 matches the exhaustive oracle within (n+1)^1 clauses") {
        const auto axis = ProjectorExpr::sep_rank1({{2, ket1()}, {3, ket1()}});
        const auto full = ProjectorExpr::complement(axis);
        const auto piece = compile_sep_combination_dnf(c, std::nullopt, {axis});
        REQUIRE_FALSE(piece.bounds.empty());
        CHECK(piece.bounds[0].ok());
        CHECK(piece.bounds[0].declared == 3); // (n+1)^k with n=2, k=1
        const auto bc = piece.circuit();
        for (std::size_t x = 0; x < 4; ++x) {
            CHECK(bc.eval(x) == activation(c, full, x));
        }
    }
    SECTION("axes meeting a single block produce a single term") {
        const auto axis = ProjectorExpr::sep_rank1_single(4, ket1());
        const auto piece = compile_sep_combination_dnf(c, std::nullopt, {axis});
        CHECK(piece.dnf.prefold <= 1);
        const auto bc = piece.circuit();
        const auto full = ProjectorExpr::complement(axis);
        for (std::size_t x = 0; x < 4; ++x) {
            CHECK(bc.eval(x) == activation(c, full, x));
        }
    }
    SECTION("random cleaned-up fixtures against the oracle") {
        for (std::uint64_t seed = 0; seed < 15; ++seed) {
            GeneratorOptions opt = compile_fixture_opts(3, 3, 1);
            opt.with_output = false;
            const auto rc = random_circuit(opt, 5000 + seed);
            Rng rng(seed);
            std::optional<ProjectorExpr> theta0;
            std::vector<ProjectorExpr> axes;
            if (!rc.layers[0].empty()) {
                const auto& g = rc.layers[0].front();
                std::vector<std::pair<std::size_t, QubitState>> entries;
                for (auto q : g.qubits) {
                    entries.emplace_back(q, random_qubit_state(rng));
                }
                theta0 = ProjectorExpr::sep_rank1(entries);
            }
            std::vector<std::pair<std::size_t, QubitState>> axis_entries;
            for (std::size_t q = 0; q < rc.n_qubits(); ++q) {
                if (theta0) {
                    bool used = false;
                    for (auto tq : theta0->qubits()) {
                        if (tq == q) used = true;
                    }
                    if (used) continue;
                }
                axis_entries.emplace_back(q, random_qubit_state(rng));
                if (axis_entries.size() == 2) break;
            }
            if (!axis_entries.empty()) {
                axes.push_back(ProjectorExpr::sep_rank1(axis_entries));
            }
            const auto piece = compile_sep_combination_dnf(rc, theta0, axes);
            for (const auto& b : piece.bounds) CHECK(b.ok());
            const auto bc = piece.circuit();

            std::vector<ProjectorExpr> factors;
            if (theta0) factors.push_back(*theta0);
            for (const auto& ax : axes) {
                factors.push_back(ProjectorExpr::complement(ax));
            }
            const auto full = factors.size() == 1
                                  ? factors.front()
                                  : ProjectorExpr::tensor(std::move(factors));
            for (std::size_t x = 0; x < 8; ++x) {
                CHECK(bc.eval(x) == activation(rc, full, x));
            }
        }
    }
}

TEST_CASE("compile_layer2_small") {
    SECTION("projector on gate-free qubits is constant") {
        ReflectionCircuit c;
        c.n_inputs = 1;
        c.n_ancillae = 1;
        c.ancilla_init.emplace(1, ket_plus());
        c.layers.push_back({});
        c.layers.push_back({});
        const auto proj = ProjectorExpr::sep_rank1_single(1, ket_minus());
        const auto bc = compile_layer2_small(c, proj, 0);
        REQUIRE(bc.kind() == BoolCircuit::Kind::Const);
        CHECK(bc.const_bit() == 0);
    }
    SECTION("five-qubit fixture matches the exhaustive oracle") {
        ReflectionCircuit c;
        c.n_inputs = 2;
        c.n_ancillae = 3;
        for (std::size_t a = 2; a < 5; ++a) c.ancilla_init.emplace(a, ket0());
        c.layers.push_back({cnot_gate(0, 2), cnot_gate(1, 3)});
        c.layers.push_back(
            {make_gate({{2, ket1()}, {3, ket1()}, {4, ket_minus()}})});
        const auto proj = ProjectorExpr::sep_rank1_single(4, ket1());
        const auto piece = compile_layer2_small_dnf(c, proj, 1);
        for (const auto& b : piece.bounds) CHECK(b.ok());
        const auto bc = piece.circuit();
        for (std::size_t x = 0; x < 4; ++x) {
            CHECK(bc.eval(x) == activation(c, proj, x));
        }
    }
    SECTION("random depth-2 fixtures against the oracle") {
        for (std::uint64_t seed = 0; seed < 25; ++seed) {
            const auto c =
                random_circuit(compile_fixture_opts(3, 3, 2), 6000 + seed);
            const std::size_t q = seed % c.n_qubits();
            Rng rng(seed);
            const auto proj =
                ProjectorExpr::sep_rank1_single(q, random_qubit_state(rng));
            const auto piece = compile_layer2_small_dnf(c, proj, 1);
            for (const auto& b : piece.bounds) CHECK(b.ok());
            const auto bc = piece.circuit();
            for (std::size_t x = 0; x < 8; ++x) {
                CHECK(bc.eval(x) == activation(c, proj, x));
            }
        }
    }
    SECTION("y-subspace projectors commute with layer 2 as matrices") {
        const auto c = random_circuit(compile_fixture_opts(2, 3, 2), 6100);
        REQUIRE(c.depth() == 2);
        if (c.layers[1].empty()) return;
        const auto& g2 = c.layers[1].front();
        const auto n = c.n_qubits();
        const auto axis = ProjectorExpr::axis_of(g2);
        const auto l2 = operator_matrix(n, [&](const DenseState& s) {
            DenseState out = s;
            for (const auto& g : c.layers[1]) out = apply_reflection(out, g);
            return out;
        });
        for (int b = 0; b < 2; ++b) {
            const ProjectorExpr q_proj =
                b ? axis : ProjectorExpr::complement(axis);
            const auto qm = operator_matrix(n, [&](const DenseState& s) {
                return apply_projector(s, q_proj);
            });
            const auto comm = (qm * l2 - l2 * qm).cwiseAbs().maxCoeff();
            CHECK(comm < 1e-10);
        }
    }
}

TEST_CASE("compile_depth3_output") {
    SECTION("degenerate depth-1 circuit compiles to a literal") {
        auto c = cnot_fixture();
        c.output_qubit = 1;
        c.output_basis = {ket0(), ket1()};
        const auto report = compile_depth3_output(c);
        CHECK(report.oracle_checked);
        CHECK(report.mismatches.empty());
        CHECK(report.measured_depth <= 3);
        CHECK(report.bool_circuit.eval(std::size_t{0}) == 0);
        CHECK(report.bool_circuit.eval(std::size_t{1}) == 1);
    }
    SECTION("random cleaned-up depth-3 circuits equal the oracle") {
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            const std::size_t n = 3 + seed % 3;
            const auto c =
                random_circuit(compile_fixture_opts(n, 4, 3), 7000 + seed);
            const auto report = compile_depth3_output(c);
            REQUIRE(report.oracle_checked);
            if (!report.mismatches.empty()) {
                UNSCOPED_INFO("seed " << seed << " first mismatch x = "
                                      << report.mismatches.front());
            }
            CHECK(report.mismatches.empty());
            CHECK(report.ambiguous_inputs.empty());
            CHECK(report.bounds_ok());
            CHECK(report.measured_depth <= 3);
            for (const auto& b : report.bounds) CHECK(b.ok());
        }
    }
    SECTION("OR-over-blocks decomposition matches the full projector") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto c =
                random_circuit(compile_fixture_opts(3, 4, 3), 7300 + seed);
            const ReflectionGate* fg = nullptr;
            for (const auto& g : c.layers[2]) {
                if (g.touches(*c.output_qubit)) fg = &g;
            }
            if (!fg) continue;
            std::vector<std::size_t> s_qubits;
            for (auto q : fg->qubits) {
                if (q != *c.output_qubit) s_qubits.push_back(q);
            }
            if (s_qubits.empty()) continue;
            ReflectionCircuit d = c;
            d.layers.resize(2);
            d.output_qubit.reset();
            d.output_basis.reset();
            const auto pieces = decompose_over_blocks(d, *fg, s_qubits);
            const auto full = ProjectorExpr::complement(
                detail_compile::restricted_axis(fg->states, s_qubits));
            for (std::size_t x = 0; x < 8; ++x) {
                int any = 0;
                for (const auto& p : pieces) {
                    any |= activation(d, p, x);
                }
                CHECK(any == activation(d, full, x));
            }
        }
    }
    SECTION("case-split sanity: inactive complement reads mu1-tilde") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto c =
                random_circuit(compile_fixture_opts(3, 3, 3), 7600 + seed);
            const ReflectionGate* fg = nullptr;
            for (const auto& g : c.layers[2]) {
                if (g.touches(*c.output_qubit)) fg = &g;
            }
            if (!fg) continue;
            std::vector<std::size_t> s_qubits;
            for (auto q : fg->qubits) {
                if (q != *c.output_qubit) s_qubits.push_back(q);
            }
            if (s_qubits.empty()) continue;
            ReflectionCircuit d = c;
            d.layers.resize(2);
            d.output_qubit.reset();
            d.output_basis.reset();
            ReflectionCircuit pruned = c;
            pruned.layers[2] = {*fg};

            const auto thetabar = ProjectorExpr::complement(
                detail_compile::restricted_axis(fg->states, s_qubits));
            const QubitState theta_t = fg->state_of(*c.output_qubit);
            const QubitState mu1 = c.output_basis->second;
            const Complex ov = inner(theta_t, mu1);
            const QubitState mu1_tilde{mu1.amp0 - 2.0 * ov * theta_t.amp0,
                                       mu1.amp1 - 2.0 * ov * theta_t.amp1};
            const auto tilde_proj =
                ProjectorExpr::sep_rank1_single(*c.output_qubit, mu1_tilde);
            for (std::size_t x = 0; x < 8; ++x) {
                if (activation(d, thetabar, x) == 0) {
                    const double p = accept_prob(pruned, x);
                    const int out_bit = p > kActivationTol ? 1 : 0;
                    CHECK(out_bit == activation(d, tilde_proj, x));
                }
            }
        }
    }
    SECTION("exact fixture: completeness dichotomy in case 1") {
        // Depth-3 fixture computing x0 xor x1 exactly: two CNOTs accumulate
        // the parity on ancilla 2, CNOT(2 -> 3) copies it to the output.
        ReflectionCircuit c;
        c.n_inputs = 2;
        c.n_ancillae = 2;
        c.ancilla_init.emplace(2, ket0());
        c.ancilla_init.emplace(3, ket0());
        c.layers.push_back({cnot_gate(0, 2)});
        c.layers.push_back({cnot_gate(1, 2)});
        c.layers.push_back({make_gate({{2, ket1()}, {3, ket_minus()}})});
        c.output_qubit = 3;
        c.output_basis = {ket0(), ket1()};
        for (std::size_t x = 0; x < 4; ++x) {
            const double expect = double((x & 1U) ^ ((x >> 1) & 1U));
            CHECK(accept_prob(c, x) == Approx(expect).margin(1e-12));
        }
        const auto report = compile_depth3_output(c);
        CHECK(report.mismatches.empty());
        REQUIRE(report.oracle_checked);

        ReflectionCircuit d = c;
        d.layers.resize(2);
        d.output_qubit.reset();
        d.output_basis.reset();
        const auto thetabar = ProjectorExpr::complement(
            ProjectorExpr::sep_rank1_single(2, ket1()));
        for (std::size_t x = 0; x < 4; ++x) {
            if (activation(d, thetabar, x) != 1) continue;
            const auto with_mu0 = ProjectorExpr::tensor(
                {thetabar, ProjectorExpr::sep_rank1_single(3, ket0())});
            const auto with_mu1 = ProjectorExpr::tensor(
                {thetabar, ProjectorExpr::sep_rank1_single(3, ket1())});
            const int a0 = activation(d, with_mu0, x);
            const int a1 = activation(d, with_mu1, x);
            CHECK(a0 + a1 == 1);
            const int bit = accept_prob(c, x) > 0.5 ? 1 : 0;
            CHECK(a1 == bit);
        }
    }
}

TEST_CASE("verify_compilation") {
    auto c = cnot_fixture();
    c.output_qubit = 1;
    c.output_basis = {ket0(), ket1()};
    SECTION("matching pair verifies cleanly") {
        const auto rep = verify_compilation(c, BoolCircuit::literal(0));
        CHECK(rep.ok());
        CHECK(rep.ambiguous_inputs.empty());
    }
    SECTION("constant circuit against a non-constant oracle is flagged") {
        const auto rep = verify_compilation(c, BoolCircuit::constant(0));
        CHECK_FALSE(rep.ok());
        CHECK(rep.mismatches == std::vector<std::size_t>{1});
    }
}

TEST_CASE("ambiguous-band inputs are reported separately") {
    // Single input qubit read in a basis whose mu1 component on |0> puts
    // the acceptance probability inside the declared ambiguity band.
    ReflectionCircuit c;
    c.n_inputs = 1;
    c.layers.push_back({});
    const double a = std::sqrt(1e-9);
    const QubitState mu1{Complex{a, 0.0}, Complex{std::sqrt(1.0 - 1e-9), 0.0}};
    c.output_qubit = 0;
    c.output_basis = {mu1.orthogonal(), mu1};
    REQUIRE(validate(c).empty());
    CHECK(in_ambiguous_band(accept_prob(c, std::size_t{0})));
    const auto rep = verify_compilation(c, BoolCircuit::literal(0));
    CHECK(rep.mismatches.empty());
    REQUIRE(rep.ambiguous_inputs.size() == 1);
    CHECK(rep.ambiguous_inputs[0] == 0);
}

TEST_CASE("redundant final-gate qubits are removed before compilation") {
    // Ancilla 3 starts in |1> and is never touched before the final gate;
    // its gate component |1> makes the orthogonal part vanish everywhere.
    ReflectionCircuit c;
    c.n_inputs = 1;
    c.n_ancillae = 3;
    c.ancilla_init.emplace(1, ket0());
    c.ancilla_init.emplace(2, ket0());
    c.ancilla_init.emplace(3, ket1());
    c.layers.push_back({cnot_gate(0, 1)});
    c.layers.push_back({});
    c.layers.push_back({make_gate(
        {{1, ket1()}, {3, ket1()}, {2, ket_minus()}})});
    c.output_qubit = 2;
    c.output_basis = {ket0(), ket1()};
    const auto rep = compile_depth3_output(c);
    REQUIRE(rep.redundant_removed == std::vector<std::size_t>{3});
    CHECK(rep.oracle_checked);
    CHECK(rep.mismatches.empty());
}
