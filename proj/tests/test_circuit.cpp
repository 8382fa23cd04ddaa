#include <catch2/catch_amalgamated.hpp>

#include "qac/circuit.hpp"
#include "qac/circuit_io.hpp"
#include "qac/generate.hpp"
#include "test_helpers.hpp"

using namespace qac;
using Catch::Approx;

TEST_CASE("validate accepts a well-formed single-gate circuit") {
    ReflectionCircuit c;
    c.n_inputs = 2;
    c.layers.push_back({make_gate({{0, ket_plus()}, {1, ket1()}})});
    CHECK(validate(c).empty());
}

TEST_CASE("validate flags layer disjointness violations") {
    ReflectionCircuit c;
    c.n_inputs = 4;
    c.layers.push_back({make_gate({{0, ket0()}, {3, ket1()}}),
                        make_gate({{3, ket_plus()}, {2, ket0()}})});
    const auto report = validate(c);
    REQUIRE_FALSE(report.empty());
    bool found = false;
    for (const auto& v : report) {
        if (v.message.find("layer disjointness") != std::string::npos) found = true;
    }
    CHECK(found);
}

TEST_CASE("validate flags non-orthogonal output basis") {
    ReflectionCircuit c;
    c.n_inputs = 1;
    c.output_qubit = 0;
    c.output_basis = {ket0(), ket0()};
    const auto report = validate(c);
    bool found = false;
    for (const auto& v : report) {
        if (v.message.find("not orthogonal") != std::string::npos) found = true;
    }
    CHECK(found);
}

TEST_CASE("validate flags unnormalized states and bad indices") {
    ReflectionCircuit c;
    c.n_inputs = 1;
    c.n_ancillae = 1;
    c.ancilla_init.emplace(1, QubitState{0.5, 0.5});
    c.layers.push_back({make_gate({{7, ket0()}})});
    const auto report = validate(c);
    CHECK(report.size() >= 2);
}

TEST_CASE("serialization round-trips structurally") {
    auto check_roundtrip = [](const ReflectionCircuit& c) {
        const ReflectionCircuit back = parse(serialize(c));
        REQUIRE(back.n_inputs == c.n_inputs);
        REQUIRE(back.n_ancillae == c.n_ancillae);
        REQUIRE(back.layers.size() == c.layers.size());
        for (std::size_t l = 0; l < c.layers.size(); ++l) {
            REQUIRE(back.layers[l].size() == c.layers[l].size());
            for (std::size_t g = 0; g < c.layers[l].size(); ++g) {
                REQUIRE(back.layers[l][g].qubits == c.layers[l][g].qubits);
                for (auto q : c.layers[l][g].qubits) {
                    const auto& a = c.layers[l][g].state_of(q);
                    const auto& b = back.layers[l][g].state_of(q);
                    CHECK(a.amp0 == b.amp0);
                    CHECK(a.amp1 == b.amp1);
                }
            }
        }
        CHECK(back.output_qubit == c.output_qubit);
    };

    SECTION("empty-layer circuit") {
        ReflectionCircuit c;
        c.n_inputs = 2;
        c.layers.push_back({});
        check_roundtrip(c);
    }
    SECTION("complex amplitudes survive bit-faithfully") {
        ReflectionCircuit c;
        c.n_inputs = 1;
        c.n_ancillae = 1;
        c.ancilla_init.emplace(1, QubitState{Complex{0.6, 0.0}, Complex{0.0, 0.8}});
        c.layers.push_back({make_gate(
            {{0, QubitState{Complex{1.0 / 3.0, 0.1}, Complex{0.0, 0.0}}.normalized()},
             {1, ket_plus()}})});
        check_roundtrip(c);
    }
    SECTION("random circuits") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            check_roundtrip(random_circuit(3, 3, 3, 3, false, seed));
        }
    }
}

TEST_CASE("parse rejects malformed documents with diagnostics") {
    SECTION("truncated document") {
        CHECK_THROWS_AS(parse("{\"n_inputs\": 2"), ParseError);
    }
    SECTION("missing field is named") {
        try {
            parse("{\"n_inputs\": 2, \"n_ancillae\": 0, \"layers\": []}");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("ancilla_init") != std::string::npos);
        }
    }
}

TEST_CASE("restrict_classical") {
    SECTION("empty restriction is the identity") {
        const auto c = random_circuit(3, 2, 2, 3, false, 11);
        const auto r = restrict_classical(c, {});
        CHECK(serialize(r) == serialize(c));
    }
    SECTION("single fixed input becomes a |1> ancilla") {
        const auto c = random_circuit(3, 0, 1, 2, false, 5);
        ClassicalRestriction r;
        r.assignments[2] = 1;
        const auto rc = restrict_classical(c, r);
        CHECK(rc.n_inputs == 2);
        CHECK(rc.n_ancillae == 1);
        const auto& init = rc.init_of(2);
        CHECK(std::abs(init.amp1 - Complex{1.0, 0.0}) < 1e-15);
        CHECK(rc.depth() == c.depth());
    }
    SECTION("out-of-range index throws") {
        const auto c = random_circuit(2, 0, 1, 2, false, 5);
        ClassicalRestriction r;
        r.assignments[5] = 0;
        CHECK_THROWS_AS(restrict_classical(c, r), std::out_of_range);
    }
}

// Oracle identity: simulating the restricted circuit on x' matches
// simulating the original on the extended input, for every extension.
TEST_CASE("restrict then simulate equals simulate on extended input") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const std::size_t n = 3 + seed % 3; // 3..5 inputs
        const auto c = random_circuit(n, 2, 2, 3, false, 100 + seed);
        ClassicalRestriction r;
        r.assignments[1] = static_cast<int>(seed & 1);
        if (n > 3) r.assignments[3] = static_cast<int>((seed >> 1) & 1);
        const auto rc = restrict_classical(c, r);

        // Map restricted-circuit qubits back to original indices.
        std::vector<std::size_t> orig_of_new(c.n_qubits());
        {
            std::vector<std::size_t> remap(c.n_qubits());
            std::size_t next = 0;
            for (std::size_t q = 0; q < c.n_inputs; ++q) {
                if (!r.assignments.count(q)) remap[q] = next++;
            }
            for (std::size_t q = 0; q < c.n_qubits(); ++q) {
                if (q < c.n_inputs && !r.assignments.count(q)) continue;
                remap[q] = next++;
            }
            for (std::size_t q = 0; q < c.n_qubits(); ++q) orig_of_new[remap[q]] = q;
        }

        for (std::size_t xp = 0; xp < (std::size_t{1} << rc.n_inputs); ++xp) {
            std::vector<int> full(c.n_inputs, 0);
            for (const auto& [i, b] : r.assignments) full[i] = b;
            std::size_t live = 0;
            for (std::size_t q = 0; q < c.n_inputs; ++q) {
                if (!r.assignments.count(q)) full[q] = (xp >> live++) & 1U;
            }
            const DenseState a = run(rc, xp);
            const DenseState b = run(c, full);
            // Compare amplitude-by-amplitude through the permutation.
            double max_diff = 0.0;
            for (std::size_t idx = 0; idx < a.dim(); ++idx) {
                std::size_t oidx = 0;
                for (std::size_t q = 0; q < a.n_qubits; ++q) {
                    if ((idx >> q) & 1U) oidx |= std::size_t{1} << orig_of_new[q];
                }
                max_diff = std::max(max_diff,
                                    std::abs(a.amplitudes[idx] - b.amplitudes[oidx]));
            }
            CHECK(max_diff < 1e-12);
        }
    }
}

TEST_CASE("random_circuit is deterministic and honors cleaned_up") {
    const auto a = random_circuit(4, 3, 2, 3, true, 42);
    const auto b = random_circuit(4, 3, 2, 3, true, 42);
    CHECK(serialize(a) == serialize(b));
    CHECK(validate(a).empty());
    for (const auto& g : a.layers[0]) {
        CHECK(a.input_count(g) <= 1);
    }
    const auto c = random_circuit(3, 3, 2, 3, false, 7);
    CHECK(validate(c).empty());
    CHECK_THROWS(random_circuit(0, 0, 1, 2, false, 1));
}
