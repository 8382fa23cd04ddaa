#include <catch2/catch_amalgamated.hpp>

#include "qac/generate.hpp"
#include "qac/projector.hpp"
#include "test_helpers.hpp"

using namespace qac;
using namespace qact;
using Catch::Approx;

TEST_CASE("identity projector leaves the state unchanged") {
    const auto c = cz_fixture();
    const auto s = run(c, std::size_t{1});
    const auto p = apply_projector(s, ProjectorExpr::identity());
    for (std::size_t i = 0; i < s.dim(); ++i) {
        CHECK(p.amplitudes[i] == s.amplitudes[i]);
    }
}

TEST_CASE("rank-1 projector on |+>|psi>") {
    DenseState s = DenseState::zero(2);
    // |+> on qubit 0, |1> on qubit 1.
    s.amplitudes[2] = M_SQRT1_2;
    s.amplitudes[3] = M_SQRT1_2;
    const auto p = apply_projector(
        s, ProjectorExpr::sep_rank1_single(0, ket0()));
    CHECK(p.amplitudes[2].real() == Approx(M_SQRT1_2).margin(1e-12));
    CHECK(std::abs(p.amplitudes[3]) < 1e-12);
    CHECK(p.norm2() == Approx(0.5).margin(1e-12));
    CHECK_FALSE(p.normalized);
}

// Complement of |++><++| on |00>: |00> - (1/2) sum_ab |ab|, squared norm 3/4
// by direct 4-dimensional arithmetic.
TEST_CASE("complement projector matches direct arithmetic") {
    DenseState s = DenseState::zero(2);
    s.amplitudes[0] = 1.0;
    const auto proj = ProjectorExpr::complement(
        ProjectorExpr::sep_rank1({{0, ket_plus()}, {1, ket_plus()}}));
    const auto p = apply_projector(s, proj);
    CHECK(p.amplitudes[0].real() == Approx(0.75).margin(1e-12));
    for (std::size_t i = 1; i < 4; ++i) {
        CHECK(p.amplitudes[i].real() == Approx(-0.25).margin(1e-12));
    }
    CHECK(p.norm2() == Approx(0.75).margin(1e-12));
}

TEST_CASE("projector application is idempotent") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        DenseState s = DenseState::zero(3);
        for (auto& a : s.amplitudes) a = rng.next_complex_normal();
        const double norm = std::sqrt(s.norm2());
        for (auto& a : s.amplitudes) a /= norm;

        const auto proj = ProjectorExpr::tensor(
            {ProjectorExpr::complement(
                 ProjectorExpr::sep_rank1({{0, random_qubit_state(rng)},
                                           {1, random_qubit_state(rng)}})),
             ProjectorExpr::sep_rank1_single(2, random_qubit_state(rng))});
        const auto once = apply_projector(s, proj);
        const auto twice = apply_projector(once, proj);
        double diff = 0.0;
        for (std::size_t i = 0; i < s.dim(); ++i) {
            diff = std::max(diff,
                            std::abs(once.amplitudes[i] - twice.amplitudes[i]));
        }
        CHECK(diff < 1e-10);
    }
}

TEST_CASE("overlapping tensor children are rejected") {
    CHECK_THROWS_AS(
        ProjectorExpr::tensor({ProjectorExpr::sep_rank1_single(0, ket0()),
                               ProjectorExpr::sep_rank1_single(0, ket1())}),
        std::invalid_argument);
}

TEST_CASE("activation basics") {
    const auto c = cz_fixture();
    SECTION("identity projector always activates") {
        for (std::size_t x = 0; x < 2; ++x) {
            CHECK(activation(c, ProjectorExpr::identity(), x) == 1);
        }
    }
    SECTION("|1><1| on the input qubit reads x") {
        const auto proj = ProjectorExpr::sep_rank1_single(0, ket1());
        CHECK(activation(c, proj, std::size_t{0}) == 0);
        CHECK(activation(c, proj, std::size_t{1}) == 1);
    }
    SECTION("projector and complement cannot both be inactive") {
        Rng rng(31);
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            const auto rc = random_circuit(3, 2, 2, 3, false, 300 + seed);
            const auto axis = ProjectorExpr::sep_rank1(
                {{0, random_qubit_state(rng)}, {3, random_qubit_state(rng)}});
            const auto comp = ProjectorExpr::complement(axis);
            for (std::size_t x = 0; x < 8; ++x) {
                const int a = activation(rc, axis, x);
                const int b = activation(rc, comp, x);
                CHECK((a | b) == 1);
            }
        }
    }
}

TEST_CASE("activation rejects non-positive tolerance") {
    const auto c = cz_fixture();
    CHECK_THROWS_AS(activation(c, ProjectorExpr::identity(), std::size_t{0}, 0.0),
                    std::invalid_argument);
}
