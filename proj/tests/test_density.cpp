#include <catch2/catch_amalgamated.hpp>

#include "qac/density.hpp"
#include "test_helpers.hpp"

using namespace qac;
using namespace qact;
using Catch::Approx;

TEST_CASE("reduced density of a product state") {
    // |0> (x) |+>, reduce to qubit 1 -> (1/2)[[1,1],[1,1]].
    DenseState s = DenseState::zero(2);
    s.amplitudes[0] = M_SQRT1_2;
    s.amplitudes[2] = M_SQRT1_2;
    const auto rho = reduced_density(s, {1});
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            CHECK(rho.entries(r, c).real() == Approx(0.5).margin(1e-12));
        }
    }
    CHECK(rho.is_valid());
}

TEST_CASE("cat marginal is maximally mixed") {
    const auto s = cat_state(2);
    const auto rho = reduced_density(s, {0});
    CHECK(rho.entries(0, 0).real() == Approx(0.5));
    CHECK(rho.entries(1, 1).real() == Approx(0.5));
    CHECK(std::abs(rho.entries(0, 1)) < 1e-12);
}

TEST_CASE("reducing over the full set gives the pure projector") {
    Rng rng(8);
    DenseState s = DenseState::zero(3);
    for (auto& a : s.amplitudes) a = rng.next_complex_normal();
    const double norm = std::sqrt(s.norm2());
    for (auto& a : s.amplitudes) a /= norm;
    const auto rho = reduced_density(s, {0, 1, 2});
    const auto pure = pure_density(s);
    CHECK((rho.entries - pure.entries).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(rho.entries.trace().real() - 1.0) < 1e-9);
}

TEST_CASE("trace distance basics") {
    Rng rng(21);
    const auto rho = random_density_matrix(2, rng);
    CHECK(trace_distance(rho, rho) == Approx(0.0).margin(1e-12));

    DensityMatrix zero, one;
    zero.n_qubits = one.n_qubits = 1;
    zero.entries = Eigen::MatrixXcd::Zero(2, 2);
    zero.entries(0, 0) = 1.0;
    one.entries = Eigen::MatrixXcd::Zero(2, 2);
    one.entries(1, 1) = 1.0;
    CHECK(trace_distance(zero, one) == Approx(1.0));

    // D(|0><0|, |+><+|) = 1/sqrt(2) from the 2x2 difference eigenvalues.
    DensityMatrix plus;
    plus.n_qubits = 1;
    plus.entries = Eigen::MatrixXcd::Constant(2, 2, 0.5);
    CHECK(trace_distance(zero, plus) == Approx(M_SQRT1_2).margin(1e-12));
}

TEST_CASE("trace distance is symmetric and triangular") {
    Rng rng(33);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_density_matrix(2, rng);
        const auto b = random_density_matrix(2, rng);
        const auto c = random_density_matrix(2, rng);
        const double ab = trace_distance(a, b);
        CHECK(ab == Approx(trace_distance(b, a)).margin(1e-12));
        CHECK(ab <= trace_distance(a, c) + trace_distance(c, b) + 1e-8);
        CHECK(ab >= -1e-12);
        CHECK(ab <= 1.0 + 1e-12);
    }
}

TEST_CASE("schmidt rank") {
    SECTION("product state has rank 1") {
        DenseState s = DenseState::zero(3);
        s.amplitudes[0] = 1.0;
        CHECK(schmidt_rank(s, {0}) == 1);
    }
    SECTION("cat_2 across the natural cut has rank 2") {
        CHECK(schmidt_rank(cat_state(2), {0}) == 2);
    }
    SECTION("cat_3 across {q0} vs {q1,q2} has rank 2 (SVD of the 2x4 reshape)") {
        CHECK(schmidt_rank(cat_state(3), {0}) == 2);
        CHECK(schmidt_rank(cat_state(3), {1, 2}) == 2);
    }
}

TEST_CASE("dimension mismatch throws") {
    Rng rng(2);
    const auto a = random_density_matrix(1, rng);
    const auto b = random_density_matrix(2, rng);
    CHECK_THROWS_AS(trace_distance(a, b), std::invalid_argument);
}

// <i|rho|i> >= <i|rho^2|i> for every basis index.
TEST_CASE("diagonal of rho dominates diagonal of rho squared") {
    Rng rng(14);
    for (int trial = 0; trial < 50; ++trial) {
        const auto rho = random_density_matrix(1 + trial % 3, rng);
        const Eigen::MatrixXcd sq = rho.entries * rho.entries;
        for (Eigen::Index i = 0; i < rho.entries.rows(); ++i) {
            CHECK(rho.entries(i, i).real() >= sq(i, i).real() - 1e-9);
        }
    }
}

TEST_CASE("tensor_on_qubits agrees with a direct reduced density") {
    // Product state |0>_0 (x) |+>_1: tensor of the marginals equals the
    // two-qubit density matrix.
    DenseState s = DenseState::zero(2);
    s.amplitudes[0] = M_SQRT1_2;
    s.amplitudes[2] = M_SQRT1_2;
    const auto rho0 = reduced_density(s, {0});
    const auto rho1 = reduced_density(s, {1});
    const auto joint = tensor_on_qubits({{{0}, rho0}, {{1}, rho1}});
    const auto direct = reduced_density(s, {0, 1});
    CHECK((joint.entries - direct.entries).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("density cap is enforced") {
    DenseState s = DenseState::zero(12);
    s.amplitudes[0] = 1.0;
    std::vector<std::size_t> all(12);
    for (std::size_t q = 0; q < 12; ++q) all[q] = q;
    CHECK_THROWS_AS(reduced_density(s, all), std::invalid_argument);
}
