#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "qac/projector.hpp"

namespace qac {

inline constexpr std::size_t kDensityCap = 10;
inline constexpr double kDensityTol = 1e-9;

// Dense density matrix on an explicit qubit count.
struct DensityMatrix {
    std::size_t n_qubits = 0;
    Eigen::MatrixXcd entries;

    static DensityMatrix scalar() {
        DensityMatrix d;
        d.n_qubits = 0;
        d.entries = Eigen::MatrixXcd::Ones(1, 1);
        return d;
    }

    std::size_t dim() const { return std::size_t{1} << n_qubits; }

    bool is_valid(double tol = kDensityTol) const {
        if (entries.rows() != static_cast<Eigen::Index>(dim()) ||
            entries.cols() != entries.rows()) {
            return false;
        }
        if ((entries - entries.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
        if (std::abs(entries.trace().real() - 1.0) > tol ||
            std::abs(entries.trace().imag()) > tol) {
            return false;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(entries);
        return es.eigenvalues().minCoeff() > -tol;
    }
};

inline DensityMatrix pure_density(const DenseState& s) {
    if (s.n_qubits > kDensityCap) {
        throw std::invalid_argument("density cap exceeded");
    }
    DensityMatrix d;
    d.n_qubits = s.n_qubits;
    Eigen::Map<const Eigen::VectorXcd> v(s.amplitudes.data(),
                                         static_cast<Eigen::Index>(s.dim()));
    d.entries = v * v.adjoint();
    return d;
}

// Partial trace onto `qubit_set` (ascending order defines the row index
// bits: bit j of the reduced index <-> the j-th smallest kept qubit).
inline DensityMatrix reduced_density(const DenseState& state,
                                     const std::vector<std::size_t>& qubit_set) {
    std::vector<std::size_t> keep(qubit_set.begin(), qubit_set.end());
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    if (keep.size() != qubit_set.size()) {
        throw std::invalid_argument("duplicate qubit in reduction set");
    }
    for (auto q : keep) {
        if (q >= state.n_qubits) {
            throw std::out_of_range("reduction qubit out of range");
        }
    }
    if (keep.size() > kDensityCap) {
        throw std::invalid_argument("density cap exceeded");
    }

    detail::GateIndexer ix(keep, state.n_qubits);
    const std::size_t kdim = ix.local_count();
    std::vector<std::size_t> offsets(kdim);
    for (std::size_t s = 0; s < kdim; ++s) offsets[s] = ix.local_offset(s);

    DensityMatrix d;
    d.n_qubits = keep.size();
    d.entries = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(kdim),
                                       static_cast<Eigen::Index>(kdim));
    for (std::size_t r = 0; r < ix.residual_count(); ++r) {
        const std::size_t base = ix.expand_residual(r);
        for (std::size_t a = 0; a < kdim; ++a) {
            const Complex va = state.amplitudes[base + offsets[a]];
            if (va == Complex{0.0, 0.0}) continue;
            for (std::size_t b = 0; b < kdim; ++b) {
                d.entries(static_cast<Eigen::Index>(a),
                          static_cast<Eigen::Index>(b)) +=
                    va * std::conj(state.amplitudes[base + offsets[b]]);
            }
        }
    }
    return d;
}

// D(rho, sigma) = (1/2)||rho - sigma||_1 via eigenvalues of the difference.
inline double trace_distance(const DensityMatrix& rho,
                             const DensityMatrix& sigma) {
    if (rho.entries.rows() != sigma.entries.rows()) {
        throw std::invalid_argument("density matrix dimension mismatch");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.entries -
                                                       sigma.entries);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline double trace_norm(const Eigen::MatrixXcd& hermitian) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian);
    return es.eigenvalues().cwiseAbs().sum();
}

// Number of singular values above tol of the amplitude matrix reshaped along
// the bipartition (side_a vs the rest).
inline std::size_t schmidt_rank(const DenseState& state,
                                const std::vector<std::size_t>& side_a,
                                double tol = 1e-8) {
    std::vector<std::size_t> a(side_a.begin(), side_a.end());
    std::sort(a.begin(), a.end());
    for (auto q : a) {
        if (q >= state.n_qubits) {
            throw std::out_of_range("bipartition qubit out of range");
        }
    }
    detail::GateIndexer ix(a, state.n_qubits);
    const std::size_t rows = ix.local_count();
    const std::size_t cols = ix.residual_count();
    Eigen::MatrixXcd m(static_cast<Eigen::Index>(rows),
                       static_cast<Eigen::Index>(cols));
    std::vector<std::size_t> offsets(rows);
    for (std::size_t s = 0; s < rows; ++s) offsets[s] = ix.local_offset(s);
    for (std::size_t r = 0; r < cols; ++r) {
        const std::size_t base = ix.expand_residual(r);
        for (std::size_t s = 0; s < rows; ++s) {
            m(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(r)) =
                state.amplitudes[base + offsets[s]];
        }
    }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
        if (svd.singularValues()(i) > tol) ++rank;
    }
    return rank;
}

// Random mixed state: normalized Wishart A A^dag / tr.
inline DensityMatrix random_density_matrix(std::size_t n_qubits, Rng& rng) {
    if (n_qubits > kDensityCap) {
        throw std::invalid_argument("density cap exceeded");
    }
    const Eigen::Index d = Eigen::Index{1} << n_qubits;
    Eigen::MatrixXcd a(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            a(i, j) = rng.next_complex_normal();
        }
    }
    DensityMatrix dm;
    dm.n_qubits = n_qubits;
    dm.entries = a * a.adjoint();
    dm.entries /= dm.entries.trace().real();
    return dm;
}

// Tensor product of factors given on disjoint qubit sets; the result is
// indexed over the sorted union of all qubits.
inline DensityMatrix tensor_on_qubits(
    const std::vector<std::pair<std::vector<std::size_t>, DensityMatrix>>&
        factors) {
    std::vector<std::size_t> all;
    for (const auto& [qs, dm] : factors) {
        if (qs.size() != dm.n_qubits) {
            throw std::invalid_argument("factor qubit-count mismatch");
        }
        all.insert(all.end(), qs.begin(), qs.end());
    }
    std::vector<std::size_t> sorted = all;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw std::invalid_argument("tensor factors overlap");
    }
    const std::size_t n = sorted.size();
    if (n > kDensityCap) throw std::invalid_argument("density cap exceeded");

    // Global bit position (in the sorted union) of each factor's local bits.
    std::map<std::size_t, std::size_t> pos;
    for (std::size_t j = 0; j < sorted.size(); ++j) pos[sorted[j]] = j;

    DensityMatrix out;
    out.n_qubits = n;
    const std::size_t dim = std::size_t{1} << n;
    out.entries = Eigen::MatrixXcd::Ones(1, 1);
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Ones(static_cast<Eigen::Index>(dim),
                                                  static_cast<Eigen::Index>(dim));
    for (std::size_t row = 0; row < dim; ++row) {
        for (std::size_t col = 0; col < dim; ++col) {
            Complex v{1.0, 0.0};
            for (const auto& [qs, dm] : factors) {
                std::size_t lr = 0, lc = 0;
                std::vector<std::size_t> local(qs.begin(), qs.end());
                std::sort(local.begin(), local.end());
                for (std::size_t j = 0; j < local.size(); ++j) {
                    const std::size_t g = pos.at(local[j]);
                    if ((row >> g) & 1U) lr |= std::size_t{1} << j;
                    if ((col >> g) & 1U) lc |= std::size_t{1} << j;
                }
                v *= dm.entries(static_cast<Eigen::Index>(lr),
                                static_cast<Eigen::Index>(lc));
            }
            acc(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = v;
        }
    }
    out.entries = acc;
    return out;
}

} // namespace qac
