#pragma once

#include "qac/density.hpp"
#include "qac/generate.hpp"

namespace qac {

inline constexpr double kCertFidelityTol = 1e-8;
inline constexpr double kBranchZeroTol = 1e-5; // |amp|^2 > 1e-10

// Certificate of generalized-nekomata structure: the state equals
// alpha (x)_i |mu_i> (x) |gamma_0>  +  beta (x)_i |mu_i^perp> (x) |gamma_1>
// on the listed targets, with both amplitudes nonzero.
struct NekomataCert {
    std::vector<std::size_t> targets;
    std::vector<std::pair<QubitState, QubitState>> bases; // per target
    Complex alpha{0.0, 0.0};
    Complex beta{0.0, 0.0};
    std::vector<std::size_t> ancillae; // sorted complement of targets
    DenseState gamma0;                 // branch states over the ancillae
    DenseState gamma1;
    double reconstruction_fidelity = 0.0;
};

struct GnspCert {
    std::vector<std::size_t> post_qubits;          // Q (possibly empty)
    std::map<std::size_t, QubitState> post_states; // separable |eta>_Q
    double post_norm = 0.0;                        // ||<eta|_Q phi||
    NekomataCert inner;
};

namespace detail_neko {

// <bra|_q |psi>: contracts qubit q, shifting higher qubits down by one.
inline DenseState contract_qubit(const DenseState& s, std::size_t q,
                                 const QubitState& bra) {
    if (q >= s.n_qubits) throw std::out_of_range("contract qubit out of range");
    DenseState out = DenseState::zero(s.n_qubits - 1);
    out.normalized = false;
    const std::size_t low_mask = (std::size_t{1} << q) - 1;
    for (std::size_t r = 0; r < out.dim(); ++r) {
        const std::size_t base =
            (r & low_mask) | ((r & ~low_mask) << 1);
        out.amplitudes[r] =
            std::conj(bra.amp0) * s.amplitudes[base] +
            std::conj(bra.amp1) * s.amplitudes[base | (std::size_t{1} << q)];
    }
    return out;
}

// Contracts several qubits (given in original indices) with per-qubit bras.
inline DenseState contract_qubits(
    const DenseState& s, std::vector<std::pair<std::size_t, QubitState>> bras) {
    std::sort(bras.begin(), bras.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    DenseState cur = s;
    for (const auto& [q, bra] : bras) {
        cur = contract_qubit(cur, q, bra);
    }
    return cur;
}

// Builds the product state (x)_targets |t_i> (x) |anc_state> over n qubits.
inline DenseState assemble_branch(std::size_t n,
                                  const std::vector<std::size_t>& targets,
                                  const std::vector<QubitState>& tstates,
                                  const std::vector<std::size_t>& ancillae,
                                  const DenseState& anc_state) {
    DenseState out = DenseState::zero(n);
    std::map<std::size_t, std::size_t> anc_pos;
    for (std::size_t j = 0; j < ancillae.size(); ++j) anc_pos[ancillae[j]] = j;
    for (std::size_t idx = 0; idx < out.dim(); ++idx) {
        Complex v{1.0, 0.0};
        std::size_t anc_idx = 0;
        for (std::size_t j = 0; j < targets.size(); ++j) {
            v *= tstates[j].amplitude((idx >> targets[j]) & 1U);
        }
        for (auto a : ancillae) {
            if ((idx >> a) & 1U) anc_idx |= std::size_t{1} << anc_pos[a];
        }
        if (!ancillae.empty()) {
            v *= anc_state.amplitudes[anc_idx];
        } else {
            v *= anc_state.amplitudes[0];
        }
        out.amplitudes[idx] = v;
    }
    return out;
}

// Roots (a : b) of c20 a^2 + c11 ab + c02 b^2 = 0 in projective form.
inline std::vector<std::pair<Complex, Complex>> projective_quadratic_roots(
    Complex c20, Complex c11, Complex c02) {
    const double scale =
        std::max({std::abs(c20), std::abs(c11), std::abs(c02)});
    if (scale == 0.0) return {};
    const double eps = 1e-10 * scale;
    std::vector<std::pair<Complex, Complex>> roots;
    if (std::abs(c20) <= eps && std::abs(c02) <= eps) {
        if (std::abs(c11) <= eps) return {};
        return {{1.0, 0.0}, {0.0, 1.0}};
    }
    if (std::abs(c02) <= eps) {
        // a (c20 a + c11 b) = 0
        roots.push_back({0.0, 1.0});
        if (std::abs(c11) > eps) roots.push_back({c11, -c20});
        return roots;
    }
    if (std::abs(c20) <= eps) {
        // b (c11 a + c02 b) = 0
        roots.push_back({1.0, 0.0});
        if (std::abs(c11) > eps) roots.push_back({c02, -c11});
        return roots;
    }
    const Complex disc = c11 * c11 - 4.0 * c02 * c20;
    const Complex sq = std::sqrt(disc);
    roots.push_back({2.0 * c02, -c11 + sq});
    roots.push_back({2.0 * c02, -c11 - sq});
    return roots;
}

// Rank-1 factor of a 2x2 matrix: returns (left, right) with m ~ left right^T.
inline std::pair<QubitState, QubitState> rank1_factor(
    const Eigen::Matrix2cd& m) {
    Eigen::JacobiSVD<Eigen::Matrix2cd> svd(
        m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    QubitState left{svd.matrixU()(0, 0), svd.matrixU()(1, 0)};
    QubitState right{std::conj(svd.matrixV()(0, 0)),
                     std::conj(svd.matrixV()(1, 0))};
    return {left, right};
}

} // namespace detail_neko

// ---------------------------------------------------------------------
// Detection: per-target Schmidt rank 2, basis extraction from the rank-2
// marginal eigenvectors (with the cross-branch tie-break through a product
// decomposition of the two-target marginal when the single-qubit marginal is
// degenerate), branch consistency, and a final reconstruction check.
// ---------------------------------------------------------------------

inline std::optional<NekomataCert> certify_nekomata(
    const DenseState& state, const std::vector<std::size_t>& targets,
    double tol = kCertFidelityTol) {
    if (targets.size() < 2) {
        throw std::invalid_argument("certification needs at least two targets");
    }
    {
        std::set<std::size_t> uniq(targets.begin(), targets.end());
        if (uniq.size() != targets.size()) {
            throw std::invalid_argument("duplicate target");
        }
        for (auto t : targets) {
            if (t >= state.n_qubits) throw std::out_of_range("target range");
        }
    }
    for (auto t : targets) {
        if (schmidt_rank(state, {t}) != 2) return std::nullopt;
    }

    const std::size_t t1 = targets.front();
    QubitState mu1, mu1p;
    {
        const auto rho = reduced_density(state, {t1});
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.entries);
        const double gap =
            std::abs(es.eigenvalues()(1) - es.eigenvalues()(0));
        if (gap > 1e-6) {
            // Convention: mu carries the heavier branch.
            mu1 = {es.eigenvectors()(0, 1), es.eigenvectors()(1, 1)};
            mu1p = {es.eigenvectors()(0, 0), es.eigenvectors()(1, 0)};
        } else {
            // Degenerate marginal (cat-like): resolve the basis through the
            // product states spanned by the two-target marginal.
            const std::size_t t2 = targets[1];
            std::vector<std::size_t> pair_sorted = {std::min(t1, t2),
                                                    std::max(t1, t2)};
            const auto sigma = reduced_density(state, pair_sorted);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es2(sigma.entries);
            QubitState cand_a, cand_b;
            if (es2.eigenvalues()(2) <= 1e-9) {
                // The pair marginal is pure (no distinguishing ancillae or
                // further targets): any Schmidt basis of it works. Take the
                // SVD of the pure state's 2x2 amplitude matrix.
                Eigen::Matrix2cd m;
                for (int r = 0; r < 2; ++r) {
                    for (int cc = 0; cc < 2; ++cc) {
                        m(r, cc) = es2.eigenvectors()(r + 2 * cc, 3);
                    }
                }
                Eigen::JacobiSVD<Eigen::Matrix2cd> svd(m,
                                                       Eigen::ComputeFullU);
                if (svd.singularValues()(1) <= 1e-9) return std::nullopt;
                const auto& u = svd.matrixU();
                if (t1 < t2) {
                    cand_a = {u(0, 0), u(1, 0)};
                    cand_b = {u(0, 1), u(1, 1)};
                } else {
                    // Rows of m index the lower qubit; for t1 > t2 take the
                    // right singular vectors via m^T.
                    Eigen::JacobiSVD<Eigen::Matrix2cd> svd2(
                        m.transpose().eval(), Eigen::ComputeFullU);
                    const auto& u2m = svd2.matrixU();
                    cand_a = {u2m(0, 0), u2m(1, 0)};
                    cand_b = {u2m(0, 1), u2m(1, 1)};
                }
            } else {
                // Rank-2 marginal: the nekomata branches are the product
                // states inside the top-two eigenvector span. Top-two
                // eigenvectors as 2x2 matrices (row = bit of the lower qubit
                // index, col = bit of the higher one).
                Eigen::Matrix2cd a1, a2;
                for (int r = 0; r < 2; ++r) {
                    for (int cc = 0; cc < 2; ++cc) {
                        a1(r, cc) = es2.eigenvectors()(r + 2 * cc, 3);
                        a2(r, cc) = es2.eigenvectors()(r + 2 * cc, 2);
                    }
                }
                const Complex c20 = a1.determinant();
                const Complex c02 = a2.determinant();
                const Complex c11 = (a1 + a2).determinant() - c20 - c02;
                const auto roots =
                    detail_neko::projective_quadratic_roots(c20, c11, c02);
                if (roots.size() != 2) return std::nullopt;
                const Eigen::Matrix2cd m1 =
                    roots[0].first * a1 + roots[0].second * a2;
                const Eigen::Matrix2cd m2 =
                    roots[1].first * a1 + roots[1].second * a2;
                auto [u1, v1] = detail_neko::rank1_factor(m1);
                auto [u2, v2] = detail_neko::rank1_factor(m2);
                // u belongs to the lower qubit index of the pair.
                cand_a = (t1 < t2) ? u1 : v1;
                cand_b = (t1 < t2) ? u2 : v2;
            }
            if (std::abs(inner(cand_a, cand_b)) > 1e-6) return std::nullopt;
            mu1 = cand_a.normalized();
            mu1p = cand_b.normalized();
        }
    }

    // Branch states over the remaining qubits.
    auto b0 = detail_neko::contract_qubit(state, t1, mu1);
    auto b1 = detail_neko::contract_qubit(state, t1, mu1p);
    const double n0 = std::sqrt(b0.norm2());
    const double n1 = std::sqrt(b1.norm2());
    if (n0 <= kBranchZeroTol || n1 <= kBranchZeroTol) return std::nullopt;
    if (std::abs(inner(b0, b1)) > 1e-6 * n0 * n1) return std::nullopt;
    b0 = b0.normalized_copy();
    b1 = b1.normalized_copy();

    // Index map for the contracted system (t1 removed).
    auto shifted = [t1](std::size_t q) { return q > t1 ? q - 1 : q; };

    NekomataCert cert;
    cert.targets = targets;
    cert.bases.resize(targets.size());
    cert.bases[0] = {mu1, mu1p};
    for (std::size_t j = 1; j < targets.size(); ++j) {
        const std::size_t tq = shifted(targets[j]);
        const auto r0 = reduced_density(b0, {tq});
        const auto r1 = reduced_density(b1, {tq});
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> e0(r0.entries);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> e1(r1.entries);
        if (e0.eigenvalues()(1) < 1.0 - 1e-7) return std::nullopt; // not pure
        if (e1.eigenvalues()(1) < 1.0 - 1e-7) return std::nullopt;
        QubitState mu{e0.eigenvectors()(0, 1), e0.eigenvectors()(1, 1)};
        QubitState mup{e1.eigenvectors()(0, 1), e1.eigenvectors()(1, 1)};
        if (std::abs(inner(mu, mup)) > 1e-6) return std::nullopt;
        cert.bases[j] = {mu, mup};
    }

    for (std::size_t q = 0; q < state.n_qubits; ++q) {
        bool is_target = false;
        for (auto t : targets) {
            if (t == q) is_target = true;
        }
        if (!is_target) cert.ancillae.push_back(q);
    }

    // gamma branches: contract the remaining targets out of b0 / b1.
    std::vector<std::pair<std::size_t, QubitState>> bras0, bras1;
    for (std::size_t j = 1; j < targets.size(); ++j) {
        bras0.emplace_back(shifted(targets[j]), cert.bases[j].first);
        bras1.emplace_back(shifted(targets[j]), cert.bases[j].second);
    }
    auto g0 = detail_neko::contract_qubits(b0, bras0);
    auto g1 = detail_neko::contract_qubits(b1, bras1);
    const double g0n = std::sqrt(g0.norm2());
    const double g1n = std::sqrt(g1.norm2());
    if (g0n <= kBranchZeroTol || g1n <= kBranchZeroTol) return std::nullopt;
    cert.gamma0 = g0.scaled(1.0 / g0n);
    cert.gamma0.normalized = true;
    cert.gamma1 = g1.scaled(1.0 / g1n);
    cert.gamma1.normalized = true;
    cert.alpha = n0 * g0n;
    cert.beta = n1 * g1n;

    // Reconstruction check against the original state.
    std::vector<QubitState> mus, mups;
    for (const auto& [m, mp] : cert.bases) {
        mus.push_back(m);
        mups.push_back(mp);
    }
    auto branch0 = detail_neko::assemble_branch(
        state.n_qubits, cert.targets, mus, cert.ancillae, cert.gamma0);
    auto branch1 = detail_neko::assemble_branch(
        state.n_qubits, cert.targets, mups, cert.ancillae, cert.gamma1);
    DenseState rec = DenseState::zero(state.n_qubits);
    for (std::size_t i = 0; i < rec.dim(); ++i) {
        rec.amplitudes[i] = cert.alpha * branch0.amplitudes[i] +
                            cert.beta * branch1.amplitudes[i];
    }
    const double rec_norm = std::sqrt(rec.norm2());
    if (rec_norm <= kBranchZeroTol) return std::nullopt;
    cert.reconstruction_fidelity =
        std::abs(inner(rec, state)) / rec_norm / std::sqrt(state.norm2());
    if (cert.reconstruction_fidelity < 1.0 - tol) return std::nullopt;
    if (std::abs(cert.alpha) <= kBranchZeroTol ||
        std::abs(cert.beta) <= kBranchZeroTol) {
        return std::nullopt;
    }
    return cert;
}

// Random generalized nekomata with known structure (test and search corpus).
inline DenseState random_generalized_nekomata(
    std::size_t n_qubits, const std::vector<std::size_t>& targets, Rng& rng) {
    std::vector<QubitState> mus, mups;
    for (std::size_t j = 0; j < targets.size(); ++j) {
        const QubitState mu = random_qubit_state(rng);
        mus.push_back(mu);
        mups.push_back(mu.orthogonal());
    }
    std::vector<std::size_t> ancillae;
    for (std::size_t q = 0; q < n_qubits; ++q) {
        bool is_target = false;
        for (auto t : targets) {
            if (t == q) is_target = true;
        }
        if (!is_target) ancillae.push_back(q);
    }
    auto random_anc = [&] {
        DenseState g = DenseState::zero(ancillae.size());
        for (auto& a : g.amplitudes) a = rng.next_complex_normal();
        return g.normalized_copy();
    };
    const DenseState g0 = random_anc();
    const DenseState g1 = random_anc();
    // Both amplitudes bounded away from zero.
    const double w = 0.15 + 0.7 * rng.next_double();
    const Complex alpha = std::sqrt(w);
    const Complex beta = std::sqrt(1.0 - w);
    const auto branch0 = detail_neko::assemble_branch(n_qubits, targets, mus,
                                                      ancillae, g0);
    const auto branch1 = detail_neko::assemble_branch(n_qubits, targets, mups,
                                                      ancillae, g1);
    DenseState out = DenseState::zero(n_qubits);
    for (std::size_t i = 0; i < out.dim(); ++i) {
        out.amplitudes[i] =
            alpha * branch0.amplitudes[i] + beta * branch1.amplitudes[i];
    }
    return out.normalized_copy();
}

// ---------------------------------------------------------------------
// Post-gate certificate: a separable post-selection inside the gate's
// support under which G(S)|psi> is again a generalized nekomata on at least
// n - floor(k/2) targets, k = |S inter targets|. Follows the constructive
// case analysis; every returned certificate is re-verified.
// ---------------------------------------------------------------------

namespace detail_neko {

inline DenseState project_qubit(const DenseState& s, std::size_t q,
                                const QubitState& ket) {
    return apply_sep_rank1(s, {q}, {{q, ket}});
}

struct PostSelection {
    std::vector<std::size_t> qubits;
    std::map<std::size_t, QubitState> states;
};

// Gate restricted to a qubit subset (per-qubit states preserved).
inline ReflectionGate restrict_gate(const ReflectionGate& g,
                                    const std::vector<std::size_t>& keep) {
    ReflectionGate out;
    for (auto q : keep) {
        out.qubits.push_back(q);
        out.states.emplace(q, g.state_of(q));
    }
    return out;
}

inline double axis_overlap_norm(const DenseState& s, const ReflectionGate& g) {
    DenseState proj = s;
    for (auto q : g.qubits) {
        proj = project_qubit(proj, q, g.state_of(q));
    }
    return std::sqrt(proj.norm2());
}

} // namespace detail_neko

inline std::optional<GnspCert> postgate_certificate(const DenseState& psi,
                                                    const NekomataCert& cert,
                                                    const ReflectionGate& gate) {
    using namespace detail_neko;

    // Strip redundant gate qubits: components with no orthogonal part act
    // like fixed controls and shrink the gate.
    std::vector<std::size_t> live;
    for (auto q : gate.qubits) {
        const auto perp = project_qubit(psi, q, gate.state_of(q).orthogonal());
        if (std::sqrt(perp.norm2()) > 1e-9) live.push_back(q);
    }
    ReflectionGate eff = restrict_gate(gate, live);

    const DenseState phi = apply_reflection(psi, gate);

    auto finish = [&](const DenseState& post_state, PostSelection post,
                      std::vector<std::size_t> targets)
        -> std::optional<GnspCert> {
        const double norm = std::sqrt(post_state.norm2());
        if (norm <= kBranchZeroTol) return std::nullopt;
        const auto inner_cert =
            certify_nekomata(post_state.scaled(1.0 / norm), targets);
        if (!inner_cert) return std::nullopt;
        GnspCert out;
        out.post_qubits = std::move(post.qubits);
        out.post_states = std::move(post.states);
        out.post_norm = norm;
        out.inner = *inner_cert;
        return out;
    };

    std::set<std::size_t> target_set(cert.targets.begin(), cert.targets.end());
    std::vector<std::size_t> hit; // targets inside the effective gate
    for (auto q : eff.qubits) {
        if (target_set.count(q)) hit.push_back(q);
    }

    if (hit.empty()) {
        // Ancilla-only action: still a nekomata on the same targets.
        return finish(phi, {}, cert.targets);
    }

    if (hit.size() >= 2) {
        // Post-select the orthogonal component on a target whose basis is
        // neither aligned with nor orthogonal to the gate's component.
        for (auto t : hit) {
            std::size_t pos = 0;
            for (std::size_t j = 0; j < cert.targets.size(); ++j) {
                if (cert.targets[j] == t) pos = j;
            }
            const double ov =
                std::abs(inner(eff.state_of(t), cert.bases[pos].first));
            if (ov < 1e-7 || ov > 1.0 - 1e-7) continue;
            const QubitState eta = eff.state_of(t).orthogonal();
            PostSelection post;
            post.qubits.push_back(t);
            post.states.emplace(t, eta);
            std::vector<std::size_t> rest;
            for (auto tt : cert.targets) {
                if (tt != t) rest.push_back(tt);
            }
            auto res = finish(project_qubit(phi, t, eta), post, rest);
            if (res) return res;
        }
        // Commuting-branch case: the gate preserves both branches.
        return finish(phi, {}, cert.targets);
    }

    // Exactly one target in the gate: peel gate ancillae recursively.
    DenseState cur_state = psi;
    ReflectionGate cur_gate = eff;
    PostSelection post;
    const std::size_t t = hit.front();
    while (true) {
        if (axis_overlap_norm(cur_state, cur_gate) <= 1e-9) {
            // Gate deactivated: output equals the current state.
            return finish(cur_state, post, cert.targets);
        }
        std::vector<std::size_t> anc;
        for (auto q : cur_gate.qubits) {
            if (q != t) anc.push_back(q);
        }
        if (anc.empty()) {
            // Single-qubit action on t.
            return finish(apply_reflection(cur_state, cur_gate), post,
                          cert.targets);
        }
        bool progressed = false;
        for (auto q : anc) {
            const QubitState theta = cur_gate.state_of(q);
            const QubitState perp = theta.orthogonal();
            // Orthogonal component kills the gate outright.
            {
                const auto projected = project_qubit(cur_state, q, perp);
                const double norm = std::sqrt(projected.norm2());
                if (norm > kBranchZeroTol) {
                    const auto normd = projected.scaled(1.0 / norm);
                    if (certify_nekomata(normd, cert.targets)) {
                        PostSelection p2 = post;
                        p2.qubits.push_back(q);
                        p2.states.emplace(q, perp);
                        return finish(projected, p2, cert.targets);
                    }
                }
            }
            // Aligned component: shrink the gate and recurse.
            const auto projected = project_qubit(cur_state, q, theta);
            const double norm = std::sqrt(projected.norm2());
            if (norm > kBranchZeroTol) {
                const auto normd = projected.scaled(1.0 / norm);
                if (certify_nekomata(normd, cert.targets)) {
                    post.qubits.push_back(q);
                    post.states.emplace(q, theta);
                    cur_state = normd;
                    std::vector<std::size_t> keep;
                    for (auto qq : cur_gate.qubits) {
                        if (qq != q) keep.push_back(qq);
                    }
                    cur_gate = restrict_gate(cur_gate, keep);
                    progressed = true;
                    break;
                }
            }
        }
        if (!progressed) {
            // Anti-correlated corner: the full gate still preserves the
            // branch structure; certify the direct image.
            return finish(apply_reflection(cur_state, cur_gate), post,
                          cert.targets);
        }
    }
}

// ---------------------------------------------------------------------
// Post-layer certificate: compose the per-gate construction across the
// disjoint gates of one layer.
// ---------------------------------------------------------------------

struct PostLayerResult {
    GnspCert cert;
    std::size_t targets_touched = 0;  // n0
    std::size_t guaranteed_targets = 0; // n - floor(n0 / 2)
};

inline std::optional<PostLayerResult> postlayer_certificate(
    const DenseState& psi, const NekomataCert& cert, const Layer& layer) {
    {
        std::set<std::size_t> seen;
        for (const auto& g : layer) {
            for (auto q : g.qubits) {
                if (!seen.insert(q).second) {
                    throw std::invalid_argument("layer gates overlap");
                }
            }
        }
    }
    PostLayerResult res;
    std::set<std::size_t> target_set(cert.targets.begin(), cert.targets.end());
    for (const auto& g : layer) {
        for (auto q : g.qubits) {
            if (target_set.count(q)) ++res.targets_touched;
        }
    }
    res.guaranteed_targets = cert.targets.size() - res.targets_touched / 2;

    DenseState cur = psi;
    NekomataCert cur_cert = cert;
    GnspCert acc;
    acc.post_norm = 1.0;
    for (const auto& g : layer) {
        const auto step = postgate_certificate(cur, cur_cert, g);
        if (!step) return std::nullopt;
        // Re-project the running state by the chosen post-selection.
        DenseState next = apply_reflection(cur, g);
        for (auto q : step->post_qubits) {
            next = detail_neko::project_qubit(next, q, step->post_states.at(q));
        }
        const double norm = std::sqrt(next.norm2());
        if (norm <= kBranchZeroTol) return std::nullopt;
        cur = next.scaled(1.0 / norm);
        cur.normalized = true;
        cur_cert = step->inner;
        for (auto q : step->post_qubits) {
            acc.post_qubits.push_back(q);
            acc.post_states.emplace(q, step->post_states.at(q));
        }
    }
    acc.inner = cur_cert;
    acc.post_norm = 1.0;
    res.cert = std::move(acc);
    if (res.cert.inner.targets.size() < res.guaranteed_targets) {
        return std::nullopt; // construction fell short of the bound
    }
    return res;
}

// ---------------------------------------------------------------------
// Depth-1 structure: each gate's output lies in the two-dimensional span of
// two separable states, which rules out GNSP certificates on more than two
// targets. Residuals are computed per gate; sampled separable
// post-selections serve as an empirical negative control.
// ---------------------------------------------------------------------

struct Depth1CheckReport {
    std::vector<double> gate_span_residuals;
    double max_residual = 0.0;
    std::size_t sampled_postselections = 0;
    std::size_t gnsp_hits = 0; // certificates found on > 2 targets
    bool structure_ok = true;
};

inline Depth1CheckReport depth1_gnsp_check(const ReflectionCircuit& c,
                                           std::size_t n_targets,
                                           std::uint64_t seed = 0,
                                           std::size_t samples = 25) {
    if (c.depth() != 1) {
        throw std::invalid_argument("expects a depth-1 circuit");
    }
    if (c.n_inputs != 0) {
        throw std::invalid_argument("expects a synthesis-mode circuit");
    }
    Depth1CheckReport rep;
    const DenseState full = run(c, std::vector<int>{});

    for (const auto& g : c.layers[0]) {
        // Local system of the gate: initial product state and the reflected
        // output, both expressed on the gate's qubits.
        std::vector<std::size_t> qs = g.qubits;
        std::sort(qs.begin(), qs.end());
        const std::size_t w = qs.size();
        DenseState init = DenseState::zero(w);
        for (std::size_t idx = 0; idx < init.dim(); ++idx) {
            Complex v{1.0, 0.0};
            for (std::size_t j = 0; j < w; ++j) {
                v *= c.init_of(qs[j]).amplitude((idx >> j) & 1U);
            }
            init.amplitudes[idx] = v;
        }
        ReflectionGate local;
        for (std::size_t j = 0; j < w; ++j) {
            local.qubits.push_back(j);
            local.states.emplace(j, g.state_of(qs[j]));
        }
        const DenseState out = apply_reflection(init, local);
        // Axis state |theta> on the local system.
        DenseState axis = DenseState::zero(w);
        for (std::size_t idx = 0; idx < axis.dim(); ++idx) {
            Complex v{1.0, 0.0};
            for (std::size_t j = 0; j < w; ++j) {
                v *= g.state_of(qs[j]).amplitude((idx >> j) & 1U);
            }
            axis.amplitudes[idx] = v;
        }
        // Least-squares residual of `out` against span{axis, init} via the
        // Gram system.
        Eigen::Matrix2cd gram;
        gram(0, 0) = inner(axis, axis);
        gram(0, 1) = inner(axis, init);
        gram(1, 0) = inner(init, axis);
        gram(1, 1) = inner(init, init);
        Eigen::Vector2cd rhs;
        rhs(0) = inner(axis, out);
        rhs(1) = inner(init, out);
        const Eigen::Vector2cd coef = gram.ldlt().solve(rhs);
        DenseState span = DenseState::zero(w);
        for (std::size_t i = 0; i < span.dim(); ++i) {
            span.amplitudes[i] =
                coef(0) * axis.amplitudes[i] + coef(1) * init.amplitudes[i];
        }
        double residual2 = 0.0;
        for (std::size_t i = 0; i < span.dim(); ++i) {
            residual2 += std::norm(out.amplitudes[i] - span.amplitudes[i]);
        }
        const double residual = std::sqrt(std::max(residual2, 0.0));
        rep.gate_span_residuals.push_back(residual);
        rep.max_residual = std::max(rep.max_residual, residual);
        if (residual > 1e-9) rep.structure_ok = false;
    }

    // Sampled separable post-selections as a negative control.
    if (n_targets >= 3 && c.n_qubits() >= n_targets) {
        Rng rng(seed);
        for (std::size_t s = 0; s < samples; ++s) {
            // Random post-selection set disjoint from a random target set.
            std::vector<std::size_t> pool(c.n_qubits());
            for (std::size_t q = 0; q < pool.size(); ++q) pool[q] = q;
            rng.shuffle(pool);
            std::vector<std::size_t> targets(pool.begin(),
                                             pool.begin() + n_targets);
            const std::size_t q_count =
                std::min<std::size_t>(pool.size() - n_targets,
                                      1 + rng.index(2));
            DenseState projected = full;
            std::vector<std::pair<std::size_t, QubitState>> post;
            for (std::size_t j = 0; j < q_count; ++j) {
                const std::size_t q = pool[n_targets + j];
                projected = detail_neko::project_qubit(projected, q,
                                                       random_qubit_state(rng));
            }
            const double norm = std::sqrt(projected.norm2());
            ++rep.sampled_postselections;
            if (norm <= kBranchZeroTol) continue;
            if (certify_nekomata(projected.scaled(1.0 / norm), targets)) {
                ++rep.gnsp_hits;
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------
// Depth-2 synthesis search: fidelity of circuit outputs to the nearest
// generalized nekomata, with per-target bases taken from the marginal
// eigenvectors (certification handles the degenerate tie-break). The
// |Cat_4> construction is planted for four targets.
// ---------------------------------------------------------------------

// Two-layer Cat_4 preparation: an EPR-style pair in layer 1, two CNOT
// copies in layer 2. Extra qubits beyond the first four idle in |0>.
inline ReflectionCircuit planted_cat4_circuit(std::size_t total_qubits = 4) {
    if (total_qubits < 4) {
        throw std::invalid_argument("planted circuit needs four qubits");
    }
    ReflectionCircuit c;
    c.n_inputs = 0;
    c.n_ancillae = total_qubits;
    c.ancilla_init.emplace(0, ket_plus());
    for (std::size_t q = 1; q < total_qubits; ++q) {
        c.ancilla_init.emplace(q, ket0());
    }
    c.layers.push_back({cnot_gate(0, 1)});
    c.layers.push_back({cnot_gate(0, 2), cnot_gate(1, 3)});
    return c;
}

// Best nekomata fidelity for a fixed target set: certificate fidelity when
// certification succeeds, otherwise the norm of the projection onto the
// marginal-eigenbasis branch subspace. Both branch components must clear
// the nonzero tolerance; a product-like projection is not a nekomata fit.
inline double nekomata_fit_fidelity(const DenseState& state,
                                    const std::vector<std::size_t>& targets) {
    if (auto cert = certify_nekomata(state, targets)) {
        return cert->reconstruction_fidelity;
    }
    std::vector<QubitState> mus, mups;
    for (auto t : targets) {
        const auto rho = reduced_density(state, {t});
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.entries);
        mus.push_back({es.eigenvectors()(0, 1), es.eigenvectors()(1, 1)});
        mups.push_back({es.eigenvectors()(0, 0), es.eigenvectors()(1, 0)});
    }
    DenseState p0 = state;
    DenseState p1 = state;
    for (std::size_t j = 0; j < targets.size(); ++j) {
        p0 = detail_neko::project_qubit(p0, targets[j], mus[j]);
        p1 = detail_neko::project_qubit(p1, targets[j], mups[j]);
    }
    const double m0 = p0.norm2();
    const double m1 = p1.norm2();
    if (m0 <= 1e-10 || m1 <= 1e-10) return 0.0;
    return std::sqrt(std::min(m0 + m1, 1.0));
}

struct NekoSearchRecord {
    std::uint64_t seed = 0;
    double best_fidelity = 0.0;
    bool certified = false;
};

struct NekoSearchReport {
    std::vector<NekoSearchRecord> records;
    double best_fidelity = 0.0;
    bool planted_included = false;
    double planted_fidelity = 0.0;
};

inline NekoSearchReport depth2_neko_search(std::size_t n_targets,
                                           std::size_t qubit_budget,
                                           std::size_t seeds,
                                           std::uint64_t seed0 = 1) {
    if (qubit_budget > sim_cap()) {
        throw std::invalid_argument("qubit budget exceeds the simulator cap");
    }
    if (n_targets < 2 || n_targets > qubit_budget) {
        throw std::invalid_argument("target count out of range");
    }
    NekoSearchReport report;

    // All target subsets of the budget (desk scale keeps this small).
    std::vector<std::vector<std::size_t>> subsets;
    std::vector<std::size_t> idx(n_targets);
    for (std::size_t j = 0; j < n_targets; ++j) idx[j] = j;
    while (true) {
        subsets.push_back(idx);
        int j = static_cast<int>(n_targets) - 1;
        while (j >= 0 &&
               idx[j] == qubit_budget - n_targets + static_cast<std::size_t>(j)) {
            --j;
        }
        if (j < 0) break;
        ++idx[j];
        for (std::size_t l = static_cast<std::size_t>(j) + 1; l < n_targets;
             ++l) {
            idx[l] = idx[l - 1] + 1;
        }
    }

    auto evaluate = [&](const ReflectionCircuit& c) {
        const DenseState s = run(c, std::vector<int>{});
        double best = 0.0;
        for (const auto& t : subsets) {
            best = std::max(best, nekomata_fit_fidelity(s, t));
        }
        return best;
    };

    if (n_targets == 4 && qubit_budget >= 4) {
        report.planted_included = true;
        report.planted_fidelity = evaluate(planted_cat4_circuit(qubit_budget));
        report.best_fidelity = report.planted_fidelity;
    }

    for (std::uint64_t s = 0; s < seeds; ++s) {
        GeneratorOptions opt;
        opt.n_inputs = 0;
        opt.n_ancillae = qubit_budget;
        opt.depth = 2;
        opt.max_gate_width = 3;
        opt.snap_probability = 0.4;
        const auto c = random_circuit(opt, seed0 + s);
        NekoSearchRecord rec;
        rec.seed = seed0 + s;
        rec.best_fidelity = evaluate(c);
        rec.certified = rec.best_fidelity >= 1.0 - kCertFidelityTol;
        report.best_fidelity = std::max(report.best_fidelity, rec.best_fidelity);
        report.records.push_back(rec);
    }
    return report;
}

inline void write_search_csv(const NekoSearchReport& rep, std::ostream& os) {
    os << "seed,best_fidelity\n";
    for (const auto& r : rep.records) {
        os << r.seed << ',' << r.best_fidelity << '\n';
    }
}

} // namespace qac
