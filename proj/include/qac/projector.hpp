#pragma once

#include <memory>
#include <set>

#include "qac/statevector.hpp"

namespace qac {

inline constexpr double kActivationTol = 1e-9;
// Squared norms inside this band are reported as numerically ambiguous by the
// verification paths rather than decided.
inline constexpr double kAmbiguousLow = 1e-12;
inline constexpr double kAmbiguousHigh = 1e-6;

// Symbolic projector tree: separable rank-1 |theta><theta|_S, complement
// I - P, tensor products over disjoint qubit sets, and identity.
class ProjectorExpr {
  public:
    enum class Kind { Identity, SepRank1, Complement, Tensor };

    static ProjectorExpr identity(std::vector<std::size_t> qubits = {}) {
        ProjectorExpr p;
        p.kind_ = Kind::Identity;
        p.qubits_ = std::move(qubits);
        return p;
    }

    static ProjectorExpr sep_rank1(
        std::vector<std::pair<std::size_t, QubitState>> entries) {
        ProjectorExpr p;
        p.kind_ = Kind::SepRank1;
        for (auto& [q, s] : entries) {
            p.qubits_.push_back(q);
            p.states_.emplace(q, s);
        }
        return p;
    }

    static ProjectorExpr sep_rank1_single(std::size_t q, const QubitState& s) {
        return sep_rank1({{q, s}});
    }

    // |theta><theta| over the gate's full qubit set.
    static ProjectorExpr axis_of(const ReflectionGate& g) {
        ProjectorExpr p;
        p.kind_ = Kind::SepRank1;
        p.qubits_ = g.qubits;
        p.states_ = g.states;
        return p;
    }

    static ProjectorExpr complement(ProjectorExpr child) {
        ProjectorExpr p;
        p.kind_ = Kind::Complement;
        p.qubits_ = child.qubits_;
        p.children_.push_back(std::make_shared<ProjectorExpr>(std::move(child)));
        return p;
    }

    static ProjectorExpr tensor(std::vector<ProjectorExpr> children) {
        ProjectorExpr p;
        p.kind_ = Kind::Tensor;
        std::set<std::size_t> seen;
        for (auto& c : children) {
            for (auto q : c.qubits_) {
                if (!seen.insert(q).second) {
                    throw std::invalid_argument(
                        "tensor children overlap on qubit " + std::to_string(q));
                }
                p.qubits_.push_back(q);
            }
            p.children_.push_back(std::make_shared<ProjectorExpr>(std::move(c)));
        }
        return p;
    }

    Kind kind() const { return kind_; }
    const std::vector<std::size_t>& qubits() const { return qubits_; }
    const std::map<std::size_t, QubitState>& states() const { return states_; }

    const ProjectorExpr& child(std::size_t i = 0) const { return *children_.at(i); }
    std::size_t child_count() const { return children_.size(); }

    std::set<std::size_t> support() const {
        return {qubits_.begin(), qubits_.end()};
    }

    // Remaps qubit indices (used to evaluate on compacted subsystems).
    ProjectorExpr remapped(const std::map<std::size_t, std::size_t>& remap) const {
        ProjectorExpr p;
        p.kind_ = kind_;
        for (auto q : qubits_) p.qubits_.push_back(remap.at(q));
        for (const auto& [q, s] : states_) p.states_.emplace(remap.at(q), s);
        for (const auto& c : children_) {
            p.children_.push_back(
                std::make_shared<ProjectorExpr>(c->remapped(remap)));
        }
        return p;
    }

  private:
    Kind kind_ = Kind::Identity;
    std::vector<std::size_t> qubits_;
    std::map<std::size_t, QubitState> states_; // SepRank1 only
    std::vector<std::shared_ptr<ProjectorExpr>> children_;
};

// |theta><theta|_S |psi>: keep only the component along the separable axis.
inline DenseState apply_sep_rank1(const DenseState& state,
                                  const std::vector<std::size_t>& qubits,
                                  const std::map<std::size_t, QubitState>& states);

// Exact linear action of the projector tree; result is un-normalized.
inline DenseState apply_projector(const DenseState& state,
                                  const ProjectorExpr& proj) {
    switch (proj.kind()) {
        case ProjectorExpr::Kind::Identity:
            return state;
        case ProjectorExpr::Kind::SepRank1:
            return apply_sep_rank1(state, proj.qubits(), proj.states());
        case ProjectorExpr::Kind::Complement: {
            DenseState inner = apply_projector(state, proj.child());
            DenseState out = state;
            for (std::size_t i = 0; i < out.dim(); ++i) {
                out.amplitudes[i] -= inner.amplitudes[i];
            }
            out.normalized = false;
            return out;
        }
        case ProjectorExpr::Kind::Tensor: {
            DenseState out = state;
            for (std::size_t i = 0; i < proj.child_count(); ++i) {
                out = apply_projector(out, proj.child(i));
            }
            out.normalized = false;
            return out;
        }
    }
    throw std::logic_error("unreachable projector kind");
}

inline DenseState apply_sep_rank1(
    const DenseState& state, const std::vector<std::size_t>& qubits,
    const std::map<std::size_t, QubitState>& states) {
    for (auto q : qubits) {
        if (q >= state.n_qubits) {
            throw std::out_of_range("projector qubit out of range");
        }
    }
    std::vector<std::size_t> sorted(qubits.begin(), qubits.end());
    std::sort(sorted.begin(), sorted.end());
    detail::GateIndexer ix(sorted, state.n_qubits);
    ReflectionGate pseudo;
    pseudo.qubits = sorted;
    pseudo.states = states;
    const auto axis = detail::gate_axis_amplitudes(pseudo, sorted);

    DenseState out = DenseState::zero(state.n_qubits);
    out.normalized = false;
    std::vector<std::size_t> offsets(axis.size());
    for (std::size_t s = 0; s < axis.size(); ++s) {
        offsets[s] = ix.local_offset(s);
    }
    for (std::size_t r = 0; r < ix.residual_count(); ++r) {
        const std::size_t base = ix.expand_residual(r);
        Complex overlap{0.0, 0.0};
        for (std::size_t s = 0; s < axis.size(); ++s) {
            overlap += std::conj(axis[s]) * state.amplitudes[base + offsets[s]];
        }
        if (overlap == Complex{0.0, 0.0}) continue;
        for (std::size_t s = 0; s < axis.size(); ++s) {
            out.amplitudes[base + offsets[s]] = overlap * axis[s];
        }
    }
    return out;
}

// ||Pi . C(x)||^2 -- the quantity thresholded by the activation predicate.
inline double activation_norm2(const ReflectionCircuit& c,
                               const ProjectorExpr& proj,
                               const std::vector<int>& x) {
    return apply_projector(run(c, x), proj).norm2();
}

inline double activation_norm2(const ReflectionCircuit& c,
                               const ProjectorExpr& proj, std::size_t x_bits) {
    std::vector<int> x(c.n_inputs);
    for (std::size_t i = 0; i < c.n_inputs; ++i) x[i] = (x_bits >> i) & 1U;
    return activation_norm2(c, proj, x);
}

// f_{C,Pi}(x) = [Pi . C(x) != 0], decided at squared-norm tolerance `tol`.
inline int activation(const ReflectionCircuit& c, const ProjectorExpr& proj,
                      const std::vector<int>& x, double tol = kActivationTol) {
    if (tol <= 0) throw std::invalid_argument("activation tolerance must be > 0");
    return activation_norm2(c, proj, x) > tol ? 1 : 0;
}

inline int activation(const ReflectionCircuit& c, const ProjectorExpr& proj,
                      std::size_t x_bits, double tol = kActivationTol) {
    std::vector<int> x(c.n_inputs);
    for (std::size_t i = 0; i < c.n_inputs; ++i) x[i] = (x_bits >> i) & 1U;
    return activation(c, proj, x, tol);
}

inline bool in_ambiguous_band(double norm2) {
    return norm2 >= kAmbiguousLow && norm2 <= kAmbiguousHigh;
}

} // namespace qac
