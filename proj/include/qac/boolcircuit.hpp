#pragma once

#include <algorithm>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qac/boolfn.hpp"

namespace qac {

// Classical Boolean circuit AST: constants, literals (with negation), AND,
// OR. Size counts And/Or gates; depth counts And/Or alternation levels with
// literals and negations free.
class BoolCircuit {
  public:
    enum class Kind { Const, Literal, And, Or };

    static BoolCircuit constant(int bit) {
        BoolCircuit c;
        c.kind_ = Kind::Const;
        c.bit_ = bit ? 1 : 0;
        return c;
    }

    static BoolCircuit literal(std::size_t input, bool negated = false) {
        BoolCircuit c;
        c.kind_ = Kind::Literal;
        c.input_ = input;
        c.negated_ = negated;
        return c;
    }

    static BoolCircuit make_and(std::vector<BoolCircuit> children) {
        if (children.empty()) {
            throw std::invalid_argument("And requires children");
        }
        BoolCircuit c;
        c.kind_ = Kind::And;
        for (auto& ch : children) {
            c.children_.push_back(std::make_shared<BoolCircuit>(std::move(ch)));
        }
        return c;
    }

    static BoolCircuit make_or(std::vector<BoolCircuit> children) {
        if (children.empty()) {
            throw std::invalid_argument("Or requires children");
        }
        BoolCircuit c;
        c.kind_ = Kind::Or;
        for (auto& ch : children) {
            c.children_.push_back(std::make_shared<BoolCircuit>(std::move(ch)));
        }
        return c;
    }

    Kind kind() const { return kind_; }
    int const_bit() const { return bit_; }
    std::size_t input() const { return input_; }
    bool negated() const { return negated_; }
    std::size_t child_count() const { return children_.size(); }
    const BoolCircuit& child(std::size_t i) const { return *children_.at(i); }

    int eval(std::size_t x_bits) const {
        switch (kind_) {
            case Kind::Const:
                return bit_;
            case Kind::Literal: {
                const int v = (x_bits >> input_) & 1U;
                return negated_ ? 1 - v : v;
            }
            case Kind::And:
                for (const auto& c : children_) {
                    if (!c->eval(x_bits)) return 0;
                }
                return 1;
            case Kind::Or:
                for (const auto& c : children_) {
                    if (c->eval(x_bits)) return 1;
                }
                return 0;
        }
        return 0;
    }

    int eval(const std::vector<int>& x) const {
        std::size_t bits = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i]) bits |= std::size_t{1} << i;
        }
        return eval(bits);
    }

    // And/Or gate count.
    std::size_t size() const {
        std::size_t s = (kind_ == Kind::And || kind_ == Kind::Or) ? 1 : 0;
        for (const auto& c : children_) s += c->size();
        return s;
    }

    std::size_t node_count() const {
        std::size_t s = 1;
        for (const auto& c : children_) s += c->node_count();
        return s;
    }

    // Alternation depth: maximal number of And/Or blocks along a path, where
    // nested gates of the same kind merge into one block.
    std::size_t depth() const {
        if (kind_ == Kind::Const || kind_ == Kind::Literal) return 0;
        std::size_t best = 1;
        for (const auto& c : children_) {
            std::size_t d = c->depth();
            if (c->kind_ == Kind::And || c->kind_ == Kind::Or) {
                if (c->kind_ != kind_) d += 1;
            } else {
                d = 1;
            }
            best = std::max(best, d);
        }
        return best;
    }

    std::size_t max_input() const {
        std::size_t m = 0;
        if (kind_ == Kind::Literal) m = input_ + 1;
        for (const auto& c : children_) m = std::max(m, c->max_input());
        return m;
    }

  private:
    Kind kind_ = Kind::Const;
    int bit_ = 0;
    std::size_t input_ = 0;
    bool negated_ = false;
    std::vector<std::shared_ptr<BoolCircuit>> children_;
};

inline FuncTable truth_table(const BoolCircuit& bc, std::size_t arity) {
    if (bc.max_input() > arity) {
        throw std::invalid_argument("circuit reads beyond the declared arity");
    }
    FuncTable t = FuncTable::zeros(arity);
    for (std::size_t x = 0; x < t.size(); ++x) {
        t.values[x] = static_cast<double>(bc.eval(x));
    }
    return t;
}

// TRIBES(x) = OR_{i<=s} AND_{j<=w} x_{i,j}, the read-once DNF on s*w inputs.
inline BoolCircuit tribes(std::size_t s, std::size_t w) {
    if (s < 1 || w < 1) throw std::invalid_argument("tribes needs s,w >= 1");
    std::vector<BoolCircuit> terms;
    for (std::size_t i = 0; i < s; ++i) {
        std::vector<BoolCircuit> lits;
        for (std::size_t j = 0; j < w; ++j) {
            lits.push_back(BoolCircuit::literal(i * w + j));
        }
        terms.push_back(BoolCircuit::make_and(std::move(lits)));
    }
    return BoolCircuit::make_or(std::move(terms));
}

// Minimal prefix text format: "const b" | "lit i" | "nlit i" |
// "and k <children...>" | "or k <children...>".
inline void write_prefix(const BoolCircuit& bc, std::ostream& os) {
    switch (bc.kind()) {
        case BoolCircuit::Kind::Const:
            os << "const " << bc.const_bit();
            return;
        case BoolCircuit::Kind::Literal:
            os << (bc.negated() ? "nlit " : "lit ") << bc.input();
            return;
        case BoolCircuit::Kind::And:
        case BoolCircuit::Kind::Or:
            os << (bc.kind() == BoolCircuit::Kind::And ? "and " : "or ")
               << bc.child_count();
            for (std::size_t i = 0; i < bc.child_count(); ++i) {
                os << ' ';
                write_prefix(bc.child(i), os);
            }
            return;
    }
}

inline std::string to_prefix(const BoolCircuit& bc) {
    std::ostringstream os;
    write_prefix(bc, os);
    return os.str();
}

// True when the circuit is a DNF: an Or of terms, each term an And of
// literals (single literals, constants and a bare And also qualify).
inline bool is_term_of_literals(const BoolCircuit& bc) {
    if (bc.kind() == BoolCircuit::Kind::Literal) return true;
    if (bc.kind() != BoolCircuit::Kind::And) return false;
    for (std::size_t i = 0; i < bc.child_count(); ++i) {
        if (bc.child(i).kind() != BoolCircuit::Kind::Literal) return false;
    }
    return true;
}

inline bool is_dnf(const BoolCircuit& bc) {
    if (bc.kind() == BoolCircuit::Kind::Const) return true;
    if (is_term_of_literals(bc)) return true;
    if (bc.kind() != BoolCircuit::Kind::Or) return false;
    for (std::size_t i = 0; i < bc.child_count(); ++i) {
        if (!is_term_of_literals(bc.child(i))) return false;
    }
    return true;
}

// DIMACS-like DNF listing: one line per term, 1-based signed literals,
// 0-terminated. "c ..." header carries constants.
inline void write_dnf_dimacs(const BoolCircuit& bc, std::ostream& os) {
    if (!is_dnf(bc)) {
        throw std::invalid_argument("circuit is not in DNF form");
    }
    if (bc.kind() == BoolCircuit::Kind::Const) {
        os << "c constant " << bc.const_bit() << "\n";
        return;
    }
    auto write_term = [&os](const BoolCircuit& term) {
        if (term.kind() == BoolCircuit::Kind::Literal) {
            os << (term.negated() ? "-" : "") << term.input() + 1 << " 0\n";
            return;
        }
        for (std::size_t i = 0; i < term.child_count(); ++i) {
            const auto& lit = term.child(i);
            os << (lit.negated() ? "-" : "") << lit.input() + 1 << ' ';
        }
        os << "0\n";
    };
    if (bc.kind() != BoolCircuit::Kind::Or) {
        write_term(bc);
        return;
    }
    for (std::size_t i = 0; i < bc.child_count(); ++i) write_term(bc.child(i));
}

} // namespace qac
