#pragma once

#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <vector>

namespace qac {

// Real-valued function table over {0,1}^n. Holds Boolean 0/1 tables as well
// as probability-valued tables f_C : {0,1}^n -> [0,1]. Index bit i <-> x_i.
struct FuncTable {
    std::size_t n = 0;
    std::vector<double> values;

    static FuncTable zeros(std::size_t n) {
        FuncTable t;
        t.n = n;
        t.values.assign(std::size_t{1} << n, 0.0);
        return t;
    }

    std::size_t size() const { return values.size(); }

    double at(std::size_t x) const { return values[x]; }

    bool consistent() const { return values.size() == (std::size_t{1} << n); }

    // Mean of f(x)^2 (the Parseval right-hand side).
    double mean_square() const {
        double acc = 0.0;
        for (double v : values) acc += v * v;
        return acc / static_cast<double>(size());
    }

    double l2_norm() const { return std::sqrt(mean_square()); }

    // 0/1 table rescaled to +-1 via x -> 1 - 2x.
    FuncTable to_pm1() const {
        FuncTable t = *this;
        for (auto& v : t.values) v = 1.0 - 2.0 * v;
        return t;
    }
};

inline FuncTable operator-(const FuncTable& a, const FuncTable& b) {
    if (a.n != b.n) throw std::invalid_argument("table arity mismatch");
    FuncTable out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] -= b.values[i];
    return out;
}

// Fourier coefficients f_hat(S) indexed by the subset bitmask S.
struct FourierSpectrum {
    std::size_t n = 0;
    std::vector<double> coeffs;

    double at(std::size_t mask) const { return coeffs[mask]; }

    double sum_squares() const {
        double acc = 0.0;
        for (double c : coeffs) acc += c * c;
        return acc;
    }
};

// Walsh-Hadamard transform with the {0,1}-input character convention:
// coeffs[S] = E_x[f(x) * (-1)^{sum_{i in S} x_i}]. O(n 2^n).
inline FourierSpectrum fwht(const FuncTable& table) {
    if (!table.consistent()) throw std::invalid_argument("bad table size");
    FourierSpectrum sp;
    sp.n = table.n;
    sp.coeffs = table.values;
    const std::size_t size = sp.coeffs.size();
    for (std::size_t half = 1; half < size; half <<= 1) {
        for (std::size_t start = 0; start < size; start += half << 1) {
            for (std::size_t i = start; i < start + half; ++i) {
                const double lo = sp.coeffs[i];
                const double hi = sp.coeffs[i + half];
                sp.coeffs[i] = lo + hi;
                sp.coeffs[i + half] = lo - hi;
            }
        }
    }
    const double scale = 1.0 / static_cast<double>(size);
    for (auto& c : sp.coeffs) c *= scale;
    return sp;
}

// Inverse transform: f(x) = sum_S coeffs[S] * chi_S(x).
inline FuncTable inverse_fwht(const FourierSpectrum& sp) {
    FuncTable t;
    t.n = sp.n;
    t.values = sp.coeffs;
    const std::size_t size = t.values.size();
    for (std::size_t half = 1; half < size; half <<= 1) {
        for (std::size_t start = 0; start < size; start += half << 1) {
            for (std::size_t i = start; i < start + half; ++i) {
                const double lo = t.values[i];
                const double hi = t.values[i + half];
                t.values[i] = lo + hi;
                t.values[i + half] = lo - hi;
            }
        }
    }
    return t;
}

// Inf[f] = sum_S |S| f_hat(S)^2.
inline double total_influence(const FourierSpectrum& sp) {
    double acc = 0.0;
    for (std::size_t mask = 0; mask < sp.coeffs.size(); ++mask) {
        acc += static_cast<double>(__builtin_popcountll(mask)) *
               sp.coeffs[mask] * sp.coeffs[mask];
    }
    return acc;
}

// Influence of coordinate i: E_x[(|f(x) - f(x^{xor i})| / 2)^2].
inline double coordinate_influence(const FuncTable& t, std::size_t i) {
    const std::size_t bit = std::size_t{1} << i;
    double acc = 0.0;
    for (std::size_t x = 0; x < t.size(); ++x) {
        const double d = (t.values[x] - t.values[x ^ bit]) / 2.0;
        acc += d * d;
    }
    return acc / static_cast<double>(t.size());
}

inline double total_influence_combinatorial(const FuncTable& t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < t.n; ++i) acc += coordinate_influence(t, i);
    return acc;
}

// W^{>=k}[f] = sum_{|S| >= k} f_hat(S)^2.
inline double tail_weight(const FourierSpectrum& sp, std::size_t k) {
    if (k > sp.n) {
        if (k == sp.n + 1) return 0.0;
        throw std::invalid_argument("tail level out of range");
    }
    double acc = 0.0;
    for (std::size_t mask = 0; mask < sp.coeffs.size(); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcountll(mask)) >= k) {
            acc += sp.coeffs[mask] * sp.coeffs[mask];
        }
    }
    return acc;
}

// W^{=k}[f].
inline double level_weight(const FourierSpectrum& sp, std::size_t k) {
    double acc = 0.0;
    for (std::size_t mask = 0; mask < sp.coeffs.size(); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcountll(mask)) == k) {
            acc += sp.coeffs[mask] * sp.coeffs[mask];
        }
    }
    return acc;
}

// <f, chi_[n]> = f_hat([n]).
inline double parity_correlation(const FourierSpectrum& sp) {
    return sp.coeffs[sp.coeffs.size() - 1];
}

// Restriction with live set J and a fixed assignment z off J.
struct RandomValuedRestriction {
    std::set<std::size_t> live;           // J
    std::map<std::size_t, int> fixed;     // z on [n] \ J

    void check(std::size_t n) const {
        for (auto j : live) {
            if (j >= n) throw std::out_of_range("live index out of range");
            if (fixed.count(j)) {
                throw std::invalid_argument("coordinate both live and fixed");
            }
        }
        for (const auto& [i, b] : fixed) {
            if (i >= n) throw std::out_of_range("fixed index out of range");
            if (b != 0 && b != 1) {
                throw std::invalid_argument("fixed value must be a bit");
            }
        }
        if (live.size() + fixed.size() != n) {
            throw std::invalid_argument("restriction does not partition [n]");
        }
    }
};

// f|_{J,z}: same arity as f; coordinates off J read from z.
inline FuncTable restrict_table(const FuncTable& t,
                                const RandomValuedRestriction& r) {
    r.check(t.n);
    std::size_t fixed_mask = 0;
    std::size_t fixed_bits = 0;
    for (const auto& [i, b] : r.fixed) {
        fixed_mask |= std::size_t{1} << i;
        if (b) fixed_bits |= std::size_t{1} << i;
    }
    FuncTable out = t;
    for (std::size_t x = 0; x < t.size(); ++x) {
        out.values[x] = t.values[(x & ~fixed_mask) | fixed_bits];
    }
    return out;
}

inline void write_spectrum_csv(const FourierSpectrum& sp, std::ostream& os) {
    os << "mask,weight,coefficient\n";
    for (std::size_t mask = 0; mask < sp.coeffs.size(); ++mask) {
        os << mask << ',' << __builtin_popcountll(mask) << ','
           << sp.coeffs[mask] << '\n';
    }
}

inline void write_tail_csv(const FourierSpectrum& sp, std::ostream& os) {
    os << "k,tail_weight\n";
    for (std::size_t k = 0; k <= sp.n; ++k) {
        os << k << ',' << tail_weight(sp, k) << '\n';
    }
}

} // namespace qac
