#pragma once

// Finite families of same-size complex matrices ("tuples") and the block
// operations on them: letterwise direct sum, unitary conjugation, n-fold
// repetition, and a max-Frobenius distance.

#include <algorithm>
#include <vector>

#include "opal/linalg.hpp"

namespace opal {

struct MatrixTuple {
    int degree = 0;                     // common size of every letter
    std::vector<ComplexMatrix> letters; // ordered, each degree x degree
    int label_count = 0;                // == letters.size()

    MatrixTuple() = default;
    MatrixTuple(int d, std::vector<ComplexMatrix> ls)
        : degree(d), letters(std::move(ls)), label_count(static_cast<int>(letters.size())) {
        if (degree < 1) throw InvalidShape("tuple degree must be >= 1");
        if (letters.empty()) throw InvalidShape("tuple needs at least one letter");
        for (const auto& l : letters)
            if (l.rows() != degree || l.cols() != degree)
                throw InvalidShape("tuple letters must all be degree x degree");
    }
};

// Every letter has operator norm <= 1 + eq_abs.
inline bool is_normalized(const MatrixTuple& x, const Tolerances& tol = {}) {
    return std::all_of(x.letters.begin(), x.letters.end(), [&](const ComplexMatrix& l) {
        return operator_norm(l) <= 1.0 + tol.eq_abs;
    });
}

inline MatrixTuple oplus(const MatrixTuple& x, const MatrixTuple& y) {
    if (x.label_count != y.label_count)
        throw LabelMismatch("oplus: tuples have different label counts");
    std::vector<ComplexMatrix> ls;
    ls.reserve(x.letters.size());
    for (int l = 0; l < x.label_count; ++l) ls.push_back(direct_sum(x.letters[l], y.letters[l]));
    return {x.degree + y.degree, std::move(ls)};
}

inline MatrixTuple act(const ComplexMatrix& u, const MatrixTuple& x, const Tolerances& tol = {}) {
    if (u.rows() != x.degree || u.cols() != x.degree)
        throw InvalidShape("act: conjugator size does not match tuple degree");
    if (!is_unitary(u, tol.eq_abs)) throw NotUnitary("act: conjugator is not unitary");
    std::vector<ComplexMatrix> ls;
    ls.reserve(x.letters.size());
    for (const auto& l : x.letters) ls.push_back(u * l * u.adjoint());
    return {x.degree, std::move(ls)};
}

inline MatrixTuple times(int n, const MatrixTuple& x) {
    if (n < 1) throw InvalidShape("times: multiplicity must be >= 1");
    MatrixTuple out = x;
    for (int i = 1; i < n; ++i) out = oplus(out, x);
    return out;
}

// max over letters of the Frobenius distance
inline double tuple_distance(const MatrixTuple& x, const MatrixTuple& y) {
    if (x.degree != y.degree || x.label_count != y.label_count)
        throw InvalidShape("tuple_distance: tuples have different shapes");
    double d = 0.0;
    for (int l = 0; l < x.label_count; ++l)
        d = std::max(d, (x.letters[l] - y.letters[l]).norm());
    return d;
}

// max over letters of the operator norm; the scale used in residual bounds
inline double tuple_norm(const MatrixTuple& x) {
    double n = 0.0;
    for (const auto& l : x.letters) n = std::max(n, operator_norm(l));
    return n;
}

} // namespace opal
