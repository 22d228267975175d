#pragma once

// Linear-algebra engines for joint commutants, intertwiner spaces and
// bicommutants of matrix tuples. A space is returned as an orthonormal
// (Frobenius) basis; its dimension is the thresholded kernel rank of one
// stacked Sylvester-type operator.

#include <utility>
#include <vector>

#include "opal/tuples.hpp"

namespace opal {

struct OperatorSpace {
    int ambient_rows = 0;
    int ambient_cols = 0;
    std::vector<ComplexMatrix> basis; // pairwise Frobenius-orthonormal
    bool tolerance_warning = false;   // a singular value sat within 10x of the rank cutoff

    int dim() const noexcept { return static_cast<int>(basis.size()); }

    // Frobenius distance from m to its orthogonal projection onto the span.
    double span_residual(const ComplexMatrix& m) const {
        ComplexMatrix proj = ComplexMatrix::Zero(m.rows(), m.cols());
        for (const auto& b : basis) proj += frobenius_inner(b, m) * b;
        return (m - proj).norm();
    }
};

namespace detail {

inline ComplexMatrix unvec(const ComplexMatrix& col, int rows, int cols) {
    return Eigen::Map<const ComplexMatrix>(col.data(), rows, cols);
}

// Rows annihilating vec(A) exactly when A Y_l = X_l A and A Y_l* = X_l* A
// for every letter (column-major vec; vec(PAQ) = kron(Q^T, P) vec(A)).
inline ComplexMatrix intertwiner_operator(const MatrixTuple& x, const MatrixTuple& y) {
    const int dx = x.degree, dy = y.degree, n = dx * dy;
    const ComplexMatrix ix = ComplexMatrix::Identity(dx, dx);
    const ComplexMatrix iy = ComplexMatrix::Identity(dy, dy);
    ComplexMatrix k(2 * x.label_count * n, n);
    for (int l = 0; l < x.label_count; ++l) {
        const ComplexMatrix& xl = x.letters[l];
        const ComplexMatrix& yl = y.letters[l];
        k.block(2 * l * n, 0, n, n) = kron(yl.transpose(), ix) - kron(iy, xl);
        k.block((2 * l + 1) * n, 0, n, n) =
            kron(yl.conjugate(), ix) - kron(iy, xl.adjoint());
    }
    return k;
}

} // namespace detail

// Orthonormal basis of { A : A Y_l = X_l A and A Y_l* = X_l* A for all l }.
inline OperatorSpace intertwiner_basis(const MatrixTuple& x, const MatrixTuple& y,
                                       const Tolerances& tol = {}) {
    if (x.label_count != y.label_count)
        throw LabelMismatch("intertwiner_basis: tuples have different label counts");
    auto ker = detail::kernel_with_flag(detail::intertwiner_operator(x, y), tol,
                                        tuple_norm(x) + tuple_norm(y));
    OperatorSpace out;
    out.ambient_rows = x.degree;
    out.ambient_cols = y.degree;
    out.tolerance_warning = ker.borderline;
    out.basis.reserve(ker.basis.size());
    for (const auto& v : ker.basis) out.basis.push_back(detail::unvec(v, x.degree, y.degree));
    return out;
}

// Orthonormal basis of { A : A X_l = X_l A and A X_l* = X_l* A for all l }.
// The result is checked to be a unital *-closed space.
inline OperatorSpace commutant_basis(const MatrixTuple& x, const Tolerances& tol = {}) {
    OperatorSpace s = intertwiner_basis(x, x, tol);
    const double scale = 1e-8;
    const ComplexMatrix id = ComplexMatrix::Identity(x.degree, x.degree);
    if (s.span_residual(id) > scale * id.norm())
        throw InternalInconsistency("commutant_basis: identity escaped the computed span");
    for (const auto& b : s.basis)
        if (s.span_residual(b.adjoint()) > scale)
            throw InternalInconsistency("commutant_basis: span is not adjoint-closed");
    return s;
}

inline bool is_irreducible(const MatrixTuple& x, const Tolerances& tol = {}) {
    return commutant_basis(x, tol).dim() == 1;
}

// Commutant of the commutant: the algebra generated by the letters, their
// adjoints and the identity.
inline OperatorSpace bicommutant_basis(const MatrixTuple& x, const Tolerances& tol = {}) {
    OperatorSpace first = commutant_basis(x, tol);
    MatrixTuple as_tuple(x.degree, std::move(first.basis));
    OperatorSpace second = commutant_basis(as_tuple, tol);
    second.tolerance_warning = second.tolerance_warning || first.tolerance_warning;
    return second;
}

// Group of unitaries fixing a tuple, described as a conjugated product of
// unitary groups: conjugator* (oplus_j kron(V_j, I_{d_j})) conjugator with
// V_j ranging over the alpha_j x alpha_j unitaries.
struct StabilizerStructure {
    ComplexMatrix conjugator;
    std::vector<std::pair<int, int>> blocks; // (irreducible degree d_j, multiplicity alpha_j)

    int ambient_degree() const {
        int d = 0;
        for (auto [dj, aj] : blocks) d += dj * aj;
        return d;
    }

    // A Haar-random member of the described group.
    ComplexMatrix sample_member(Rng& rng) const {
        const int d = ambient_degree();
        ComplexMatrix core = ComplexMatrix::Zero(d, d);
        int off = 0;
        for (auto [dj, aj] : blocks) {
            ComplexMatrix vj = haar_unitary(aj, rng);
            core.block(off, off, dj * aj, dj * aj) =
                kron(vj, ComplexMatrix::Identity(dj, dj));
            off += dj * aj;
        }
        return conjugator.adjoint() * core * conjugator;
    }

    // Frobenius-orthogonal projection onto the commutant of the group:
    // in the conjugated frame, zero the off-diagonal blocks and average the
    // multiplicity copies within each diagonal block.
    ComplexMatrix project_commutant(const ComplexMatrix& m) const {
        const int d = ambient_degree();
        if (m.rows() != d || m.cols() != d)
            throw InvalidShape("project_commutant: size mismatch");
        ComplexMatrix f = conjugator * m * conjugator.adjoint();
        ComplexMatrix out = ComplexMatrix::Zero(d, d);
        int off = 0;
        for (auto [dj, aj] : blocks) {
            ComplexMatrix avg = ComplexMatrix::Zero(dj, dj);
            for (int a = 0; a < aj; ++a)
                avg += f.block(off + a * dj, off + a * dj, dj, dj);
            avg /= static_cast<double>(aj);
            out.block(off, off, dj * aj, dj * aj) =
                kron(ComplexMatrix::Identity(aj, aj), avg);
            off += dj * aj;
        }
        return conjugator.adjoint() * out * conjugator;
    }
};

} // namespace opal
