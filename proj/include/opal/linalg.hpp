#pragma once

// Dense complex matrix kernels: the numeric substrate for everything else.
// Matrices are Eigen::MatrixXcd; all rank/equality decisions are tolerance
// gated and the tolerances travel explicitly.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "opal/errors.hpp"

namespace opal {

using ComplexMatrix = Eigen::MatrixXcd;
using cxd = std::complex<double>;

struct Tolerances {
    double rank_rel = 1e-9;          // relative singular-value cutoff
    double eq_abs = 1e-8;            // absolute matrix-equality tolerance (Frobenius)
    double fingerprint_round = 1e-6; // rounding quantum for canonical sort keys
    double cluster_gap = 1e-7;       // absolute eigenvalue clustering gap

    void check() const {
        if (rank_rel <= 0 || eq_abs <= 0 || fingerprint_round <= 0 || cluster_gap <= 0)
            throw ValidationError("tolerances must be strictly positive");
        if (rank_rel >= 1) throw ValidationError("rank_rel must be < 1");
    }
};

// Deterministic RNG. Gaussians are derived from raw mt19937_64 bits rather
// than std::*_distribution, whose output is implementation-defined; identical
// seeds must yield identical draw sequences everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return state_(); }

    // uniform on [0,1), 53-bit resolution
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double gaussian() {
        // Box-Muller; u1 in (0,1] so the log is finite
        double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    cxd complex_gaussian() {
        double re = gaussian();
        double im = gaussian();
        return {re, im};
    }

    // Independent deterministic substream keyed by (seed, tag).
    Rng split(std::uint64_t tag) const {
        std::uint64_t z = seed_ + 0x9E3779B97F4A7C15ull * (tag + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return Rng(z ^ (z >> 31));
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 state_;
};

inline double frobenius_norm(const ComplexMatrix& m) { return m.norm(); }

inline cxd frobenius_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
    return (a.adjoint() * b).trace();
}

// Largest singular value.
inline double operator_norm(const ComplexMatrix& m) {
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
    return m.jacobiSvd().singularValues()(0);
}

inline bool is_unitary(const ComplexMatrix& u, double eq_abs) {
    if (u.rows() != u.cols()) return false;
    return (u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())).norm() <= eq_abs;
}

inline ComplexMatrix direct_sum(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols())
        throw InvalidShape("direct_sum: inputs must be square");
    const auto da = a.rows(), db = b.rows();
    ComplexMatrix out = ComplexMatrix::Zero(da + db, da + db);
    out.topLeftCorner(da, da) = a;
    out.bottomRightCorner(db, db) = b;
    return out;
}

// U A U* for unitary U.
inline ComplexMatrix conj_action(const ComplexMatrix& u, const ComplexMatrix& a,
                                 const Tolerances& tol = {}) {
    if (u.rows() != u.cols() || a.rows() != a.cols() || u.rows() != a.rows())
        throw InvalidShape("conj_action: size mismatch");
    if (!is_unitary(u, tol.eq_abs)) throw NotUnitary("conj_action: conjugator is not unitary");
    return u * a * u.adjoint();
}

// Permutation exchanging the two summands of a block direct sum:
// swap_unitary(p,q) . (A oplus B) = B oplus A for A of size p, B of size q.
inline ComplexMatrix swap_unitary(int p, int q) {
    if (p < 1 || q < 1) throw InvalidShape("swap_unitary: block sizes must be >= 1");
    ComplexMatrix u = ComplexMatrix::Zero(p + q, p + q);
    for (int j = 0; j < p; ++j) u(q + j, j) = 1.0;
    for (int j = 0; j < q; ++j) u(j, p + j) = 1.0;
    return u;
}

// Permutation matrix reordering the blocks of a direct sum with the given
// sizes, assembled literally as a product of adjacent-block swaps.
// act: conj by the result maps oplus_i A_i to oplus_i A_{perm[i]}.
inline ComplexMatrix block_permutation(const std::vector<int>& sizes, const std::vector<int>& perm) {
    const int n = static_cast<int>(sizes.size());
    if (static_cast<int>(perm.size()) != n)
        throw InvalidShape("block_permutation: permutation length mismatch");
    int total = 0;
    for (int s : sizes) total += s;
    ComplexMatrix acc = ComplexMatrix::Identity(total, total);
    // selection sort by adjacent transpositions on a working copy
    std::vector<int> cur(n);
    for (int i = 0; i < n; ++i) cur[i] = i;          // cur[pos] = original block index
    std::vector<int> want(perm);                     // want[pos] = original index demanded
    for (int pos = 0; pos < n; ++pos) {
        int where = pos;
        while (cur[where] != want[pos]) ++where;
        for (int k = where; k > pos; --k) {
            // swap blocks at k-1 and k
            int pre = 0;
            for (int i = 0; i < k - 1; ++i) pre += sizes[cur[i]];
            const int a = sizes[cur[k - 1]], b = sizes[cur[k]];
            ComplexMatrix step = ComplexMatrix::Identity(total, total);
            step.block(pre, pre, a + b, a + b) = swap_unitary(a, b);
            acc = step * acc;
            std::swap(cur[k - 1], cur[k]);
        }
    }
    return acc;
}

// Unitary Haar sample: QR of a complex Ginibre matrix with the diagonal
// phase fix Q <- Q diag(r_ii/|r_ii|).
inline ComplexMatrix haar_unitary(int n, Rng& rng) {
    if (n < 1) throw InvalidShape("haar_unitary: n must be >= 1");
    ComplexMatrix z(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) z(i, j) = rng.complex_gaussian();
    Eigen::HouseholderQR<ComplexMatrix> qr(z);
    ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
    ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < n; ++i) {
        const double m = std::abs(r(i, i));
        const cxd phase = m > 0 ? r(i, i) / m : cxd(1.0, 0.0);
        q.col(i) *= phase;
    }
    return q;
}

namespace detail {

struct KernelResult {
    std::vector<ComplexMatrix> basis; // orthonormal column vectors (n x 1)
    bool borderline = false;          // some singular value within 10x of the cutoff
};

// `scale` anchors the rank cutoff when the matrix itself may be a pure
// residual (e.g. intertwiner constraints of two nearly identical tuples,
// where sigma_max is just noise and a relative cutoff keeps every direction).
// Works on the Gram matrix: our systems are tall and exactly singular with a
// large spectral gap, so squaring the spectrum is harmless and the hermitian
// eigensolver is far more dependable on repeated singular values than SVD.
inline KernelResult kernel_with_flag(const ComplexMatrix& m, const Tolerances& tol,
                                     double scale = 0.0) {
    const auto n = m.cols();
    KernelResult out;
    if (n == 0) return out;
    const ComplexMatrix gram = m.adjoint() * m;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gram);
    if (es.info() != Eigen::Success)
        throw InternalInconsistency("kernel: eigensolver did not converge");
    const auto& ev = es.eigenvalues(); // ascending
    const double smax = std::sqrt(std::max(ev(n - 1), 0.0));
    const double anchor = std::max(smax, scale);
    // squaring cannot resolve singular values below ~sqrt(n * eps) * anchor;
    // exact-kernel noise lands there, so the cutoff must not dip below it
    const double noise_rel =
        2.0 * std::sqrt(static_cast<double>(n) * std::numeric_limits<double>::epsilon());
    const double cut = std::max(tol.rank_rel, noise_rel) * anchor;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sigma = std::sqrt(std::max(ev(i), 0.0));
        if (anchor > 0 && sigma > cut) ++rank;
        if (anchor > 0 && sigma > cut && sigma < cut * 10) out.borderline = true;
    }
    for (Eigen::Index i = 0; i < n - rank; ++i) out.basis.push_back(es.eigenvectors().col(i));
    return out;
}

} // namespace detail

// Orthonormal basis of the numerical kernel; singular values below
// rank_rel * sigma_max count as zero.
inline std::vector<ComplexMatrix> nullspace_basis(const ComplexMatrix& m,
                                                  const Tolerances& tol = {}) {
    return detail::kernel_with_flag(m, tol).basis;
}

struct HermitianEig {
    Eigen::VectorXd eigenvalues;  // ascending
    ComplexMatrix eigenvectors;   // unitary, columns match eigenvalues
};

inline HermitianEig hermitian_eig(const ComplexMatrix& h, const Tolerances& tol = {}) {
    if (h.rows() != h.cols()) throw InvalidShape("hermitian_eig: matrix must be square");
    if ((h - h.adjoint()).norm() > tol.eq_abs)
        throw NotHermitian("hermitian_eig: matrix is not hermitian");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(((h + h.adjoint()) / 2.0).eval());
    if (es.info() != Eigen::Success)
        throw InternalInconsistency("hermitian_eig: eigensolver did not converge");
    return {es.eigenvalues(), es.eigenvectors()};
}

// Standard Kronecker product (blocks a_ij * B).
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

} // namespace opal
