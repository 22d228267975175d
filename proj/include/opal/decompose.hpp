#pragma once

// Prime decomposition of matrix tuples into irreducible summands, the derived
// relations (equivalence, disjointness, subordination) and the stabilizer
// description that falls out of a decomposition.
//
// Splitting strategy: a random Hermitian element of the commutant generically
// has eigenprojections that are minimal projections of a maximal abelian
// subalgebra, so restricting to its eigenspaces and recursing terminates;
// degenerate draws are retried against a global attempt budget.

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "opal/commutant.hpp"

namespace opal {

struct Factor {
    MatrixTuple irreducible;
    int multiplicity = 0;
};

struct Decomposition {
    ComplexMatrix conjugator; // act(conjugator, X) == canonical_form()
    std::vector<Factor> factors;

    int total_degree() const {
        int d = 0;
        for (const auto& f : factors) d += f.multiplicity * f.irreducible.degree;
        return d;
    }

    MatrixTuple canonical_form() const {
        if (factors.empty()) throw InvalidDecomposition("decomposition has no factors");
        MatrixTuple acc = times(factors[0].multiplicity, factors[0].irreducible);
        for (std::size_t j = 1; j < factors.size(); ++j)
            acc = oplus(acc, times(factors[j].multiplicity, factors[j].irreducible));
        return acc;
    }
};

// Conjugation-invariant sort key: traces of all words of length <= 3 in the
// letters and their adjoints, rounded to the fingerprint quantum.
struct Fingerprint {
    int degree = 0;
    std::vector<cxd> moments;

    friend bool operator==(const Fingerprint& a, const Fingerprint& b) {
        return a.degree == b.degree && a.moments.size() == b.moments.size() &&
               std::equal(a.moments.begin(), a.moments.end(), b.moments.begin(),
                          [](cxd x, cxd y) { return x.real() == y.real() && x.imag() == y.imag(); });
    }
    friend bool operator<(const Fingerprint& a, const Fingerprint& b) {
        if (a.degree != b.degree) return a.degree < b.degree;
        if (a.moments.size() != b.moments.size()) return a.moments.size() < b.moments.size();
        for (std::size_t i = 0; i < a.moments.size(); ++i) {
            if (a.moments[i].real() != b.moments[i].real())
                return a.moments[i].real() < b.moments[i].real();
            if (a.moments[i].imag() != b.moments[i].imag())
                return a.moments[i].imag() < b.moments[i].imag();
        }
        return false;
    }
};

inline Fingerprint fingerprint(const MatrixTuple& x, const Tolerances& tol = {}) {
    const int nsym = 2 * x.label_count;
    std::vector<ComplexMatrix> sym;
    sym.reserve(nsym);
    for (int l = 0; l < x.label_count; ++l) sym.push_back(x.letters[l]);
    for (int l = 0; l < x.label_count; ++l) sym.push_back(x.letters[l].adjoint());

    const double q = tol.fingerprint_round;
    auto rounded = [q](cxd v) {
        return cxd(q * static_cast<double>(std::llround(v.real() / q)),
                   q * static_cast<double>(std::llround(v.imag() / q)));
    };

    Fingerprint fp;
    fp.degree = x.degree;
    for (int s = 0; s < nsym; ++s) fp.moments.push_back(rounded(sym[s].trace()));
    for (int s = 0; s < nsym; ++s)
        for (int t = 0; t < nsym; ++t) fp.moments.push_back(rounded((sym[s] * sym[t]).trace()));
    for (int s = 0; s < nsym; ++s)
        for (int t = 0; t < nsym; ++t) {
            const ComplexMatrix st = sym[s] * sym[t];
            for (int u = 0; u < nsym; ++u) fp.moments.push_back(rounded((st * sym[u]).trace()));
        }
    return fp;
}

namespace detail {

inline ComplexMatrix polar_unitary(const ComplexMatrix& a) {
    Eigen::JacobiSVD<ComplexMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

// Equivalence test for tuples already known to be irreducible. Returns a
// witness with act(w, a) == b, or nullopt.
inline std::optional<ComplexMatrix> irreducible_witness(const MatrixTuple& a, const MatrixTuple& b,
                                                        const Tolerances& tol) {
    if (a.degree != b.degree) return std::nullopt;
    OperatorSpace hom = intertwiner_basis(a, b, tol);
    if (hom.dim() != 1) return std::nullopt;
    // the lone intertwiner is a scalar times a unitary (Schur); its polar
    // factor u satisfies u b u* = ... i.e. u B_l = A_l u, so act(u*, a) == b
    return polar_unitary(hom.basis[0]).adjoint().eval();
}

// Deterministic entry-list key for ordering fingerprint-colliding factors:
// conjugate into the eigenbasis of a fixed Hermitian combination of the
// letters (phase-fixed columns), then quantize all entries.
inline std::vector<long long> canonical_entry_key(const MatrixTuple& t, const Tolerances& tol) {
    const int d = t.degree;
    ComplexMatrix h = ComplexMatrix::Zero(d, d);
    for (int l = 0; l < t.label_count; ++l) {
        const double w = static_cast<double>(l + 1);
        h += w * (t.letters[l] + t.letters[l].adjoint());
        h += (w + t.label_count) * cxd(0, 1) * (t.letters[l] - t.letters[l].adjoint());
    }
    HermitianEig eig = hermitian_eig(h, tol);
    ComplexMatrix v = eig.eigenvectors;
    for (int c = 0; c < d; ++c) {
        int imax = 0;
        for (int r = 1; r < d; ++r)
            if (std::abs(v(r, c)) > std::abs(v(imax, c)) + 1e-12) imax = r;
        const double m = std::abs(v(imax, c));
        if (m > 0) v.col(c) *= std::conj(v(imax, c)) / m;
    }
    const double q = tol.fingerprint_round;
    std::vector<long long> key;
    key.reserve(static_cast<std::size_t>(t.label_count) * d * d * 2);
    for (const auto& letter : t.letters) {
        const ComplexMatrix r = v.adjoint() * letter * v;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                key.push_back(std::llround(r(i, j).real() / q));
                key.push_back(std::llround(r(i, j).imag() / q));
            }
    }
    return key;
}

inline ComplexMatrix random_hermitian_in(const OperatorSpace& s, Rng& rng) {
    ComplexMatrix h = ComplexMatrix::Zero(s.ambient_rows, s.ambient_cols);
    for (const auto& b : s.basis) {
        h += rng.gaussian() * 0.5 * (b + b.adjoint());
        h += rng.gaussian() * cxd(0, 0.5) * (b - b.adjoint());
    }
    return h;
}

struct RawPieces {
    ComplexMatrix conj;              // act(conj, x) == oplus of pieces, in order
    std::vector<MatrixTuple> pieces; // each irreducible
};

inline RawPieces split_to_irreducibles(const MatrixTuple& x, Rng& rng, const Tolerances& tol,
                                       int& budget) {
    const int d = x.degree;
    OperatorSpace comm = commutant_basis(x, tol);
    if (comm.dim() == 1)
        return {ComplexMatrix::Identity(d, d), {x}};

    const double scale = 1.0 + tuple_norm(x);
    while (budget > 0) {
        --budget;
        HermitianEig eig = hermitian_eig(random_hermitian_in(comm, rng), tol);

        // contiguous eigenvalue clusters separated by at least cluster_gap
        std::vector<std::pair<int, int>> clusters; // (start, length)
        int start = 0;
        for (int i = 1; i <= d; ++i) {
            if (i == d || eig.eigenvalues(i) - eig.eigenvalues(i - 1) >= tol.cluster_gap) {
                clusters.emplace_back(start, i - start);
                start = i;
            }
        }
        if (clusters.size() < 2) continue; // draw landed on a near-scalar element

        bool clean = true;
        std::vector<RawPieces> sub;
        for (auto [c0, len] : clusters) {
            const ComplexMatrix w = eig.eigenvectors.middleCols(c0, len);
            std::vector<ComplexMatrix> ls;
            ls.reserve(x.label_count);
            for (const auto& letter : x.letters) ls.push_back(w.adjoint() * letter * w);
            MatrixTuple restricted(len, std::move(ls));
            for (int l = 0; l < x.label_count && clean; ++l)
                if ((x.letters[l] * w - w * restricted.letters[l]).norm() > 1e-6 * scale)
                    clean = false; // cluster boundary cut through an eigenspace
            if (!clean) break;
            sub.push_back(split_to_irreducibles(restricted, rng, tol, budget));
        }
        if (!clean) continue;

        RawPieces out;
        ComplexMatrix inner = ComplexMatrix::Zero(d, d);
        int off = 0;
        for (std::size_t c = 0; c < clusters.size(); ++c) {
            const int len = clusters[c].second;
            inner.block(off, off, len, len) = sub[c].conj;
            off += len;
            for (auto& p : sub[c].pieces) out.pieces.push_back(std::move(p));
        }
        out.conj = inner * eig.eigenvectors.adjoint();
        return out;
    }
    throw DecompositionFailed("splitting budget exhausted before reaching irreducibles");
}

} // namespace detail

inline Decomposition decompose(const MatrixTuple& x, Rng& rng, const Tolerances& tol = {},
                               int max_recursion = -1) {
    int budget = max_recursion > 0 ? max_recursion : 2 * x.degree;
    const double bound = tol.eq_abs * (1.0 + tuple_norm(x));
    while (true) {
        detail::RawPieces raw = detail::split_to_irreducibles(x, rng, tol, budget);

        // merge unitarily equivalent pieces into multiplicity classes
        struct Class {
            MatrixTuple rep;
            std::vector<int> members;              // piece indices, input order
            std::vector<ComplexMatrix> witnesses;  // act(w, piece) == rep
            Fingerprint fp;
            std::vector<long long> entry_key;
        };
        std::vector<Class> classes;
        for (std::size_t i = 0; i < raw.pieces.size(); ++i) {
            bool placed = false;
            for (auto& c : classes) {
                auto w = detail::irreducible_witness(raw.pieces[i], c.rep, tol);
                if (w) {
                    c.members.push_back(static_cast<int>(i));
                    c.witnesses.push_back(std::move(*w));
                    placed = true;
                    break;
                }
            }
            if (!placed) {
                Class c;
                c.rep = raw.pieces[i];
                c.members.push_back(static_cast<int>(i));
                c.witnesses.push_back(ComplexMatrix::Identity(c.rep.degree, c.rep.degree));
                c.fp = fingerprint(c.rep, tol);
                c.entry_key = detail::canonical_entry_key(c.rep, tol);
                classes.push_back(std::move(c));
            }
        }
        // canonical order; classes are pairwise inequivalent here, so ties in
        // the trace moments fall through to the entry-list key
        std::sort(classes.begin(), classes.end(), [](const Class& a, const Class& b) {
            if (!(a.fp == b.fp)) return a.fp < b.fp;
            return a.entry_key < b.entry_key;
        });

        std::vector<int> sizes;
        for (const auto& p : raw.pieces) sizes.push_back(p.degree);
        std::vector<int> perm;
        ComplexMatrix align = ComplexMatrix::Zero(x.degree, x.degree);
        for (const auto& c : classes)
            for (std::size_t k = 0; k < c.members.size(); ++k) perm.push_back(c.members[k]);
        {
            int off = 0;
            for (std::size_t i = 0; i < raw.pieces.size(); ++i) {
                const int len = raw.pieces[i].degree;
                // witness of the class this piece belongs to
                for (const auto& c : classes) {
                    auto it = std::find(c.members.begin(), c.members.end(), static_cast<int>(i));
                    if (it != c.members.end()) {
                        align.block(off, off, len, len) = c.witnesses[it - c.members.begin()];
                        break;
                    }
                }
                off += len;
            }
        }

        Decomposition dec;
        dec.conjugator = block_permutation(sizes, perm) * align * raw.conj;
        for (auto& c : classes)
            dec.factors.push_back({std::move(c.rep), static_cast<int>(c.members.size())});

        if (tuple_distance(act(dec.conjugator, x, tol), dec.canonical_form()) <= bound)
            return dec;
        if (budget <= 0)
            throw DecompositionFailed("reconstruction residual stayed above tolerance");
    }
}

struct EquivalenceResult {
    bool equivalent = false;
    std::optional<ComplexMatrix> witness; // act(witness, X) == Y when equivalent

    explicit operator bool() const noexcept { return equivalent; }
};

namespace detail {

// relations take no Rng: decompositions inside them use a fixed stream
inline Rng relation_rng() { return Rng(0x5eed0f2026081201ull); }

struct ClassMatch {
    bool matched = false;
    std::vector<int> to;                  // x-factor j -> y-factor index
    std::vector<ComplexMatrix> witnesses; // per x-factor, act(w, Aj) == B_to[j]
};

inline ClassMatch match_factors(const Decomposition& dx, const Decomposition& dy,
                                const Tolerances& tol, bool need_equal_multiplicity) {
    ClassMatch m;
    std::vector<bool> used(dy.factors.size(), false);
    for (const auto& fx : dx.factors) {
        bool found = false;
        for (std::size_t k = 0; k < dy.factors.size(); ++k) {
            if (used[k]) continue;
            auto w = irreducible_witness(fx.irreducible, dy.factors[k].irreducible, tol);
            if (!w) continue;
            const bool mult_ok = need_equal_multiplicity
                                     ? fx.multiplicity == dy.factors[k].multiplicity
                                     : fx.multiplicity <= dy.factors[k].multiplicity;
            if (!mult_ok) return {};
            used[k] = true;
            m.to.push_back(static_cast<int>(k));
            m.witnesses.push_back(std::move(*w));
            found = true;
            break;
        }
        if (!found) return {};
    }
    m.matched = true;
    return m;
}

} // namespace detail

inline EquivalenceResult are_equivalent(const MatrixTuple& x, const MatrixTuple& y,
                                        const Tolerances& tol = {}) {
    if (x.label_count != y.label_count)
        throw LabelMismatch("are_equivalent: tuples have different label counts");
    if (x.degree != y.degree) return {};

    Rng rng = detail::relation_rng();
    Decomposition dx = decompose(x, rng, tol);
    Decomposition dy = decompose(y, rng, tol);
    if (dx.factors.size() != dy.factors.size()) return {};
    detail::ClassMatch m = detail::match_factors(dx, dy, tol, /*need_equal_multiplicity=*/true);
    if (!m.matched) return {};

    // act(C_x, x) == oplus_j a_j . A_j ; align each group to B_{to[j]}, permute
    // groups into y's factor order, then undo y's conjugator.
    ComplexMatrix align = ComplexMatrix::Zero(x.degree, x.degree);
    std::vector<int> group_sizes;
    int off = 0;
    for (std::size_t j = 0; j < dx.factors.size(); ++j) {
        const int dj = dx.factors[j].irreducible.degree;
        const int aj = dx.factors[j].multiplicity;
        align.block(off, off, dj * aj, dj * aj) =
            kron(ComplexMatrix::Identity(aj, aj), m.witnesses[j]);
        group_sizes.push_back(dj * aj);
        off += dj * aj;
    }
    std::vector<int> perm(dx.factors.size());
    for (std::size_t j = 0; j < dx.factors.size(); ++j) perm[m.to[j]] = static_cast<int>(j);

    EquivalenceResult out;
    out.equivalent = true;
    out.witness = (dy.conjugator.adjoint() * block_permutation(group_sizes, perm) * align *
                   dx.conjugator)
                      .eval();
    return out;
}

inline bool are_disjoint(const MatrixTuple& x, const MatrixTuple& y, const Tolerances& tol = {}) {
    if (x.label_count != y.label_count)
        throw LabelMismatch("are_disjoint: tuples have different label counts");
    const bool no_intertwiner = intertwiner_basis(x, y, tol).dim() == 0;

    Rng rng = detail::relation_rng();
    Decomposition dx = decompose(x, rng, tol);
    Decomposition dy = decompose(y, rng, tol);
    bool shared = false;
    for (const auto& fx : dx.factors) {
        for (const auto& fy : dy.factors)
            if (detail::irreducible_witness(fx.irreducible, fy.irreducible, tol)) {
                shared = true;
                break;
            }
        if (shared) break;
    }
    if (no_intertwiner == shared)
        throw InternalInconsistency(
            "are_disjoint: intertwiner rank and decomposition matching disagree");
    return no_intertwiner;
}

inline bool is_subordinate(const MatrixTuple& x, const MatrixTuple& y, const Tolerances& tol = {}) {
    if (x.label_count != y.label_count)
        throw LabelMismatch("is_subordinate: tuples have different label counts");
    if (x.degree > y.degree) return false;
    Rng rng = detail::relation_rng();
    Decomposition dx = decompose(x, rng, tol);
    Decomposition dy = decompose(y, rng, tol);
    return detail::match_factors(dx, dy, tol, /*need_equal_multiplicity=*/false).matched;
}

// Conjugated product-of-unitary-groups description of the unitaries fixing X,
// read off a decomposition of X.
inline StabilizerStructure stabilizer_structure(const MatrixTuple& x, const Decomposition& dec,
                                                const Tolerances& tol = {}) {
    if (dec.factors.empty() || dec.total_degree() != x.degree)
        throw InvalidDecomposition("stabilizer_structure: degree bookkeeping is off");
    if (dec.conjugator.rows() != x.degree || dec.conjugator.cols() != x.degree ||
        !is_unitary(dec.conjugator, tol.eq_abs))
        throw InvalidDecomposition("stabilizer_structure: conjugator is not unitary of degree d");
    for (const auto& f : dec.factors)
        if (f.multiplicity < 1 || !is_irreducible(f.irreducible, tol))
            throw InvalidDecomposition("stabilizer_structure: factor is not irreducible");
    for (std::size_t j = 0; j < dec.factors.size(); ++j)
        for (std::size_t k = j + 1; k < dec.factors.size(); ++k)
            if (intertwiner_basis(dec.factors[j].irreducible, dec.factors[k].irreducible, tol)
                    .dim() != 0)
                throw InvalidDecomposition("stabilizer_structure: factors are not disjoint");
    if (tuple_distance(act(dec.conjugator, x, tol), dec.canonical_form()) >
        tol.eq_abs * (1.0 + tuple_norm(x)))
        throw InvalidDecomposition("stabilizer_structure: decomposition does not reconstruct X");

    StabilizerStructure s;
    s.conjugator = dec.conjugator;
    for (const auto& f : dec.factors) s.blocks.emplace_back(f.irreducible.degree, f.multiplicity);
    return s;
}

} // namespace opal
