#pragma once

// Seeded property suites exercising the whole library; shared between the
// command-line selfcheck and the acceptance harness. Every suite is a pure
// function of (seed, caps), so a fixed seed reproduces bit-identical reports.

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "opal/funcalg.hpp"
#include "opal/json_io.hpp"
#include "opal/towerspec.hpp"

namespace opal::selfcheck {

struct Caps {
    int max_degree = 12;   // composite degree ceiling for generated instances
    int mc_samples = 2048; // sample count for the Monte-Carlo stability runs
};

struct SuiteResult {
    std::string name;
    bool passed = true;
    int checks = 0;
    std::vector<std::string> failures; // first few failing check messages
    std::string note;                  // e.g. reason a suite was skipped
};

namespace detail {

class Checker {
  public:
    explicit Checker(SuiteResult& r) : r_(&r) {}
    void operator()(bool ok, const std::string& msg) {
        ++r_->checks;
        if (!ok) {
            r_->passed = false;
            if (r_->failures.size() < 8) r_->failures.push_back(msg);
        }
    }

  private:
    SuiteResult* r_;
};

inline MatrixTuple random_tuple(int d, int label_count, Rng& rng) {
    std::vector<ComplexMatrix> ls;
    for (int l = 0; l < label_count; ++l) {
        ComplexMatrix g(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) g(i, j) = rng.complex_gaussian();
        ls.push_back(g / (2.0 * operator_norm(g)));
    }
    return MatrixTuple(d, std::move(ls));
}

inline MatrixTuple random_irreducible(int d, int label_count, Rng& rng, const Tolerances& tol) {
    for (int attempt = 0; attempt < 64; ++attempt) {
        MatrixTuple t = random_tuple(d, label_count, rng);
        if (is_irreducible(t, tol)) return t;
    }
    throw InternalInconsistency("random irreducible generation kept failing");
}

// pairwise-disjoint irreducibles at the requested degrees
inline std::vector<MatrixTuple> random_disjoint_family(const std::vector<int>& degrees,
                                                       int label_count, Rng& rng,
                                                       const Tolerances& tol) {
    std::vector<MatrixTuple> out;
    for (int d : degrees) {
        for (int attempt = 0;; ++attempt) {
            if (attempt >= 64)
                throw InternalInconsistency("disjoint family generation kept failing");
            MatrixTuple t = random_irreducible(d, label_count, rng, tol);
            bool ok = true;
            for (const auto& prev : out)
                if (intertwiner_basis(prev, t, tol).dim() != 0) ok = false;
            if (ok) {
                out.push_back(std::move(t));
                break;
            }
        }
    }
    return out;
}

struct Composite {
    MatrixTuple x;            // act(u, oplus_j mult_j . irreducible_j)
    ComplexMatrix u;
    std::vector<Factor> truth;
};

inline std::vector<std::pair<int, int>> random_shape(Rng& rng, int degree_cap) {
    const int dmax = std::min(4, degree_cap);
    for (int attempt = 0; attempt < 200; ++attempt) {
        const int k = 1 + static_cast<int>(rng.next_u64() % 3);
        std::vector<std::pair<int, int>> shape;
        int total = 0;
        for (int j = 0; j < k; ++j) {
            const int d = 1 + static_cast<int>(rng.next_u64() % dmax);
            const int a = 1 + static_cast<int>(rng.next_u64() % 3);
            shape.emplace_back(d, a);
            total += d * a;
        }
        if (total <= degree_cap) return shape;
    }
    return {{1, 1}};
}

inline Composite random_composite(Rng& rng, int degree_cap, int label_count,
                                  const Tolerances& tol) {
    const auto shape = random_shape(rng, degree_cap);
    std::vector<int> degrees;
    for (const auto& [d, a] : shape) degrees.push_back(d);
    std::vector<MatrixTuple> family = random_disjoint_family(degrees, label_count, rng, tol);

    Composite c;
    MatrixTuple core = times(shape[0].second, family[0]);
    for (std::size_t j = 1; j < family.size(); ++j)
        core = oplus(core, times(shape[j].second, family[j]));
    c.u = haar_unitary(core.degree, rng);
    c.x = act(c.u, core, tol);
    for (std::size_t j = 0; j < family.size(); ++j)
        c.truth.push_back({family[j], shape[j].second});
    return c;
}

inline std::vector<std::pair<int, int>> shape_of(const std::vector<Factor>& fs) {
    std::vector<std::pair<int, int>> s;
    for (const auto& f : fs) s.emplace_back(f.irreducible.degree, f.multiplicity);
    std::sort(s.begin(), s.end());
    return s;
}

// one-to-one matching of factor lists by irreducible equivalence, requiring
// equal multiplicities; both lists are pairwise inequivalent internally
inline bool factors_match(const std::vector<Factor>& a, const std::vector<Factor>& b,
                          const Tolerances& tol) {
    if (a.size() != b.size()) return false;
    std::vector<bool> used(b.size(), false);
    for (const auto& fa : a) {
        bool placed = false;
        for (std::size_t k = 0; k < b.size() && !placed; ++k) {
            if (used[k] || fa.multiplicity != b[k].multiplicity) continue;
            if (opal::detail::irreducible_witness(fa.irreducible, b[k].irreducible, tol)) {
                used[k] = true;
                placed = true;
            }
        }
        if (!placed) return false;
    }
    return true;
}

} // namespace detail

inline SuiteResult suite_decomposition_round_trip(std::uint64_t seed, const Caps& caps,
                                                  const Tolerances& tol) {
    SuiteResult r{"01-decomposition-round-trip"};
    detail::Checker check(r);
    if (caps.max_degree < 1) {
        r.note = "skipped: degree cap below 1";
        return r;
    }
    Rng rng = Rng(seed).split(1);
    const int cap = std::min(12, caps.max_degree);
    for (int i = 0; i < 200; ++i) {
        const int label_count = 1 + (i % 3);
        detail::Composite c = detail::random_composite(rng, cap, label_count, tol);
        const std::string tag = "instance " + std::to_string(i);

        Rng stream_a = rng.split(2 * i);
        Decomposition dec = decompose(c.x, stream_a, tol);
        check(detail::shape_of(dec.factors) == detail::shape_of(c.truth),
              tag + ": recovered (degree, multiplicity) multiset differs");
        check(detail::factors_match(dec.factors, c.truth, tol),
              tag + ": recovered factors are not equivalent to the constructed ones");
        const double residual = tuple_distance(act(dec.conjugator, c.x, tol), dec.canonical_form());
        check(residual < 1e-8 * (1.0 + tuple_norm(c.x)), tag + ": reconstruction residual too big");

        Rng stream_b = rng.split(2 * i + 1);
        Decomposition dec2 = decompose(c.x, stream_b, tol);
        check(detail::factors_match(dec.factors, dec2.factors, tol),
              tag + ": two RNG streams disagree on the factor multiset");
    }
    return r;
}

inline SuiteResult suite_commutant_dimension(std::uint64_t seed, const Caps& caps,
                                             const Tolerances& tol) {
    SuiteResult r{"02-commutant-dimension"};
    detail::Checker check(r);
    if (caps.max_degree < 1) {
        r.note = "skipped: degree cap below 1";
        return r;
    }
    Rng rng = Rng(seed).split(2);
    const int cap = std::min(12, caps.max_degree);
    for (int i = 0; i < 100; ++i) {
        detail::Composite c = detail::random_composite(rng, cap, 1 + (i % 2), tol);
        const std::string tag = "instance " + std::to_string(i);
        int expected = 0;
        for (const auto& f : c.truth) expected += f.multiplicity * f.multiplicity;
        check(commutant_basis(c.x, tol).dim() == expected,
              tag + ": commutant dimension != sum of squared multiplicities");

        Rng dec_rng = rng.split(1000 + i);
        StabilizerStructure stab = stabilizer_structure(c.x, decompose(c.x, dec_rng, tol), tol);
        bool fixed = true;
        for (int s = 0; s < 20; ++s)
            if (tuple_distance(act(stab.sample_member(rng), c.x, tol), c.x) > 1e-8) fixed = false;
        check(fixed, tag + ": sampled stabilizer member moved the tuple");
    }
    return r;
}

inline SuiteResult suite_cancellation(std::uint64_t seed, const Caps& caps,
                                      const Tolerances& tol) {
    SuiteResult r{"03-cancellation"};
    detail::Checker check(r);
    if (caps.max_degree < 1) {
        r.note = "skipped: degree cap below 1";
        return r;
    }
    Rng rng = Rng(seed).split(3);
    const int cap = std::max(1, std::min(4, caps.max_degree));
    for (int i = 0; i < 50; ++i) {
        const std::string tag = "triple " + std::to_string(i);
        const int label_count = 1 + (i % 3);
        detail::Composite s = detail::random_composite(rng, cap, label_count, tol);
        detail::Composite z = detail::random_composite(rng, cap, label_count, tol);
        // X and Y are the same core dressed by different unitaries, so
        // Z oplus X == Z oplus Y holds by construction
        MatrixTuple core = s.x;
        MatrixTuple x = act(haar_unitary(core.degree, rng), core, tol);
        MatrixTuple y = act(haar_unitary(core.degree, rng), core, tol);
        check(static_cast<bool>(are_equivalent(oplus(z.x, x), oplus(z.x, y), tol)),
              tag + ": padded pair not recognized as equivalent");
        check(static_cast<bool>(are_equivalent(x, y, tol)),
              tag + ": cancellation conclusion failed");
    }
    for (int i = 0; i < 50; ++i) {
        const std::string tag = "control " + std::to_string(i);
        const int label_count = 1 + (i % 3);
        const int d = std::min(2, cap);
        auto fam = detail::random_disjoint_family({d, d}, label_count, rng, tol);
        detail::Composite z = detail::random_composite(rng, cap, label_count, tol);
        check(!are_equivalent(fam[0], fam[1], tol).equivalent,
              tag + ": disjoint equal-degree pair reported equivalent");
        check(!are_equivalent(oplus(z.x, fam[0]), oplus(z.x, fam[1]), tol).equivalent,
              tag + ": disjoint pair reported equivalent after padding");
    }
    return r;
}

inline SuiteResult suite_disjointness_additivity(std::uint64_t seed, const Caps& caps,
                                                 const Tolerances& tol) {
    SuiteResult r{"04-disjointness-additivity"};
    detail::Checker check(r);
    if (caps.max_degree < 1) {
        r.note = "skipped: degree cap below 1";
        return r;
    }
    Rng rng = Rng(seed).split(4);
    const int dmax = std::max(1, std::min(3, caps.max_degree));
    for (int i = 0; i < 100; ++i) {
        const std::string tag = "additivity " + std::to_string(i);
        const int label_count = 1 + (i % 2);
        auto deg = [&rng, dmax] { return 1 + static_cast<int>(rng.next_u64() % dmax); };
        auto fam = detail::random_disjoint_family({deg(), deg(), deg()}, label_count, rng, tol);
        MatrixTuple z = act(haar_unitary(fam[0].degree, rng), fam[0], tol);
        const MatrixTuple& x = fam[1];
        const MatrixTuple& y = fam[2];
        check(are_disjoint(z, x, tol) && are_disjoint(z, y, tol),
              tag + ": constructed premises do not hold");
        check(are_disjoint(z, oplus(x, y), tol), tag + ": additivity conclusion failed");
    }
    for (int i = 0; i < 100; ++i) {
        const std::string tag = "pairwise " + std::to_string(i);
        const int label_count = 1 + (i % 2);
        auto pool = detail::random_disjoint_family(
            {1 + static_cast<int>(rng.next_u64() % dmax), 1 + static_cast<int>(rng.next_u64() % dmax),
             1 + static_cast<int>(rng.next_u64() % dmax)},
            label_count, rng, tol);
        auto pick = [&](int count) {
            std::vector<MatrixTuple> out;
            for (int j = 0; j < count; ++j) {
                const MatrixTuple& base = pool[rng.next_u64() % pool.size()];
                out.push_back(act(haar_unitary(base.degree, rng), base, tol));
            }
            return out;
        };
        auto ts = pick(1 + static_cast<int>(rng.next_u64() % 3));
        auto ss = pick(1 + static_cast<int>(rng.next_u64() % 3));
        MatrixTuple tsum = ts[0];
        for (std::size_t j = 1; j < ts.size(); ++j) tsum = oplus(tsum, ts[j]);
        MatrixTuple ssum = ss[0];
        for (std::size_t j = 1; j < ss.size(); ++j) ssum = oplus(ssum, ss[j]);
        bool pairwise = true;
        for (const auto& t : ts)
            for (const auto& s : ss)
                if (!are_disjoint(t, s, tol)) pairwise = false;
        check(are_disjoint(tsum, ssum, tol) == pairwise,
              tag + ": sum disjointness differs from pairwise disjointness");
    }
    return r;
}

inline SuiteResult suite_twirl(std::uint64_t seed, const Caps& caps, const Tolerances& tol) {
    SuiteResult r{"05-twirl"};
    detail::Checker check(r);
    if (caps.max_degree < 1) {
        r.note = "skipped: degree cap below 1";
        return r;
    }
    Rng rng = Rng(seed).split(5);
    const int cap = std::max(1, std::min(6, caps.max_degree));
    for (int i = 0; i < 5; ++i) {
        const std::string tag = "instance " + std::to_string(i);
        detail::Composite c = detail::random_composite(rng, cap, 2, tol);
        const int d = c.x.degree;
        Rng dec_rng = rng.split(100 + i);
        StabilizerStructure stab = stabilizer_structure(c.x, decompose(c.x, dec_rng, tol), tol);

        // equivariant callback: every sample contributes the same value
        ComplexMatrix raw(d, d);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) raw(a, b) = rng.complex_gaussian();
        const ComplexMatrix fixed = stab.project_commutant(raw);
        for (int K : {1, 7, 64}) {
            Rng tr = rng.split(200 + 10 * i + K);
            ComplexMatrix v = twirl(
                c.x, [&fixed](const ComplexMatrix& u) { return (u * fixed * u.adjoint()).eval(); },
                K, tr, stab, tol);
            check(operator_norm(v - fixed) < 1e-10,
                  tag + ": equivariant input not reproduced at K=" + std::to_string(K));
        }

        // generic raw-value callback: a fixed word in the conjugated letters
        auto word = [&c](const ComplexMatrix& u) {
            const ComplexMatrix t0 = u * c.x.letters[0] * u.adjoint();
            const ComplexMatrix t1 = u * c.x.letters[1 % c.x.label_count] * u.adjoint();
            return (0.5 * t0 * t1.adjoint() + 0.25 * (t0 + t0.adjoint())).eval();
        };
        Rng tw = rng.split(300 + i);
        ComplexMatrix v = twirl(c.x, word, 256, tw, stab, tol);
        bool invariant = true;
        for (int s = 0; s < 20; ++s) {
            const ComplexMatrix m = stab.sample_member(rng);
            if ((m * v * m.adjoint() - v).norm() > 1e-10) invariant = false;
        }
        check(invariant, tag + ": twirled value moved under sampled stabilizer elements");

        Rng run_a = rng.split(400 + i), run_b = rng.split(500 + i);
        const ComplexMatrix v1 = twirl(c.x, word, caps.mc_samples, run_a, stab, tol);
        const ComplexMatrix v2 = twirl(c.x, word, caps.mc_samples, run_b, stab, tol);
        check(operator_norm(v1 - v2) < 0.1, tag + ": independent Monte-Carlo runs disagree");
    }
    return r;
}

namespace detail {

struct RandomTower {
    SampledTower tower;
    std::vector<std::string> ids; // registry ids in order
};

inline RandomTower random_tower(Rng& rng, const Tolerances& tol, int n_points) {
    const std::vector<int> degrees{1, 2, 2, 3};
    auto fam = random_disjoint_family(degrees, 2, rng, tol);
    std::vector<std::pair<std::string, MatrixTuple>> registry;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < fam.size(); ++i) {
        std::string id = "r" + std::to_string(i + 1);
        ids.push_back(id);
        registry.emplace_back(std::move(id), fam[i]);
    }
    std::vector<SamplePoint> points;
    // singleton points first so the stored sample realizes every class
    for (std::size_t i = 0; i < ids.size(); ++i)
        points.push_back({"s" + std::to_string(i + 1), haar_unitary(degrees[i], rng), {ids[i]}});
    for (int p = 0; p < n_points; ++p) {
        std::vector<std::string> content;
        const int pieces = 1 + static_cast<int>(rng.next_u64() % 3);
        int deg = 0;
        for (int j = 0; j < pieces; ++j) {
            const std::size_t pick = rng.next_u64() % ids.size();
            content.push_back(ids[pick]);
            deg += degrees[pick];
        }
        points.push_back({"p" + std::to_string(p + 1), haar_unitary(deg, rng), content});
    }
    return {SampledTower(std::move(registry), std::move(points), tol), ids};
}

inline TowerFunction random_function(const SampledTower& t, Rng& rng) {
    TowerFunction f;
    for (const auto& [id, rep] : t.registry()) {
        ComplexMatrix v(rep.degree, rep.degree);
        for (int i = 0; i < rep.degree; ++i)
            for (int j = 0; j < rep.degree; ++j) v(i, j) = rng.complex_gaussian();
        f.values[id] = v / (1.0 + operator_norm(v));
    }
    return f;
}

} // namespace detail

inline SuiteResult suite_function_algebra(std::uint64_t seed, const Caps& caps,
                                          const Tolerances& tol) {
    SuiteResult r{"06-function-algebra"};
    detail::Checker check(r);
    if (caps.max_degree < 3) {
        r.note = "skipped: needs degree cap >= 3";
        return r;
    }
    Rng rng = Rng(seed).split(6);

    for (int i = 0; i < 50; ++i) {
        const std::string tag = "norm " + std::to_string(i);
        detail::RandomTower t = detail::random_tower(rng, tol, 4);
        TowerFunction f = detail::random_function(t.tower, rng);
        double over_points = 0.0;
        for (const auto& pt : t.tower.points())
            over_points = std::max(over_points,
                                   operator_norm(evaluate(t.tower, f, pt.id, tol)));
        check(std::abs(over_points - sup_norm(t.tower, f)) < 1e-10,
              tag + ": point supremum differs from registry supremum");
    }

    {
        // layout invariance: permuting the summands while composing the
        // conjugator with the matching block permutation leaves values alone
        detail::RandomTower t = detail::random_tower(rng, tol, 1);
        TowerFunction f = detail::random_function(t.tower, rng);
        const auto& reg = t.tower.registry();
        std::vector<std::vector<int>> contents;
        const int m = static_cast<int>(reg.size());
        for (int a = 0; a < m; ++a) {
            contents.push_back({a});
            for (int b = 0; b < m; ++b) {
                contents.push_back({a, b});
                for (int c = 0; c < m; ++c) contents.push_back({a, b, c});
            }
        }
        for (const auto& content : contents) {
            std::vector<ComplexMatrix> vals;
            std::vector<int> sizes;
            int deg = 0;
            for (int idx : content) {
                vals.push_back(f.values.at(reg[idx].first));
                sizes.push_back(reg[idx].second.degree);
                deg += reg[idx].second.degree;
            }
            ComplexMatrix canon = vals[0];
            for (std::size_t j = 1; j < vals.size(); ++j) canon = direct_sum(canon, vals[j]);
            const ComplexMatrix conj = haar_unitary(deg, rng);
            const ComplexMatrix reference = conj * canon * conj.adjoint();

            std::vector<int> order(content.size());
            for (std::size_t j = 0; j < order.size(); ++j) order[j] = static_cast<int>(j);
            std::sort(order.begin(), order.end());
            do {
                ComplexMatrix permuted = vals[order[0]];
                std::vector<int> perm_sizes{sizes[order[0]]};
                for (std::size_t j = 1; j < order.size(); ++j) {
                    permuted = direct_sum(permuted, vals[order[j]]);
                    perm_sizes.push_back(sizes[order[j]]);
                }
                std::vector<int> inverse(order.size());
                for (std::size_t j = 0; j < order.size(); ++j) inverse[order[j]] = static_cast<int>(j);
                const ComplexMatrix pi = block_permutation(perm_sizes, inverse);
                const ComplexMatrix re_expressed = (conj * pi) * permuted * (conj * pi).adjoint();
                check((re_expressed - reference).norm() < 1e-8,
                      "layout: permuted presentation changed the evaluated value");
            } while (std::next_permutation(order.begin(), order.end()));
        }
    }

    for (int i = 0; i < 100; ++i) {
        const int mode = i % 3;
        const std::string tag = "separate " + std::to_string(i) + " case " + std::to_string(mode);
        auto fam = detail::random_disjoint_family({2, 2, 1}, 2, rng, tol);
        std::vector<std::pair<std::string, MatrixTuple>> registry{
            {"a", fam[0]}, {"b", fam[1]}, {"c", fam[2]}};
        std::vector<SamplePoint> points;
        if (mode == 0) {
            points.push_back({"p", haar_unitary(2, rng), {"a"}});
            points.push_back({"q", haar_unitary(2, rng), {"b"}});
        } else if (mode == 1) {
            points.push_back({"p", haar_unitary(6, rng), {"a", "a", "b"}});
            points.push_back({"q", haar_unitary(6, rng), {"a", "b", "b"}});
        } else {
            const ComplexMatrix base = haar_unitary(4, rng);
            points.push_back({"p", base, {"a", "b"}});
            points.push_back({"q", (base * haar_unitary(4, rng)).eval(), {"a", "b"}});
        }
        SampledTower tower(std::move(registry), std::move(points), tol);
        TowerFunction f = separate(tower, "p", "q", rng, tol);
        check(operator_norm(evaluate(tower, f, "p", tol) - evaluate(tower, f, "q", tol)) >
                  10 * tol.eq_abs,
              tag + ": separation gap too small");
    }
    return r;
}

inline SuiteResult suite_generation(std::uint64_t seed, const Caps& caps, const Tolerances& tol) {
    SuiteResult r{"07-generation"};
    detail::Checker check(r);
    if (caps.max_degree < 2) {
        r.note = "skipped: needs degree cap >= 2";
        return r;
    }
    Rng rng = Rng(seed).split(7);
    const int dmax = std::min(6, caps.max_degree);
    for (int i = 0; i < 50; ++i) {
        const int d = 2 + (i % (dmax - 1));
        MatrixTuple t = detail::random_irreducible(d, 1 + (i % 3), rng, tol);
        check(generates_fully(t, tol),
              "irreducible " + std::to_string(i) + " does not generate the full algebra");
    }
    for (int i = 0; i < 10; ++i) {
        const int d = 2 + (i % (dmax - 1));
        std::vector<ComplexMatrix> ls;
        for (int l = 0; l < 1 + (i % 3); ++l) {
            ComplexMatrix m = ComplexMatrix::Zero(d, d);
            for (int a = 0; a < d; ++a) m(a, a) = rng.complex_gaussian();
            ls.push_back(m);
        }
        check(!generates_fully(MatrixTuple(d, std::move(ls)), tol),
              "diagonal control " + std::to_string(i) + " reported as generating");
    }
    for (int i = 0; i < 100; ++i) {
        const std::string tag = "projection " + std::to_string(i);
        const int d = 1 + (i % std::min(4, dmax));
        MatrixTuple x = detail::random_irreducible(d, 2, rng, tol);
        MatrixTuple y = (i % 2 == 0) ? detail::random_irreducible(d, 2, rng, tol)
                                     : act(haar_unitary(d, rng), x, tol);
        try {
            check(separating_projection_exists(x, y, tol) == are_disjoint(x, y, tol),
                  tag + ": projection criterion disagrees with disjointness");
        } catch (const Error& e) {
            check(false, tag + ": " + e.what());
        }
    }
    return r;
}

inline SuiteResult suite_tower_algorithms(std::uint64_t seed, const Caps&, const Tolerances&) {
    SuiteResult r{"08-tower-algorithms"};
    detail::Checker check(r);
    (void)seed;

    TowerPresentation clo = build_example_clo(6, 2);
    check(diagnostics_clean(validate(clo)), "shell builder output fails validation");
    Classification cc = classify(clo);
    check(cc.verdict == Verdict::Singular, "shell builder not classified Singular");
    check(cc.vanishing == std::set<std::string>{"theta"},
          "shell builder vanishing classes != {theta}");
    check(height(clo) == 6, "shell builder height != 6");
    check(closedness_test(clo).first, "shell builder failed the closedness test");

    TowerPresentation non = build_non_one(6, 2);
    check(diagnostics_clean(validate(non)), "collapse builder output fails validation");
    check(classify(non).verdict == Verdict::Singular, "collapse builder not Singular");
    auto [ok, violations] = closedness_test(non);
    check(!ok, "collapse builder unexpectedly passed the closedness test");
    bool names_theta = !violations.empty();
    for (const auto& v : violations)
        if (!v.limit || !v.limit->count("theta")) names_theta = false;
    check(names_theta, "collapse builder violations do not name theta");
    for (int n = 2; n <= 7; ++n) {
        std::set<std::string> expect{"theta"};
        for (const auto& c : non.classes)
            if (c.degree >= n) expect.insert(c.id);
        check(tail_subtower(non, n) == expect,
              "collapse builder tail at " + std::to_string(n) + " differs from the closed form");
    }

    TowerPresentation flat;
    for (int d = 1; d <= 5; ++d)
        flat.classes.push_back(
            {"q" + std::to_string(d), d, ClassKind::Sequence, {}, false});
    check(diagnostics_clean(validate(flat)), "flag-free presentation fails validation");
    Classification fc = classify(flat);
    check(fc.verdict == Verdict::Regular, "flag-free presentation not Regular");
    check(fc.vanishing.empty(), "flag-free presentation has nonempty vanishing set");
    for (const auto& [cap, witness] : prop_solid_check(flat))
        check(witness && *witness == cap + 1,
              "flag-free witness at " + std::to_string(cap) + " is not " + std::to_string(cap + 1));

    TowerPresentation chain;
    chain.classes.push_back({"a", 1, ClassKind::Singleton, {}, false});
    chain.classes.push_back({"b", 2, ClassKind::Sequence, {Multiset{{"a", 2}}}, false});
    chain.classes.push_back({"c", 3, ClassKind::Sequence, {}, false});
    chain.classes.push_back({"d", 4, ClassKind::Sequence, {Multiset{{"b", 2}}}, false});
    const std::set<std::string> all{"a", "b", "c", "d"};
    check(tail_subtower(chain, 1) == all, "chain tail at 1 differs from hand fixpoint");
    check(tail_subtower(chain, 2) == all, "chain tail at 2 differs from hand fixpoint");
    check(tail_subtower(chain, 3) == all, "chain tail at 3 differs from hand fixpoint");
    check(tail_subtower(chain, 4) == std::set<std::string>{"a", "b", "d"},
          "chain tail at 4 differs from hand fixpoint");
    check(tail_subtower(chain, 5).empty(), "chain tail at 5 is not empty");

    // hand fixpoint for the shell builder truncated at degree 4
    TowerPresentation clo4 = build_example_clo(4, 2);
    check(tail_subtower(clo4, 3) == std::set<std::string>{"theta", "ir(2,4)", "ir(3,4)", "ir(3,5)",
                                                          "ir(4,5)", "ir(4,6)"},
          "shell builder tail at 3 differs from hand fixpoint");

    // closure-operator laws for the generator
    auto s1 = generated_subtower(chain, {"d"});
    check(generated_subtower(chain, s1) == s1, "generated subtower is not idempotent");
    check(s1.count("d") == 1, "generated subtower is not extensive");
    check(s1 == std::set<std::string>{"a", "b", "d"}, "generated subtower fixpoint differs");
    return r;
}

inline std::vector<SuiteResult> run_all(std::uint64_t seed, const Caps& caps,
                                        const Tolerances& tol, std::ostream* progress) {
    std::vector<SuiteResult> out;
    auto run = [&](SuiteResult (*suite)(std::uint64_t, const Caps&, const Tolerances&)) {
        SuiteResult r = suite(seed, caps, tol);
        if (progress)
            *progress << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.checks
                      << " checks)" << (r.note.empty() ? "" : " [" + r.note + "]") << "\n";
        out.push_back(std::move(r));
    };
    run(&suite_decomposition_round_trip);
    run(&suite_commutant_dimension);
    run(&suite_cancellation);
    run(&suite_disjointness_additivity);
    run(&suite_twirl);
    run(&suite_function_algebra);
    run(&suite_generation);
    run(&suite_tower_algorithms);
    return out;
}

inline bool all_passed(const std::vector<SuiteResult>& rs) {
    for (const auto& r : rs)
        if (!r.passed) return false;
    return true;
}

inline json suites_to_json(const std::vector<SuiteResult>& rs) {
    json suites = json::array();
    for (const auto& r : rs) {
        json j{{"name", r.name}, {"passed", r.passed}, {"checks", r.checks}};
        if (!r.failures.empty()) j["failures"] = r.failures;
        if (!r.note.empty()) j["note"] = r.note;
        suites.push_back(std::move(j));
    }
    return json{{"suites", std::move(suites)}, {"all_passed", all_passed(rs)}};
}

// Deterministic composite emitter: a tuple file enriched with the
// construction's ground truth, for external round-trip checks.
inline json emit_composite(std::uint64_t seed, const Tolerances& tol) {
    Rng rng(seed);
    detail::Composite c = detail::random_composite(rng, 12, 2, tol);
    json out = tuple_to_json(c.x);
    json factors = json::array();
    auto shape = detail::shape_of(c.truth);
    for (const auto& [d, a] : shape)
        factors.push_back(json{{"degree", d}, {"multiplicity", a}});
    out["ground_truth"] = json{{"seed", seed}, {"factors", std::move(factors)}};
    return out;
}

} // namespace opal::selfcheck
