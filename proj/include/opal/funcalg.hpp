#pragma once

// Compatible matrix-valued functions on a finitely sampled tower: evaluation,
// norms, point representations, separation of points, twirl-based
// equivariantization, centrality and generation tests.
//
// A function is stored only by its values on the registry of irreducible
// orbit representatives; the value at any sampled point is forced by the
// extension formula act(conjugator, oplus of class values).

#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "opal/decompose.hpp"

namespace opal {

struct SamplePoint {
    std::string id;
    ComplexMatrix conjugator;         // unitary, degree == sum of content degrees
    std::vector<std::string> content; // registry ids, kept in registry order
};

// Immutable finite sample of a tower: pairwise-disjoint irreducible orbit
// representatives plus points assembled from them.
class SampledTower {
  public:
    SampledTower(std::vector<std::pair<std::string, MatrixTuple>> registry,
                 std::vector<SamplePoint> points, const Tolerances& tol = {})
        : registry_(std::move(registry)), points_(std::move(points)) {
        if (registry_.empty()) throw ValidationError("tower registry is empty");
        label_count_ = registry_[0].second.label_count;
        for (std::size_t i = 0; i < registry_.size(); ++i) {
            const auto& [id, rep] = registry_[i];
            if (id.empty()) throw ValidationError("registry id is empty");
            if (!registry_index_.emplace(id, i).second)
                throw ValidationError("duplicate registry id '" + id + "'");
            if (rep.label_count != label_count_)
                throw LabelMismatch("registry entries have mixed label counts");
            if (!is_irreducible(rep, tol))
                throw ValidationError("registry entry '" + id + "' is not irreducible");
        }
        for (std::size_t i = 0; i < registry_.size(); ++i)
            for (std::size_t j = i + 1; j < registry_.size(); ++j)
                if (intertwiner_basis(registry_[i].second, registry_[j].second, tol).dim() != 0)
                    throw ValidationError("registry entries '" + registry_[i].first + "' and '" +
                                          registry_[j].first + "' are not disjoint");
        for (std::size_t i = 0; i < points_.size(); ++i) {
            auto& pt = points_[i];
            if (pt.content.empty())
                throw ValidationError("point '" + pt.id + "' has empty content");
            if (!point_index_.emplace(pt.id, i).second)
                throw ValidationError("duplicate point id '" + pt.id + "'");
            int deg = 0;
            for (const auto& id : pt.content) deg += class_tuple(id).degree;
            std::stable_sort(pt.content.begin(), pt.content.end(),
                             [this](const std::string& a, const std::string& b) {
                                 return registry_index_.at(a) < registry_index_.at(b);
                             });
            if (pt.conjugator.rows() != deg || pt.conjugator.cols() != deg)
                throw ValidationError("point '" + pt.id + "' conjugator size mismatch");
            if (!is_unitary(pt.conjugator, tol.eq_abs))
                throw NotUnitary("point '" + pt.id + "' conjugator is not unitary");
        }
    }

    int label_count() const noexcept { return label_count_; }
    const std::vector<std::pair<std::string, MatrixTuple>>& registry() const noexcept {
        return registry_;
    }
    const std::vector<SamplePoint>& points() const noexcept { return points_; }

    bool has_class(const std::string& id) const { return registry_index_.count(id) != 0; }
    const MatrixTuple& class_tuple(const std::string& id) const {
        auto it = registry_index_.find(id);
        if (it == registry_index_.end()) throw NotFound("unknown registry class '" + id + "'");
        return registry_[it->second].second;
    }
    const SamplePoint& point(const std::string& id) const {
        auto it = point_index_.find(id);
        if (it == point_index_.end()) throw NotFound("unknown point '" + id + "'");
        return points_[it->second];
    }
    int point_degree(const std::string& id) const {
        int d = 0;
        for (const auto& c : point(id).content) d += class_tuple(c).degree;
        return d;
    }

    MatrixTuple raw_point(const std::string& id, const Tolerances& tol = {}) const {
        const SamplePoint& pt = point(id);
        MatrixTuple acc = class_tuple(pt.content[0]);
        for (std::size_t i = 1; i < pt.content.size(); ++i)
            acc = oplus(acc, class_tuple(pt.content[i]));
        return act(pt.conjugator, acc, tol);
    }

  private:
    std::vector<std::pair<std::string, MatrixTuple>> registry_;
    std::vector<SamplePoint> points_;
    std::map<std::string, std::size_t> registry_index_;
    std::map<std::string, std::size_t> point_index_;
    int label_count_ = 0;
};

struct TowerFunction {
    std::map<std::string, ComplexMatrix> values; // registry id -> square matrix
};

struct VanishingIdealSpec {
    std::set<std::string> zero_set;

    bool contains(const TowerFunction& f, const Tolerances& tol = {}) const {
        for (const auto& id : zero_set) {
            auto it = f.values.find(id);
            if (it == f.values.end()) throw NotFound("no value for class '" + id + "'");
            if (it->second.norm() > tol.eq_abs) return false;
        }
        return true;
    }
};

inline TowerFunction unit_function(const SampledTower& t) {
    TowerFunction f;
    for (const auto& [id, rep] : t.registry())
        f.values[id] = ComplexMatrix::Identity(rep.degree, rep.degree);
    return f;
}

namespace detail {

inline const ComplexMatrix& value_for(const SampledTower& t, const TowerFunction& f,
                                      const std::string& id) {
    auto it = f.values.find(id);
    if (it == f.values.end()) throw NotFound("no value for class '" + id + "'");
    const int d = t.class_tuple(id).degree;
    if (it->second.rows() != d || it->second.cols() != d)
        throw InvalidShape("value for class '" + id + "' has wrong degree");
    return it->second;
}

} // namespace detail

inline ComplexMatrix evaluate(const SampledTower& t, const TowerFunction& f, const std::string& p,
                              const Tolerances& tol = {}) {
    const SamplePoint& pt = t.point(p);
    ComplexMatrix acc = detail::value_for(t, f, pt.content[0]);
    for (std::size_t i = 1; i < pt.content.size(); ++i)
        acc = direct_sum(acc, detail::value_for(t, f, pt.content[i]));
    return conj_action(pt.conjugator, acc, tol);
}

inline double sup_norm(const SampledTower& t, const TowerFunction& f) {
    double m = 0.0;
    for (const auto& [id, rep] : t.registry())
        m = std::max(m, operator_norm(detail::value_for(t, f, id)));
    // when the stored points jointly realize every registry class, the same
    // supremum must be attained over point evaluations; cross-check it
    std::set<std::string> seen;
    double over_points = 0.0;
    for (const auto& p : t.points()) {
        for (const auto& id : p.content) seen.insert(id);
        over_points = std::max(over_points, operator_norm(evaluate(t, f, p.id)));
    }
    if (seen.size() == t.registry().size() && std::abs(over_points - m) > 1e-10)
        throw InternalInconsistency("sup_norm: registry and point suprema disagree");
    return m;
}

// Unital representation of the function data at one sampled point.
class Representation {
  public:
    Representation(const SampledTower& t, std::string point_id)
        : tower_(&t), point_id_(std::move(point_id)) {
        tower_->point(point_id_); // NotFound if absent
    }

    ComplexMatrix operator()(const TowerFunction& f) const {
        return evaluate(*tower_, f, point_id_);
    }
    int dimension() const { return tower_->point_degree(point_id_); }
    bool irreducible() const { return tower_->point(point_id_).content.size() == 1; }
    const std::string& point_id() const noexcept { return point_id_; }

  private:
    const SampledTower* tower_;
    std::string point_id_;
};

inline Representation representation_at(const SampledTower& t, const std::string& p) {
    return Representation(t, p);
}

// pointwise C*-operations on function data
inline TowerFunction pointwise_sum(const TowerFunction& f, const TowerFunction& g) {
    TowerFunction out = f;
    for (const auto& [id, v] : g.values) {
        auto it = out.values.find(id);
        if (it == out.values.end())
            out.values[id] = v;
        else
            it->second += v;
    }
    return out;
}

inline TowerFunction pointwise_product(const TowerFunction& f, const TowerFunction& g) {
    TowerFunction out;
    for (const auto& [id, v] : f.values) {
        auto it = g.values.find(id);
        if (it == g.values.end()) throw NotFound("no value for class '" + id + "'");
        out.values[id] = v * it->second;
    }
    return out;
}

inline TowerFunction pointwise_adjoint(const TowerFunction& f) {
    TowerFunction out;
    for (const auto& [id, v] : f.values) out.values[id] = v.adjoint();
    return out;
}

inline TowerFunction scaled(const TowerFunction& f, cxd c) {
    TowerFunction out;
    for (const auto& [id, v] : f.values) out.values[id] = c * v;
    return out;
}

inline bool is_central(const SampledTower& t, const TowerFunction& f,
                       const Tolerances& tol = {}) {
    for (const auto& [id, rep] : t.registry()) {
        const ComplexMatrix& v = detail::value_for(t, f, id);
        const cxd mean = v.trace() / static_cast<double>(rep.degree);
        if ((v - mean * ComplexMatrix::Identity(rep.degree, rep.degree)).norm() > tol.eq_abs)
            return false;
    }
    return true;
}

// Separating function for two stored points, following the three-case
// construction: (a) a class present on one side only, (b) a shared class with
// different multiplicities, (c) identical content but conjugators differing
// outside the stabilizer.
inline TowerFunction separate(const SampledTower& t, const std::string& p, const std::string& q,
                              Rng& rng, const Tolerances& tol = {}) {
    const SamplePoint& pp = t.point(p);
    const SamplePoint& qq = t.point(q);
    std::map<std::string, int> cp, cq;
    for (const auto& id : pp.content) ++cp[id];
    for (const auto& id : qq.content) ++cq[id];

    if (cp != cq) {
        // prefer a class entirely absent from one side
        std::string pick;
        for (const auto& [id, rep] : t.registry()) {
            const int a = cp.count(id) ? cp.at(id) : 0;
            const int b = cq.count(id) ? cq.at(id) : 0;
            if ((a == 0) != (b == 0)) {
                pick = id;
                break;
            }
            if (pick.empty() && a != b) pick = id;
        }
        TowerFunction f;
        for (const auto& [id, rep] : t.registry())
            f.values[id] = id == pick
                               ? ComplexMatrix::Identity(rep.degree, rep.degree).eval()
                               : ComplexMatrix::Zero(rep.degree, rep.degree).eval();
        return f;
    }

    // identical content: separation must come from the conjugators
    if (tuple_distance(t.raw_point(p, tol), t.raw_point(q, tol)) < tol.eq_abs)
        throw NotSeparable("points '" + p + "' and '" + q + "' are numerically identical");

    for (int attempt = 0; attempt < 10; ++attempt) {
        TowerFunction f;
        std::vector<std::pair<std::string, ComplexMatrix>> drawn;
        for (const auto& [id, rep] : t.registry()) {
            if (!cp.count(id)) {
                f.values[id] = ComplexMatrix::Zero(rep.degree, rep.degree);
                continue;
            }
            const int d = rep.degree;
            ComplexMatrix v(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) v(i, j) = rng.complex_gaussian();
            v /= operator_norm(v);
            f.values[id] = v;
            drawn.emplace_back(id, v);
        }
        bool good = true;
        for (const auto& [id, v] : drawn)
            if (!is_irreducible(MatrixTuple(static_cast<int>(v.rows()), {v}), tol)) good = false;
        for (std::size_t i = 0; i < drawn.size() && good; ++i)
            for (std::size_t j = i + 1; j < drawn.size() && good; ++j) {
                MatrixTuple a(static_cast<int>(drawn[i].second.rows()), {drawn[i].second});
                MatrixTuple b(static_cast<int>(drawn[j].second.rows()), {drawn[j].second});
                if (intertwiner_basis(a, b, tol).dim() != 0) good = false;
            }
        if (!good) continue;
        if (operator_norm(evaluate(t, f, p, tol) - evaluate(t, f, q, tol)) > 10 * tol.eq_abs)
            return f;
    }
    throw InternalInconsistency("separate: no admissible value assignment found");
}

inline constexpr int default_twirl_samples = 2048;

// Monte-Carlo Haar average of U* w(U) U followed by the exact orthogonal
// projection onto the commutant of the stabilizer group; the projection
// restores exact stabilizer-consistency that finite sampling breaks.
inline ComplexMatrix twirl(const MatrixTuple& x,
                           const std::function<ComplexMatrix(const ComplexMatrix&)>& w, int K,
                           Rng& rng, const StabilizerStructure& stab, const Tolerances& tol = {}) {
    if (K < 1) throw ValidationError("twirl: sample count must be >= 1");
    const int d = x.degree;
    if (stab.ambient_degree() != d)
        throw InvalidShape("twirl: stabilizer blocks do not sum to the tuple degree");
    ComplexMatrix acc = ComplexMatrix::Zero(d, d);
    for (int k = 0; k < K; ++k) {
        const ComplexMatrix u = haar_unitary(d, rng);
        const ComplexMatrix m = w(u);
        if (m.rows() != d || m.cols() != d)
            throw InvalidShape("twirl: callback returned a wrong-shaped value");
        acc += u.adjoint() * m * u;
    }
    acc /= static_cast<double>(K);
    return stab.project_commutant(acc);
}

inline bool generates_fully(const MatrixTuple& x, const Tolerances& tol = {}) {
    return bicommutant_basis(x, tol).dim() == x.degree * x.degree;
}

// For irreducible X, Y: the block projection I oplus 0 lies in the algebra
// generated by X oplus Y exactly when the two are disjoint.
inline bool separating_projection_exists(const MatrixTuple& x, const MatrixTuple& y,
                                         const Tolerances& tol = {}) {
    if (!is_irreducible(x, tol) || !is_irreducible(y, tol))
        throw ValidationError("separating_projection_exists: inputs must be irreducible");
    OperatorSpace alg = bicommutant_basis(oplus(x, y), tol);
    ComplexMatrix proj = direct_sum(ComplexMatrix::Identity(x.degree, x.degree),
                                    ComplexMatrix::Zero(y.degree, y.degree));
    const bool in_span = alg.span_residual(proj) < 1e-8 * (1.0 + proj.norm());
    if (in_span != are_disjoint(x, y, tol))
        throw InternalInconsistency(
            "separating_projection_exists: algebra membership and intertwiner rank disagree");
    return in_span;
}

// c_n = largest operator norm of a value on a degree-n class, for n up to the
// largest degree present in the registry.
inline std::vector<std::pair<int, double>> degree_profile(const SampledTower& t,
                                                          const TowerFunction& f) {
    int dmax = 0;
    for (const auto& [id, rep] : t.registry()) dmax = std::max(dmax, rep.degree);
    std::vector<std::pair<int, double>> out;
    for (int n = 1; n <= dmax; ++n) out.emplace_back(n, 0.0);
    for (const auto& [id, rep] : t.registry()) {
        double& slot = out[rep.degree - 1].second;
        slot = std::max(slot, operator_norm(detail::value_for(t, f, id)));
    }
    return out;
}

} // namespace opal
