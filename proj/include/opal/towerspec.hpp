#pragma once

// Finite combinatorial tower presentations: classes with degree and limit
// data, generated/tail subtowers, the vanishing tower, regular/singular
// classification, the solidity witness scan, the closedness test, the two
// reference builders and morphism validation.
//
// A presentation truncates an infinite tower at a maximal degree; the
// in_every_tail flag declares classes that persist in every tail closure
// beyond the truncation (their persistence is an axiom of the presentation,
// not always derivable from the finite limit edges).

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "opal/errors.hpp"

namespace opal {

using Multiset = std::map<std::string, int>; // class id -> multiplicity >= 1

enum class ClassKind { Singleton, Sequence };

struct TowerClass {
    std::string id;
    int degree = 0;
    ClassKind kind = ClassKind::Singleton;
    std::vector<Multiset> limits; // accumulation points of the class family
    bool in_every_tail = false;
};

struct TowerPresentation {
    std::vector<TowerClass> classes;
    std::optional<std::string> theta; // degree-1 distinguished class, if any

    const TowerClass* find(const std::string& id) const {
        for (const auto& c : classes)
            if (c.id == id) return &c;
        return nullptr;
    }
    const TowerClass& at(const std::string& id) const {
        const TowerClass* c = find(id);
        if (!c) throw NotFound("unknown class '" + id + "'");
        return *c;
    }
};

struct TowerPoint {
    Multiset content; // nonempty
};

inline int point_degree(const TowerPresentation& p, const Multiset& m) {
    int d = 0;
    for (const auto& [id, mult] : m) d += mult * p.at(id).degree;
    return d;
}

struct Diagnostic {
    enum class Severity { error, warning };
    Severity severity = Severity::error;
    std::string code;
    std::string class_id;
    std::string message;
};

inline bool diagnostics_clean(const std::vector<Diagnostic>& ds) {
    for (const auto& d : ds)
        if (d.severity == Diagnostic::Severity::error) return false;
    return true;
}

inline int height(const TowerPresentation& p) {
    if (p.classes.empty()) throw EmptyTower("presentation has no classes");
    int h = 0;
    for (const auto& c : p.classes) h = std::max(h, c.degree);
    return h;
}

inline std::set<std::string> generated_subtower(const TowerPresentation& p,
                                                const std::set<std::string>& seed) {
    std::set<std::string> s;
    std::vector<std::string> work;
    for (const auto& id : seed) {
        p.at(id); // NotFound on unknown seeds
        if (s.insert(id).second) work.push_back(id);
    }
    while (!work.empty()) {
        const TowerClass& c = p.at(work.back());
        work.pop_back();
        if (c.kind != ClassKind::Sequence) continue;
        for (const auto& m : c.limits)
            for (const auto& [id, mult] : m)
                if (s.insert(id).second) work.push_back(id);
    }
    return s;
}

// Tail subtower T[N]; pass nullopt for the N = infinity tail (flagged classes
// only), whose class set underlies the vanishing tower.
inline std::set<std::string> tail_subtower(const TowerPresentation& p, std::optional<int> n) {
    if (n && *n < 1) throw ValidationError("tail index must be >= 1");
    std::set<std::string> seed;
    for (const auto& c : p.classes)
        if (c.in_every_tail || (n && c.degree >= *n)) seed.insert(c.id);
    return generated_subtower(p, seed);
}

inline std::set<std::string> vanishing_classes(const TowerPresentation& p) {
    return tail_subtower(p, std::nullopt);
}

inline std::vector<Diagnostic> validate(const TowerPresentation& p) {
    std::vector<Diagnostic> out;
    auto err = [&out](std::string code, std::string cid, std::string msg) {
        out.push_back({Diagnostic::Severity::error, std::move(code), std::move(cid), std::move(msg)});
    };
    std::set<std::string> seen;
    for (const auto& c : p.classes) {
        if (!seen.insert(c.id).second) err("duplicate-id", c.id, "class id appears twice");
        if (c.degree < 1) err("bad-degree", c.id, "class degree must be positive");
        if (c.kind == ClassKind::Singleton && !c.limits.empty())
            err("kind-violation", c.id, "singleton class declares limits");
        for (const auto& m : c.limits) {
            if (m.empty()) err("empty-limit", c.id, "limit multiset is empty");
            int total = 0;
            bool known = true;
            for (const auto& [id, mult] : m) {
                if (mult < 1) err("bad-multiplicity", c.id, "limit multiplicity must be >= 1");
                const TowerClass* t = p.find(id);
                if (!t) {
                    err("unknown-id", c.id, "limit references unknown class '" + id + "'");
                    known = false;
                } else {
                    total += mult * t->degree;
                }
            }
            if (known && total != c.degree)
                err("degree-mismatch", c.id, "limit multiset degree " + std::to_string(total) +
                                                 " != class degree " + std::to_string(c.degree));
        }
    }
    if (p.theta) {
        const TowerClass* t = p.find(*p.theta);
        if (!t)
            err("unknown-id", *p.theta, "theta names an unknown class");
        else if (t->degree != 1)
            err("theta-degree", *p.theta, "theta must have degree 1");
    }
    if (!diagnostics_clean(out) || p.classes.empty()) return out;

    // informational: a flagged class whose tail persistence is never
    // corroborated by the limit edges at any truncation level
    const int h = height(p);
    for (const auto& c : p.classes) {
        if (!c.in_every_tail) continue;
        bool derivable = false;
        for (int n = c.degree + 1; n <= h && !derivable; ++n) {
            std::set<std::string> seed;
            for (const auto& d : p.classes)
                if (d.degree >= n) seed.insert(d.id);
            if (generated_subtower(p, seed).count(c.id)) derivable = true;
        }
        if (!derivable)
            out.push_back({Diagnostic::Severity::warning, "flag-axiomatic", c.id,
                           "tail persistence of '" + c.id +
                               "' is axiomatic: no truncated tail reaches it through limit edges"});
    }
    return out;
}

enum class Verdict { Regular, Singular, NotSolid };

struct Classification {
    Verdict verdict = Verdict::NotSolid;
    std::set<std::string> vanishing;
    int height = 0;         // maximal degree in the truncated presentation
    bool unbounded = false; // flags promise classes beyond the truncation
};

inline Classification classify(const TowerPresentation& p) {
    Classification c;
    c.vanishing = vanishing_classes(p);
    c.height = height(p);
    for (const auto& cl : p.classes)
        if (cl.in_every_tail) c.unbounded = true;
    bool has_degree1 = false;
    for (const auto& cl : p.classes)
        if (cl.degree == 1) has_degree1 = true;
    if (c.vanishing.empty() && has_degree1)
        c.verdict = Verdict::Regular;
    else if (c.vanishing.size() == 1 && p.theta && *c.vanishing.begin() == *p.theta &&
             p.at(*p.theta).degree == 1)
        c.verdict = Verdict::Singular;
    else
        c.verdict = Verdict::NotSolid;
    return c;
}

// For each N <= height, the least n <= height+1 whose tail contains no class
// of degree <= N (so no point over it can have degree <= N), if any.
inline std::vector<std::pair<int, std::optional<int>>> prop_solid_check(
    const TowerPresentation& p) {
    const int h = height(p);
    std::vector<std::pair<int, std::optional<int>>> out;
    for (int cap = 1; cap <= h; ++cap) {
        std::optional<int> witness;
        for (int n = 1; n <= h + 1 && !witness; ++n) {
            int mindeg = cap + 1; // sentinel: anything above cap passes
            for (const auto& id : tail_subtower(p, n))
                mindeg = std::min(mindeg, p.at(id).degree);
            if (mindeg > cap) witness = n;
        }
        out.emplace_back(cap, witness);
    }
    return out;
}

struct ClosednessViolation {
    int n = 0;              // tail index at which the class sits outside T[n]
    std::string class_id;   // offending class
    std::optional<Multiset> limit; // the theta-containing limit, if that is the offence
};

// Classes outside T[N] together with their limit multisets model the closure
// of core \ T[N]; none of that may touch theta. Checked for N up to height+1
// (beyond the truncation the flags govern).
inline std::pair<bool, std::vector<ClosednessViolation>> closedness_test(
    const TowerPresentation& p) {
    if (!p.theta) throw ThetaRequired("closedness test needs a distinguished theta class");
    const int h = height(p);
    std::vector<ClosednessViolation> bad;
    for (int n = 1; n <= h + 1; ++n) {
        const std::set<std::string> tail = tail_subtower(p, n);
        for (const auto& c : p.classes) {
            if (tail.count(c.id)) continue;
            if (c.id == *p.theta) bad.push_back({n, c.id, std::nullopt});
            for (const auto& m : c.limits)
                if (m.count(*p.theta)) bad.push_back({n, c.id, m});
        }
    }
    return {bad.empty(), bad};
}

namespace detail {

inline std::string shell_id(int n, int s) {
    return "ir(" + std::to_string(n) + "," + std::to_string(s) + ")";
}

} // namespace detail

// Singular-but-closed reference presentation: one class per (degree, dyadic
// norm shell), with limit edges following the divisor structure; a shell
// family never accumulates at theta (its norms are pinned), so theta persists
// in the tails only through its flag.
inline TowerPresentation build_example_clo(int d_max, int scale_depth) {
    if (d_max < 2 || d_max > 12)
        throw Unsupported("degree bound must lie in [2, 12]");
    if (scale_depth < 1) throw Unsupported("scale depth must be >= 1");
    TowerPresentation p;
    p.theta = "theta";
    p.classes.push_back({"theta", 1, ClassKind::Singleton, {}, true});
    for (int n = 2; n <= d_max; ++n)
        for (int s = n + 1; s <= n + scale_depth; ++s) {
            TowerClass c{detail::shell_id(n, s), n, ClassKind::Sequence, {}, false};
            for (int k = 2; k < n; ++k) {
                if (n % k != 0) continue;
                for (int sp = std::max(n, k + 1); sp <= k + scale_depth; ++sp)
                    c.limits.push_back({{detail::shell_id(k, sp), n / k}});
            }
            p.classes.push_back(std::move(c));
        }
    return p;
}

// Singular and non-closed reference presentation: each class z(n,k) models a
// shrinking family whose sole accumulation point is the n-fold sum of theta.
inline TowerPresentation build_non_one(int d_max, int k_depth) {
    if (d_max < 2 || d_max > 12)
        throw Unsupported("degree bound must lie in [2, 12]");
    if (k_depth < 1) throw Unsupported("scale depth must be >= 1");
    TowerPresentation p;
    p.theta = "theta";
    p.classes.push_back({"theta", 1, ClassKind::Singleton, {}, true});
    for (int n = 2; n <= d_max; ++n)
        for (int k = n + 1; k <= n + k_depth; ++k) {
            std::string id = "z(" + std::to_string(n) + "," + std::to_string(k) + ")";
            p.classes.push_back(
                {std::move(id), n, ClassKind::Sequence, {Multiset{{"theta", n}}}, false});
        }
    return p;
}

namespace detail {

inline bool multiset_contains(const Multiset& big, const Multiset& small) {
    for (const auto& [id, mult] : small) {
        auto it = big.find(id);
        if (it == big.end() || it->second < mult) return false;
    }
    return true;
}

inline Multiset multiset_minus(Multiset big, const Multiset& small) {
    for (const auto& [id, mult] : small) {
        auto it = big.find(id);
        it->second -= mult;
        if (it->second == 0) big.erase(it);
    }
    return big;
}

inline bool reach_by_single_replacements(const TowerPresentation& dst,
                                         const std::vector<std::string>& instances,
                                         std::size_t i, const Multiset& remaining) {
    if (i == instances.size()) return remaining.empty();
    const TowerClass& c = dst.at(instances[i]);
    std::vector<Multiset> options;
    options.push_back({{c.id, 1}}); // keep the constituent
    for (const auto& m : c.limits) options.push_back(m);
    for (const auto& opt : options)
        if (multiset_contains(remaining, opt) &&
            reach_by_single_replacements(dst, instances, i + 1, multiset_minus(remaining, opt)))
            return true;
    return false;
}

} // namespace detail

// Degree preservation plus a sufficient continuity condition: the image of a
// limit must be reachable from the image point by replacing each constituent
// with itself or one of its declared limits.
inline std::vector<Diagnostic> validate_morphism(const TowerPresentation& src,
                                                 const TowerPresentation& dst,
                                                 const std::map<std::string, TowerPoint>& map) {
    std::vector<Diagnostic> out;
    for (const auto& c : src.classes) {
        auto it = map.find(c.id);
        if (it == map.end()) throw NotFound("morphism is missing class '" + c.id + "'");
        const Multiset& image = it->second.content;
        if (image.empty()) throw NotFound("morphism image of '" + c.id + "' is empty");
        if (point_degree(dst, image) != c.degree)
            out.push_back({Diagnostic::Severity::error, "m1-degree", c.id,
                           "image degree != class degree"});
    }
    if (!out.empty()) return out;
    for (const auto& c : src.classes) {
        const Multiset& image = map.at(c.id).content;
        std::vector<std::string> instances;
        for (const auto& [id, mult] : image)
            for (int r = 0; r < mult; ++r) instances.push_back(id);
        for (const auto& lim : c.limits) {
            Multiset target;
            for (const auto& [id, mult] : lim) {
                auto jt = map.find(id);
                if (jt == map.end())
                    throw NotFound("morphism is missing limit constituent '" + id + "'");
                for (const auto& [did, dm] : jt->second.content) target[did] += mult * dm;
            }
            if (!detail::reach_by_single_replacements(dst, instances, 0, target))
                out.push_back({Diagnostic::Severity::error, "continuity", c.id,
                               "image cannot reach the image of one of its limits"});
        }
    }
    return out;
}

} // namespace opal
