#include <catch2/catch_amalgamated.hpp>

#include "opal/decompose.hpp"
#include "opal/funcalg.hpp"

using namespace opal;

namespace {

// cyclic shift plus a distinct-entry diagonal: the commutant is scalar, and
// two instances with different phases admit no nonzero intertwiner
MatrixTuple irr(int d, double phase) {
    ComplexMatrix s = ComplexMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i) s((i + 1) % d, i) = 1.0;
    ComplexMatrix diag = ComplexMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
        diag(i, i) = std::polar((i + 1) / static_cast<double>(d), phase);
    return MatrixTuple(d, {0.5 * s, diag});
}

SampledTower small_tower() {
    // degrees 1, 2, 2 across three disjoint classes
    std::vector<std::pair<std::string, MatrixTuple>> reg = {
        {"r1", irr(1, 0.3)}, {"r2", irr(2, 0.0)}, {"r3", irr(2, 1.1)}};
    Rng rng(7);
    std::vector<SamplePoint> pts;
    pts.push_back({"p1", ComplexMatrix::Identity(1, 1), {"r1"}});
    pts.push_back({"p2", haar_unitary(3, rng), {"r1", "r2"}});
    pts.push_back({"p3", haar_unitary(5, rng), {"r2", "r1", "r3"}});
    return SampledTower(std::move(reg), std::move(pts));
}

TowerFunction gaussian_function(const SampledTower& t, Rng& rng) {
    TowerFunction f;
    for (const auto& [id, rep] : t.registry()) {
        ComplexMatrix v(rep.degree, rep.degree);
        for (int i = 0; i < rep.degree; ++i)
            for (int j = 0; j < rep.degree; ++j) v(i, j) = rng.complex_gaussian();
        f.values[id] = v / (1.0 + operator_norm(v));
    }
    return f;
}

} // namespace

TEST_CASE("tower construction rejects bad data", "[funcalg]") {
    const MatrixTuple a = irr(2, 0.0);
    const MatrixTuple b = irr(2, 1.1);

    REQUIRE_THROWS_AS(SampledTower({}, {}), ValidationError);
    REQUIRE_THROWS_AS(SampledTower({{"a", a}, {"a", b}}, {}), ValidationError);
    // a doubled class is reducible
    REQUIRE_THROWS_AS(SampledTower({{"a", times(2, a)}}, {}), ValidationError);
    // a conjugate of a is equivalent to it, hence not disjoint
    Rng rng(3);
    const MatrixTuple a2 = act(haar_unitary(2, rng), a);
    REQUIRE_THROWS_AS(SampledTower({{"a", a}, {"b", a2}}, {}), ValidationError);

    const ComplexMatrix eye2 = ComplexMatrix::Identity(2, 2);
    REQUIRE_THROWS_AS(SampledTower({{"a", a}}, {{"p", eye2, {}}}), ValidationError);
    REQUIRE_THROWS_AS(SampledTower({{"a", a}}, {{"p", eye2, {"zz"}}}), NotFound);
    REQUIRE_THROWS_AS(
        SampledTower({{"a", a}}, {{"p", ComplexMatrix::Identity(3, 3), {"a"}}}),
        ValidationError);
    REQUIRE_THROWS_AS(SampledTower({{"a", a}}, {{"p", 2.0 * eye2, {"a"}}}), NotUnitary);
    REQUIRE_THROWS_AS(
        SampledTower({{"a", a}}, {{"p", eye2, {"a"}}, {"p", eye2, {"a"}}}),
        ValidationError);
}

TEST_CASE("point content is normalized to registry order", "[funcalg]") {
    const SampledTower t = small_tower();
    const std::vector<std::string> want = {"r1", "r2", "r3"};
    REQUIRE(t.point("p3").content == want);
    REQUIRE(t.point_degree("p3") == 5);
    REQUIRE(t.point_degree("p1") == 1);
    REQUIRE_THROWS_AS(t.point("nope"), NotFound);
    REQUIRE_THROWS_AS(t.class_tuple("nope"), NotFound);
    REQUIRE(t.has_class("r2"));
    REQUIRE(!t.has_class("p2"));
}

TEST_CASE("evaluation assembles values through the conjugator", "[funcalg]") {
    const SampledTower t = small_tower();
    Rng rng(11);
    const TowerFunction f = gaussian_function(t, rng);

    // singleton point with identity conjugator reproduces the raw value
    REQUIRE((evaluate(t, f, "p1") - f.values.at("r1")).norm() < 1e-14);

    // general point: U (v_1 oplus v_2 oplus ...) U*, blocks in registry order
    const ComplexMatrix u = t.point("p3").conjugator;
    const ComplexMatrix blocks =
        direct_sum(f.values.at("r1"), direct_sum(f.values.at("r2"), f.values.at("r3")));
    REQUIRE((evaluate(t, f, "p3") - u * blocks * u.adjoint()).norm() < 1e-12);

    // missing and wrong-shaped values are rejected
    TowerFunction g = f;
    g.values.erase("r2");
    REQUIRE_THROWS_AS(evaluate(t, g, "p3"), NotFound);
    g.values["r2"] = ComplexMatrix::Identity(3, 3);
    REQUIRE_THROWS_AS(evaluate(t, g, "p3"), InvalidShape);
}

TEST_CASE("repeated content is insensitive to the stored block order", "[funcalg]") {
    // two copies of one class: re-wiring the conjugator by the block swap
    // lands in the stabilizer, so every function evaluates identically
    std::vector<std::pair<std::string, MatrixTuple>> reg = {{"a", irr(2, 0.4)}};
    Rng rng(5);
    const ComplexMatrix w = haar_unitary(4, rng);
    std::vector<SamplePoint> pts;
    pts.push_back({"p", w, {"a", "a"}});
    pts.push_back({"q", w * swap_unitary(2, 2), {"a", "a"}});
    const SampledTower t(std::move(reg), std::move(pts));

    for (int trial = 0; trial < 5; ++trial) {
        const TowerFunction f = gaussian_function(t, rng);
        REQUIRE((evaluate(t, f, "p") - evaluate(t, f, "q")).norm() < 1e-12);
    }
    REQUIRE_THROWS_AS(separate(t, "p", "q", rng), NotSeparable);
}

TEST_CASE("sup norm is the largest class-value norm", "[funcalg]") {
    const SampledTower t = small_tower();
    TowerFunction f;
    f.values["r1"] = 0.5 * ComplexMatrix::Identity(1, 1);
    ComplexMatrix v2 = ComplexMatrix::Zero(2, 2);
    v2(0, 0) = 0.9;
    v2(1, 1) = 0.3;
    f.values["r2"] = v2;
    f.values["r3"] = ComplexMatrix::Zero(2, 2);
    REQUIRE(sup_norm(t, f) == Catch::Approx(0.9).margin(1e-14));

    const TowerFunction one = unit_function(t);
    REQUIRE(sup_norm(t, one) == Catch::Approx(1.0).margin(1e-14));
    REQUIRE((evaluate(t, one, "p3") - ComplexMatrix::Identity(5, 5)).norm() < 1e-12);
}

TEST_CASE("degree profile reports per-degree suprema", "[funcalg]") {
    const SampledTower t = small_tower();
    TowerFunction f;
    f.values["r1"] = 0.5 * ComplexMatrix::Identity(1, 1);
    f.values["r2"] = 0.9 * ComplexMatrix::Identity(2, 2);
    f.values["r3"] = 0.3 * ComplexMatrix::Identity(2, 2);
    const auto prof = degree_profile(t, f);
    REQUIRE(prof.size() == 2);
    REQUIRE(prof[0].first == 1);
    REQUIRE(prof[0].second == Catch::Approx(0.5).margin(1e-14));
    REQUIRE(prof[1].first == 2);
    REQUIRE(prof[1].second == Catch::Approx(0.9).margin(1e-14));
}

TEST_CASE("point representations are star-homomorphisms", "[funcalg]") {
    const SampledTower t = small_tower();
    Rng rng(17);
    const TowerFunction f = gaussian_function(t, rng);
    const TowerFunction g = gaussian_function(t, rng);
    const Representation pi = representation_at(t, "p3");

    REQUIRE(pi.dimension() == 5);
    REQUIRE(!pi.irreducible());
    REQUIRE(representation_at(t, "p1").irreducible());
    REQUIRE_THROWS_AS(representation_at(t, "nope"), NotFound);

    REQUIRE((pi(pointwise_sum(f, g)) - (pi(f) + pi(g))).norm() < 1e-10);
    REQUIRE((pi(pointwise_product(f, g)) - pi(f) * pi(g)).norm() < 1e-10);
    REQUIRE((pi(pointwise_adjoint(f)) - pi(f).adjoint()).norm() < 1e-10);
    REQUIRE((pi(scaled(f, cxd(0.0, 2.0))) - cxd(0.0, 2.0) * pi(f)).norm() < 1e-10);
}

TEST_CASE("central functions are the scalar-per-class ones", "[funcalg]") {
    const SampledTower t = small_tower();
    REQUIRE(is_central(t, unit_function(t)));

    TowerFunction f;
    f.values["r1"] = cxd(2.0, 1.0) * ComplexMatrix::Identity(1, 1);
    f.values["r2"] = 3.0 * ComplexMatrix::Identity(2, 2);
    f.values["r3"] = -0.5 * ComplexMatrix::Identity(2, 2);
    REQUIRE(is_central(t, f));

    ComplexMatrix skew = ComplexMatrix::Zero(2, 2);
    skew(0, 0) = 1.0;
    skew(1, 1) = 2.0;
    f.values["r2"] = skew;
    REQUIRE(!is_central(t, f));
}

TEST_CASE("vanishing ideal membership", "[funcalg]") {
    const SampledTower t = small_tower();
    VanishingIdealSpec ideal;
    ideal.zero_set = {"r1", "r3"};

    TowerFunction f = unit_function(t);
    f.values["r1"] = ComplexMatrix::Zero(1, 1);
    f.values["r3"] = ComplexMatrix::Zero(2, 2);
    REQUIRE(ideal.contains(f));

    f.values["r3"] = 0.1 * ComplexMatrix::Identity(2, 2);
    REQUIRE(!ideal.contains(f));

    f.values.erase("r1");
    VanishingIdealSpec only1;
    only1.zero_set = {"r1"};
    REQUIRE_THROWS_AS(only1.contains(f), NotFound);
}

TEST_CASE("separating functions cover the three content cases", "[funcalg]") {
    Rng rng(23);

    // (a) a class present on one side only: the indicator of that class
    {
        const SampledTower t = small_tower();
        const TowerFunction f = separate(t, "p1", "p3", rng);
        // p1's content {r1} is contained in p3's, so the indicator class is
        // one of r2, r3: it vanishes at p1 and is visible at p3
        REQUIRE(operator_norm(evaluate(t, f, "p1")) < 1e-12);
        REQUIRE(operator_norm(evaluate(t, f, "p3")) > 0.5);
    }

    // (b) shared classes with different multiplicities
    {
        std::vector<std::pair<std::string, MatrixTuple>> reg = {{"a", irr(1, 0.2)},
                                                                {"b", irr(1, 1.4)}};
        const ComplexMatrix eye3 = ComplexMatrix::Identity(3, 3);
        std::vector<SamplePoint> pts;
        pts.push_back({"p", eye3, {"a", "a", "b"}});
        pts.push_back({"q", eye3, {"a", "b", "b"}});
        const SampledTower t(std::move(reg), std::move(pts));
        const TowerFunction f = separate(t, "p", "q", rng);
        const double gap = (evaluate(t, f, "p") - evaluate(t, f, "q")).norm();
        REQUIRE(gap > 0.5);
    }

    // (c) identical content, conjugators differing outside the stabilizer
    {
        std::vector<std::pair<std::string, MatrixTuple>> reg = {{"a", irr(2, 0.0)},
                                                                {"b", irr(2, 1.1)}};
        Rng prng(31);
        const ComplexMatrix base = haar_unitary(4, prng);
        std::vector<SamplePoint> pts;
        pts.push_back({"p", base, {"a", "b"}});
        pts.push_back({"q", base * haar_unitary(4, prng), {"a", "b"}});
        const SampledTower t(std::move(reg), std::move(pts));
        const Tolerances tol;
        const TowerFunction f = separate(t, "p", "q", prng);
        const double gap = operator_norm(evaluate(t, f, "p") - evaluate(t, f, "q"));
        REQUIRE(gap > 10 * tol.eq_abs);
        for (const auto& [id, v] : f.values) REQUIRE(operator_norm(v) < 1.0 + 1e-9);
    }
}

TEST_CASE("twirling against an equivariant callback is exact", "[funcalg]") {
    const MatrixTuple x = oplus(times(2, irr(2, 0.0)), irr(3, 0.7));
    Rng rng(41);
    const Decomposition dec = decompose(x, rng);
    const StabilizerStructure stab = stabilizer_structure(x, dec);
    ComplexMatrix m(7, 7);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j) m(i, j) = rng.complex_gaussian();

    // w(U) = U m U* makes every Monte-Carlo sample collapse to m itself
    const auto w = [&m](const ComplexMatrix& u) { return (u * m * u.adjoint()).eval(); };
    const ComplexMatrix averaged = twirl(x, w, 5, rng, stab);
    const ComplexMatrix projected = stab.project_commutant(m);
    REQUIRE((averaged - projected).norm() < 1e-12);

    // the output lies in the stabilizer commutant: group samples fix it
    for (int s = 0; s < 10; ++s) {
        const ComplexMatrix g = stab.sample_member(rng);
        REQUIRE((g * averaged - averaged * g).norm() < 1e-10);
    }

    REQUIRE_THROWS_AS(twirl(x, w, 0, rng, stab), ValidationError);
    const auto bad = [](const ComplexMatrix&) { return ComplexMatrix::Identity(2, 2).eval(); };
    REQUIRE_THROWS_AS(twirl(x, bad, 1, rng, stab), InvalidShape);
}

TEST_CASE("full generation and separating projections", "[funcalg]") {
    REQUIRE(generates_fully(irr(3, 0.5)));
    REQUIRE(generates_fully(irr(2, 2.0)));
    // identity letters generate only scalars
    REQUIRE(!generates_fully(MatrixTuple(2, {ComplexMatrix::Identity(2, 2)})));
    // commuting diagonal letters stay inside the diagonal algebra
    ComplexMatrix d1 = ComplexMatrix::Zero(2, 2), d2 = ComplexMatrix::Zero(2, 2);
    d1(0, 0) = 0.3;
    d1(1, 1) = 0.8;
    d2(0, 0) = 0.6;
    d2(1, 1) = 0.1;
    REQUIRE(!generates_fully(MatrixTuple(2, {d1, d2})));

    const MatrixTuple a = irr(2, 0.0);
    const MatrixTuple b = irr(2, 1.1);
    REQUIRE(separating_projection_exists(a, b));
    Rng rng(43);
    REQUIRE(!separating_projection_exists(a, act(haar_unitary(2, rng), a)));
    REQUIRE_THROWS_AS(separating_projection_exists(times(2, a), b), ValidationError);
}
