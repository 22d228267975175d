#include <catch2/catch_amalgamated.hpp>

#include "opal/tuples.hpp"

using namespace opal;

namespace {
MatrixTuple nilpotent2() {
    ComplexMatrix n = ComplexMatrix::Zero(2, 2);
    n(0, 1) = 0.5;
    return MatrixTuple(2, {n});
}

MatrixTuple scalar(double v) {
    ComplexMatrix m(1, 1);
    m(0, 0) = v;
    return MatrixTuple(1, {m});
}
} // namespace

TEST_CASE("construction validates shapes", "[tuples]") {
    REQUIRE_THROWS_AS(MatrixTuple(2, {}), InvalidShape);
    REQUIRE_THROWS_AS(MatrixTuple(0, {ComplexMatrix::Zero(0, 0)}), InvalidShape);
    REQUIRE_THROWS_AS(MatrixTuple(2, {ComplexMatrix::Zero(2, 3)}), InvalidShape);
    REQUIRE_THROWS_AS(MatrixTuple(2, {ComplexMatrix::Zero(3, 3)}), InvalidShape);
    const MatrixTuple t = nilpotent2();
    REQUIRE(t.degree == 2);
    REQUIRE(t.label_count == 1);
}

TEST_CASE("direct sum stacks letters blockwise", "[tuples]") {
    const MatrixTuple s = oplus(scalar(1.0), scalar(2.0));
    REQUIRE(s.degree == 2);
    REQUIRE(std::abs(s.letters[0](0, 0) - 1.0) < 1e-15);
    REQUIRE(std::abs(s.letters[0](1, 1) - 2.0) < 1e-15);
    REQUIRE(std::abs(s.letters[0](0, 1)) < 1e-15);

    const MatrixTuple two = MatrixTuple(1, {ComplexMatrix::Identity(1, 1),
                                            ComplexMatrix::Identity(1, 1)});
    REQUIRE_THROWS_AS(oplus(scalar(1.0), two), LabelMismatch);
}

TEST_CASE("multiples are consecutive copies", "[tuples]") {
    const MatrixTuple t = nilpotent2();
    const MatrixTuple m = times(3, t);
    REQUIRE(m.degree == 6);
    const ComplexMatrix want = kron(ComplexMatrix::Identity(3, 3), t.letters[0]);
    REQUIRE((m.letters[0] - want).norm() < 1e-15);
    REQUIRE_THROWS_AS(times(0, t), InvalidShape);
}

TEST_CASE("unitary action validates input and composes", "[tuples]") {
    Rng rng(9);
    const MatrixTuple t = nilpotent2();
    const ComplexMatrix u = haar_unitary(2, rng), v = haar_unitary(2, rng);
    REQUIRE(tuple_distance(act(ComplexMatrix::Identity(2, 2), t), t) == 0.0);
    const MatrixTuple lhs = act(u, act(v, t));
    const MatrixTuple rhs = act((u * v).eval(), t);
    REQUIRE(tuple_distance(lhs, rhs) < 1e-14);
    REQUIRE_THROWS_AS(act(2.0 * u, t), NotUnitary);
    REQUIRE_THROWS_AS(act(haar_unitary(3, rng), t), InvalidShape);
}

TEST_CASE("distance and norm semantics", "[tuples]") {
    const MatrixTuple t = nilpotent2();
    REQUIRE(tuple_distance(t, t) == 0.0);
    REQUIRE_THROWS_AS(tuple_distance(t, scalar(1.0)), InvalidShape);
    REQUIRE(tuple_norm(t) == Catch::Approx(0.5).margin(1e-15));
    REQUIRE(is_normalized(t));
    MatrixTuple big = MatrixTuple(1, {3.0 * ComplexMatrix::Identity(1, 1)});
    REQUIRE(!is_normalized(big));
}
