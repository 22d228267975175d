// Works with functions over a sampled tower: two points with the same class
// content but different gluings are told apart by a computed separating
// function, and a noisy callback is averaged into the symmetry commutant.

#include <cstdio>

#include "opal/decompose.hpp"
#include "opal/funcalg.hpp"

using namespace opal;

namespace {

MatrixTuple shift_tuple(int d, double phase) {
    ComplexMatrix s = ComplexMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i) s((i + 1) % d, i) = 1.0;
    ComplexMatrix diag = ComplexMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
        diag(i, i) = std::polar((i + 1) / static_cast<double>(d), phase);
    return MatrixTuple(d, {0.5 * s, diag});
}

} // namespace

int main() {
    Rng rng(11);
    const MatrixTuple a = shift_tuple(2, 0.0);
    const MatrixTuple b = shift_tuple(2, 1.1);

    // both points carry one copy of each class, glued differently
    const ComplexMatrix base = haar_unitary(4, rng);
    SampledTower tower({{"a", a}, {"b", b}},
                       {{"p", base, {"a", "b"}},
                        {"q", base * haar_unitary(4, rng), {"a", "b"}}});

    const TowerFunction f = separate(tower, "p", "q", rng);
    const double gap = operator_norm(evaluate(tower, f, "p") - evaluate(tower, f, "q"));
    std::printf("separating function found: |f(p) - f(q)| = %.3f\n", gap);
    std::printf("sup norm over the tower: %.3f\n", sup_norm(tower, f));
    std::printf("unit function is central: %s\n",
                is_central(tower, unit_function(tower)) ? "yes" : "no");

    // averaging a conjugation-equivariant callback lands in the commutant of
    // the point stabilizer, exactly, after finitely many samples
    const MatrixTuple x = tower.raw_point("p");
    Rng work(3);
    const Decomposition dec = decompose(x, work);
    const StabilizerStructure stab = stabilizer_structure(x, dec);

    ComplexMatrix m(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m(i, j) = work.complex_gaussian();
    const auto callback = [&m](const ComplexMatrix& u) { return (u * m * u.adjoint()).eval(); };
    const ComplexMatrix averaged = twirl(x, callback, 32, work, stab);

    double drift = 0.0;
    for (int s = 0; s < 8; ++s) {
        const ComplexMatrix g = stab.sample_member(work);
        drift = std::max(drift, (g * averaged - averaged * g).norm());
    }
    std::printf("twirled matrix commutes with stabilizer samples up to %.2e\n", drift);
    return 0;
}
