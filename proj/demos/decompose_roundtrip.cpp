// Builds a dressed composite out of two hidden irreducible factors, then
// recovers the factors, their multiplicities and a unitary change of basis
// from the raw letters alone.

#include <cstdio>

#include "opal/decompose.hpp"

using namespace opal;

namespace {

MatrixTuple random_irreducible(int d, Rng& rng) {
    for (;;) {
        std::vector<ComplexMatrix> ls;
        for (int l = 0; l < 2; ++l) {
            ComplexMatrix g(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) g(i, j) = rng.complex_gaussian();
            ls.push_back(g / (2.0 * operator_norm(g)));
        }
        MatrixTuple x(d, std::move(ls));
        if (is_irreducible(x)) return x;
    }
}

} // namespace

int main() {
    Rng rng(2026);
    const MatrixTuple a = random_irreducible(2, rng);
    const MatrixTuple b = random_irreducible(3, rng);

    // hidden layout: a twice, b once, then a random change of basis
    const MatrixTuple plain = oplus(times(2, a), b);
    const MatrixTuple x = act(haar_unitary(plain.degree, rng), plain);
    std::printf("input: degree %d, %d letters\n", x.degree, x.label_count);

    Rng work(7);
    const Decomposition dec = decompose(x, work);
    for (const auto& f : dec.factors)
        std::printf("  factor: degree %d, multiplicity %d\n", f.irreducible.degree,
                    f.multiplicity);

    const double residual = tuple_distance(act(dec.conjugator, x), dec.canonical_form());
    std::printf("reconstruction residual: %.2e\n", residual);

    // the recovered degree-2 factor is unitarily equivalent to the hidden one
    for (const auto& f : dec.factors) {
        if (f.irreducible.degree != a.degree) continue;
        const EquivalenceResult eq = are_equivalent(f.irreducible, a);
        std::printf("degree-2 factor matches the hidden input: %s\n",
                    eq.equivalent ? "yes" : "no");
    }
    return 0;
}
