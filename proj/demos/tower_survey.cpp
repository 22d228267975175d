// Surveys the two built-in reference tower families: one is singular but
// closed, the other singular and provably non-closed. Prints classification,
// truncated tails and closedness verdicts side by side.

#include <cstdio>

#include "opal/towerspec.hpp"

using namespace opal;

namespace {

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Regular: return "regular";
        case Verdict::Singular: return "singular";
        default: return "not solid";
    }
}

void survey(const char* title, const TowerPresentation& p) {
    std::printf("== %s (%zu classes)\n", title, p.classes.size());

    const Classification c = classify(p);
    std::printf("verdict: %s, height %d\n", verdict_name(c.verdict), c.height);
    std::printf("vanishing classes:");
    for (const auto& id : c.vanishing) std::printf(" %s", id.c_str());
    std::printf("\n");

    for (int n = 1; n <= c.height + 1; n += 2) {
        const auto tail = tail_subtower(p, n);
        std::printf("tail at degree >= %d keeps %zu classes\n", n, tail.size());
    }

    const auto [closed, violations] = closedness_test(p);
    std::printf("closedness: %s\n", closed ? "passes" : "fails");
    for (std::size_t i = 0; i < violations.size() && i < 3; ++i)
        std::printf("  violation: class %s escapes the degree-%d tail\n",
                    violations[i].class_id.c_str(), violations[i].n);
    std::printf("\n");
}

} // namespace

int main() {
    survey("dyadic shell family", build_example_clo(6, 2));
    survey("collapse-to-theta family", build_non_one(6, 2));
    return 0;
}
