#include <catch2/catch_amalgamated.hpp>

#include "opal/json_io.hpp"
#include "opal/towerspec.hpp"

using namespace opal;

namespace {

// a(1) <- b(2) via {a:2}; c(3) isolated; d(4) <- b via {b:2}; no flags
TowerPresentation chain() {
    TowerPresentation p;
    p.classes.push_back({"a", 1, ClassKind::Singleton, {}, false});
    p.classes.push_back({"b", 2, ClassKind::Sequence, {Multiset{{"a", 2}}}, false});
    p.classes.push_back({"c", 3, ClassKind::Sequence, {}, false});
    p.classes.push_back({"d", 4, ClassKind::Sequence, {Multiset{{"b", 2}}}, false});
    return p;
}

// one class per degree, no limit edges, no flags
TowerPresentation flat(int top) {
    TowerPresentation p;
    for (int n = 1; n <= top; ++n)
        p.classes.push_back({"q" + std::to_string(n), n, ClassKind::Singleton, {}, false});
    return p;
}

bool has_code(const std::vector<Diagnostic>& ds, const std::string& code,
              const std::string& cls) {
    for (const auto& d : ds)
        if (d.code == code && d.class_id == cls) return true;
    return false;
}

} // namespace

TEST_CASE("validation flags each defect with its code", "[towerspec]") {
    TowerPresentation p;
    p.theta = "broken";
    p.classes.push_back({"x", 1, ClassKind::Singleton, {}, false});
    p.classes.push_back({"x", 0, ClassKind::Singleton, {Multiset{{"x", 1}}}, false});
    p.classes.push_back({"y", 2, ClassKind::Sequence,
                         {Multiset{}, Multiset{{"x", 0}}, Multiset{{"ghost", 1}},
                          Multiset{{"x", 1}}},
                         false});
    p.classes.push_back({"broken", 2, ClassKind::Singleton, {}, false});

    const auto ds = validate(p);
    REQUIRE(!diagnostics_clean(ds));
    REQUIRE(has_code(ds, "duplicate-id", "x"));
    REQUIRE(has_code(ds, "bad-degree", "x"));
    REQUIRE(has_code(ds, "kind-violation", "x"));
    REQUIRE(has_code(ds, "empty-limit", "y"));
    REQUIRE(has_code(ds, "bad-multiplicity", "y"));
    REQUIRE(has_code(ds, "unknown-id", "y"));
    REQUIRE(has_code(ds, "degree-mismatch", "y")); // {x:1} totals 1, class is 2
    REQUIRE(has_code(ds, "theta-degree", "broken"));

    TowerPresentation q = chain();
    REQUIRE(validate(q).empty());
    q.theta = "nowhere";
    REQUIRE(has_code(validate(q), "unknown-id", "nowhere"));
}

TEST_CASE("axiomatic tail flags get a warning, not an error", "[towerspec]") {
    const TowerPresentation p = build_example_clo(4, 2);
    const auto ds = validate(p);
    REQUIRE(diagnostics_clean(ds)); // warnings only
    REQUIRE(has_code(ds, "flag-axiomatic", "theta"));
    REQUIRE(validate(chain()).empty());
}

TEST_CASE("height and subtower generation", "[towerspec]") {
    REQUIRE_THROWS_AS(height(TowerPresentation{}), EmptyTower);
    const TowerPresentation p = chain();
    REQUIRE(height(p) == 4);

    REQUIRE_THROWS_AS(generated_subtower(p, {"zz"}), NotFound);
    const std::set<std::string> sub = generated_subtower(p, {"d"});
    REQUIRE(sub == std::set<std::string>{"a", "b", "d"});
    // closure operator laws: extensive and idempotent
    REQUIRE(sub.count("d") == 1);
    REQUIRE(generated_subtower(p, sub) == sub);
}

TEST_CASE("tail subtowers of the chain presentation", "[towerspec]") {
    const TowerPresentation p = chain();
    const std::set<std::string> all = {"a", "b", "c", "d"};
    REQUIRE_THROWS_AS(tail_subtower(p, 0), ValidationError);
    REQUIRE(tail_subtower(p, 1) == all);
    REQUIRE(tail_subtower(p, 2) == all); // b and d pull a back in
    REQUIRE(tail_subtower(p, 3) == all);
    REQUIRE(tail_subtower(p, 4) == std::set<std::string>{"a", "b", "d"});
    REQUIRE(tail_subtower(p, 5).empty());
    REQUIRE(vanishing_classes(p).empty());
}

TEST_CASE("classification of the reference presentations", "[towerspec]") {
    const Classification reg = classify(flat(5));
    REQUIRE(reg.verdict == Verdict::Regular);
    REQUIRE(reg.vanishing.empty());
    REQUIRE(reg.height == 5);
    REQUIRE(!reg.unbounded);

    for (const TowerPresentation& p : {build_example_clo(6, 2), build_non_one(6, 2)}) {
        const Classification c = classify(p);
        REQUIRE(c.verdict == Verdict::Singular);
        REQUIRE(c.vanishing == std::set<std::string>{"theta"});
        REQUIRE(c.height == 6);
        REQUIRE(c.unbounded);
    }

    // a persistent class of degree 2 is not the distinguished point shape
    TowerPresentation odd = flat(3);
    odd.classes[1].in_every_tail = true;
    REQUIRE(classify(odd).verdict == Verdict::NotSolid);
}

TEST_CASE("degree-cap witnesses for bounded towers", "[towerspec]") {
    // flat tower: the first empty-below-cap tail is always cap + 1
    const auto flat_wit = prop_solid_check(flat(5));
    REQUIRE(flat_wit.size() == 5);
    for (const auto& [cap, witness] : flat_wit) {
        REQUIRE(witness.has_value());
        REQUIRE(*witness == cap + 1);
    }

    // a flagged degree-1 class sits in every tail, so no cap gets a witness
    for (const TowerPresentation& p : {build_example_clo(6, 2), build_non_one(6, 2)}) {
        for (const auto& [cap, witness] : prop_solid_check(p)) REQUIRE(!witness.has_value());
    }
}

TEST_CASE("closedness holds for the shell family and fails for the collapse family",
          "[towerspec]") {
    REQUIRE_THROWS_AS(closedness_test(chain()), ThetaRequired);

    const auto [ok, none] = closedness_test(build_example_clo(6, 2));
    REQUIRE(ok);
    REQUIRE(none.empty());

    const auto [bad, violations] = closedness_test(build_non_one(6, 2));
    REQUIRE(!bad);
    REQUIRE(!violations.empty());
    for (const auto& v : violations) {
        REQUIRE(v.class_id.rfind("z(", 0) == 0);
        REQUIRE(v.limit.has_value());
        REQUIRE(v.limit->count("theta") == 1);
        REQUIRE(v.n > v.limit->at("theta")); // excluded only above its own degree
    }
}

TEST_CASE("reference builders produce the expected class graphs", "[towerspec]") {
    REQUIRE_THROWS_AS(build_example_clo(1, 2), Unsupported);
    REQUIRE_THROWS_AS(build_example_clo(13, 2), Unsupported);
    REQUIRE_THROWS_AS(build_example_clo(4, 0), Unsupported);
    REQUIRE_THROWS_AS(build_non_one(1, 2), Unsupported);

    const TowerPresentation p = build_example_clo(4, 2);
    REQUIRE(p.classes.size() == 7); // theta plus two shells per degree 2..4
    REQUIRE(p.theta == "theta");
    REQUIRE(p.at("theta").in_every_tail);
    REQUIRE(p.at("ir(2,3)").limits.empty());
    REQUIRE(p.at("ir(3,5)").limits.empty());
    // degree-4 shells accumulate at doubled degree-2 shells
    const std::vector<Multiset> want = {Multiset{{"ir(2,4)", 2}}};
    REQUIRE(p.at("ir(4,5)").limits == want);
    REQUIRE(p.at("ir(4,6)").limits == want);

    const std::set<std::string> tail3 = {"theta",   "ir(2,4)", "ir(3,4)",
                                         "ir(3,5)", "ir(4,5)", "ir(4,6)"};
    REQUIRE(tail_subtower(p, 3) == tail3);

    const TowerPresentation q = build_non_one(3, 1);
    REQUIRE(q.classes.size() == 3); // theta, z(2,3), z(3,4)
    REQUIRE(q.at("z(3,4)").limits == std::vector<Multiset>{Multiset{{"theta", 3}}});
    REQUIRE(point_degree(q, {{"z(2,3)", 2}, {"theta", 1}}) == 5);
}

TEST_CASE("morphism validation checks degree and continuity", "[towerspec]") {
    const TowerPresentation p = chain();

    std::map<std::string, TowerPoint> ident;
    for (const auto& c : p.classes) ident[c.id] = {{{c.id, 1}}};
    REQUIRE(validate_morphism(p, p, ident).empty());

    std::map<std::string, TowerPoint> missing = ident;
    missing.erase("c");
    REQUIRE_THROWS_AS(validate_morphism(p, p, missing), NotFound);

    std::map<std::string, TowerPoint> inflate = ident;
    inflate["a"] = {{{"b", 1}}};
    REQUIRE(has_code(validate_morphism(p, p, inflate), "m1-degree", "a"));

    // degree-true map that breaks continuity: send b somewhere whose limits
    // cannot produce the image of {a:2}
    TowerPresentation dst;
    dst.classes.push_back({"u", 1, ClassKind::Singleton, {}, false});
    dst.classes.push_back({"v", 2, ClassKind::Sequence, {}, false});
    dst.classes.push_back({"w", 3, ClassKind::Sequence, {}, false});
    dst.classes.push_back({"t", 4, ClassKind::Sequence, {Multiset{{"v", 2}}}, false});
    std::map<std::string, TowerPoint> broken = {
        {"a", {{{"u", 1}}}}, {"b", {{{"v", 1}}}}, {"c", {{{"w", 1}}}}, {"d", {{{"t", 1}}}}};
    const auto ds = validate_morphism(p, dst, broken);
    REQUIRE(has_code(ds, "continuity", "b"));  // {v} cannot reach {u,u}
    REQUIRE(!has_code(ds, "continuity", "d")); // {t} reaches {v,v} through its limit
}

TEST_CASE("collapse morphism onto repeated theta is continuous", "[towerspec]") {
    const TowerPresentation p = build_non_one(4, 2);
    std::map<std::string, TowerPoint> collapse;
    for (const auto& c : p.classes)
        collapse[c.id] = {{{"theta", c.degree}}};
    REQUIRE(validate_morphism(p, p, collapse).empty());
}

TEST_CASE("presentation JSON round trip", "[towerspec]") {
    const TowerPresentation p = build_example_clo(4, 2);
    const json j = presentation_to_json(p);
    const TowerPresentation q = presentation_from_json(j);
    REQUIRE(q.theta == p.theta);
    REQUIRE(q.classes.size() == p.classes.size());
    for (std::size_t i = 0; i < p.classes.size(); ++i) {
        REQUIRE(q.classes[i].id == p.classes[i].id);
        REQUIRE(q.classes[i].degree == p.classes[i].degree);
        REQUIRE(q.classes[i].kind == p.classes[i].kind);
        REQUIRE(q.classes[i].limits == p.classes[i].limits);
        REQUIRE(q.classes[i].in_every_tail == p.classes[i].in_every_tail);
    }
    REQUIRE(tail_subtower(q, 3) == tail_subtower(p, 3));
}
