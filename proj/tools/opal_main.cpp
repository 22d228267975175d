// Batch front end: every public operation behind a subcommand, JSON in and
// out, deterministic under fixed seed. stdout carries only the result
// payload; human diagnostics and timing go to stderr.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "opal/selfcheck.hpp"

namespace {

using opal::json;

struct Flags {
    std::uint64_t seed = 2026;
    double tol_rank = 1e-9;
    double tol_eq = 1e-8;
    int samples = opal::default_twirl_samples;
    bool json_output = true;
    bool quiet = false;
};

void attach_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--seed", f.seed, "RNG seed (all commands are deterministic under a fixed seed)");
    cmd->add_option("--tol-rank", f.tol_rank, "relative singular-value cutoff for rank decisions");
    cmd->add_option("--tol-eq", f.tol_eq, "absolute tolerance for equality checks");
    cmd->add_option("--samples", f.samples, "Monte-Carlo sample count for averaging checks");
    cmd->add_flag("--json", f.json_output, "emit JSON on stdout (default; the only format)");
    cmd->add_flag("--quiet", f.quiet, "suppress stderr diagnostics");
}

opal::Tolerances tolerances_of(const Flags& f) {
    opal::Tolerances t;
    t.rank_rel = f.tol_rank;
    t.eq_abs = f.tol_eq;
    t.check();
    return t;
}

std::string slurp(const std::string& path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw opal::ParseError("cannot open input file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

opal::MatrixTuple load_tuple(const std::string& path) {
    return opal::tuple_from_json(opal::parse_json_text(slurp(path)));
}

opal::TowerPresentation load_presentation(const std::string& path) {
    return opal::presentation_from_json(opal::parse_json_text(slurp(path)));
}

json diagnostics_to_json(const std::vector<opal::Diagnostic>& ds) {
    json out = json::array();
    for (const auto& d : ds)
        out.push_back(json{{"severity", d.severity == opal::Diagnostic::Severity::error ? "error" : "warning"},
                           {"code", d.code},
                           {"class", d.class_id},
                           {"message", d.message}});
    return out;
}

json set_to_json(const std::set<std::string>& s) {
    json out = json::array(); // std::set iterates in lexicographic id order
    for (const auto& id : s) out.push_back(id);
    return out;
}

std::string verdict_name(opal::Verdict v) {
    switch (v) {
        case opal::Verdict::Regular: return "regular";
        case opal::Verdict::Singular: return "singular";
        default: return "not_solid";
    }
}

json classification_to_json(const opal::Classification& c) {
    return json{{"verdict", verdict_name(c.verdict)},
                {"vanishing_classes", set_to_json(c.vanishing)},
                {"height", c.height},
                {"unbounded_degrees", c.unbounded}};
}

// Report envelope written to stdout. Wall time is a diagnostic (stderr only)
// so identical inputs produce byte-identical stdout.
void emit_report(const std::string& command, const Flags& f, json result,
                 std::vector<std::string> warnings = {}) {
    json report{{"command", command},
                {"seed", f.seed},
                {"tolerances", json{{"rank_rel", f.tol_rank}, {"eq_abs", f.tol_eq}}},
                {"result", std::move(result)},
                {"warnings", warnings}};
    std::cout << report.dump(2) << "\n";
}

void emit_artifact(const json& artifact) { std::cout << artifact.dump(2) << "\n"; }

// Presentations must be clean before the tower algorithms run; exit code 5
// reports the diagnostics when they are not.
struct InvalidPresentation {
    std::vector<opal::Diagnostic> diagnostics;
};

std::vector<opal::Diagnostic> require_clean(const opal::TowerPresentation& p) {
    auto ds = opal::validate(p);
    if (!opal::diagnostics_clean(ds)) throw InvalidPresentation{std::move(ds)};
    return ds; // warnings only
}

std::vector<std::string> warning_messages(const std::vector<opal::Diagnostic>& ds) {
    std::vector<std::string> out;
    for (const auto& d : ds)
        if (d.severity == opal::Diagnostic::Severity::warning) out.push_back(d.code + ": " + d.message);
    return out;
}

int exit_code_for(const opal::Error& e) {
    if (dynamic_cast<const opal::ParseError*>(&e)) return 2;
    if (dynamic_cast<const opal::NotHermitian*>(&e) ||
        dynamic_cast<const opal::DecompositionFailed*>(&e) ||
        dynamic_cast<const opal::NotSeparable*>(&e) ||
        dynamic_cast<const opal::InternalInconsistency*>(&e))
        return 3;
    if (dynamic_cast<const opal::InvalidShape*>(&e) ||
        dynamic_cast<const opal::LabelMismatch*>(&e) ||
        dynamic_cast<const opal::NotUnitary*>(&e))
        return 4;
    return 5; // validation family: bad values, unknown ids, unusable inputs
}

} // namespace

int main(int argc, char** argv) {
    std::ios::sync_with_stdio(false);
    Flags flags;

    CLI::App app{"operator-algebra toolkit: tuple decomposition, relations, towers"};
    app.require_subcommand(1);
    attach_common(&app, flags);

    std::string in_a, in_b;
    int tail_n = 1;
    std::string builder;
    int builder_max_degree = 6;
    int builder_depth = 2;
    int cap_degree = 12;
    bool emit_composite = false;

    auto* cmd_decompose = app.add_subcommand("decompose", "split a tuple into irreducible factors");
    cmd_decompose->add_option("input", in_a, "tuple JSON file, or - for stdin")->required();
    attach_common(cmd_decompose, flags);

    auto* cmd_equiv = app.add_subcommand("equiv", "test unitary equivalence of two tuples");
    cmd_equiv->add_option("left", in_a, "tuple JSON file")->required();
    cmd_equiv->add_option("right", in_b, "tuple JSON file, or - for stdin")->required();
    attach_common(cmd_equiv, flags);

    auto* cmd_disjoint = app.add_subcommand("disjoint", "test whether two tuples share no factor");
    cmd_disjoint->add_option("left", in_a, "tuple JSON file")->required();
    cmd_disjoint->add_option("right", in_b, "tuple JSON file, or - for stdin")->required();
    attach_common(cmd_disjoint, flags);

    auto* cmd_subordinate =
        app.add_subcommand("subordinate", "test whether the left tuple is a summand of the right");
    cmd_subordinate->add_option("left", in_a, "tuple JSON file")->required();
    cmd_subordinate->add_option("right", in_b, "tuple JSON file, or - for stdin")->required();
    attach_common(cmd_subordinate, flags);

    auto* cmd_tower = app.add_subcommand("tower", "tower presentation analysis");
    cmd_tower->require_subcommand(1);

    auto* tower_analyze = cmd_tower->add_subcommand("analyze", "full presentation report");
    tower_analyze->add_option("input", in_a, "presentation JSON file, or - for stdin");
    attach_common(tower_analyze, flags);

    auto* tower_tail = cmd_tower->add_subcommand("tail", "classes surviving past a degree cut");
    tower_tail->add_option("--n", tail_n, "degree threshold (classes of degree >= n seed the result)")
        ->required();
    tower_tail->add_option("input", in_a, "presentation JSON file, or - for stdin");
    attach_common(tower_tail, flags);

    auto* tower_classify = cmd_tower->add_subcommand("classify", "regular / singular / not solid");
    tower_classify->add_option("input", in_a, "presentation JSON file, or - for stdin");
    attach_common(tower_classify, flags);

    auto* tower_closed = cmd_tower->add_subcommand("closed-test", "tail-closedness certificate");
    tower_closed->add_option("input", in_a, "presentation JSON file, or - for stdin");
    attach_common(tower_closed, flags);

    auto* tower_example = cmd_tower->add_subcommand("example", "emit a built-in presentation");
    tower_example->add_option("builder", builder, "exm-clo | non-one")
        ->required()
        ->check(CLI::IsMember({"exm-clo", "non-one"}));
    tower_example->add_option("--max-degree", builder_max_degree, "largest class degree emitted");
    tower_example->add_option("--depth", builder_depth, "per-degree family depth");
    attach_common(tower_example, flags);

    auto* cmd_selfcheck = app.add_subcommand("selfcheck", "run the seeded property suites");
    cmd_selfcheck->add_option("--max-degree", cap_degree, "degree cap for generated instances");
    cmd_selfcheck->add_flag("--emit-composite", emit_composite,
                            "emit one seeded composite tuple with ground truth instead");
    attach_common(cmd_selfcheck, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    const auto t0 = std::chrono::steady_clock::now();
    int status = 0;
    try {
        const opal::Tolerances tol = tolerances_of(flags);
        opal::Rng rng(flags.seed);

        if (*cmd_decompose) {
            const opal::MatrixTuple x = load_tuple(in_a);
            opal::Decomposition dec = opal::decompose(x, rng, tol);
            const double residual =
                opal::tuple_distance(opal::act(dec.conjugator, x, tol), dec.canonical_form());
            emit_report("decompose", flags, opal::decomposition_to_json(dec, residual));
        } else if (*cmd_equiv) {
            const opal::MatrixTuple x = load_tuple(in_a);
            const opal::MatrixTuple y = load_tuple(in_b);
            opal::EquivalenceResult res = opal::are_equivalent(x, y, tol);
            json payload{{"equivalent", res.equivalent}};
            if (res.equivalent) {
                payload["witness"] = opal::matrix_to_json(*res.witness);
                payload["residual"] = opal::tuple_distance(opal::act(*res.witness, x, tol), y);
            } else {
                payload["witness"] = nullptr;
            }
            emit_report("equiv", flags, std::move(payload));
        } else if (*cmd_disjoint) {
            emit_report("disjoint", flags,
                        json{{"disjoint", opal::are_disjoint(load_tuple(in_a), load_tuple(in_b), tol)}});
        } else if (*cmd_subordinate) {
            emit_report(
                "subordinate", flags,
                json{{"subordinate", opal::is_subordinate(load_tuple(in_a), load_tuple(in_b), tol)}});
        } else if (*tower_analyze) {
            const opal::TowerPresentation p = load_presentation(in_a.empty() ? "-" : in_a);
            const auto warnings = require_clean(p);
            const int h = opal::height(p);
            json tails = json::array();
            for (int n = 1; n <= h + 1; ++n)
                tails.push_back(json{{"n", n}, {"classes", set_to_json(opal::tail_subtower(p, n))}});
            json payload{{"height", h},
                         {"core_size", static_cast<int>(p.classes.size())},
                         {"tails", std::move(tails)},
                         {"vanishing_classes", set_to_json(opal::vanishing_classes(p))},
                         {"classification", classification_to_json(opal::classify(p))}};
            emit_report("tower analyze", flags, std::move(payload), warning_messages(warnings));
        } else if (*tower_tail) {
            const opal::TowerPresentation p = load_presentation(in_a.empty() ? "-" : in_a);
            const auto warnings = require_clean(p);
            emit_report("tower tail", flags,
                        json{{"n", tail_n}, {"classes", set_to_json(opal::tail_subtower(p, tail_n))}},
                        warning_messages(warnings));
        } else if (*tower_classify) {
            const opal::TowerPresentation p = load_presentation(in_a.empty() ? "-" : in_a);
            const auto warnings = require_clean(p);
            emit_report("tower classify", flags, classification_to_json(opal::classify(p)),
                        warning_messages(warnings));
        } else if (*tower_closed) {
            const opal::TowerPresentation p = load_presentation(in_a.empty() ? "-" : in_a);
            const auto warnings = require_clean(p);
            auto [passed, violations] = opal::closedness_test(p);
            json vs = json::array();
            for (const auto& v : violations) {
                json item{{"n", v.n}, {"class", v.class_id}};
                if (v.limit) {
                    json limit = json::object();
                    for (const auto& [id, mult] : *v.limit) limit[id] = mult;
                    item["limit"] = std::move(limit);
                } else {
                    item["limit"] = nullptr;
                }
                vs.push_back(std::move(item));
            }
            emit_report("tower closed-test", flags,
                        json{{"passed", passed}, {"violations", std::move(vs)}},
                        warning_messages(warnings));
        } else if (*tower_example) {
            const opal::TowerPresentation p =
                builder == "exm-clo" ? opal::build_example_clo(builder_max_degree, builder_depth)
                                     : opal::build_non_one(builder_max_degree, builder_depth);
            emit_artifact(opal::presentation_to_json(p));
        } else if (*cmd_selfcheck) {
            if (emit_composite) {
                emit_artifact(opal::selfcheck::emit_composite(flags.seed, tol));
            } else {
                opal::selfcheck::Caps caps;
                caps.max_degree = cap_degree;
                caps.mc_samples = flags.samples;
                auto results =
                    opal::selfcheck::run_all(flags.seed, caps, tol, flags.quiet ? nullptr : &std::cerr);
                emit_report("selfcheck", flags, opal::selfcheck::suites_to_json(results));
                if (!opal::selfcheck::all_passed(results)) status = 1;
            }
        }
    } catch (const InvalidPresentation& bad) {
        for (const auto& d : bad.diagnostics)
            if (!flags.quiet)
                std::cerr << (d.severity == opal::Diagnostic::Severity::error ? "error" : "warning") << " ["
                          << d.code << "] " << d.class_id << ": " << d.message << "\n";
        emit_report("tower", flags, json{{"diagnostics", diagnostics_to_json(bad.diagnostics)}});
        return 5;
    } catch (const opal::Error& e) {
        if (!flags.quiet) std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        if (!flags.quiet) std::cerr << "error: " << e.what() << "\n";
        return 3;
    }

    if (!flags.quiet) {
        const auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);
        std::cerr << "[time] " << dt.count() << "s\n";
    }
    return status;
}
