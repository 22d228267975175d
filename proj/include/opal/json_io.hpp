#pragma once

// JSON (de)serialization for the shipped file formats: matrix tuples,
// decompositions and tower presentations. Complex entries are [re, im]
// pairs so values round-trip bit-exactly for finite doubles.

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "opal/decompose.hpp"
#include "opal/towerspec.hpp"
#include "opal/tuples.hpp"

namespace opal {

using nlohmann::json;

inline json matrix_to_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline ComplexMatrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw ParseError("matrix must be a nonempty array of rows");
    const auto rows = j.size();
    const auto cols = j[0].is_array() ? j[0].size() : 0;
    if (cols == 0) throw ParseError("matrix rows must be nonempty arrays");
    ComplexMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols)
            throw ParseError("matrix rows have inconsistent lengths");
        for (std::size_t k = 0; k < cols; ++k) {
            const json& e = j[i][k];
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                throw ParseError("matrix entries must be [re, im] number pairs");
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                cxd(e[0].get<double>(), e[1].get<double>());
        }
    }
    return m;
}

inline json tuple_to_json(const MatrixTuple& x) {
    json letters = json::array();
    for (const auto& l : x.letters) letters.push_back(matrix_to_json(l));
    return json{{"label_count", x.label_count}, {"degree", x.degree},
                {"letters", std::move(letters)}};
}

inline MatrixTuple tuple_from_json(const json& j) {
    if (!j.is_object() || !j.contains("label_count") || !j.contains("degree") ||
        !j.contains("letters"))
        throw ParseError("tuple file needs label_count, degree and letters");
    if (!j["label_count"].is_number_integer() || !j["degree"].is_number_integer() ||
        !j["letters"].is_array())
        throw ParseError("tuple file fields have wrong types");
    const int L = j["label_count"].get<int>();
    const int d = j["degree"].get<int>();
    if (static_cast<int>(j["letters"].size()) != L)
        throw ParseError("letters array length does not match label_count");
    std::vector<ComplexMatrix> ls;
    ls.reserve(j["letters"].size());
    for (const auto& lj : j["letters"]) {
        ComplexMatrix m = matrix_from_json(lj);
        if (m.rows() != d || m.cols() != d)
            throw ParseError("letter is not a degree x degree matrix");
        ls.push_back(std::move(m));
    }
    try {
        return MatrixTuple(d, std::move(ls));
    } catch (const Error& e) {
        throw ParseError(std::string("tuple file invalid: ") + e.what());
    }
}

inline json decomposition_to_json(const Decomposition& dec, double residual) {
    json factors = json::array();
    for (const auto& f : dec.factors)
        factors.push_back(json{{"degree", f.irreducible.degree},
                               {"multiplicity", f.multiplicity},
                               {"letters", tuple_to_json(f.irreducible)["letters"]}});
    return json{{"conjugator", matrix_to_json(dec.conjugator)},
                {"factors", std::move(factors)},
                {"reconstruction_residual", residual}};
}

inline json presentation_to_json(const TowerPresentation& p) {
    json classes = json::array();
    for (const auto& c : p.classes) {
        json limits = json::array();
        for (const auto& m : c.limits) {
            json pairs = json::array();
            for (const auto& [id, mult] : m) pairs.push_back(json::array({id, mult}));
            limits.push_back(std::move(pairs));
        }
        classes.push_back(json{{"id", c.id},
                               {"degree", c.degree},
                               {"kind", c.kind == ClassKind::Sequence ? "sequence" : "singleton"},
                               {"limits", std::move(limits)},
                               {"in_every_tail", c.in_every_tail}});
    }
    json out{{"classes", std::move(classes)}};
    if (p.theta) out["theta"] = *p.theta;
    return out;
}

inline TowerPresentation presentation_from_json(const json& j) {
    if (!j.is_object() || !j.contains("classes") || !j["classes"].is_array())
        throw ParseError("presentation file needs a classes array");
    TowerPresentation p;
    for (const auto& cj : j["classes"]) {
        if (!cj.is_object() || !cj.contains("id") || !cj.contains("degree") ||
            !cj.contains("kind"))
            throw ParseError("class needs id, degree and kind");
        TowerClass c;
        if (!cj["id"].is_string() || !cj["degree"].is_number_integer())
            throw ParseError("class id/degree have wrong types");
        c.id = cj["id"].get<std::string>();
        c.degree = cj["degree"].get<int>();
        const std::string kind = cj["kind"].is_string() ? cj["kind"].get<std::string>() : "";
        if (kind == "sequence")
            c.kind = ClassKind::Sequence;
        else if (kind == "singleton")
            c.kind = ClassKind::Singleton;
        else
            throw ParseError("class kind must be 'singleton' or 'sequence'");
        if (cj.contains("limits")) {
            if (!cj["limits"].is_array()) throw ParseError("limits must be an array");
            for (const auto& lj : cj["limits"]) {
                if (!lj.is_array()) throw ParseError("limit multiset must be an array of pairs");
                Multiset m;
                for (const auto& pj : lj) {
                    if (!pj.is_array() || pj.size() != 2 || !pj[0].is_string() ||
                        !pj[1].is_number_integer())
                        throw ParseError("limit entries must be [id, multiplicity] pairs");
                    m[pj[0].get<std::string>()] += pj[1].get<int>();
                }
                c.limits.push_back(std::move(m));
            }
        }
        if (cj.contains("in_every_tail")) {
            if (!cj["in_every_tail"].is_boolean())
                throw ParseError("in_every_tail must be a boolean");
            c.in_every_tail = cj["in_every_tail"].get<bool>();
        }
        p.classes.push_back(std::move(c));
    }
    if (j.contains("theta") && !j["theta"].is_null()) {
        if (!j["theta"].is_string()) throw ParseError("theta must be a class id string");
        p.theta = j["theta"].get<std::string>();
    }
    return p;
}

inline json parse_json_text(const std::string& text) {
    json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw ParseError("input is not valid JSON");
    return j;
}

} // namespace opal
