#pragma once

// JSON instance files and JSON/CSV result rendering.
//
// Input schema (all rationals are integers or "p/q" strings; floats are
// rejected to keep the arithmetic exact):
//   {
//     "space":      {"atoms": 3} or {"probs": ["1/4","1/4","1/2"], "labels": [...]},
//     "assets":     [{"payoff": [per-atom values], "price": value}, ...],
//     "acceptance": {"type": "polyhedral", "rows": [{"phi": [...], "rhs": ...}]}
//                 | {"type": "scenario", "event": [atom indexes]}
//                 | {"type": "es", "alpha": "1/2"} | {"type": "var", "alpha": "1/4"}
//                 | {"type": "genscen", "measures": [[...]], "floors": [...]}
//                 | {"type": "utility", "kind": "exp", "a": "1", "floor": "0"}
//                 | {"type": "analytic", "id": "star2d" | "staircase2d"},
//     "positions":  {"name": [vector], ...}            (optional)
//     "probes":     [{"base": v|name, "direction": v|name, "epsilon": r?}, ...]  (optional)
//   }
//
// Output: every rational is rendered as a "p/q" string ("p" when integral);
// an optional decimals knob adds display-only decimal fields. Vertex, ray
// and lineality lists are sorted lexicographically so identical inputs give
// byte-identical output.

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "optpay/diagnostics.hpp"
#include "optpay/fixtures.hpp"

namespace optpay {

using nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Rational <-> text.
// ---------------------------------------------------------------------------

inline std::string rational_str(const Rational& r) { return r.str(); }

inline std::string decimal_str(const Rational& r, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, to_double(r));
    return std::string(buf);
}

inline Rational parse_rational_text(const std::string& s) {
    if (s.empty()) throw BadParameter("empty rational literal");
    size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    bool digits = false, slash = false, denom_digits = false;
    for (; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '/') {
            if (slash || !digits) throw BadParameter("bad rational literal '" + s + "'");
            slash = true;
        } else if (c >= '0' && c <= '9') {
            (slash ? denom_digits : digits) = true;
        } else {
            throw BadParameter("bad rational literal '" + s + "'");
        }
    }
    if (!digits || (slash && !denom_digits))
        throw BadParameter("bad rational literal '" + s + "'");
    try {
        Rational r(s[0] == '+' ? s.substr(1) : s);  // the big-int parser rejects '+'
        return r;
    } catch (const std::exception&) {
        throw BadParameter("bad rational literal '" + s + "' (zero denominator?)");
    }
}

inline Rational parse_rational(const json& j) {
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_string()) return parse_rational_text(j.get<std::string>());
    if (j.is_number_float())
        throw BadParameter("floating-point literals are not accepted; use \"p/q\" strings");
    throw BadParameter("expected an integer or a \"p/q\" string, got " + j.dump());
}

inline Vec parse_vec(const json& j) {
    if (!j.is_array()) throw BadParameter("expected an array of rationals, got " + j.dump());
    Vec out;
    for (const auto& e : j) out.push_back(parse_rational(e));
    return out;
}

inline Mat parse_mat(const json& j) {
    if (!j.is_array()) throw BadParameter("expected an array of vectors, got " + j.dump());
    Mat out;
    for (const auto& e : j) out.push_back(parse_vec(e));
    return out;
}

inline json vec_json(const Vec& v) {
    json out = json::array();
    for (const auto& r : v) out.push_back(rational_str(r));
    return out;
}

inline json mat_json(const Mat& m) {
    json out = json::array();
    for (const auto& v : m) out.push_back(vec_json(v));
    return out;
}

// ---------------------------------------------------------------------------
// Instance files.
// ---------------------------------------------------------------------------

struct ProbeSpec {
    Vec base;
    Vec direction;
    std::optional<Rational> epsilon;
};

struct InstanceFile {
    ProblemInstance instance;
    std::map<std::string, Vec> positions;  // named positions from the file
    std::vector<ProbeSpec> probes;
};

inline AcceptanceSet parse_acceptance(const json& j) {
    if (!j.is_object() || !j.contains("type"))
        throw BadParameter("acceptance: expected an object with a \"type\" field");
    const std::string type = j.at("type").get<std::string>();
    if (type == "polyhedral") {
        PolyhedralA acc;
        if (!j.contains("rows") || !j.at("rows").is_array())
            throw BadParameter("polyhedral acceptance: needs a \"rows\" array");
        for (const auto& row : j.at("rows"))
            acc.rows.push_back(Row{parse_vec(row.at("phi")), parse_rational(row.at("rhs"))});
        return acc;
    }
    if (type == "scenario") {
        Scenario acc;
        for (const auto& e : j.at("event")) {
            if (!e.is_number_integer() || e.get<long long>() < 0)
                throw BadParameter("scenario acceptance: event atoms must be indexes >= 0");
            acc.event.push_back(static_cast<size_t>(e.get<long long>()));
        }
        return acc;
    }
    if (type == "es") return ExpectedShortfall{parse_rational(j.at("alpha"))};
    if (type == "var") return VaRSet{parse_rational(j.at("alpha"))};
    if (type == "genscen")
        return GenScenarios{parse_mat(j.at("measures")), parse_vec(j.at("floors"))};
    if (type == "utility") {
        if (j.value("kind", "exp") != "exp")
            throw BadParameter("utility acceptance: only kind \"exp\" is supported");
        return ExpUtility{parse_rational(j.at("a")), parse_rational(j.at("floor"))};
    }
    if (type == "analytic") return AnalyticSet{j.at("id").get<std::string>()};
    throw BadParameter("acceptance: unknown type '" + type + "'");
}

inline InstanceFile parse_instance_file(const json& doc) {
    if (!doc.is_object()) throw BadParameter("instance file: top level must be an object");
    for (const auto& key : {"space", "assets", "acceptance"})
        if (!doc.contains(key))
            throw BadParameter(std::string("instance file: missing \"") + key + "\" field");

    const json& sp = doc.at("space");
    Vec probs;
    std::vector<std::string> labels;
    if (sp.contains("probs")) {
        probs = parse_vec(sp.at("probs"));
    } else if (sp.contains("atoms")) {
        const auto n = sp.at("atoms").get<long long>();
        if (n <= 0) throw BadParameter("space: atoms must be positive");
        probs = Vec(static_cast<size_t>(n), Rational(1, n));
    } else {
        throw BadParameter("space: needs \"probs\" or \"atoms\"");
    }
    if (sp.contains("labels"))
        for (const auto& l : sp.at("labels")) labels.push_back(l.get<std::string>());
    auto space = make_space(std::move(probs), std::move(labels));

    const json& assets = doc.at("assets");
    if (!assets.is_array() || assets.empty())
        throw BadParameter("assets: expected a nonempty array");
    MarketData md;
    md.payoffs.assign(space.size(), Vec());
    for (const auto& asset : assets) {
        const Vec col = parse_vec(asset.at("payoff"));
        if (col.size() != space.size())
            throw BadParameter("assets: payoff length must equal the atom count");
        for (size_t i = 0; i < col.size(); ++i) md.payoffs[i].push_back(col[i]);
        md.prices.push_back(parse_rational(asset.at("price")));
    }

    InstanceFile out{make_instance(space, md, parse_acceptance(doc.at("acceptance"))), {}, {}};

    if (doc.contains("positions")) {
        const json& pos = doc.at("positions");
        if (!pos.is_object()) throw BadParameter("positions: expected an object of name -> vector");
        for (auto it = pos.begin(); it != pos.end(); ++it) {
            Vec v = parse_vec(it.value());
            if (v.size() != out.instance.atoms())
                throw BadParameter("positions: '" + it.key() + "' has the wrong dimension");
            out.positions.emplace(it.key(), std::move(v));
        }
    }

    auto resolve = [&](const json& v) -> Vec {
        if (v.is_string()) {
            const std::string name = v.get<std::string>();
            if (auto hit = out.positions.find(name); hit != out.positions.end())
                return hit->second;
            if (auto named = named_vector(out.instance.space, name)) return *named;
            throw BadParameter("unknown named position '" + name + "'");
        }
        return parse_vec(v);
    };
    if (doc.contains("probes")) {
        for (const auto& p : doc.at("probes")) {
            ProbeSpec spec;
            spec.base = resolve(p.at("base"));
            spec.direction = resolve(p.at("direction"));
            if (p.contains("epsilon")) spec.epsilon = parse_rational(p.at("epsilon"));
            out.probes.push_back(std::move(spec));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Result rendering. Generator lists are canonicalized (rays to primitive
// integer direction, lineality to a sign-normalized primitive direction),
// deduplicated and sorted, so output is deterministic.
// ---------------------------------------------------------------------------

namespace detail_json {

inline void sort_dedupe(std::vector<Vec>& rows) {
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
}

struct GeneratorLists {
    std::vector<Vec> vertices, rays, lineality;
};

inline GeneratorLists collect(const OptimalSet& set, bool payoff_space,
                              const ProblemInstance& inst) {
    GeneratorLists out;
    auto render = [&](const Vec& lambda) {
        return payoff_space ? inst.market.payoff(lambda) : lambda;
    };
    for (const auto& piece : set.pieces) {
        for (const auto& v : piece.generators.vertices) out.vertices.push_back(render(v));
        for (const auto& r : piece.generators.rays) out.rays.push_back(primitive(render(r)));
        for (const auto& l : piece.generators.lineality)
            out.lineality.push_back(primitive_signed(render(l)));
    }
    // A payoff-space rendering can collapse rays to zero when the market has
    // redundant assets; drop those.
    auto drop_zero = [](std::vector<Vec>& rows) {
        rows.erase(std::remove_if(rows.begin(), rows.end(),
                                  [](const Vec& v) { return is_zero_vec(v); }),
                   rows.end());
    };
    drop_zero(out.rays);
    drop_zero(out.lineality);
    sort_dedupe(out.vertices);
    sort_dedupe(out.rays);
    sort_dedupe(out.lineality);
    return out;
}

inline json generators_json(const GeneratorLists& g) {
    json out;
    out["vertices"] = mat_json(g.vertices);
    out["rays"] = mat_json(g.rays);
    out["lineality"] = mat_json(g.lineality);
    return out;
}

}  // namespace detail_json

inline json rho_json(const RhoResult& r, const ProblemInstance& inst,
                     std::optional<int> decimals = std::nullopt) {
    json out;
    out["value"] = rational_str(r.value);
    out["attained"] = r.attained;
    out["kind"] = r.attained ? "minimum" : "infimum";
    if (r.argmin) {
        out["argmin"] = vec_json(*r.argmin);
        out["argmin_payoff"] = vec_json(inst.market.payoff(*r.argmin));
    }
    if (decimals) out["value_decimal"] = decimal_str(r.value, *decimals);
    return out;
}

inline json optimal_set_json(const OptimalSet& set, const ProblemInstance& inst,
                             std::optional<int> decimals = std::nullopt) {
    json out;
    out["status"] = set.nonempty ? "Nonempty" : "Empty";
    out["value"] = rational_str(set.value);
    out["attained"] = set.attained;
    if (decimals) out["value_decimal"] = decimal_str(set.value, *decimals);
    if (!set.nonempty) return out;

    const auto portfolio = detail_json::collect(set, false, inst);
    json merged = detail_json::generators_json(portfolio);
    out["vertices"] = merged["vertices"];
    out["rays"] = merged["rays"];
    out["lineality"] = merged["lineality"];
    out["payoff"] = detail_json::generators_json(detail_json::collect(set, true, inst));
    json branches = json::array();
    for (const auto& piece : set.pieces) {
        OptimalSet single{true, set.value, set.attained, {piece}};
        branches.push_back(
            detail_json::generators_json(detail_json::collect(single, false, inst)));
    }
    out["branches"] = branches;
    return out;
}

// ---------------------------------------------------------------------------
// Report rendering.
// ---------------------------------------------------------------------------

inline const char* to_string(DealStatus s) {
    switch (s) {
        case DealStatus::Found: return "Found";
        case DealStatus::ProvenAbsent: return "ProvenAbsent";
        default: return "NotFound";
    }
}
inline const char* to_string(ExistenceStatus s) {
    switch (s) {
        case ExistenceStatus::AllExist: return "AllExist";
        case ExistenceStatus::NoneExist: return "NoneExist";
        default: return "PerPosition";
    }
}
inline const char* to_string(GlobalUniquenessCertificate c) {
    switch (c) {
        case GlobalUniquenessCertificate::ConeRows: return "ConeRows";
        case GlobalUniquenessCertificate::StrictConvexity: return "StrictConvexity";
        default: return "None";
    }
}
inline const char* to_string(UscStatus s) {
    switch (s) {
        case UscStatus::USC: return "USC";
        case UscStatus::NotUSC: return "NotUSC";
        default: return "Inconclusive";
    }
}
inline const char* to_string(ProbeVerdict v) {
    switch (v) {
        case ProbeVerdict::ConsistentWithLsc: return "ConsistentWithLsc";
        case ProbeVerdict::ViolationWitness: return "ViolationWitness";
        default: return "Inconclusive";
    }
}

inline json deal_report_json(const DealReport& r) {
    json out;
    out["good"] = to_string(r.good);
    if (r.good_witness) {
        out["good_witness"] = {{"portfolio", vec_json(r.good_witness->portfolio)},
                               {"payoff", vec_json(r.good_witness->payoff)}};
    }
    out["scalable"] = to_string(r.scalable);
    if (r.scalable_witness) {
        out["scalable_witness"] = {{"portfolio", vec_json(r.scalable_witness->portfolio)},
                                   {"payoff", vec_json(r.scalable_witness->payoff)}};
    }
    out["method"] = r.method;
    return out;
}

inline json existence_json(const ExistenceReport& r) {
    json out;
    out["status"] = to_string(r.status);
    out["chain"] = r.chain;
    if (r.certificate) out["certificate"] = *r.certificate;
    return out;
}

inline json uniqueness_json(const UniquenessReport& r) {
    json out;
    out["singleton"] = r.singleton;
    out["face_dim"] = r.face_dim;
    if (r.point) out["point"] = vec_json(*r.point);
    out["certificate"] = to_string(r.certificate);
    if (!r.certificate_note.empty()) out["certificate_note"] = r.certificate_note;
    if (r.active_set) {
        json act;
        act["active_rows"] = r.active_set->active;
        json sup = json::array();
        for (const auto& s : r.active_set->support)
            sup.push_back(s ? json(rational_str(*s)) : json(nullptr));
        act["support"] = sup;
        act["test_subspace_dim"] = r.active_set->test_subspace_dim;
        act["pinned"] = r.active_set->pinned;
        out["active_set"] = act;
    }
    if (!r.note.empty()) out["note"] = r.note;
    return out;
}

inline json usc_json(const UscReport& r) {
    json out;
    out["status"] = to_string(r.status);
    out["reason"] = r.reason;
    if (r.witness_position) out["witness_position"] = vec_json(*r.witness_position);
    if (r.witness_ray) out["witness_ray"] = vec_json(*r.witness_ray);
    return out;
}

inline json hypotheses_json(const HypothesisReport& h) {
    json out;
    out["branches_full_dimensional"] = h.branches_full_dimensional;
    out["strict_feasibility_at_base"] = h.strict_feasibility_at_base;
    out["strictly_positive_payoff"] = h.strictly_positive_payoff;
    if (h.interior_recession_reachable)
        out["interior_recession_reachable"] = *h.interior_recession_reachable;
    out["guaranteed"] = h.guaranteed;
    if (!h.note.empty()) out["note"] = h.note;
    return out;
}

inline json probe_json(const ProbeReport& r, std::optional<int> decimals = std::nullopt) {
    json out;
    out["base"] = vec_json(r.base);
    out["direction"] = vec_json(r.direction);
    out["scales"] = r.scales;
    out["box"] = rational_str(r.box);
    if (r.epsilon) out["epsilon"] = rational_str(*r.epsilon);
    json rows = json::array();
    for (const auto& row : r.rows) {
        json jr;
        jr["k"] = row.k;
        jr["t"] = rational_str(row.t);
        jr["deficit_lsc"] = rational_str(row.deficit_lsc);
        jr["deficit_outer"] = rational_str(row.deficit_outer);
        if (decimals) {
            jr["deficit_lsc_decimal"] = decimal_str(row.deficit_lsc, *decimals);
            jr["deficit_outer_decimal"] = decimal_str(row.deficit_outer, *decimals);
        }
        rows.push_back(jr);
    }
    out["rows"] = rows;
    out["verdict"] = to_string(r.verdict);
    if (r.delta_star) out["delta_star"] = rational_str(*r.delta_star);
    if (r.hypotheses) out["hypotheses"] = hypotheses_json(*r.hypotheses);
    if (!r.note.empty()) out["note"] = r.note;
    return out;
}

/// CSV block: one row per probe step. With a decimals setting, display-only
/// decimal columns are appended.
inline std::string probe_csv(const ProbeReport& r, std::optional<int> decimals = std::nullopt) {
    std::string out = "k,t_k,deficit_lsc,deficit_outer";
    if (decimals) out += ",deficit_lsc_decimal,deficit_outer_decimal";
    out += "\n";
    for (const auto& row : r.rows) {
        out += std::to_string(row.k) + "," + rational_str(row.t) + "," +
               rational_str(row.deficit_lsc) + "," + rational_str(row.deficit_outer);
        if (decimals)
            out += "," + decimal_str(row.deficit_lsc, *decimals) + "," +
                   decimal_str(row.deficit_outer, *decimals);
        out += "\n";
    }
    return out;
}

}  // namespace optpay
