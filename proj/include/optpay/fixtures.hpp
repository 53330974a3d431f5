#pragma once

// Built-in reference instances. Each id maps to a deterministic instance,
// byte-identical across runs; the expected values they reproduce live in
// selftest.hpp. Also hosts the tiny vocabulary of named positions the CLI
// accepts ("0", "1F", "-1F", ...).

#include <optional>
#include <string>
#include <vector>

#include "optpay/risk_engine.hpp"

namespace optpay {

struct FixtureInfo {
    std::string id;
    std::string summary;
};

inline const std::vector<FixtureInfo>& fixture_catalog() {
    static const std::vector<FixtureInfo> catalog = {
        {"p1_r3_unique",
         "three uniform atoms, full market, seven-row polytope; singleton solutions everywhere"},
        {"p2_var_lsc",
         "value-at-risk at level 1/4 on three atoms, market span{cash, Z}; solution map "
         "collapses under a one-sided perturbation"},
        {"p3_star2d",
         "star-shaped analytic set on two atoms, canonical market; requirement finite, "
         "never attained"},
        {"p4_es_cash", "expected shortfall at level 1/2 on four uniform atoms, cash-only market"},
        {"p5_staircase_trunc",
         "staircase union of boxes (six steps) on two atoms, canonical market; origin is the "
         "unique optimal payoff at zero"},
    };
    return catalog;
}

inline ProblemInstance make_fixture(const std::string& id) {
    if (id == "p1_r3_unique") {
        auto space = make_space({Rational(1, 3), Rational(1, 3), Rational(1, 3)});
        MarketData md;
        md.payoffs = {{Rational(1), Rational(0), Rational(0)},
                      {Rational(0), Rational(1), Rational(0)},
                      {Rational(0), Rational(0), Rational(1)}};
        md.prices = {Rational(1, 3), Rational(1, 3), Rational(1, 3)};
        PolyhedralA acc;
        acc.rows = {
            Row{{Rational(1), Rational(0), Rational(0)}, Rational(-1)},
            Row{{Rational(0), Rational(1), Rational(0)}, Rational(-1)},
            Row{{Rational(0), Rational(0), Rational(1)}, Rational(0)},
            Row{{Rational(1), Rational(1), Rational(0)}, Rational(-1)},
            Row{{Rational(0), Rational(1), Rational(1)}, Rational(0)},
            Row{{Rational(2), Rational(0), Rational(1)}, Rational(-1)},
            Row{{Rational(2), Rational(2), Rational(1)}, Rational(-1)},
        };
        return make_instance(space, md, acc);
    }
    if (id == "p2_var_lsc") {
        auto space =
            make_space({Rational(1, 4), Rational(1, 4), Rational(1, 2)}, {"E", "F", "G"});
        MarketData md;
        md.payoffs = {{Rational(1), Rational(1)},
                      {Rational(1), Rational(0)},
                      {Rational(1), Rational(-1)}};
        md.prices = {Rational(1), Rational(0)};
        return make_instance(space, md, VaRSet{Rational(1, 4)});
    }
    if (id == "p3_star2d") {
        auto space = make_space({Rational(1, 2), Rational(1, 2)});
        MarketData md;
        md.payoffs = {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}};
        md.prices = {Rational(1, 2), Rational(1, 2)};
        return make_instance(space, md, AnalyticSet{"star2d"});
    }
    if (id == "p4_es_cash") {
        auto space = make_space(Vec(4, Rational(1, 4)));
        MarketData md;
        md.payoffs = {{Rational(1)}, {Rational(1)}, {Rational(1)}, {Rational(1)}};
        md.prices = {Rational(1)};
        return make_instance(space, md, ExpectedShortfall{Rational(1, 2)});
    }
    if (id == "p5_staircase_trunc") {
        auto space = make_space({Rational(1, 2), Rational(1, 2)});
        MarketData md;
        md.payoffs = {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}};
        md.prices = {Rational(1, 2), Rational(1, 2)};
        return make_instance(space, md, AnalyticSet{"staircase2d"});
    }
    throw BadParameter("unknown fixture id '" + id + "'");
}

// ---------------------------------------------------------------------------
// Named vectors. "0" is the zero position; "1F" (optionally signed) is the
// indicator of the atoms whose label matches the suffix, e.g. the event F of
// the p2 fixture. Anything else must be spelled as an explicit vector.
// ---------------------------------------------------------------------------

inline std::optional<Vec> named_vector(const FiniteSampleSpace& space, const std::string& token) {
    if (token == "0") return zeros(space.size());
    std::string body = token;
    Rational sign(1);
    if (!body.empty() && (body[0] == '+' || body[0] == '-')) {
        if (body[0] == '-') sign = Rational(-1);
        body = body.substr(1);
    }
    if (body.size() < 2 || body[0] != '1') return std::nullopt;
    const std::string label = body.substr(1);
    Vec out = zeros(space.size());
    bool hit = false;
    for (size_t i = 0; i < space.size(); ++i) {
        if (space.atom_labels[i] == label) {
            out[i] = sign;
            hit = true;
        }
    }
    if (!hit) return std::nullopt;
    return out;
}

}  // namespace optpay
