#include <catch2/catch_amalgamated.hpp>

#include "optpay/json_io.hpp"
#include "optpay/selftest.hpp"

using namespace optpay;

TEST_CASE("rational literals: accepted forms and normalization") {
    CHECK(parse_rational(json(3)) == Rational(3));
    CHECK(parse_rational(json(-7)) == Rational(-7));
    CHECK(parse_rational(json("1/3")) == Rational(1, 3));
    CHECK(parse_rational(json("-2/4")) == Rational(-1, 2));
    CHECK(parse_rational(json("+5")) == Rational(5));
    CHECK(parse_rational(json("0")) == Rational(0));

    CHECK(rational_str(Rational(-1, 6)) == "-1/6");
    CHECK(rational_str(Rational(4, 2)) == "2");
    CHECK(rational_str(Rational(0)) == "0");

    CHECK_THROWS_AS(parse_rational(json(0.5)), BadParameter);
    CHECK_THROWS_AS(parse_rational(json("1/0")), BadParameter);
    CHECK_THROWS_AS(parse_rational(json("")), BadParameter);
    CHECK_THROWS_AS(parse_rational(json("3.5")), BadParameter);
    CHECK_THROWS_AS(parse_rational(json("1/2/3")), BadParameter);
    CHECK_THROWS_AS(parse_rational(json("a")), BadParameter);
    CHECK_THROWS_AS(parse_rational(json(json::array())), BadParameter);
}

TEST_CASE("instance files: the documented schema builds a working instance") {
    const json doc = json::parse(R"({
        "space": {"probs": ["1/4", "1/4", "1/2"], "labels": ["E", "F", "G"]},
        "assets": [
            {"payoff": [1, 1, 1], "price": 1},
            {"payoff": [1, 0, -1], "price": 0}
        ],
        "acceptance": {"type": "var", "alpha": "1/4"},
        "positions": {"stress": ["0", "-1/2", "0"]},
        "probes": [{"base": "0", "direction": "-1F", "epsilon": "1/10"}]
    })");
    const InstanceFile file = parse_instance_file(doc);
    CHECK(file.instance.atoms() == 3);
    CHECK(file.instance.assets() == 2);
    CHECK(rho(file.instance, zeros(3)).value == 0);

    REQUIRE(file.positions.count("stress") == 1);
    CHECK(file.positions.at("stress") == Vec{Rational(0), Rational(-1, 2), Rational(0)});

    REQUIRE(file.probes.size() == 1);
    CHECK(file.probes[0].base == zeros(3));
    CHECK(file.probes[0].direction == Vec{Rational(0), Rational(-1), Rational(0)});
    REQUIRE(file.probes[0].epsilon.has_value());
    CHECK(*file.probes[0].epsilon == Rational(1, 10));
}

TEST_CASE("instance files: uniform-atoms shorthand and validation errors") {
    const json uniform = json::parse(R"({
        "space": {"atoms": 4},
        "assets": [{"payoff": [1, 1, 1, 1], "price": 1}],
        "acceptance": {"type": "es", "alpha": "1/2"}
    })");
    const InstanceFile file = parse_instance_file(uniform);
    CHECK(file.instance.space.probs == Vec(4, Rational(1, 4)));

    auto broken = [&](const char* text) {
        CHECK_THROWS_AS(parse_instance_file(json::parse(text)), BadParameter);
    };
    broken(R"({"assets": [], "acceptance": {"type": "es", "alpha": "1/2"}})");
    broken(R"({"space": {"atoms": 2}, "assets": [], "acceptance": {"type": "es", "alpha": "1/2"}})");
    broken(R"({"space": {"atoms": 2},
               "assets": [{"payoff": [1], "price": 1}],
               "acceptance": {"type": "es", "alpha": "1/2"}})");
    broken(R"({"space": {"atoms": 2},
               "assets": [{"payoff": [1, 1], "price": 1}],
               "acceptance": {"type": "mystery"}})");
}

TEST_CASE("instance files: every acceptance variant parses") {
    auto build = [](const std::string& acceptance) {
        const json doc = json::parse(R"({
            "space": {"atoms": 2},
            "assets": [{"payoff": [1, 1], "price": 1}, {"payoff": [1, 0], "price": "1/2"}],
            "acceptance": )" + acceptance + "}");
        return parse_instance_file(doc).instance;
    };
    CHECK(std::holds_alternative<PolyhedralA>(
        build(R"({"type": "polyhedral", "rows": [{"phi": [1, 1], "rhs": -1}]})").acceptance));
    CHECK(std::holds_alternative<Scenario>(
        build(R"({"type": "scenario", "event": [0]})").acceptance));
    CHECK(std::holds_alternative<ExpectedShortfall>(
        build(R"({"type": "es", "alpha": "1/2"})").acceptance));
    CHECK(std::holds_alternative<VaRSet>(build(R"({"type": "var", "alpha": "1/4"})").acceptance));
    CHECK(std::holds_alternative<GenScenarios>(
        build(R"({"type": "genscen", "measures": [["1/2", "1/2"]], "floors": [-1]})")
            .acceptance));
    CHECK(std::holds_alternative<ExpUtility>(
        build(R"({"type": "utility", "kind": "exp", "a": 1, "floor": 0})").acceptance));

    const json analytic = json::parse(R"({
        "space": {"atoms": 2},
        "assets": [{"payoff": [1, 0], "price": "1/2"}, {"payoff": [0, 1], "price": "1/2"}],
        "acceptance": {"type": "analytic", "id": "star2d"}
    })");
    CHECK(parse_instance_file(analytic).instance.analytic_star);
}

TEST_CASE("named vectors: zero and labeled indicators") {
    const auto inst = make_fixture("p2_var_lsc");
    CHECK(named_vector(inst.space, "0") == zeros(3));
    CHECK(named_vector(inst.space, "1F") == Vec{Rational(0), Rational(1), Rational(0)});
    CHECK(named_vector(inst.space, "-1F") == Vec{Rational(0), Rational(-1), Rational(0)});
    CHECK(named_vector(inst.space, "+1E") == Vec{Rational(1), Rational(0), Rational(0)});
    CHECK_FALSE(named_vector(inst.space, "1Q").has_value());
    CHECK_FALSE(named_vector(inst.space, "banana").has_value());
}

TEST_CASE("fixture catalog: every id builds, identically on every call") {
    for (const auto& info : fixture_catalog()) {
        const auto a = make_fixture(info.id);
        const auto b = make_fixture(info.id);
        CHECK(a.market.payoffs == b.market.payoffs);
        CHECK(a.market.prices == b.market.prices);
        CHECK(a.space.probs == b.space.probs);
    }
    CHECK_THROWS_AS(make_fixture("p6_unknown"), BadParameter);
}

TEST_CASE("result rendering: requirement and solution-set documents") {
    const auto inst = make_fixture("p2_var_lsc");
    const json r = rho_json(rho(inst, zeros(3)), inst);
    CHECK(r.at("value") == "0");
    CHECK(r.at("attained") == true);
    CHECK(r.at("kind") == "minimum");

    const json set = optimal_set_json(optimal_set(inst, zeros(3)), inst);
    CHECK(set.at("status") == "Nonempty");
    CHECK(set.at("vertices") == json::parse(R"([["0","0"]])"));
    CHECK(set.at("rays") == json::parse(R"([["0","-1"]])"));
    CHECK(set.at("lineality") == json::parse("[]"));
    CHECK(set.at("payoff").at("rays") == json::parse(R"([["-1","0","1"]])"));

    const auto star = make_fixture("p3_star2d");
    const json empty = optimal_set_json(optimal_set(star, zeros(2)), star);
    CHECK(empty.at("status") == "Empty");
    CHECK(empty.at("value") == "-1");

    const json with_decimals = rho_json(rho(star, zeros(2)), star, 3);
    CHECK(with_decimals.at("value_decimal") == "-1.000");
    CHECK(with_decimals.at("kind") == "infimum");
}

TEST_CASE("result rendering: identical inputs give byte-identical documents") {
    const auto inst = make_fixture("p1_r3_unique");
    const auto once = optimal_set_json(optimal_set(inst, zeros(3)), inst).dump();
    const auto twice = optimal_set_json(optimal_set(inst, zeros(3)), inst).dump();
    CHECK(once == twice);
}

TEST_CASE("probe rendering: CSV columns and row count") {
    const auto inst = make_fixture("p2_var_lsc");
    const auto probe =
        lsc_probe(inst, zeros(3), {Rational(0), Rational(-1), Rational(0)}, 4);
    const std::string csv = probe_csv(probe);
    CHECK(csv.rfind("k,t_k,deficit_lsc,deficit_outer\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);  // header + k = 0..4
    CHECK(csv.find("0,1,10,0\n") != std::string::npos);

    const json doc = probe_json(probe);
    CHECK(doc.at("verdict") == "ViolationWitness");
    CHECK(doc.at("delta_star") == "10");
    CHECK(doc.at("rows").size() == 5);

    const std::string with_decimals = probe_csv(probe, 2);
    CHECK(with_decimals.rfind(
              "k,t_k,deficit_lsc,deficit_outer,deficit_lsc_decimal,deficit_outer_decimal\n",
              0) == 0);
}

TEST_CASE("verification suite: group filter rejects unknown groups") {
    CHECK_THROWS_AS(selftest::run({"not_a_group", false}), BadParameter);
}
