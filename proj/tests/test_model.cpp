#include <catch2/catch_amalgamated.hpp>

#include "optpay/model.hpp"

using namespace optpay;

TEST_CASE("sample space construction validates probabilities") {
    CHECK_NOTHROW(make_space({Rational(1, 2), Rational(1, 2)}));
    CHECK_THROWS_AS(make_space({Rational(1, 2), Rational(1, 3)}), BadParameter);
    CHECK_THROWS_AS(make_space({Rational(3, 2), Rational(-1, 2)}), BadParameter);
    CHECK_THROWS_AS(make_space({}), BadParameter);
    CHECK_THROWS_AS(make_space({Rational(1)}, {"a", "b"}), BadParameter);

    auto s = make_space({Rational(1, 4), Rational(3, 4)});
    CHECK(s.atom_labels == std::vector<std::string>{"w0", "w1"});
    CHECK(s.size() == 2);
}

TEST_CASE("market validation accepts the two-asset reference market") {
    auto space = make_space({Rational(1, 4), Rational(1, 4), Rational(1, 2)}, {"E", "F", "G"});
    Mat payoffs = {{Rational(1), Rational(1)},
                   {Rational(1), Rational(0)},
                   {Rational(1), Rational(-1)}};
    Vec prices = {Rational(1), Rational(0)};
    Market m = validate_market(space, payoffs, prices);

    CHECK(m.assets() == 2);
    CHECK(m.atoms() == 3);
    // Deterministic unit-price portfolio: the cash asset.
    CHECK(m.unit_coeffs == Vec{Rational(1), Rational(0)});
    REQUIRE(m.kernel.size() == 1);
    CHECK(m.kernel[0] == Vec{Rational(0), Rational(1)});
    CHECK(m.payoff({Rational(2), Rational(1)}) == Vec{Rational(3), Rational(2), Rational(1)});
    CHECK(m.price({Rational(2), Rational(1)}) == Rational(2));
    CHECK(m.unit_payoff() == Vec{Rational(1), Rational(1), Rational(1)});
}

TEST_CASE("market validation rejects degenerate data") {
    auto space = make_space({Rational(1, 2), Rational(1, 2)});

    SECTION("redundant asset") {
        Mat payoffs = {{Rational(1), Rational(2)}, {Rational(1), Rational(2)}};
        Vec prices = {Rational(1), Rational(2)};
        CHECK_THROWS_AS(validate_market(space, payoffs, prices), DegenerateMarket);
    }
    SECTION("no nonnegative payoff with unit price") {
        Mat payoffs = {{Rational(1)}, {Rational(-1)}};
        Vec prices = {Rational(1)};
        CHECK_THROWS_AS(validate_market(space, payoffs, prices), NoUnitPayoff);
    }
    SECTION("zero prices leave unit price unreachable") {
        Mat payoffs = {{Rational(1)}, {Rational(1)}};
        Vec prices = {Rational(0)};
        CHECK_THROWS_AS(validate_market(space, payoffs, prices), NoUnitPayoff);
    }
    SECTION("ragged payoff matrix") {
        Mat payoffs = {{Rational(1), Rational(0)}, {Rational(1)}};
        Vec prices = {Rational(1), Rational(1)};
        CHECK_THROWS_AS(validate_market(space, payoffs, prices), BadParameter);
    }
}

TEST_CASE("multivariate flattening builds block-diagonal payoffs") {
    auto s1 = make_space({Rational(1, 2), Rational(1, 2)}, {"u", "d"});
    auto s2 = make_space({Rational(1, 3), Rational(2, 3)});
    MarketData m1;
    m1.payoffs = {{Rational(1)}, {Rational(1)}};
    m1.prices = {Rational(1)};
    MarketData m2;
    m2.payoffs = {{Rational(2), Rational(1)}, {Rational(0), Rational(1)}};
    m2.prices = {Rational(1), Rational(1)};

    InstanceSkeleton flat = flatten_multivariate({s1, s2}, {m1, m2});
    REQUIRE(flat.space.size() == 4);
    CHECK(flat.space.atom_labels ==
          std::vector<std::string>{"e1.u", "e1.d", "e2.w0", "e2.w1"});
    CHECK(flat.space.probs ==
          Vec{Rational(1, 4), Rational(1, 4), Rational(1, 6), Rational(1, 3)});
    REQUIRE(flat.payoffs.size() == 4);
    CHECK(flat.payoffs[0] == Vec{Rational(1), Rational(0), Rational(0)});
    CHECK(flat.payoffs[1] == Vec{Rational(1), Rational(0), Rational(0)});
    CHECK(flat.payoffs[2] == Vec{Rational(0), Rational(2), Rational(1)});
    CHECK(flat.payoffs[3] == Vec{Rational(0), Rational(0), Rational(1)});
    CHECK(flat.prices == Vec{Rational(1), Rational(1), Rational(1)});

    CHECK_NOTHROW(validate_market(flat.space, flat.payoffs, flat.prices));
}
