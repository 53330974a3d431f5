#include <catch2/catch_amalgamated.hpp>

#include "optpay/diagnostics.hpp"

using namespace optpay;

namespace {

// Three uniform atoms, identity payoffs priced uniformly, seven-row
// acceptance polytope; the optimal payoff is one fixed vertex of the
// polytope, so solution sets are singletons everywhere.
ProblemInstance hull_instance() {
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

ProblemInstance var_instance() {
    auto space = make_space({Rational(1, 4), Rational(1, 4), Rational(1, 2)}, {"E", "F", "G"});
    MarketData md;
    md.payoffs = {{Rational(1), Rational(1)},
                  {Rational(1), Rational(0)},
                  {Rational(1), Rational(-1)}};
    md.prices = {Rational(1), Rational(0)};
    return make_instance(space, md, VaRSet{Rational(1, 4)});
}

ProblemInstance es_instance() {
    auto space = make_space(Vec(4, Rational(1, 4)));
    MarketData md;
    md.payoffs = {{Rational(1)}, {Rational(1)}, {Rational(1)}, {Rational(1)}};
    md.prices = {Rational(1)};
    return make_instance(space, md, ExpectedShortfall{Rational(1, 2)});
}

MarketData canonical_2d_market() {
    MarketData md;
    md.payoffs = {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}};
    md.prices = {Rational(1, 2), Rational(1, 2)};
    return md;
}

ProblemInstance star_instance() {
    auto space = make_space({Rational(1, 2), Rational(1, 2)});
    return make_instance(space, canonical_2d_market(), AnalyticSet{"star2d"});
}

ProblemInstance stair_instance() {
    auto space = make_space({Rational(1, 2), Rational(1, 2)});
    return make_instance(space, canonical_2d_market(), AnalyticSet{"staircase2d"});
}

// A halfspace acceptance set monitored on the first atom only, with a full
// market and a price that ignores the second coordinate: the second
// coordinate is a free costless direction.
ProblemInstance halfspace_instance() {
    auto space = make_space({Rational(1, 2), Rational(1, 2)});
    MarketData md;
    md.payoffs = {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}};
    md.prices = {Rational(1), Rational(0)};
    PolyhedralA acc;
    acc.rows = {Row{{Rational(1), Rational(0)}, Rational(0)}};
    return make_instance(space, md, acc);
}

// Positive orthant with strictly positive prices: no costless acceptable
// payoff of either kind, and every constraint row pins the price kernel.
ProblemInstance orthant_instance() {
    auto space = make_space({Rational(1, 2), Rational(1, 2)});
    PolyhedralA acc;
    acc.rows = {Row{{Rational(1), Rational(0)}, Rational(0)},
                Row{{Rational(0), Rational(1)}, Rational(0)}};
    return make_instance(space, canonical_2d_market(), acc);
}

// Positive orthant priced on the first coordinate only: solution sets gain
// a recession ray, the decomposition example.
ProblemInstance orthant_skew_price_instance() {
    auto space = make_space({Rational(1, 2), Rational(1, 2)});
    MarketData md;
    md.payoffs = {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}};
    md.prices = {Rational(1), Rational(0)};
    PolyhedralA acc;
    acc.rows = {Row{{Rational(1), Rational(0)}, Rational(0)},
                Row{{Rational(0), Rational(1)}, Rational(0)}};
    return make_instance(space, md, acc);
}

ProblemInstance utility_cash_instance() {
    auto space = make_space({Rational(1, 2), Rational(1, 2)});
    MarketData md;
    md.payoffs = {{Rational(1)}, {Rational(1)}};
    md.prices = {Rational(1)};
    return make_instance(space, md, ExpUtility{Rational(1), Rational(0)});
}

// Utility acceptance over a full market: the kernel direction pays (t, -t),
// which strict concavity rejects, so the point-deal sampler finds nothing
// while the scalable question is still decided exactly.
ProblemInstance utility_full_instance() {
    auto space = make_space({Rational(1, 2), Rational(1, 2)});
    return make_instance(space, canonical_2d_market(), ExpUtility{Rational(1), Rational(0)});
}

// Utility acceptance where the second asset is free and pays nonnegatively:
// a scalable costless direction exists.
ProblemInstance utility_free_asset_instance() {
    auto space = make_space({Rational(1, 2), Rational(1, 2)});
    MarketData md;
    md.payoffs = {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}};
    md.prices = {Rational(1), Rational(0)};
    return make_instance(space, md, ExpUtility{Rational(1), Rational(0)});
}

// One asset visible on the first atom only, orthant acceptance: no traded
// strictly positive payoff and no interior recession direction.
ProblemInstance blind_orthant_instance() {
    auto space = make_space({Rational(1, 2), Rational(1, 2)});
    MarketData md;
    md.payoffs = {{Rational(1)}, {Rational(0)}};
    md.prices = {Rational(1)};
    PolyhedralA acc;
    acc.rows = {Row{{Rational(1), Rational(0)}, Rational(0)},
                Row{{Rational(0), Rational(1)}, Rational(0)}};
    return make_instance(space, md, acc);
}

}  // namespace

TEST_CASE("deal check: hull instance has point deals but no scalable ones") {
    auto inst = hull_instance();
    const auto report = deal_check(inst);

    // (-1/2, 1/2, 0) is acceptable with price zero, so point deals exist...
    CHECK(report.good == DealStatus::Found);
    REQUIRE(report.good_witness.has_value());
    const auto& w = *report.good_witness;
    CHECK(!is_zero_vec(w.portfolio));
    CHECK(dot(inst.market.prices, w.portfolio) == 0);
    CHECK(accepts(inst.space, inst.acceptance, w.payoff));

    // ...but the recession cone is the positive orthant, which meets the
    // kernel plane only at zero.
    CHECK(report.scalable == DealStatus::ProvenAbsent);
    CHECK(!report.scalable_witness.has_value());
}

TEST_CASE("deal check: small-exception rule finds the costless hedge and its scaling") {
    auto inst = var_instance();
    const auto report = deal_check(inst);

    CHECK(report.good == DealStatus::Found);
    REQUIRE(report.good_witness.has_value());
    CHECK(report.good_witness->portfolio[0] == 0);
    CHECK(report.good_witness->portfolio[1] < 0);
    CHECK(accepts(inst.space, inst.acceptance, report.good_witness->payoff));

    CHECK(report.scalable == DealStatus::Found);
    REQUIRE(report.scalable_witness.has_value());
    CHECK(report.scalable_witness->portfolio == Vec{Rational(0), Rational(-1)});
    CHECK(report.scalable_witness->payoff == Vec{Rational(-1), Rational(0), Rational(1)});
}

TEST_CASE("deal check: halfspace market yields a scalable direction; orthant yields none") {
    auto half = halfspace_instance();
    const auto hr = deal_check(half);
    CHECK(hr.good == DealStatus::Found);
    CHECK(hr.scalable == DealStatus::Found);
    REQUIRE(hr.scalable_witness.has_value());
    CHECK(hr.scalable_witness->portfolio == Vec{Rational(0), Rational(1)});

    auto orth = orthant_instance();
    const auto orep = deal_check(orth);
    CHECK(orep.good == DealStatus::ProvenAbsent);
    CHECK(orep.scalable == DealStatus::ProvenAbsent);
    CHECK(!orep.method.empty());
}

TEST_CASE("deal check: closed-form star set and truncated staircase") {
    auto star = star_instance();
    const auto sr = deal_check(star);
    CHECK(sr.scalable == DealStatus::Found);
    REQUIRE(sr.scalable_witness.has_value());
    CHECK(sr.scalable_witness->portfolio == Vec{Rational(-1), Rational(1)});
    CHECK(sr.good == DealStatus::Found);
    REQUIRE(sr.good_witness.has_value());
    CHECK(star2d_member(sr.good_witness->payoff));
    CHECK(dot(star.market.prices, sr.good_witness->portfolio) == 0);

    auto stair = stair_instance();
    const auto tr = deal_check(stair);
    CHECK(tr.good == DealStatus::ProvenAbsent);
    CHECK(tr.scalable == DealStatus::ProvenAbsent);
}

TEST_CASE("deal check: utility variants") {
    // Cash-only market: the kernel is trivial, absence is immediate.
    const auto cash = deal_check(utility_cash_instance());
    CHECK(cash.good == DealStatus::ProvenAbsent);
    CHECK(cash.scalable == DealStatus::ProvenAbsent);
    CHECK(cash.method.find("trivial kernel") != std::string::npos);

    // Full market: scalable absence is decided exactly; the point-deal
    // sampler honestly reports only that nothing was found.
    const auto full = deal_check(utility_full_instance());
    CHECK(full.scalable == DealStatus::ProvenAbsent);
    CHECK(full.good == DealStatus::NotFound);
    CHECK(!full.good_witness.has_value());

    // Free nonnegative asset: one witness serves both questions.
    auto free_inst = utility_free_asset_instance();
    const auto fr = deal_check(free_inst);
    CHECK(fr.scalable == DealStatus::Found);
    CHECK(fr.good == DealStatus::Found);
    REQUIRE(fr.scalable_witness.has_value());
    CHECK(fr.scalable_witness->portfolio == Vec{Rational(0), Rational(1)});
    CHECK(accepts(free_inst.space, free_inst.acceptance, fr.scalable_witness->payoff));
}

TEST_CASE("existence reports across variants") {
    const auto hull = existence_report(hull_instance());
    CHECK(hull.status == ExistenceStatus::AllExist);
    REQUIRE(!hull.chain.empty());
    CHECK(hull.chain[0].find("polyhedral") != std::string::npos);

    // The union variant earns only the branchwise reason: point deals exist,
    // so the star-shaped no-deal route is unavailable.
    const auto var = existence_report(var_instance());
    CHECK(var.status == ExistenceStatus::AllExist);
    REQUIRE(var.chain.size() == 1);
    CHECK(var.chain[0].find("branchwise") != std::string::npos);
    CHECK(var.deals.good == DealStatus::Found);

    const auto star = existence_report(star_instance());
    CHECK(star.status == ExistenceStatus::NoneExist);
    REQUIRE(star.certificate.has_value());
    CHECK(star.certificate->find("open halfplane") != std::string::npos);
    CHECK(star.deals.scalable == DealStatus::Found);

    const auto stair = existence_report(stair_instance());
    CHECK(stair.status == ExistenceStatus::AllExist);
    REQUIRE(stair.chain.size() >= 2);
    CHECK(stair.chain[1].find("no scalable") != std::string::npos);

    const auto cash = existence_report(utility_cash_instance());
    CHECK(cash.status == ExistenceStatus::AllExist);
    REQUIRE(!cash.chain.empty());
    CHECK(cash.chain[0].find("recession cone") != std::string::npos);

    const auto free_util = existence_report(utility_free_asset_instance());
    CHECK(free_util.status == ExistenceStatus::PerPosition);
}

TEST_CASE("uniqueness at a position: singleton detection and active rows") {
    auto hull = hull_instance();
    const auto at0 = uniqueness_at(hull, zeros(3));
    CHECK(at0.singleton);
    CHECK(at0.face_dim == 0);
    REQUIRE(at0.point.has_value());
    CHECK(*at0.point == Vec{Rational(-1, 2), Rational(0), Rational(0)});
    CHECK(at0.certificate == GlobalUniquenessCertificate::None);

    REQUIRE(at0.active_set.has_value());
    const auto& asr = *at0.active_set;
    CHECK(asr.active == std::vector<size_t>{2, 4, 5, 6});
    REQUIRE(asr.support.size() == 7);
    CHECK(asr.support[0] == std::optional<Rational>(Rational(-1)));
    CHECK(asr.support[2] == std::optional<Rational>(Rational(0)));
    CHECK(asr.support[5] == std::optional<Rational>(Rational(-1)));
    CHECK(asr.test_subspace_dim == 0);
    CHECK(asr.pinned);
}

TEST_CASE("uniqueness at a position: rays, unions, certificates") {
    auto var = var_instance();
    const auto ray_case = uniqueness_at(var, zeros(3));
    CHECK(!ray_case.singleton);
    CHECK(ray_case.face_dim == 1);
    CHECK(!ray_case.active_set.has_value());
    CHECK(ray_case.certificate == GlobalUniquenessCertificate::None);

    const auto point_case = uniqueness_at(var, {Rational(0), Rational(-1, 2), Rational(0)});
    CHECK(point_case.singleton);
    REQUIRE(point_case.point.has_value());
    CHECK(*point_case.point == Vec{Rational(0), Rational(0)});

    auto orth = orthant_instance();
    const auto cone_case = uniqueness_at(orth, zeros(2));
    CHECK(cone_case.singleton);
    CHECK(cone_case.certificate == GlobalUniquenessCertificate::ConeRows);
    REQUIRE(cone_case.active_set.has_value());
    CHECK(cone_case.active_set->pinned);

    auto stair = stair_instance();
    const auto stair_case = uniqueness_at(stair, zeros(2));
    CHECK(stair_case.singleton);
    REQUIRE(stair_case.point.has_value());
    CHECK(*stair_case.point == Vec{Rational(0), Rational(0)});

    const auto util_case = uniqueness_at(utility_cash_instance(), zeros(2));
    CHECK(util_case.singleton);
    CHECK(util_case.certificate == GlobalUniquenessCertificate::StrictConvexity);

    CHECK_THROWS_AS(uniqueness_at(star_instance(), zeros(2)), EmptyOptimalSet);
}

TEST_CASE("uniqueness falsification by sampling") {
    // Free second coordinate: every solution set carries a line.
    auto half = halfspace_instance();
    const auto found = uniqueness_falsify(half, 20, 7);
    CHECK(found.found);
    REQUIRE(found.witness_position.has_value());
    CHECK(found.witness_face_dim >= 1);

    // Singleton-everywhere instance: sampling (correctly) finds nothing.
    auto hull = hull_instance();
    const auto clean = uniqueness_falsify(hull, 25, 3);
    CHECK(!clean.found);
    CHECK(clean.trials_run == 25);

    CHECK_THROWS_AS(uniqueness_falsify(utility_cash_instance(), 5, 1), UnsupportedVariant);
}

TEST_CASE("upper semicontinuity reports") {
    const auto hull = usc_report(hull_instance());
    CHECK(hull.status == UscStatus::USC);

    const auto var = usc_report(var_instance());
    CHECK(var.status == UscStatus::NotUSC);
    REQUIRE(var.witness_position.has_value());
    CHECK(*var.witness_position == zeros(3));
    REQUIRE(var.witness_ray.has_value());
    CHECK(*var.witness_ray == Vec{Rational(0), Rational(-1)});

    const auto half = usc_report(halfspace_instance());
    CHECK(half.status == UscStatus::NotUSC);
    REQUIRE(half.witness_ray.has_value());
    CHECK((*half.witness_ray)[0] == 0);
    CHECK((*half.witness_ray)[1] != 0);

    // Empty-valued solution maps are upper semicontinuous vacuously, even
    // though scalable costless directions exist.
    const auto star = usc_report(star_instance());
    CHECK(star.status == UscStatus::USC);
    CHECK(star.reason.find("vacuously") != std::string::npos);
    CHECK(star.deals.scalable == DealStatus::Found);

    const auto stair = usc_report(stair_instance());
    CHECK(stair.status == UscStatus::USC);

    const auto cash = usc_report(utility_cash_instance());
    CHECK(cash.status == UscStatus::USC);

    const auto free_util = usc_report(utility_free_asset_instance());
    CHECK(free_util.status == UscStatus::Inconclusive);
}

TEST_CASE("perturbation probe: union variant violates, tolerance restores") {
    auto inst = var_instance();
    const Vec x = zeros(3);
    const Vec d = {Rational(0), Rational(-1), Rational(0)};

    const auto probe = lsc_probe(inst, x, d);
    CHECK(probe.verdict == ProbeVerdict::ViolationWitness);
    REQUIRE(probe.delta_star.has_value());
    CHECK(*probe.delta_star == Rational(10));
    REQUIRE(probe.rows.size() == 17);
    for (const auto& row : probe.rows) {
        CHECK(row.deficit_lsc == Rational(10));
        CHECK(row.deficit_outer == Rational(0));
    }
    CHECK(probe.rows[3].t == Rational(1, 8));

    const auto relaxed = epsilon_lsc_probe(inst, x, d, Rational(1, 10));
    CHECK(relaxed.verdict == ProbeVerdict::ConsistentWithLsc);
    REQUIRE(relaxed.hypotheses.has_value());
    CHECK(relaxed.hypotheses->strictly_positive_payoff);
    CHECK(relaxed.hypotheses->branches_full_dimensional);
    CHECK(relaxed.hypotheses->strict_feasibility_at_base);
    CHECK(relaxed.hypotheses->guaranteed);
    // Relaxation never worsens the deficits.
    for (size_t k = 0; k < relaxed.rows.size(); ++k)
        CHECK(relaxed.rows[k].deficit_lsc <= probe.rows[k].deficit_lsc);

    CHECK_THROWS_AS(epsilon_lsc_probe(inst, x, d, Rational(0)), BadParameter);
    CHECK_THROWS_AS(epsilon_lsc_probe(inst, x, d, Rational(-1)), BadParameter);
}

TEST_CASE("perturbation probe: translation-stable instance is consistent") {
    auto inst = hull_instance();
    const Vec x = {Rational(1, 3), Rational(-1, 2), Rational(2)};

    // The optimal payoff point is position-independent here, so the solution
    // portfolio moves exactly with -t.d and deficits equal t |d|_inf.
    const Vec d = {Rational(1), Rational(1), Rational(0)};
    const auto probe = lsc_probe(inst, x, d);
    CHECK(probe.verdict == ProbeVerdict::ConsistentWithLsc);
    for (const auto& row : probe.rows) {
        CHECK(row.deficit_lsc == row.t);
        CHECK(row.deficit_outer == row.t);
    }

    const auto still = lsc_probe(inst, x, zeros(3));
    CHECK(still.verdict == ProbeVerdict::ConsistentWithLsc);
    for (const auto& row : still.rows) {
        CHECK(row.deficit_lsc == 0);
        CHECK(row.deficit_outer == 0);
    }
}

TEST_CASE("perturbation probe: argument validation and unsupported variants") {
    auto inst = hull_instance();
    CHECK_THROWS_AS(lsc_probe(inst, zeros(3), zeros(3), 1), BadParameter);
    CHECK_THROWS_AS(lsc_probe(inst, zeros(3), zeros(3), 16, Rational(0)), BadParameter);
    CHECK_THROWS_AS(lsc_probe(inst, zeros(3), zeros(2)), BadParameter);

    CHECK_THROWS_AS(lsc_probe(star_instance(), zeros(2), zeros(2)), EmptyOptimalSet);
    CHECK_THROWS_AS(epsilon_lsc_probe(star_instance(), zeros(2), zeros(2), Rational(1, 2)),
                    UnsupportedVariant);
    CHECK_THROWS_AS(lsc_probe(utility_cash_instance(), zeros(2), zeros(2)), UnsupportedVariant);
}

TEST_CASE("perturbation probe: tail-average rule with auxiliary lift") {
    auto inst = es_instance();
    const Vec x = {Rational(-1), Rational(-1), Rational(1), Rational(1)};
    const Vec d = {Rational(1), Rational(0), Rational(0), Rational(0)};

    const auto probe = lsc_probe(inst, x, d, 8);
    CHECK(probe.verdict == ProbeVerdict::ConsistentWithLsc);

    const auto relaxed = epsilon_lsc_probe(inst, x, d, Rational(1, 8), 8);
    CHECK(relaxed.verdict == ProbeVerdict::ConsistentWithLsc);
    REQUIRE(relaxed.hypotheses.has_value());
    CHECK(relaxed.hypotheses->strictly_positive_payoff);
    CHECK(relaxed.hypotheses->branches_full_dimensional);
    CHECK(!relaxed.hypotheses->interior_recession_reachable.has_value());
    CHECK(relaxed.hypotheses->guaranteed);
}

TEST_CASE("perturbation probe: hypothesis report can decline to guarantee") {
    auto inst = blind_orthant_instance();
    const Vec x = {Rational(0), Rational(1)};
    const Vec d = {Rational(0), Rational(-1, 2)};

    const auto relaxed = epsilon_lsc_probe(inst, x, d, Rational(1, 4), 8);
    CHECK(relaxed.verdict == ProbeVerdict::ConsistentWithLsc);
    REQUIRE(relaxed.hypotheses.has_value());
    CHECK(!relaxed.hypotheses->strictly_positive_payoff);
    REQUIRE(relaxed.hypotheses->interior_recession_reachable.has_value());
    CHECK(!*relaxed.hypotheses->interior_recession_reachable);
    CHECK(!relaxed.hypotheses->guaranteed);
}

TEST_CASE("decomposition check: pointed and ray cases") {
    auto hull = hull_instance();
    const auto at0 = decomposition_check(hull, zeros(3));
    CHECK(at0.ok);
    CHECK(at0.reconstruction_ok);
    CHECK(at0.segment_bounded_ok);
    CHECK(at0.vertex_count == 1);
    CHECK(at0.cone_ray_count == 0);
    CHECK(at0.cone_lineality_dim == 0);
    CHECK(at0.candidate_count >= 1);
    CHECK(at0.bound >= Rational(1, 2));

    const auto shifted = decomposition_check(hull, {Rational(1), Rational(-1, 3), Rational(0)});
    CHECK(shifted.ok);

    auto skew = orthant_skew_price_instance();
    const auto rayful = decomposition_check(skew, {Rational(0), Rational(1)});
    CHECK(rayful.ok);
    CHECK(rayful.reconstruction_ok);
    CHECK(rayful.cone_ray_count == 1);
    CHECK(rayful.vertex_count == 1);
}

TEST_CASE("decomposition check: unsupported shapes are rejected") {
    CHECK_THROWS_AS(decomposition_check(var_instance(), zeros(3)), UnsupportedVariant);
    CHECK_THROWS_AS(decomposition_check(es_instance(), zeros(4)), UnsupportedVariant);
    CHECK_THROWS_AS(decomposition_check(star_instance(), zeros(2)), UnsupportedVariant);
    CHECK_THROWS_AS(decomposition_check(utility_cash_instance(), zeros(2)), UnsupportedVariant);
}
