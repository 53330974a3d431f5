#include <catch2/catch_amalgamated.hpp>

#include "optpay/double_description.hpp"
#include "optpay/polyops.hpp"
#include "support/oracles.hpp"

using namespace optpay;
using testsupport::RatRng;

namespace {

Vec rv(std::initializer_list<long long> xs) {
    Vec v;
    for (auto x : xs) v.push_back(Rational(x));
    return v;
}

HPolyhedron triangle() {
    // conv{(0,0), (1,0), (0,1)}
    HPolyhedron p = HPolyhedron::whole_space(2);
    p.add_ineq(rv({1, 0}), Rational(0));
    p.add_ineq(rv({0, 1}), Rational(0));
    p.add_ineq(rv({-1, -1}), Rational(-1));
    return p;
}

// Hull of three points plus the positive orthant in R^3; the facet list
// below was worked out by hand and double-checked by membership sampling.
HPolyhedron hull_plus_orthant_hrep() {
    HPolyhedron p = HPolyhedron::whole_space(3);
    p.add_ineq(rv({1, 0, 0}), Rational(-1));
    p.add_ineq(rv({0, 1, 0}), Rational(-1));
    p.add_ineq(rv({0, 0, 1}), Rational(0));
    p.add_ineq(rv({1, 1, 0}), Rational(-1));
    p.add_ineq(rv({0, 1, 1}), Rational(0));
    p.add_ineq(rv({2, 0, 1}), Rational(-1));
    p.add_ineq(rv({2, 2, 1}), Rational(-1));
    return p;
}

VRep hull_plus_orthant_vrep() {
    VRep v;
    v.dim = 3;
    v.vertices = {rv({0, -1, 1}), rv({-1, 0, 1}), Vec{Rational(-1, 2), Rational(0), Rational(0)}};
    v.rays = {rv({1, 0, 0}), rv({0, 1, 0}), rv({0, 0, 1})};
    sort_rows(v.vertices);
    sort_rows(v.rays);
    return v;
}

}  // namespace

TEST_CASE("vrep: halfplane splits into vertex, ray, lineality") {
    HPolyhedron p = HPolyhedron::whole_space(2);
    p.add_ineq(rv({1, 0}), Rational(0));  // x1 >= 0
    const VRep v = vrep(p);
    CHECK(v.vertices == std::vector<Vec>{rv({0, 0})});
    CHECK(v.rays == std::vector<Vec>{rv({1, 0})});
    CHECK(v.lineality == std::vector<Vec>{rv({0, 1})});
}

TEST_CASE("vrep: triangle") {
    const VRep v = vrep(triangle());
    std::vector<Vec> expect = {rv({0, 0}), rv({0, 1}), rv({1, 0})};
    sort_rows(expect);
    CHECK(v.vertices == expect);
    CHECK(v.rays.empty());
    CHECK(v.lineality.empty());
}

TEST_CASE("vrep: empty polyhedron has no generators") {
    HPolyhedron p = HPolyhedron::whole_space(2);
    p.add_ineq(rv({1, 0}), Rational(1));
    p.add_ineq(rv({-1, 0}), Rational(0));
    const VRep v = vrep(p);
    CHECK(v.empty());
    CHECK(v.rays.empty());
    CHECK(v.lineality.empty());
    const HPolyhedron back = hrep(v);
    CHECK(is_empty(back));
}

TEST_CASE("vrep/hrep: hull plus orthant round trip against hand-derived facets") {
    const HPolyhedron facets = hull_plus_orthant_hrep();
    const VRep expect_v = hull_plus_orthant_vrep();

    const VRep got_v = vrep(facets);
    CHECK(got_v.vertices == expect_v.vertices);
    CHECK(got_v.rays == expect_v.rays);
    CHECK(got_v.lineality.empty());

    const HPolyhedron got_h = hrep(expect_v);
    CHECK(polyhedra_equal(got_h, facets));
    CHECK(got_h.ineqs.size() == 7);  // all seven hand-derived rows are facets
    CHECK(got_h.eqs.empty());
}

TEST_CASE("hrep: segment produces an equality row") {
    VRep v;
    v.dim = 2;
    v.vertices = {rv({0, 0}), rv({2, 2})};
    const HPolyhedron h = hrep(v);
    REQUIRE(h.eqs.size() == 1);  // x1 - x2 = 0
    CHECK(dot(h.eqs[0].a, rv({1, 1})) == 0);
    CHECK(h.contains(rv({1, 1})));
    CHECK(!h.contains(rv({1, 0})));
    CHECK(!h.contains(rv({3, 3})));
}

TEST_CASE("round trip on assorted polyhedra") {
    std::vector<HPolyhedron> cases;
    cases.push_back(triangle());
    cases.push_back(hull_plus_orthant_hrep());
    {
        HPolyhedron p = HPolyhedron::whole_space(2);  // a cone with lineality
        p.add_ineq(rv({1, 1}), Rational(0));
        cases.push_back(p);
    }
    {
        HPolyhedron p = HPolyhedron::whole_space(3);  // affine plane
        p.add_eq(rv({1, 1, 1}), Rational(3));
        cases.push_back(p);
    }
    for (const auto& p : cases) {
        const HPolyhedron back = hrep(vrep(p));
        CHECK(polyhedra_equal(back, p));
    }
}

TEST_CASE("recession cone and lineality space") {
    const HPolyhedron a = hull_plus_orthant_hrep();
    const HPolyhedron rc = recession_cone(a);
    const VRep v = vrep(rc);
    std::vector<Vec> expect = {rv({1, 0, 0}), rv({0, 1, 0}), rv({0, 0, 1})};
    sort_rows(expect);
    CHECK(v.vertices == std::vector<Vec>{rv({0, 0, 0})});
    CHECK(v.rays == expect);

    HPolyhedron strip = HPolyhedron::whole_space(2);
    strip.add_ineq(rv({1, 0}), Rational(0));
    const Mat lin = lineality_space(strip);
    REQUIRE(lin.size() == 1);
    CHECK(primitive_signed(lin[0]) == rv({0, 1}));

    CHECK_THROWS_AS(recession_cone(HPolyhedron::empty_set(2)), EmptyPolyhedron);
}

TEST_CASE("implicit equalities and dimension") {
    HPolyhedron p = HPolyhedron::whole_space(2);
    p.add_ineq(rv({1, 0}), Rational(0));
    p.add_ineq(rv({-1, 0}), Rational(0));
    p.add_ineq(rv({0, 1}), Rational(0));
    const auto idx = implicit_equalities(p);
    CHECK(idx == std::vector<size_t>{0, 1});
    CHECK(dimension(p) == 1);

    CHECK(dimension(triangle()) == 2);

    HPolyhedron pt = HPolyhedron::whole_space(2);
    pt.add_eq(rv({1, 0}), Rational(1));
    pt.add_eq(rv({0, 1}), Rational(2));
    CHECK(dimension(pt) == 0);
    CHECK_THROWS_AS(dimension(HPolyhedron::empty_set(2)), EmptyPolyhedron);
}

TEST_CASE("remove_redundant drops implied and duplicate rows") {
    HPolyhedron p = HPolyhedron::whole_space(1);
    p.add_ineq(rv({1}), Rational(0));
    p.add_ineq(rv({1}), Rational(-1));
    p.add_ineq(rv({2}), Rational(0));
    const HPolyhedron q = remove_redundant(p);
    CHECK(q.ineqs.size() == 1);
    CHECK(polyhedra_equal(p, q));

    CHECK(is_empty(remove_redundant(HPolyhedron::empty_set(3))));
}

TEST_CASE("optimal_face") {
    const HPolyhedron f = optimal_face(triangle(), rv({1, 1}), Sense::Min);
    CHECK(dimension(f) == 0);
    CHECK(f.contains(rv({0, 0})));
    CHECK(!f.contains(rv({1, 0})));

    const HPolyhedron whole = optimal_face(triangle(), rv({0, 0}), Sense::Min);
    CHECK(polyhedra_equal(whole, triangle()));

    HPolyhedron half = HPolyhedron::whole_space(1);
    half.add_ineq(rv({1}), Rational(0));
    CHECK_THROWS_AS(optimal_face(half, rv({-1}), Sense::Min), NotAttained);
    CHECK_THROWS_AS(optimal_face(HPolyhedron::empty_set(1), rv({1}), Sense::Min), NotAttained);
}

TEST_CASE("support_value") {
    const auto s = support_value(triangle(), LinearFunctional{rv({1, 1})});
    CHECK(s.finite);
    CHECK(s.value == 0);

    HPolyhedron half = HPolyhedron::whole_space(2);
    half.add_ineq(rv({1, 0}), Rational(0));
    const auto u = support_value(half, LinearFunctional{rv({-1, 0})});
    CHECK(!u.finite);
    CHECK_THROWS_AS(support_value(HPolyhedron::empty_set(2), LinearFunctional{rv({1, 0})}),
                    EmptyPolyhedron);
}

TEST_CASE("fm_project: kernel sweeps of orthant-like branches") {
    // {x2 >= 0, x3 >= 0} + span{(1,0,-1)} = {x2 >= 0}
    HPolyhedron b1 = HPolyhedron::whole_space(3);
    b1.add_ineq(rv({0, 1, 0}), Rational(0));
    b1.add_ineq(rv({0, 0, 1}), Rational(0));
    const HPolyhedron p1 = fm_project(b1, {rv({1, 0, -1})});
    HPolyhedron expect1 = HPolyhedron::whole_space(3);
    expect1.add_ineq(rv({0, 1, 0}), Rational(0));
    CHECK(polyhedra_equal(p1, expect1));

    // {x1 >= 0, x3 >= 0} + span{(1,0,-1)} = {x1 + x3 >= 0}
    HPolyhedron b2 = HPolyhedron::whole_space(3);
    b2.add_ineq(rv({1, 0, 0}), Rational(0));
    b2.add_ineq(rv({0, 0, 1}), Rational(0));
    const HPolyhedron p2 = fm_project(b2, {rv({1, 0, -1})});
    HPolyhedron expect2 = HPolyhedron::whole_space(3);
    expect2.add_ineq(rv({1, 0, 1}), Rational(0));
    CHECK(polyhedra_equal(p2, expect2));
}

TEST_CASE("fm_project: square plus a coordinate span, and equality pivoting") {
    HPolyhedron square = HPolyhedron::whole_space(2);
    square.add_ineq(rv({1, 0}), Rational(0));
    square.add_ineq(rv({-1, 0}), Rational(-1));
    square.add_ineq(rv({0, 1}), Rational(0));
    square.add_ineq(rv({0, -1}), Rational(-1));
    const HPolyhedron swept = fm_project(square, {rv({0, 1})});
    HPolyhedron expect = HPolyhedron::whole_space(2);
    expect.add_ineq(rv({1, 0}), Rational(0));
    expect.add_ineq(rv({-1, 0}), Rational(-1));
    CHECK(polyhedra_equal(swept, expect));

    HPolyhedron witheq = HPolyhedron::whole_space(2);
    witheq.add_eq(rv({1, 1}), Rational(2));
    witheq.add_ineq(rv({1, 0}), Rational(0));
    const HPolyhedron pe = fm_project(witheq, {rv({0, 1})});
    HPolyhedron expect_e = HPolyhedron::whole_space(2);
    expect_e.add_ineq(rv({1, 0}), Rational(0));
    CHECK(polyhedra_equal(pe, expect_e));
}

TEST_CASE("fm_project agrees with the generator-sum oracle") {
    RatRng rng(20240817);
    for (int trial = 0; trial < 8; ++trial) {
        const size_t dim = 2 + trial % 2;
        auto [v, h] = testsupport::random_polytope(rng, dim, 4 + trial % 3);
        if (v.empty()) continue;
        const Vec d = rng.vector(dim);
        if (is_zero_vec(d)) continue;
        const HPolyhedron via_fm = fm_project(h, {d});
        const HPolyhedron via_gen = testsupport::project_via_generators(h, {d});
        CHECK(polyhedra_equal(via_fm, via_gen));
    }
}

TEST_CASE("project_out_coords drops eliminated columns") {
    // { (x, t) : x >= t, t >= 1 } projected over t: x can be anything >= ... :
    // eliminating t gives { x >= 1 } in R^1.
    HPolyhedron p = HPolyhedron::whole_space(2);
    p.add_ineq(rv({1, -1}), Rational(0));
    p.add_ineq(rv({0, 1}), Rational(1));
    const HPolyhedron q = project_out_coords(p, {1});
    REQUIRE(q.dim == 1);
    CHECK(q.contains(rv({1})));
    CHECK(!q.contains(rv({0})));
}

TEST_CASE("dist_linf") {
    CHECK(dist_linf(rv({2, 0}), triangle()) == 1);
    CHECK(dist_linf(rv({0, 0}), triangle()) == 0);
    CHECK(dist_linf(Vec{Rational(1, 2), Rational(1, 2)}, triangle()) == 0);
    CHECK_THROWS_AS(dist_linf(rv({0, 0}), HPolyhedron::empty_set(2)), EmptyPolyhedron);
}

TEST_CASE("hausdorff_boxed: ray against origin") {
    // P = {(0, t) : t <= 0}, Q = {0}: deviation P->Q is the box radius.
    HPolyhedron p = HPolyhedron::whole_space(2);
    p.add_eq(rv({1, 0}), Rational(0));
    p.add_ineq(rv({0, -1}), Rational(0));
    HPolyhedron q = HPolyhedron::whole_space(2);
    q.add_eq(rv({1, 0}), Rational(0));
    q.add_eq(rv({0, 1}), Rational(0));
    const auto [pq, qp] = hausdorff_boxed(p, q, Rational(10));
    CHECK(pq == 10);
    CHECK(qp == 0);

    HPolyhedron far = HPolyhedron::whole_space(2);
    far.add_ineq(rv({1, 0}), Rational(100));
    CHECK_THROWS_AS(hausdorff_boxed(far, q, Rational(10)), EmptyAfterBoxing);
}

TEST_CASE("support additivity over a Minkowski sum (fixed pair)") {
    RatRng rng(7);
    auto [va, ha] = testsupport::random_polytope(rng, 2, 4);
    auto [vb, hb] = testsupport::random_polytope(rng, 2, 4);
    const HPolyhedron hsum = hrep(testsupport::minkowski_sum(va, vb));
    for (int k = 0; k < 5; ++k) {
        const Vec phi = rng.vector(2);
        const auto sa = support_value(ha, LinearFunctional{phi});
        const auto sb = support_value(hb, LinearFunctional{phi});
        const auto ss = support_value(hsum, LinearFunctional{phi});
        REQUIRE(sa.finite);
        REQUIRE(sb.finite);
        REQUIRE(ss.finite);
        CHECK(ss.value == sa.value + sb.value);
    }
}

TEST_CASE("dimension cap is enforced") {
    CHECK_THROWS_AS(vrep(HPolyhedron::whole_space(9)), DimensionCap);
    VRep v;
    v.dim = 9;
    v.vertices.push_back(zeros(9));
    CHECK_THROWS_AS(hrep(v), DimensionCap);
}
