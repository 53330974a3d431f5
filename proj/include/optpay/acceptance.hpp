#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "optpay/errors.hpp"
#include "optpay/linalg.hpp"
#include "optpay/model.hpp"
#include "optpay/polyhedron.hpp"
#include "optpay/rational.hpp"

namespace optpay {

// --------------------------------------------------------------------------
// Acceptance-set variants. Every set lives in position space R^n (atom
// coordinates), contains 0, is closed and monotone (adding a nonnegative
// position preserves acceptability), and is a proper subset of R^n; the
// constructors below enforce what is checkable per variant.
// --------------------------------------------------------------------------

/// Finite intersection of halfspaces { x : phi.x >= b } with positive
/// functionals phi >= 0 and levels b <= 0.
struct PolyhedralA {
    std::vector<Row> rows;
};

/// Positions nonnegative on every atom of the event (a conic relaxation of
/// the positive orthant).
struct Scenario {
    std::vector<size_t> event;
};

/// Expected shortfall at level alpha in (0,1): average of the worst
/// alpha-tail of the loss must be <= 0.
struct ExpectedShortfall {
    Rational alpha;
};

/// Finitely many test measures with floors: q.x >= floor_q for each pair.
struct GenScenarios {
    Mat measures;  // rows are probability vectors
    Vec floors;    // each <= 0
};

/// Value-at-risk at level alpha in (0,1): P(x < 0) <= alpha.
struct VaRSet {
    Rational alpha;
};

/// Expected exponential utility with u(x) = 1 - exp(-a x):
/// E[u(x)] >= floor. Smooth and strictly concave; handled numerically.
struct ExpUtility {
    Rational a;
    Rational floor;
};

/// Hard-coded nonpolyhedral/nonconvex reference sets in R^2 (see below).
struct AnalyticSet {
    std::string id;  // "star2d" | "staircase2d"
};

using AcceptanceSet =
    std::variant<PolyhedralA, Scenario, ExpectedShortfall, GenScenarios, VaRSet, ExpUtility,
                 AnalyticSet>;

constexpr size_t kBranchCap = 1u << 14;
constexpr size_t kStaircaseDepth = 6;

// --------------------------------------------------------------------------
// Direct oracles (no LP, no lifting): these are the ground truth against
// which compiled representations are cross-checked.
// --------------------------------------------------------------------------

/// Average of the worst alpha-tail of the loss -x: sort positions
/// ascending and average the lowest alpha of probability mass. Exact.
inline Rational es_direct(const FiniteSampleSpace& space, const Rational& alpha, const Vec& x) {
    if (!(alpha > 0 && alpha < 1)) throw BadParameter("es: alpha must lie in (0,1)");
    if (x.size() != space.size()) throw BadParameter("es: position size mismatch");
    std::vector<size_t> order(x.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t i, size_t j) {
        if (x[i] != x[j]) return x[i] < x[j];
        return i < j;
    });
    Rational mass = 0, loss = 0;
    for (size_t i : order) {
        if (mass >= alpha) break;
        const Rational take = std::min(space.probs[i], Rational(alpha - mass));
        loss += take * (-x[i]);
        mass += take;
    }
    return loss / alpha;
}

/// Smallest cash amount m with P(x + m < 0) <= alpha; equals the negated
/// upper alpha-quantile. Exact.
inline Rational var_direct(const FiniteSampleSpace& space, const Rational& alpha, const Vec& x) {
    if (!(alpha > 0 && alpha < 1)) throw BadParameter("var: alpha must lie in (0,1)");
    if (x.size() != space.size()) throw BadParameter("var: position size mismatch");
    std::vector<size_t> order(x.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t i, size_t j) { return x[i] < x[j]; });
    // Largest value v with P(x < v) <= alpha.
    Rational below = 0;
    Rational quantile = x[order[0]];
    for (size_t k = 0; k < order.size();) {
        size_t j = k;
        Rational group_mass = 0;
        while (j < order.size() && x[order[j]] == x[order[k]]) {
            group_mass += space.probs[order[j]];
            ++j;
        }
        if (below <= alpha) quantile = x[order[k]];
        below += group_mass;
        k = j;
    }
    return -quantile;
}

/// Exponential-utility acceptability gap g(x) = floor - E[1 - e^{-a x}]
/// and its gradient, evaluated in floating point (the only numeric path in
/// the engine). x in A iff g(x) <= 0.
struct UtilityEval {
    double g = 0;
    std::vector<double> grad;
};

inline UtilityEval utility_constraint(const FiniteSampleSpace& space, const ExpUtility& u,
                                      const std::vector<double>& x) {
    if (x.size() != space.size()) throw BadParameter("utility: position size mismatch");
    const double a = to_double(u.a);
    UtilityEval ev;
    ev.g = to_double(u.floor);
    ev.grad.assign(x.size(), 0.0);
    for (size_t i = 0; i < x.size(); ++i) {
        const double p = to_double(space.probs[i]);
        const double e = std::exp(-a * x[i]);
        ev.g -= p * (1.0 - e);
        ev.grad[i] = -p * a * e;
    }
    return ev;
}

// --------------------------------------------------------------------------
// Analytic reference sets in R^2.
//
// star2d: A1 u A2 with A1 = { x1 >= 0, x2 >= -1 } and
//         A2 = { x1 < 0, x2 >= exp(x1) - x1 - 2 }.
// Star-shaped, closed, monotone; with the canonical two-asset market
// (identity payoffs, prices (1/2, 1/2)) the augmented set is the *open*
// halfplane { x1 + x2 > -2 }, so the requirement inf is never attained.
//
// staircase2d: the positive orthant plus steps n = 1..6,
//         { a_{n+1} <= x1 <= a_n, x2 >= n+1 },  a_n = -n + 1/n.
// A finite union of closed polyhedra (the half-open steps of the
// infinite-depth analogue close harmlessly: each added edge lies in the
// neighbouring step). Not star-shaped. Unlike the infinite-depth set,
// whose steps march left forever, the truncation has compact horizontal
// extent, so its asymptotic cone is just the positive orthant.
// --------------------------------------------------------------------------

inline Rational staircase_alpha(size_t n) {
    return Rational(-static_cast<long long>(n)) + Rational(1, static_cast<long long>(n));
}

inline std::vector<HPolyhedron> staircase_branches(size_t depth = kStaircaseDepth) {
    std::vector<HPolyhedron> branches;
    HPolyhedron orthant = HPolyhedron::whole_space(2);
    orthant.add_ineq({Rational(1), Rational(0)}, Rational(0));
    orthant.add_ineq({Rational(0), Rational(1)}, Rational(0));
    branches.push_back(orthant);
    for (size_t n = 1; n <= depth; ++n) {
        HPolyhedron step = HPolyhedron::whole_space(2);
        step.add_ineq({Rational(1), Rational(0)}, staircase_alpha(n + 1));
        step.add_ineq({Rational(-1), Rational(0)}, -staircase_alpha(n));
        step.add_ineq({Rational(0), Rational(1)}, Rational(static_cast<long long>(n + 1)));
        branches.push_back(step);
    }
    return branches;
}

/// Exact where possible: for x1 < 0 the boundary value exp(x1)-x1-2 lies
/// strictly between -x1-2 and -x1-1, so positions outside that band are
/// decided without floating point.
inline bool star2d_member(const Vec& x) {
    if (x.size() != 2) throw BadParameter("star2d: needs a 2-atom space");
    if (x[0] >= 0) return x[1] >= -1;
    if (x[1] >= -x[0] - 1) return true;   // above the band: boundary < -x0-1
    if (x[1] + x[0] + 2 <= 0) return false;  // below the band: boundary > -x0-2
    return to_double(x[1]) >= std::exp(to_double(x[0])) - to_double(x[0]) - 2.0;
}

/// Requirement against star2d with the canonical market: the augmented set
/// is { x1 + x2 > -2 }, hence inf m with x + m(1,1) inside is exact and
/// never attained.
inline Rational star2d_rho(const Vec& x) {
    if (x.size() != 2) throw BadParameter("star2d: needs a 2-atom space");
    return -(x[0] + x[1] + 2) / 2;
}

/// The two polyhedral cones whose union is the asymptotic cone of star2d.
inline std::vector<HPolyhedron> star2d_asymptotic_branches() {
    HPolyhedron c1 = HPolyhedron::whole_space(2);
    c1.add_ineq({Rational(1), Rational(0)}, Rational(0));
    c1.add_ineq({Rational(0), Rational(1)}, Rational(0));
    HPolyhedron c2 = HPolyhedron::whole_space(2);
    c2.add_ineq({Rational(-1), Rational(0)}, Rational(0));
    c2.add_ineq({Rational(1), Rational(1)}, Rational(0));
    return {c1, c2};
}

// --------------------------------------------------------------------------
// Compilation to branch polyhedra.
// --------------------------------------------------------------------------

/// Branch form of an acceptance set: x in A iff for some branch B and some
/// auxiliary vector s, (x, s) in B. aux = 0 for everything except expected
/// shortfall, whose branch carries the epigraph lift (t, s_1..s_n).
/// `polyhedral` is false only for the utility and star2d variants, whose
/// branch lists stay empty.
struct CompiledAcceptance {
    size_t position_dim = 0;
    size_t aux = 0;
    std::vector<HPolyhedron> branches;
    bool polyhedral = true;
    bool convex = true;
    bool star_shaped = true;
    bool conic = false;
};

namespace detail {

inline void validate_probability_vector(const FiniteSampleSpace& space, const Vec& q) {
    if (q.size() != space.size()) throw BadParameter("acceptance: measure size mismatch");
    Rational total = 0;
    for (const auto& v : q) {
        if (v < 0) throw BadParameter("acceptance: test measures must be nonnegative");
        total += v;
    }
    if (total != 1) throw BadParameter("acceptance: test measures must sum to 1");
}

inline std::vector<HPolyhedron> var_branches(const FiniteSampleSpace& space,
                                             const Rational& alpha, size_t branch_cap) {
    const size_t n = space.size();
    if (n > 20) throw TooManyBranches("var: too many atoms for subset expansion");
    std::vector<HPolyhedron> branches;
    for (size_t mask = 0; mask < (size_t{1} << n); ++mask) {
        Rational p = 0;
        for (size_t i = 0; i < n; ++i)
            if (mask & (size_t{1} << i)) p += space.probs[i];
        if (p > alpha) continue;
        bool maximal = true;
        for (size_t i = 0; i < n && maximal; ++i)
            if (!(mask & (size_t{1} << i)) && p + space.probs[i] <= alpha) maximal = false;
        if (!maximal) continue;
        HPolyhedron b = HPolyhedron::whole_space(n);
        for (size_t i = 0; i < n; ++i)
            if (!(mask & (size_t{1} << i))) b.add_ineq(unit_vec(n, i), Rational(0));
        branches.push_back(std::move(b));
        if (branches.size() > branch_cap)
            throw TooManyBranches("var: branch union exceeds the cap");
    }
    return branches;
}

}  // namespace detail

/// Validates the variant parameters and produces the branch form.
inline CompiledAcceptance compile(const FiniteSampleSpace& space, const AcceptanceSet& acc,
                                  size_t branch_cap = kBranchCap) {
    const size_t n = space.size();
    CompiledAcceptance c;
    c.position_dim = n;

    if (const auto* poly = std::get_if<PolyhedralA>(&acc)) {
        if (poly->rows.empty()) throw BadParameter("polyhedral: needs at least one row");
        bool nontrivial = false;
        HPolyhedron b = HPolyhedron::whole_space(n);
        for (const auto& r : poly->rows) {
            if (r.a.size() != n) throw BadParameter("polyhedral: row size mismatch");
            if (!LinearFunctional{r.a}.nonnegative())
                throw BadParameter("polyhedral: row functionals must be nonnegative");
            if (r.b > 0) throw BadParameter("polyhedral: levels must be <= 0 (0 must accept)");
            if (!is_zero_vec(r.a)) nontrivial = true;
            b.ineqs.push_back(r);
        }
        if (!nontrivial) throw BadParameter("polyhedral: set would be the whole space");
        c.branches.push_back(std::move(b));
    } else if (const auto* sc = std::get_if<Scenario>(&acc)) {
        if (sc->event.empty()) throw BadParameter("scenario: event must be nonempty");
        HPolyhedron b = HPolyhedron::whole_space(n);
        for (size_t i : sc->event) {
            if (i >= n) throw BadParameter("scenario: atom index out of range");
            b.add_ineq(unit_vec(n, i), Rational(0));
        }
        c.branches.push_back(std::move(b));
    } else if (const auto* es = std::get_if<ExpectedShortfall>(&acc)) {
        if (!(es->alpha > 0 && es->alpha < 1)) throw BadParameter("es: alpha must lie in (0,1)");
        c.aux = n + 1;  // (t, s_1..s_n)
        const size_t d = n + c.aux;
        HPolyhedron b = HPolyhedron::whole_space(d);
        for (size_t i = 0; i < n; ++i) b.add_ineq(unit_vec(d, n + 1 + i), Rational(0));
        for (size_t i = 0; i < n; ++i) {
            Vec a = zeros(d);
            a[i] = 1;          // x_i
            a[n] = 1;          // t
            a[n + 1 + i] = 1;  // s_i
            b.add_ineq(std::move(a), Rational(0));
        }
        Vec top = zeros(d);
        top[n] = -1;
        for (size_t i = 0; i < n; ++i) top[n + 1 + i] = -space.probs[i] / es->alpha;
        b.add_ineq(std::move(top), Rational(0));
        c.branches.push_back(std::move(b));
    } else if (const auto* gs = std::get_if<GenScenarios>(&acc)) {
        if (gs->measures.empty()) throw BadParameter("genscen: needs at least one measure");
        if (gs->measures.size() != gs->floors.size())
            throw BadParameter("genscen: measure/floor count mismatch");
        HPolyhedron b = HPolyhedron::whole_space(n);
        for (size_t k = 0; k < gs->measures.size(); ++k) {
            detail::validate_probability_vector(space, gs->measures[k]);
            if (gs->floors[k] > 0) throw BadParameter("genscen: floors must be <= 0");
            b.add_ineq(gs->measures[k], gs->floors[k]);
        }
        c.branches.push_back(std::move(b));
    } else if (const auto* var = std::get_if<VaRSet>(&acc)) {
        if (!(var->alpha > 0 && var->alpha < 1))
            throw BadParameter("var: alpha must lie in (0,1)");
        c.branches = detail::var_branches(space, var->alpha, branch_cap);
        c.convex = c.branches.size() == 1;
    } else if (const auto* u = std::get_if<ExpUtility>(&acc)) {
        if (u->a <= 0) throw BadParameter("utility: risk aversion must be positive");
        if (u->floor > 0) throw BadParameter("utility: floor must be <= 0 (0 must accept)");
        c.polyhedral = false;
    } else if (const auto* an = std::get_if<AnalyticSet>(&acc)) {
        if (n != 2) throw BadParameter("analytic: these sets live on a 2-atom space");
        if (an->id == "star2d") {
            // The exponential boundary meets the flat piece with matching
            // slope at x1 = 0, so the set is in fact convex (hence
            // star-shaped); what fails is closedness of the augmented set.
            c.polyhedral = false;
        } else if (an->id == "staircase2d") {
            c.branches = staircase_branches();
            c.convex = false;
            c.star_shaped = false;
        } else {
            throw BadParameter("analytic: unknown id '" + an->id + "'");
        }
    } else {
        throw UnsupportedVariant("acceptance: unhandled variant");
    }

    c.conic = c.polyhedral && !c.branches.empty();
    for (const auto& b : c.branches) {
        for (const auto& r : b.ineqs)
            if (r.b != 0) c.conic = false;
        for (const auto& r : b.eqs)
            if (r.b != 0) c.conic = false;
    }
    return c;
}

/// Direct membership test, one oracle per variant; independent of any
/// compiled/lifted representation. For the utility variant this is the
/// engine's single numeric membership (g <= 0 in double precision).
inline bool accepts(const FiniteSampleSpace& space, const AcceptanceSet& acc, const Vec& x) {
    if (x.size() != space.size()) throw BadParameter("accepts: position size mismatch");
    if (const auto* poly = std::get_if<PolyhedralA>(&acc)) {
        for (const auto& r : poly->rows)
            if (dot(r.a, x) < r.b) return false;
        return true;
    }
    if (const auto* sc = std::get_if<Scenario>(&acc)) {
        for (size_t i : sc->event)
            if (x[i] < 0) return false;
        return true;
    }
    if (const auto* es = std::get_if<ExpectedShortfall>(&acc))
        return es_direct(space, es->alpha, x) <= 0;
    if (const auto* gs = std::get_if<GenScenarios>(&acc)) {
        for (size_t k = 0; k < gs->measures.size(); ++k)
            if (dot(gs->measures[k], x) < gs->floors[k]) return false;
        return true;
    }
    if (const auto* var = std::get_if<VaRSet>(&acc)) {
        Rational below = 0;
        for (size_t i = 0; i < x.size(); ++i)
            if (x[i] < 0) below += space.probs[i];
        return below <= var->alpha;
    }
    if (const auto* u = std::get_if<ExpUtility>(&acc)) {
        std::vector<double> xd(x.size());
        for (size_t i = 0; i < x.size(); ++i) xd[i] = to_double(x[i]);
        return utility_constraint(space, *u, xd).g <= 0;
    }
    if (const auto* an = std::get_if<AnalyticSet>(&acc)) {
        if (an->id == "star2d") return star2d_member(x);
        for (const auto& b : staircase_branches())
            if (b.contains(x)) return true;
        return false;
    }
    throw UnsupportedVariant("accepts: unhandled variant");
}

inline std::string variant_name(const AcceptanceSet& acc) {
    if (std::holds_alternative<PolyhedralA>(acc)) return "polyhedral";
    if (std::holds_alternative<Scenario>(acc)) return "scenario";
    if (std::holds_alternative<ExpectedShortfall>(acc)) return "es";
    if (std::holds_alternative<GenScenarios>(acc)) return "genscen";
    if (std::holds_alternative<VaRSet>(acc)) return "var";
    if (std::holds_alternative<ExpUtility>(acc)) return "utility";
    return "analytic";
}

}  // namespace optpay
