#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "optpay/acceptance.hpp"
#include "optpay/double_description.hpp"
#include "optpay/errors.hpp"
#include "optpay/linalg.hpp"
#include "optpay/model.hpp"
#include "optpay/polyops.hpp"
#include "optpay/rational.hpp"
#include "optpay/simplex.hpp"

namespace optpay {

// --------------------------------------------------------------------------
// Problem instance: sample space + market + acceptance set, with the
// compiled branch form and the payoff images of the portfolio kernel
// cached once.
// --------------------------------------------------------------------------

/// Union of closed polyhedra in position space standing for A + ker(price),
/// possibly tagged as the closure of a genuinely open set (the star-shaped
/// analytic fixture, whose augmented set is an open halfplane).
struct OpenHalfplaneForm {
    Vec normal;    // the set is { x : normal . x > rhs }
    Rational rhs;
};

struct AugmentedSet {
    std::vector<HPolyhedron> branches;  // closures, in position space
    bool closed = true;
    std::optional<OpenHalfplaneForm> open_form;
};

struct ProblemInstance {
    FiniteSampleSpace space;
    Market market;
    AcceptanceSet acceptance;
    CompiledAcceptance compiled;
    Mat kernel_payoffs;  // payoff images of the kernel basis, rows in R^n
    bool analytic_star = false;

    size_t atoms() const { return space.size(); }
    size_t assets() const { return market.assets(); }

    mutable std::optional<AugmentedSet> augmented_cache;
};

inline ProblemInstance make_instance(FiniteSampleSpace space, const MarketData& data,
                                     AcceptanceSet acceptance) {
    ProblemInstance inst;
    inst.market = validate_market(space, data.payoffs, data.prices);
    inst.compiled = compile(space, acceptance);
    inst.space = std::move(space);
    inst.acceptance = std::move(acceptance);
    for (const auto& k : inst.market.kernel) inst.kernel_payoffs.push_back(inst.market.payoff(k));

    if (const auto* an = std::get_if<AnalyticSet>(&inst.acceptance)) {
        if (an->id == "star2d") {
            inst.analytic_star = true;
            const Mat id2 = {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}};
            const Vec half = {Rational(1, 2), Rational(1, 2)};
            if (inst.market.payoffs != id2 || inst.market.prices != half)
                throw UnsupportedVariant(
                    "star2d: closed forms require the canonical market "
                    "(identity payoffs, prices (1/2, 1/2))");
        }
    }
    return inst;
}

/// Feasible set of one acceptance branch at position X, in (lambda, aux)
/// coordinates: each branch row (phi | psi) >= b becomes
/// (S^T phi) . lambda + psi . aux >= b - phi . X.
inline HPolyhedron branch_region(const ProblemInstance& inst, size_t branch, const Vec& x) {
    const auto& b = inst.compiled.branches.at(branch);
    const size_t n = inst.atoms();
    const size_t big_n = inst.assets();
    const size_t aux = inst.compiled.aux;
    HPolyhedron out = HPolyhedron::whole_space(big_n + aux);
    auto convert = [&](const Row& r) {
        Vec row(big_n + aux);
        Rational shift = 0;
        for (size_t j = 0; j < big_n; ++j) {
            Rational c = 0;
            for (size_t i = 0; i < n; ++i) c += r.a[i] * inst.market.payoffs[i][j];
            row[j] = c;
        }
        for (size_t t = 0; t < aux; ++t) row[big_n + t] = r.a[n + t];
        for (size_t i = 0; i < n; ++i) shift += r.a[i] * x[i];
        return Row{std::move(row), r.b - shift};
    };
    for (const auto& r : b.ineqs) out.ineqs.push_back(convert(r));
    for (const auto& r : b.eqs) out.eqs.push_back(convert(r));
    return out;
}

/// Price objective on (lambda, aux): aux coordinates are free of charge.
inline Vec lifted_price(const ProblemInstance& inst) {
    Vec c = inst.market.prices;
    c.resize(inst.assets() + inst.compiled.aux, Rational(0));
    return c;
}

namespace detail {

inline void require_position(const ProblemInstance& inst, const Vec& x) {
    if (x.size() != inst.atoms()) throw BadParameter("position size does not match atom count");
}

inline void require_branches(const ProblemInstance& inst, const char* op) {
    if (inst.compiled.branches.empty())
        throw UnsupportedVariant(std::string(op) +
                                 ": needs a branch (polyhedral) acceptance variant");
}

[[noreturn]] inline void throw_arbitrage(const ProblemInstance& inst, const Vec& ray) {
    Vec lam(ray.begin(), ray.begin() + static_cast<long>(inst.assets()));
    throw AcceptabilityArbitrage(
        "requirement is unbounded below; improving acceptable portfolio direction " +
        format_vector(lam));
}

}  // namespace detail

// --------------------------------------------------------------------------
// The capital requirement rho(X) = inf { price(lambda) : X + payoff(lambda)
// acceptable }.
// --------------------------------------------------------------------------

struct RhoResult {
    Rational value;
    bool attained = false;
    std::optional<Vec> argmin;  // portfolio attaining the requirement
};

inline RhoResult rho(const ProblemInstance& inst, const Vec& x) {
    detail::require_position(inst, x);
    if (inst.analytic_star) return RhoResult{star2d_rho(x), false, std::nullopt};
    detail::require_branches(inst, "rho");

    const Vec c = lifted_price(inst);
    std::optional<RhoResult> best;
    for (size_t b = 0; b < inst.compiled.branches.size(); ++b) {
        const auto lp = lp_solve(branch_region(inst, b, x), c, Sense::Min);
        if (lp.status == LPStatus::Infeasible) continue;
        if (lp.status == LPStatus::Unbounded) detail::throw_arbitrage(inst, lp.ray);
        if (!best || lp.value < best->value) {
            Vec lam(lp.x.begin(), lp.x.begin() + static_cast<long>(inst.assets()));
            best = RhoResult{lp.value, true, std::move(lam)};
        }
    }
    if (!best)
        throw NeverAcceptable("position cannot be made acceptable at any cost in this market");
    return *best;
}

// --------------------------------------------------------------------------
// Augmented set A + ker(price) in position space, branch by branch
// (auxiliary lift projected out first, then the kernel payoff directions),
// with containment-pruned output. Cached on the instance.
// --------------------------------------------------------------------------

namespace detail {

/// Keeps only inclusion-maximal polyhedra; among equal sets the earliest.
inline std::vector<HPolyhedron> prune_nested(std::vector<HPolyhedron> polys) {
    std::vector<bool> drop(polys.size(), false);
    for (size_t i = 0; i < polys.size(); ++i) {
        for (size_t j = 0; j < polys.size() && !drop[i]; ++j) {
            if (i == j || drop[j]) continue;
            if (!polyhedron_subset(polys[i], polys[j])) continue;
            // drop i unless they are equal and i comes first
            if (polyhedron_subset(polys[j], polys[i]) && i < j) continue;
            drop[i] = true;
        }
    }
    std::vector<HPolyhedron> kept;
    for (size_t i = 0; i < polys.size(); ++i)
        if (!drop[i]) kept.push_back(std::move(polys[i]));
    return kept;
}

}  // namespace detail

inline const AugmentedSet& augmented_set(const ProblemInstance& inst) {
    if (inst.augmented_cache) return *inst.augmented_cache;
    AugmentedSet out;
    if (inst.analytic_star) {
        HPolyhedron closure = HPolyhedron::whole_space(2);
        closure.add_ineq({Rational(1), Rational(1)}, Rational(-2));
        out.branches.push_back(std::move(closure));
        out.closed = false;
        out.open_form = OpenHalfplaneForm{{Rational(1), Rational(1)}, Rational(-2)};
    } else {
        detail::require_branches(inst, "augmented_set");
        const size_t n = inst.atoms();
        const size_t aux = inst.compiled.aux;
        std::vector<size_t> aux_coords;
        for (size_t t = 0; t < aux; ++t) aux_coords.push_back(n + t);
        for (const auto& branch : inst.compiled.branches) {
            HPolyhedron position_branch =
                aux ? project_out_coords(branch, aux_coords) : branch;
            out.branches.push_back(fm_project(position_branch, inst.kernel_payoffs));
        }
        out.branches = detail::prune_nested(std::move(out.branches));
    }
    inst.augmented_cache = std::move(out);
    return *inst.augmented_cache;
}

/// Independent route to the requirement: one-variable feasibility of
/// X + m . U against each augmented branch, U the canonical unit payoff.
/// Exact interval arithmetic, no simplex.
inline RhoResult rho_via_augmented(const ProblemInstance& inst, const Vec& x) {
    detail::require_position(inst, x);
    if (inst.analytic_star) return RhoResult{star2d_rho(x), false, std::nullopt};
    const auto& aug = augmented_set(inst);
    const Vec u = inst.market.unit_payoff();
    std::optional<Rational> best;
    for (const auto& branch : aug.branches) {
        std::optional<Rational> lo, hi;
        bool feasible = true;
        for (const auto& r : branch.ineqs) {
            const Rational cu = dot(r.a, u);
            const Rational shift = r.b - dot(r.a, x);
            if (cu == 0) {
                if (shift > 0) {
                    feasible = false;
                    break;
                }
            } else if (cu > 0) {
                const Rational bound = shift / cu;
                if (!lo || bound > *lo) lo = bound;
            } else {
                const Rational bound = shift / cu;
                if (!hi || bound < *hi) hi = bound;
            }
        }
        if (!feasible) continue;
        if (!lo)
            throw AcceptabilityArbitrage(
                "requirement is unbounded below along the unit payoff");
        if (hi && *lo > *hi) continue;
        if (!best || *lo < *best) best = *lo;
    }
    if (!best)
        throw NeverAcceptable("position cannot be made acceptable at any cost in this market");
    return RhoResult{*best, true, std::nullopt};
}

// --------------------------------------------------------------------------
// Optimal payoff sets. R(X) is output as a union of convex pieces in
// portfolio coordinates: each piece is the projection to lambda-space of
// one branch's optimal face, pruned for containment, with exact
// vertex/ray/lineality generators.
// --------------------------------------------------------------------------

struct ConvexPiece {
    HPolyhedron region;  // in portfolio coordinates
    VRep generators;
};

struct OptimalSet {
    bool nonempty = false;
    Rational value;  // the requirement (also for empty analytic answers)
    bool attained = false;
    std::vector<ConvexPiece> pieces;
};

namespace detail {

inline std::vector<ConvexPiece> project_and_prune(const ProblemInstance& inst,
                                                  std::vector<HPolyhedron> lifted,
                                                  size_t dim_cap) {
    const size_t big_n = inst.assets();
    std::vector<size_t> aux_coords;
    for (size_t t = 0; t < inst.compiled.aux; ++t) aux_coords.push_back(big_n + t);
    std::vector<HPolyhedron> regions;
    for (auto& poly : lifted) {
        regions.push_back(aux_coords.empty() ? remove_redundant(poly)
                                             : project_out_coords(poly, aux_coords));
    }
    regions = prune_nested(std::move(regions));
    std::vector<ConvexPiece> pieces;
    for (auto& region : regions) {
        VRep gen = vrep(region, dim_cap);
        pieces.push_back(ConvexPiece{std::move(region), std::move(gen)});
    }
    return pieces;
}

}  // namespace detail

inline OptimalSet optimal_set(const ProblemInstance& inst, const Vec& x,
                              size_t dim_cap = kDefaultDimCap) {
    detail::require_position(inst, x);
    if (inst.analytic_star) {
        // The augmented set is open: the infimum is approached, never
        // attained, so the solution set is empty at every position.
        return OptimalSet{false, star2d_rho(x), false, {}};
    }
    detail::require_branches(inst, "optimal_set");

    const Vec c = lifted_price(inst);
    std::vector<LPResult> solved(inst.compiled.branches.size());
    std::optional<Rational> best;
    for (size_t b = 0; b < inst.compiled.branches.size(); ++b) {
        solved[b] = lp_solve(branch_region(inst, b, x), c, Sense::Min);
        if (solved[b].status == LPStatus::Unbounded) detail::throw_arbitrage(inst, solved[b].ray);
        if (solved[b].status == LPStatus::Optimal && (!best || solved[b].value < *best))
            best = solved[b].value;
    }
    if (!best)
        throw NeverAcceptable("position cannot be made acceptable at any cost in this market");

    std::vector<HPolyhedron> faces;
    for (size_t b = 0; b < inst.compiled.branches.size(); ++b) {
        if (solved[b].status != LPStatus::Optimal || solved[b].value != *best) continue;
        HPolyhedron face = branch_region(inst, b, x);
        face.add_eq(c, *best);
        faces.push_back(std::move(face));
    }
    OptimalSet out;
    out.nonempty = true;
    out.value = *best;
    out.attained = true;
    out.pieces = detail::project_and_prune(inst, std::move(faces), dim_cap);
    return out;
}

/// Near-optimal portfolios at tolerance eps > 0: the closed surrogate
/// { price <= rho + eps } intersected with each acceptance branch.
inline OptimalSet epsilon_optimal_set(const ProblemInstance& inst, const Vec& x,
                                      const Rational& eps, size_t dim_cap = kDefaultDimCap) {
    if (eps <= 0) throw BadParameter("epsilon must be positive");
    detail::require_position(inst, x);
    if (inst.analytic_star)
        throw UnsupportedVariant("epsilon sets are polyhedral only for branch variants");
    detail::require_branches(inst, "epsilon_optimal_set");

    const RhoResult base = rho(inst, x);
    const Vec c = lifted_price(inst);
    const Rational budget = base.value + eps;
    std::vector<HPolyhedron> lifted;
    for (size_t b = 0; b < inst.compiled.branches.size(); ++b) {
        HPolyhedron region = branch_region(inst, b, x);
        region.add_ineq(scale(c, Rational(-1)), -budget);
        if (!is_empty(region)) lifted.push_back(std::move(region));
    }
    OptimalSet out;
    out.nonempty = true;
    out.value = base.value;
    out.attained = base.attained;
    out.pieces = detail::project_and_prune(inst, std::move(lifted), dim_cap);
    return out;
}

// --------------------------------------------------------------------------
// Numeric requirement for the smooth (exponential-utility) variant:
// Kelley cutting planes with exact rational LP relaxations and float
// evaluations of the constraint.
// --------------------------------------------------------------------------

struct SmoothRho {
    double value = 0;
    double kkt_residual = 0;
    size_t iterations = 0;
    double box = 0;  // half-width of the portfolio box finally used
};

inline SmoothRho smooth_rho(const ProblemInstance& inst, const Vec& x, double tol = 1e-9,
                            double initial_box = 10.0, size_t max_doublings = 3) {
    detail::require_position(inst, x);
    const auto* u = std::get_if<ExpUtility>(&inst.acceptance);
    if (!u) throw UnsupportedVariant("smooth_rho: needs the utility acceptance variant");
    if (!(tol > 0)) throw BadParameter("smooth_rho: tolerance must be positive");

    const size_t n = inst.atoms();
    const size_t big_n = inst.assets();
    std::vector<double> xd(n), prices(big_n);
    std::vector<std::vector<double>> payoff(n, std::vector<double>(big_n));
    for (size_t i = 0; i < n; ++i) {
        xd[i] = to_double(x[i]);
        for (size_t j = 0; j < big_n; ++j) payoff[i][j] = to_double(inst.market.payoffs[i][j]);
    }
    for (size_t j = 0; j < big_n; ++j) prices[j] = to_double(inst.market.prices[j]);

    auto eval = [&](const std::vector<double>& lam) {
        std::vector<double> pos = xd;
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < big_n; ++j) pos[i] += payoff[i][j] * lam[j];
        return utility_constraint(inst.space, *u, pos);
    };
    auto approx = [](double v) {
        // Exact dyadic value of the double (mantissa times power of two),
        // so huge gradient magnitudes cannot overflow the conversion.
        if (!std::isfinite(v)) throw InternalCheck("smooth_rho: non-finite evaluation");
        int exp = 0;
        const double m = std::frexp(v, &exp);
        const long long mant = std::llround(std::ldexp(m, 53));
        Rational r(mant);
        const int shift = exp - 53;
        if (shift >= 0)
            r *= Rational(Integer(1) << shift);
        else
            r /= Rational(Integer(1) << (-shift));
        return r;
    };

    double box = initial_box;
    for (size_t attempt = 0;; ++attempt) {
        HPolyhedron relax = HPolyhedron::whole_space(big_n);
        const Rational box_r = approx(box);
        for (size_t j = 0; j < big_n; ++j) {
            relax.add_ineq(unit_vec(big_n, j), -box_r);
            relax.add_ineq(scale(unit_vec(big_n, j), Rational(-1)), -box_r);
        }

        std::vector<double> lam(big_n, 0.0);
        SmoothRho result;
        result.box = box;
        bool boundary = false;
        double upper = std::numeric_limits<double>::infinity();
        for (size_t it = 0; it < 300; ++it) {
            auto ev = eval(lam);
            // Cut: g(y) + grad(y) . S (lambda' - lambda) <= 0.
            Vec row(big_n);
            double shift = ev.g;
            for (size_t j = 0; j < big_n; ++j) {
                double sj = 0;
                for (size_t i = 0; i < n; ++i) sj += ev.grad[i] * payoff[i][j];
                row[j] = approx(-sj);
                shift += -sj * lam[j];
            }
            relax.add_ineq(std::move(row), approx(shift));
            const auto lp = lp_solve(relax, inst.market.prices, Sense::Min);
            if (lp.status != LPStatus::Optimal)
                throw InternalCheck("smooth_rho: boxed relaxation must stay solvable");
            const double lower = to_double(lp.value);
            for (size_t j = 0; j < big_n; ++j) lam[j] = to_double(lp.x[j]);
            auto probe = eval(lam);
            if (probe.g <= tol) {
                double price_here = 0;
                for (size_t j = 0; j < big_n; ++j) price_here += prices[j] * lam[j];
                upper = std::min(upper, price_here);
            }
            result.iterations = it + 1;
            if (probe.g <= tol && upper - lower <= tol) {
                boundary = false;
                for (size_t j = 0; j < big_n; ++j)
                    if (std::abs(lam[j]) >= box - 1e-6) boundary = true;
                if (!boundary) {
                    result.value = upper;
                    // Stationarity residual of price + mu * S^T grad at the
                    // final iterate, with the best single multiplier mu >= 0.
                    std::vector<double> d(big_n, 0.0);
                    for (size_t j = 0; j < big_n; ++j)
                        for (size_t i = 0; i < n; ++i) d[j] += probe.grad[i] * payoff[i][j];
                    double num = 0, den = 0;
                    for (size_t j = 0; j < big_n; ++j) {
                        num += -prices[j] * d[j];
                        den += d[j] * d[j];
                    }
                    const double mu = den > 0 ? std::max(0.0, num / den) : 0.0;
                    double res = std::max(0.0, probe.g);
                    for (size_t j = 0; j < big_n; ++j)
                        res = std::max(res, std::abs(prices[j] + mu * d[j]));
                    result.kkt_residual = res;
                    return result;
                }
                break;  // hit the box: enlarge
            }
        }
        if (!boundary)
            throw InternalCheck("smooth_rho: cutting planes failed to close the gap");
        if (attempt >= max_doublings)
            throw BoxBoundaryHit("smooth_rho: optimum pinned to the portfolio box");
        box *= 2;
    }
}

}  // namespace optpay
