#pragma once
// Diagnostics for the optimal-portfolio map: costless-acceptable-payoff
// detection, existence and uniqueness reports, semicontinuity reports, and
// exact perturbation probes.  Everything here is either decided by exact
// LPs over the compiled branch forms or explicitly labelled as a probe /
// sampling heuristic that cannot prove a negative.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "optpay/acceptance.hpp"
#include "optpay/errors.hpp"
#include "optpay/linalg.hpp"
#include "optpay/polyhedron.hpp"
#include "optpay/polyops.hpp"
#include "optpay/rational.hpp"
#include "optpay/risk_engine.hpp"
#include "optpay/simplex.hpp"

namespace optpay {

// --------------------------------------------------------------------------
// Costless acceptable payoffs.
//
// A "good deal" is a nonzero payoff in the acceptance set with price zero;
// a "scalable" one is a nonzero zero-price direction in the recession cone
// of the acceptance set (arbitrarily large multiples stay acceptable).
// Either kind breaks the economics of the requirement: acceptability can be
// bought for nothing.
// --------------------------------------------------------------------------

enum class DealStatus {
    Found,         // verified witness attached
    ProvenAbsent,  // exact LPs certify there is none
    NotFound,      // heuristic search failed; absence NOT established
};

struct DealWitness {
    Vec portfolio;  // in asset coordinates, nonzero
    Vec payoff;     // its payoff, in position coordinates
};

struct DealReport {
    DealStatus good = DealStatus::NotFound;
    std::optional<DealWitness> good_witness;
    DealStatus scalable = DealStatus::NotFound;
    std::optional<DealWitness> scalable_witness;
    std::string method;
};

namespace detail {

/// Searches { z in region : price . lambda(z) = 0 } for a point whose
/// lambda-part is nonzero, by maximizing +/- each lambda coordinate.
/// Exhaustive for polyhedral regions: either a witness exists (some optimum
/// is nonzero or unbounded) or every such LP is zero and the lambda-part is
/// identically zero on the region.
struct KernelHuntResult {
    std::optional<Vec> lambda;  // nonzero lambda-part of a member
};

inline KernelHuntResult hunt_kernel_member(HPolyhedron region, const Vec& lifted_price_row,
                                           size_t big_n) {
    region.add_eq(lifted_price_row, Rational(0));
    const size_t dim = region.dim;
    auto lambda_part = [&](const Vec& z) { return Vec(z.begin(), z.begin() + static_cast<long>(big_n)); };
    for (size_t j = 0; j < 2 * big_n; ++j) {
        Vec obj = zeros(dim);
        obj[j % big_n] = (j < big_n) ? Rational(1) : Rational(-1);
        const LPResult lp = lp_solve(region, obj, Sense::Max);
        if (lp.status == LPStatus::Infeasible) return {};  // region misses the kernel entirely
        if (lp.status == LPStatus::Unbounded) {
            Vec z = add(lp.x, lp.ray);
            if (is_zero_vec(lambda_part(z))) z = add(z, lp.ray);
            return {lambda_part(z)};
        }
        // Optimum != 0 in either direction pins a nonzero coordinate: > 0 at
        // the maximizer, < 0 at every feasible point.
        if (lp.value != 0) return {lambda_part(lp.x)};
    }
    return {};  // every +/- coordinate maximum is 0: lambda == 0 on the region
}

/// Branch rows with right-hand sides dropped to zero: the recession cone of
/// the branch in the same coordinates.
inline HPolyhedron zero_rhs(HPolyhedron p) {
    for (auto& r : p.ineqs) r.b = 0;
    for (auto& r : p.eqs) r.b = 0;
    return p;
}

inline void verify_deal_point(const ProblemInstance& inst, const Vec& lambda) {
    if (is_zero_vec(lambda)) throw InternalCheck("deal witness is the zero portfolio");
    if (dot(inst.market.prices, lambda) != 0) throw InternalCheck("deal witness has nonzero price");
    if (!accepts(inst.space, inst.acceptance, inst.market.payoff(lambda)))
        throw InternalCheck("deal witness payoff rejected by the membership oracle");
}

inline void verify_scalable_direction(const ProblemInstance& inst, const Vec& lambda) {
    if (is_zero_vec(lambda)) throw InternalCheck("scalable witness is the zero portfolio");
    if (dot(inst.market.prices, lambda) != 0)
        throw InternalCheck("scalable witness has nonzero price");
    // Direction must lie in some branch's recession cone (fixing lambda,
    // auxiliary coordinates may be needed for feasibility).
    const size_t big_n = inst.assets();
    for (size_t b = 0; b < inst.compiled.branches.size(); ++b) {
        HPolyhedron cone = zero_rhs(branch_region(inst, b, zeros(inst.atoms())));
        for (size_t j = 0; j < big_n; ++j) cone.add_eq(unit_vec(cone.dim, j), lambda[j]);
        if (!is_empty(cone)) return;
    }
    throw InternalCheck("scalable witness lies in no branch recession cone");
}

}  // namespace detail

inline DealReport deal_check(const ProblemInstance& inst) {
    DealReport out;
    const size_t big_n = inst.assets();
    const Vec price = lifted_price(inst);
    const Vec zero_x = zeros(inst.atoms());

    if (inst.market.kernel.empty()) {
        out.good = DealStatus::ProvenAbsent;
        out.scalable = DealStatus::ProvenAbsent;
        out.method = "the pricing functional has a trivial kernel: the only zero-price portfolio is 0";
        return out;
    }

    if (inst.analytic_star) {
        // Scalable directions live in the closed-form recession branches,
        // which are polyhedral cones (and subsets of the set itself, so any
        // direction found is simultaneously a point witness).
        out.method =
            "closed-form recession cones searched by exact LPs; point witnesses re-verified "
            "by the exact membership oracle";
        for (const auto& cone : star2d_asymptotic_branches()) {
            auto hunt = detail::hunt_kernel_member(cone, inst.market.prices, big_n);
            if (hunt.lambda) {
                Vec lam = primitive(*hunt.lambda);
                out.scalable = DealStatus::Found;
                out.scalable_witness = DealWitness{lam, inst.market.payoff(lam)};
                break;
            }
        }
        if (out.scalable != DealStatus::Found) out.scalable = DealStatus::ProvenAbsent;

        std::vector<Vec> candidates;
        if (out.scalable_witness) candidates.push_back(out.scalable_witness->portfolio);
        for (const auto& k : inst.market.kernel) {
            candidates.push_back(k);
            candidates.push_back(scale(k, Rational(-1)));
        }
        for (const auto& lam : candidates) {
            if (is_zero_vec(lam)) continue;
            const Vec pay = inst.market.payoff(lam);
            if (star2d_member(pay)) {
                detail::verify_deal_point(inst, lam);
                out.good = DealStatus::Found;
                out.good_witness = DealWitness{lam, pay};
                break;
            }
        }
        if (out.good != DealStatus::Found) out.good = DealStatus::NotFound;
        if (out.scalable_witness) {
            // Sanity: scalable directions of this set remain members at
            // large scales.
            const Vec pay = out.scalable_witness->payoff;
            if (!star2d_member(pay) || !star2d_member(scale(pay, Rational(1024))))
                throw InternalCheck("scalable witness fails scaled membership");
        }
        return out;
    }

    if (!inst.compiled.branches.empty()) {
        out.method =
            "per-branch exact LPs over the zero-price slice (point deals) and its recession "
            "form (scalable deals); +/- each asset coordinate maximized";
        bool good_found = false;
        bool scal_found = false;
        for (size_t b = 0; b < inst.compiled.branches.size() && !(good_found && scal_found); ++b) {
            if (!good_found) {
                auto hunt = detail::hunt_kernel_member(branch_region(inst, b, zero_x), price, big_n);
                if (hunt.lambda) {
                    detail::verify_deal_point(inst, *hunt.lambda);
                    out.good = DealStatus::Found;
                    out.good_witness = DealWitness{*hunt.lambda, inst.market.payoff(*hunt.lambda)};
                    good_found = true;
                }
            }
            if (!scal_found) {
                auto hunt = detail::hunt_kernel_member(
                    detail::zero_rhs(branch_region(inst, b, zero_x)), price, big_n);
                if (hunt.lambda) {
                    Vec lam = primitive(*hunt.lambda);
                    detail::verify_scalable_direction(inst, lam);
                    out.scalable = DealStatus::Found;
                    out.scalable_witness = DealWitness{lam, inst.market.payoff(lam)};
                    scal_found = true;
                }
            }
        }
        if (!good_found) out.good = DealStatus::ProvenAbsent;
        if (!scal_found) out.scalable = DealStatus::ProvenAbsent;
        return out;
    }

    // Smooth utility variant.  The recession cone of the acceptance set is
    // exactly the nonnegative orthant (any negative component drives the
    // utility to -infinity along the ray), so the scalable question is an
    // exact LP; the point question is only sampled.
    out.method =
        "scalable: exact LPs over { payoff >= 0, price = 0 } (the recession cone of the "
        "utility acceptance set); point deals: kernel-direction sampling, absence not provable";
    HPolyhedron orthant = HPolyhedron::whole_space(big_n);
    for (size_t i = 0; i < inst.atoms(); ++i) {
        Vec row(big_n);
        for (size_t j = 0; j < big_n; ++j) row[j] = inst.market.payoffs[i][j];
        orthant.add_ineq(std::move(row), Rational(0));
    }
    auto hunt = detail::hunt_kernel_member(orthant, inst.market.prices, big_n);
    if (hunt.lambda) {
        Vec lam = primitive(*hunt.lambda);
        const Vec pay = inst.market.payoff(lam);
        for (const auto& c : pay)
            if (c < 0) throw InternalCheck("utility scalable witness leaves the orthant");
        out.scalable = DealStatus::Found;
        out.scalable_witness = DealWitness{lam, pay};
        // A nonnegative zero-price payoff is itself acceptable (utility of a
        // nonnegative outcome is >= the utility of 0 >= any floor <= 0).
        detail::verify_deal_point(inst, lam);
        out.good = DealStatus::Found;
        out.good_witness = out.scalable_witness;
        return out;
    }
    out.scalable = DealStatus::ProvenAbsent;
    static const Rational kScales[] = {Rational(1), Rational(1, 4), Rational(1, 64)};
    for (const auto& k : inst.market.kernel) {
        for (int sign : {1, -1}) {
            for (const auto& t : kScales) {
                const Vec lam = scale(k, t * sign);
                if (is_zero_vec(lam)) continue;
                if (accepts(inst.space, inst.acceptance, inst.market.payoff(lam))) {
                    out.good = DealStatus::Found;
                    out.good_witness = DealWitness{lam, inst.market.payoff(lam)};
                    return out;
                }
            }
        }
    }
    out.good = DealStatus::NotFound;
    return out;
}

// --------------------------------------------------------------------------
// Existence of optimizers.
// --------------------------------------------------------------------------

enum class ExistenceStatus {
    AllExist,    // every finite requirement is attained
    NoneExist,   // the requirement is never attained (certificate attached)
    PerPosition  // attainment must be checked position by position
};

struct ExistenceReport {
    ExistenceStatus status = ExistenceStatus::PerPosition;
    std::vector<std::string> chain;  // reasons, in order of application
    std::optional<std::string> certificate;
    DealReport deals;
};

inline ExistenceReport existence_report(const ProblemInstance& inst) {
    ExistenceReport out;
    out.deals = deal_check(inst);

    if (inst.analytic_star) {
        out.status = ExistenceStatus::NoneExist;
        out.certificate =
            "the set of acceptability-restoring payoffs augmented by the price kernel is the "
            "open halfplane { x1 + x2 > -2 }: the requirement is a one-sided limit over an "
            "open set and is attained at no position";
        out.chain = {"closed-form evaluation of the augmented set"};
        return out;
    }

    if (!inst.compiled.branches.empty()) {
        out.status = ExistenceStatus::AllExist;
        out.chain.push_back(
            inst.compiled.branches.size() == 1
                ? "polyhedral acceptance: the exact program attains its optimum whenever the "
                  "requirement is finite"
                : "branchwise polyhedral acceptance: each branch program attains its optimum "
                  "whenever feasible, and the requirement is the minimum over branches");
        if (out.deals.scalable == DealStatus::ProvenAbsent)
            out.chain.push_back(
                "no scalable costless acceptable direction: the recession cone meets the price "
                "kernel only at 0");
        if (inst.compiled.star_shaped && out.deals.good == DealStatus::ProvenAbsent)
            out.chain.push_back(
                "star-shaped acceptance admitting no costless acceptable payoff");
        return out;
    }

    // Smooth utility variant.
    if (out.deals.scalable == DealStatus::ProvenAbsent) {
        out.status = ExistenceStatus::AllExist;
        out.chain = {
            "closed acceptance set whose recession cone meets the price kernel only at 0: "
            "minimizing portfolios stay bounded, so the finite requirement is attained"};
    } else {
        out.status = ExistenceStatus::PerPosition;
        out.chain = {
            "a scalable costless acceptable direction exists (or was not excluded): "
            "attainment is not certified globally and must be checked per position"};
    }
    return out;
}

// --------------------------------------------------------------------------
// Uniqueness of optimizers.
// --------------------------------------------------------------------------

enum class GlobalUniquenessCertificate {
    ConeRows,         // conic polyhedral acceptance, every row pins the kernel
    StrictConvexity,  // strictly convex acceptance set
    None
};

/// Active-row analysis at one optimum, available for single-branch
/// aux-free polyhedral acceptance: which constraint rows are tight at their
/// infimum over the acceptance set, and whether the price kernel directions
/// are pinned by those rows.
struct ActiveSetReport {
    std::vector<size_t> active;                        // tight row indexes
    std::vector<std::optional<Rational>> support;      // per-row infimum over the set
    size_t test_subspace_dim = 0;  // dim of kernel directions annihilated by the active rows
    bool pinned = false;           // test_subspace_dim == 0 (certifies a unique optimum here)
};

struct UniquenessReport {
    bool singleton = false;
    size_t face_dim = 0;  // max affine dimension over solution-set pieces
    std::optional<Vec> point;
    GlobalUniquenessCertificate certificate = GlobalUniquenessCertificate::None;
    std::string certificate_note;
    std::optional<ActiveSetReport> active_set;
    std::string note;
};

namespace detail {

/// dim( { kernel directions annihilated by every listed functional } ),
/// computed in kernel coordinates: rows[i][k] = row_i . kernel_payoff_k.
inline size_t kernel_pinned_dim(const ProblemInstance& inst, const std::vector<Vec>& x_rows) {
    const size_t kdim = inst.kernel_payoffs.size();
    if (kdim == 0) return 0;
    Mat m;
    for (const auto& a : x_rows) {
        Vec r(kdim);
        for (size_t k = 0; k < kdim; ++k) r[k] = dot(a, inst.kernel_payoffs[k]);
        m.push_back(std::move(r));
    }
    if (m.empty()) return kdim;
    return kdim - rank(m);
}

}  // namespace detail

inline UniquenessReport uniqueness_at(const ProblemInstance& inst, const Vec& x,
                                      size_t dim_cap = kDefaultDimCap) {
    detail::require_position(inst, x);
    UniquenessReport out;

    if (inst.analytic_star)
        throw EmptyOptimalSet("the solution set is empty at every position for this variant");

    if (inst.compiled.branches.empty()) {
        // Strictly concave utility => strictly convex acceptance set => at
        // most one optimizer.  Attainment is the existence report's job.
        out.singleton = true;
        out.face_dim = 0;
        out.certificate = GlobalUniquenessCertificate::StrictConvexity;
        out.certificate_note =
            "strictly concave utility makes the acceptance set strictly convex: two distinct "
            "optimal payoffs would average to a strictly interior, strictly cheaper one";
        out.note = "optimizer not produced in closed form; see the numeric solver";
        return out;
    }

    const OptimalSet opt = optimal_set(inst, x, dim_cap);
    if (!opt.nonempty || opt.pieces.empty())
        throw EmptyOptimalSet("no optimizer at this position");
    for (const auto& piece : opt.pieces)
        out.face_dim = std::max(out.face_dim, dimension(piece.region));
    out.singleton = opt.pieces.size() == 1 && out.face_dim == 0;
    if (out.singleton) out.point = opt.pieces.front().generators.vertices.front();
    if (!out.singleton && out.face_dim == 0)
        out.note = "several isolated optimizers across branches: pointwise dimension 0 but not "
                   "a singleton";

    const bool single_plain =
        inst.compiled.branches.size() == 1 && inst.compiled.aux == 0 && inst.compiled.polyhedral;

    if (single_plain && inst.compiled.conic) {
        bool all_rows_pin = true;
        for (const auto& r : inst.compiled.branches.front().ineqs) {
            if (detail::kernel_pinned_dim(inst, {r.a}) != 0) {
                all_rows_pin = false;
                break;
            }
        }
        if (all_rows_pin) {
            out.certificate = GlobalUniquenessCertificate::ConeRows;
            out.certificate_note =
                "conic polyhedral acceptance: every constraint row annihilates no nonzero "
                "price-kernel direction, so optimizers are unique at every position";
        }
    }

    if (single_plain) {
        const auto& branch = inst.compiled.branches.front();
        ActiveSetReport asr;
        const Vec& lam_star = out.singleton ? *out.point
                                            : opt.pieces.front().generators.vertices.front();
        const Vec y_star = add(x, inst.market.payoff(lam_star));
        std::vector<Vec> active_rows;
        for (size_t i = 0; i < branch.ineqs.size(); ++i) {
            const auto sv = support_value(branch, LinearFunctional{branch.ineqs[i].a});
            if (!sv.finite) {
                asr.support.push_back(std::nullopt);
                continue;
            }
            asr.support.push_back(sv.value);
            if (dot(branch.ineqs[i].a, y_star) == sv.value) {
                asr.active.push_back(i);
                active_rows.push_back(branch.ineqs[i].a);
            }
        }
        asr.test_subspace_dim = detail::kernel_pinned_dim(inst, active_rows);
        if (active_rows.empty()) asr.test_subspace_dim = inst.kernel_payoffs.size();
        asr.pinned = asr.test_subspace_dim == 0;
        out.active_set = std::move(asr);
    }
    return out;
}

/// Sampling falsification of global uniqueness: random rational positions
/// until one with a non-singleton solution set appears.  Finding nothing
/// proves nothing; this exists for the no-certificate case.
struct FalsificationReport {
    bool found = false;
    std::optional<Vec> witness_position;
    size_t witness_face_dim = 0;
    size_t trials_run = 0;
};

inline FalsificationReport uniqueness_falsify(const ProblemInstance& inst, size_t trials,
                                              uint64_t seed, size_t dim_cap = kDefaultDimCap) {
    if (inst.compiled.branches.empty())
        throw UnsupportedVariant(
            "uniqueness falsification samples branch variants; smooth and closed-form variants "
            "carry their own certificates");
    FalsificationReport out;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> num(-24, 24);
    std::uniform_int_distribution<int> den(1, 8);
    for (size_t t = 0; t < trials; ++t) {
        Vec x(inst.atoms());
        for (auto& c : x) c = Rational(num(rng), den(rng));
        ++out.trials_run;
        try {
            const OptimalSet opt = optimal_set(inst, x, dim_cap);
            size_t fd = 0;
            for (const auto& piece : opt.pieces) fd = std::max(fd, dimension(piece.region));
            if (fd >= 1) {
                out.found = true;
                out.witness_position = x;
                out.witness_face_dim = fd;
                return out;
            }
        } catch (const NeverAcceptable&) {
            continue;  // position not repairable in this market; not a uniqueness statement
        }
    }
    return out;
}

// --------------------------------------------------------------------------
// Upper semicontinuity report.
//
// For star-shaped acceptance sets (with some position having optimizers),
// upper semicontinuity of the solution map is equivalent to the absence of
// scalable costless acceptable directions; the failure witness is an
// unbounded solution set.  Outside that scope the report downgrades to
// Inconclusive rather than guessing.
// --------------------------------------------------------------------------

enum class UscStatus { USC, NotUSC, Inconclusive };

struct UscReport {
    UscStatus status = UscStatus::Inconclusive;
    std::string reason;
    std::optional<Vec> witness_position;  // position whose solution set is unbounded
    std::optional<Vec> witness_ray;       // unbounded portfolio direction there
    DealReport deals;
};

inline UscReport usc_report(const ProblemInstance& inst) {
    UscReport out;
    out.deals = deal_check(inst);

    if (inst.analytic_star) {
        out.status = UscStatus::USC;
        out.reason =
            "the solution set is empty at every position, and an empty-valued map is upper "
            "semicontinuous vacuously; scalable costless directions do exist here, but the "
            "equivalence between upper semicontinuity and their absence requires at least one "
            "position with optimizers";
        return out;
    }

    if (out.deals.scalable == DealStatus::ProvenAbsent) {
        out.status = UscStatus::USC;
        out.reason =
            "no scalable costless acceptable direction: solution sets stay bounded over "
            "compact position sets, which yields upper semicontinuity for closed-graph maps";
        return out;
    }

    if (out.deals.scalable == DealStatus::Found && !inst.compiled.branches.empty() &&
        inst.compiled.star_shaped) {
        // Any attained optimum inherits the scalable direction into its
        // recession cone, so the solution set at 0 is unbounded.
        const OptimalSet opt = optimal_set(inst, zeros(inst.atoms()));
        for (const auto& piece : opt.pieces) {
            const auto& gen = piece.generators;
            if (!gen.rays.empty() || !gen.lineality.empty()) {
                out.status = UscStatus::NotUSC;
                out.witness_position = zeros(inst.atoms());
                out.witness_ray = gen.rays.empty() ? gen.lineality.front() : gen.rays.front();
                out.reason =
                    "a scalable costless acceptable direction exists and the star-shaped "
                    "equivalence applies: the solution set at the zero position is unbounded "
                    "along the attached ray, so no compact set traps solutions near it";
                return out;
            }
        }
        out.status = UscStatus::Inconclusive;
        out.reason =
            "a scalable costless acceptable direction exists but no unbounded solution set "
            "was exhibited at the probe position; report left open";
        return out;
    }

    out.status = UscStatus::Inconclusive;
    out.reason =
        out.deals.scalable == DealStatus::Found
            ? "a scalable costless acceptable direction exists but the acceptance union is not "
              "star-shaped (or attainment is not certified), so the boundedness equivalence "
              "does not apply"
            : "scalable-direction search was inconclusive for this variant";
    return out;
}

// --------------------------------------------------------------------------
// Lower-semicontinuity perturbation probes.
//
// The probe walks X + t_k D, t_k = 2^{-k}, and measures the one-sided
// l-infinity deviation from the solution set at X toward the one at the
// perturbed position (and the reverse), after truncating both to a box.
// The deviation is evaluated at the vertices of the truncated sets: the
// distance-to-a-union function is a min of convex functions, so the vertex
// maximum is the declared surrogate, not a supremum claim.
// --------------------------------------------------------------------------

enum class ProbeVerdict { ConsistentWithLsc, ViolationWitness, Inconclusive };

struct ProbeRow {
    size_t k = 0;
    Rational t;
    Rational deficit_lsc;    // deviation of R(X) toward R(X + t D)
    Rational deficit_outer;  // reverse deviation
};

/// Hypotheses relevant to guaranteed lower semicontinuity of the
/// tolerance-relaxed solution map, each decided by an exact LP.
struct HypothesisReport {
    bool branches_full_dimensional = false;   // closure-of-interior surrogate
    bool strict_feasibility_at_base = false;  // some branch admits a uniform slack at X
    bool strictly_positive_payoff = false;    // a traded payoff >= 1 componentwise exists
    std::optional<bool> interior_recession_reachable;  // single-branch aux-free only
    bool guaranteed = false;
    std::string note;
};

struct ProbeReport {
    Vec base;
    Vec direction;
    size_t scales = 16;
    Rational box;
    std::optional<Rational> epsilon;  // set for the tolerance-relaxed probe
    std::vector<ProbeRow> rows;       // k = 0..scales inclusive
    ProbeVerdict verdict = ProbeVerdict::Inconclusive;
    std::optional<Rational> delta_star;  // positive floor certified by a violation tail
    std::optional<HypothesisReport> hypotheses;
    std::string note;
};

namespace detail {

struct BoxedUnion {
    std::vector<HPolyhedron> regions;  // truncated, nonempty
    std::vector<Vec> vertices;         // pooled vertices of the truncations
};

inline BoxedUnion box_union(const OptimalSet& set, const Rational& box, size_t dim_cap) {
    BoxedUnion out;
    for (const auto& piece : set.pieces) {
        HPolyhedron r = piece.region.intersect_box(box);
        if (is_empty(r)) continue;
        r = remove_redundant(r);
        const VRep v = vrep(r, dim_cap);
        for (const auto& vert : v.vertices) out.vertices.push_back(vert);
        out.regions.push_back(std::move(r));
    }
    if (out.regions.empty())
        throw EmptyAfterBoxing("probe: box truncation emptied the solution set");
    return out;
}

inline Rational union_deviation(const BoxedUnion& from, const BoxedUnion& to) {
    Rational worst = 0;
    for (const auto& v : from.vertices) {
        std::optional<Rational> best;
        for (const auto& r : to.regions) {
            const Rational d = dist_linf(v, r);
            if (!best || d < *best) best = d;
            if (*best == 0) break;
        }
        if (best && *best > worst) worst = *best;
    }
    return worst;
}

inline ProbeReport probe_core(const ProblemInstance& inst, const Vec& x, const Vec& d,
                              const std::optional<Rational>& eps, size_t scales,
                              const Rational& box, size_t dim_cap) {
    require_position(inst, x);
    if (d.size() != inst.atoms()) throw BadParameter("probe: direction size mismatch");
    if (scales < 2 || scales > 64) throw BadParameter("probe: scale count must lie in [2, 64]");
    if (box <= 0) throw BadParameter("probe: box half-width must be positive");

    auto solution_set = [&](const Vec& pos) {
        const OptimalSet s = eps ? epsilon_optimal_set(inst, pos, *eps, dim_cap)
                                 : optimal_set(inst, pos, dim_cap);
        if (!s.nonempty || s.pieces.empty())
            throw EmptyOptimalSet("probe: no solutions at a probe position");
        return s;
    };

    ProbeReport out;
    out.base = x;
    out.direction = d;
    out.scales = scales;
    out.box = box;
    out.epsilon = eps;

    const BoxedUnion base = box_union(solution_set(x), box, dim_cap);
    for (size_t k = 0; k <= scales; ++k) {
        const Rational t(Integer(1), Integer(1) << k);
        const BoxedUnion at_k = box_union(solution_set(add(x, scale(d, t))), box, dim_cap);
        out.rows.push_back(ProbeRow{k, t, union_deviation(base, at_k),
                                    union_deviation(at_k, base)});
    }

    const Rational final_deficit = out.rows.back().deficit_lsc;
    const Rational threshold = box / Rational(Integer(1) << (scales / 2));
    if (final_deficit == 0 || final_deficit <= threshold) {
        out.verdict = ProbeVerdict::ConsistentWithLsc;
        out.note = final_deficit == 0 ? "deficits vanish exactly at the finest scale"
                                      : "deficits fall below box * 2^(-scales/2)";
        return out;
    }
    // A violation requires the deficits to be exactly constant or
    // nondecreasing over the last half of the scales, certifying a positive
    // floor; no tolerance constant is involved.
    bool tail_monotone = true;
    for (size_t k = scales / 2; k + 1 <= scales && tail_monotone; ++k)
        if (out.rows[k + 1].deficit_lsc < out.rows[k].deficit_lsc) tail_monotone = false;
    const Rational floor_value = out.rows[scales / 2].deficit_lsc;
    if (tail_monotone && floor_value > 0) {
        out.verdict = ProbeVerdict::ViolationWitness;
        out.delta_star = floor_value;
        out.note =
            "deficits are bounded below by delta_star over the last half of the scales: "
            "points of the base solution set stay at least that far from every perturbed "
            "solution set";
    } else {
        out.verdict = ProbeVerdict::Inconclusive;
        out.note = "deficits neither fell below the consistency threshold nor exhibited a "
                   "monotone positive tail";
    }
    return out;
}

inline HypothesisReport epsilon_hypotheses(const ProblemInstance& inst, const Vec& x) {
    HypothesisReport h;
    const size_t n = inst.atoms();
    const size_t big_n = inst.assets();

    h.branches_full_dimensional = true;
    for (const auto& branch : inst.compiled.branches) {
        HPolyhedron in_positions = branch;
        if (inst.compiled.aux > 0) {
            std::vector<size_t> aux_coords;
            for (size_t t = 0; t < inst.compiled.aux; ++t) aux_coords.push_back(n + t);
            in_positions = project_out_coords(branch, aux_coords);
        }
        if (dimension(in_positions) != n) {
            h.branches_full_dimensional = false;
            break;
        }
    }

    for (size_t b = 0; b < inst.compiled.branches.size() && !h.strict_feasibility_at_base; ++b) {
        const HPolyhedron region = branch_region(inst, b, x);
        if (!region.eqs.empty()) continue;  // equality rows admit no slack
        HPolyhedron lifted = HPolyhedron::whole_space(region.dim + 1);
        for (const auto& r : region.ineqs) {
            Vec a = r.a;
            a.push_back(Rational(-1));
            lifted.ineqs.push_back(Row{std::move(a), r.b});
        }
        Vec cap = zeros(region.dim + 1);
        cap[region.dim] = -1;
        lifted.ineqs.push_back(Row{std::move(cap), Rational(-1)});  // t <= 1
        Vec obj = zeros(region.dim + 1);
        obj[region.dim] = 1;
        const LPResult lp = lp_solve(lifted, obj, Sense::Max);
        if (lp.status == LPStatus::Optimal && lp.value > 0) h.strict_feasibility_at_base = true;
    }

    {
        HPolyhedron pos = HPolyhedron::whole_space(big_n);
        for (size_t i = 0; i < n; ++i) {
            Vec row(big_n);
            for (size_t j = 0; j < big_n; ++j) row[j] = inst.market.payoffs[i][j];
            pos.add_ineq(std::move(row), Rational(1));
        }
        h.strictly_positive_payoff = lp_feasible_point(pos).has_value();
    }

    if (inst.compiled.branches.size() == 1 && inst.compiled.aux == 0) {
        const auto& branch = inst.compiled.branches.front();
        HPolyhedron lifted = HPolyhedron::whole_space(big_n + 1);
        for (const auto& r : branch.ineqs) {
            Vec a(big_n + 1);
            for (size_t j = 0; j < big_n; ++j) {
                Rational c = 0;
                for (size_t i = 0; i < n; ++i) c += r.a[i] * inst.market.payoffs[i][j];
                a[j] = c;
            }
            a[big_n] = -1;
            lifted.ineqs.push_back(Row{std::move(a), Rational(0)});
        }
        Vec cap = zeros(big_n + 1);
        cap[big_n] = -1;
        lifted.ineqs.push_back(Row{std::move(cap), Rational(-1)});
        Vec obj = zeros(big_n + 1);
        obj[big_n] = 1;
        const LPResult lp = lp_solve(lifted, obj, Sense::Max);
        h.interior_recession_reachable = lp.status == LPStatus::Optimal && lp.value > 0;
    }

    if (h.strictly_positive_payoff) {
        h.guaranteed = true;
        h.note =
            "a traded payoff with every component >= 1 exists (all atoms carry positive "
            "probability): the tolerance-relaxed solution map is lower semicontinuous";
    } else if (h.branches_full_dimensional && inst.compiled.convex &&
               h.interior_recession_reachable.value_or(false)) {
        h.guaranteed = true;
        h.note =
            "convex full-dimensional acceptance whose recession cone interior meets the "
            "traded subspace: the tolerance-relaxed solution map is lower semicontinuous";
    } else {
        h.note = "no sufficient condition fired; the probe result stands on its own";
    }
    return h;
}

}  // namespace detail

inline ProbeReport lsc_probe(const ProblemInstance& inst, const Vec& x, const Vec& d,
                             size_t scales = 16, const Rational& box = Rational(10),
                             size_t dim_cap = kDefaultDimCap) {
    return detail::probe_core(inst, x, d, std::nullopt, scales, box, dim_cap);
}

inline ProbeReport epsilon_lsc_probe(const ProblemInstance& inst, const Vec& x, const Vec& d,
                                     const Rational& eps, size_t scales = 16,
                                     const Rational& box = Rational(10),
                                     size_t dim_cap = kDefaultDimCap) {
    if (eps <= 0) throw BadParameter("epsilon must be positive");
    ProbeReport out = detail::probe_core(inst, x, d, eps, scales, box, dim_cap);
    out.hypotheses = detail::epsilon_hypotheses(inst, x);
    out.note += "; tolerance band taken closed (price <= requirement + epsilon)";
    return out;
}

// --------------------------------------------------------------------------
// Decomposition check: the solution set splits into the costless recession
// cone plus the convex hull of the extreme points of its slice through a
// complement of the lineality space; those extreme points solve square
// systems built from potentially-tight rows and the pricing functional, and
// stay inside a common bound along a position segment.
// --------------------------------------------------------------------------

struct DecompositionReport {
    bool ok = false;
    bool reconstruction_ok = false;
    bool segment_bounded_ok = false;
    size_t cone_ray_count = 0;
    size_t cone_lineality_dim = 0;
    size_t vertex_count = 0;     // extreme points of the base slice
    size_t candidate_count = 0;  // invertible functional subsets inspected
    Rational bound;              // common box certified by the candidate systems
    std::string note;
};

inline DecompositionReport decomposition_check(const ProblemInstance& inst, const Vec& x,
                                               std::optional<Vec> segment_dir = std::nullopt,
                                               size_t dim_cap = kDefaultDimCap) {
    detail::require_position(inst, x);
    if (inst.compiled.branches.size() != 1 || inst.compiled.aux != 0 ||
        !inst.compiled.polyhedral)
        throw UnsupportedVariant(
            "decomposition check covers single-branch polyhedral acceptance without "
            "auxiliary variables");
    const size_t big_n = inst.assets();
    const size_t n = inst.atoms();
    const Vec u = segment_dir ? *segment_dir : inst.market.unit_payoff();
    if (u.size() != n) throw BadParameter("decomposition: segment direction size mismatch");

    DecompositionReport out;

    const OptimalSet base = optimal_set(inst, x, dim_cap);
    if (!base.nonempty || base.pieces.size() != 1)
        throw InternalCheck("decomposition: expected one optimal piece for a single branch");
    const HPolyhedron& face = base.pieces.front().region;

    // Costless recession cone and its lineality space, in asset coordinates.
    const VRep cone = vrep(recession_cone(face), dim_cap);
    out.cone_ray_count = cone.rays.size();
    out.cone_lineality_dim = cone.lineality.size();

    // Slice through the orthogonal complement of the lineality space.
    auto slice_vertices = [&](const HPolyhedron& region) {
        HPolyhedron sliced = region;
        for (const auto& l : cone.lineality) sliced.add_eq(l, Rational(0));
        return vrep(remove_redundant(sliced), dim_cap).vertices;
    };
    const std::vector<Vec> base_vertices = slice_vertices(face);
    out.vertex_count = base_vertices.size();
    if (base_vertices.empty())
        throw InternalCheck("decomposition: slice through the complement has no vertex");

    VRep rebuilt;
    rebuilt.dim = big_n;
    rebuilt.vertices = base_vertices;
    rebuilt.rays = cone.rays;
    rebuilt.lineality = cone.lineality;
    out.reconstruction_ok = polyhedra_equal(hrep(rebuilt, dim_cap), face);

    // Candidate systems: every invertible size-d subset of the potentially
    // tight functionals (rows with a finite infimum over the acceptance set,
    // plus +/- the pricing functional), expressed on the complement slice.
    const auto& branch = inst.compiled.branches.front();
    Mat n_basis = cone.lineality.empty() ? Mat{} : null_space(cone.lineality);
    if (cone.lineality.empty()) {
        for (size_t j = 0; j < big_n; ++j) n_basis.push_back(unit_vec(big_n, j));
    }
    const size_t d = n_basis.size();

    struct Functional {
        Vec coeffs_on_slice;            // length d
        std::optional<size_t> row;      // acceptance row index; nullopt = pricing
        int price_sign = 0;             // +1 / -1 when pricing
        std::optional<Rational> support;
    };
    std::vector<Functional> funcs;
    for (size_t i = 0; i < branch.ineqs.size(); ++i) {
        const auto sv = support_value(branch, LinearFunctional{branch.ineqs[i].a});
        if (!sv.finite) continue;  // a row unbounded below over the set is never tight
        Vec c(d);
        for (size_t r = 0; r < d; ++r)
            c[r] = dot(branch.ineqs[i].a, inst.market.payoff(n_basis[r]));
        funcs.push_back(Functional{std::move(c), i, 0, sv.value});
    }
    for (int sign : {1, -1}) {
        Vec c(d);
        for (size_t r = 0; r < d; ++r) c[r] = dot(inst.market.prices, n_basis[r]) * sign;
        funcs.push_back(Functional{std::move(c), std::nullopt, sign, std::nullopt});
    }

    const size_t m = funcs.size();
    if (d == 0 || m < d)
        throw InternalCheck("decomposition: fewer usable functionals than the slice dimension");
    {
        // Guard the subset enumeration.
        double combos = 1;
        for (size_t i = 0; i < d; ++i) combos *= double(m - i) / double(i + 1);
        if (combos > 20000)
            throw TooManyBranches("decomposition: functional subset enumeration too large");
    }

    // Nine positions along the segment; requirement values feed the
    // right-hand sides of the candidate systems.
    std::vector<Vec> samples;
    std::vector<Rational> rho_values;
    for (int s = 0; s <= 8; ++s) {
        Vec pos = add(x, scale(u, Rational(s, 8)));
        rho_values.push_back(rho(inst, pos).value);
        samples.push_back(std::move(pos));
    }

    Rational bound = 0;
    size_t candidates = 0;
    std::vector<size_t> pick(d);
    for (size_t i = 0; i < d; ++i) pick[i] = i;
    while (true) {
        Mat alpha;
        for (size_t i : pick) alpha.push_back(funcs[i].coeffs_on_slice);
        if (rank(alpha) == d) {
            ++candidates;
            for (size_t s = 0; s < samples.size(); ++s) {
                Vec beta(d);
                for (size_t r = 0; r < d; ++r) {
                    const auto& f = funcs[pick[r]];
                    beta[r] = f.row ? *f.support - dot(branch.ineqs[*f.row].a, samples[s])
                                    : rho_values[s] * f.price_sign;
                }
                const auto z = solve(alpha, beta);
                if (!z) throw InternalCheck("decomposition: full-rank system not solved");
                Vec lam = zeros(big_n);
                for (size_t r = 0; r < d; ++r) lam = add(lam, scale(n_basis[r], (*z)[r]));
                const Rational norm = linf_norm(lam);
                if (norm > bound) bound = norm;
            }
        }
        // next combination
        size_t i = d;
        while (i > 0 && pick[i - 1] == m - d + (i - 1)) --i;
        if (i == 0) break;
        ++pick[i - 1];
        for (size_t j = i; j < d; ++j) pick[j] = pick[j - 1] + 1;
    }
    out.candidate_count = candidates;
    out.bound = bound;

    out.segment_bounded_ok = true;
    for (const auto& pos : samples) {
        const OptimalSet at = optimal_set(inst, pos, dim_cap);
        if (!at.nonempty || at.pieces.size() != 1)
            throw InternalCheck("decomposition: expected one optimal piece along the segment");
        for (const auto& v : slice_vertices(at.pieces.front().region)) {
            if (linf_norm(v) > bound) {
                out.segment_bounded_ok = false;
                break;
            }
        }
        if (!out.segment_bounded_ok) break;
    }

    out.ok = out.reconstruction_ok && out.segment_bounded_ok;
    out.note = "reconstruction compares the rebuilt generator form with the optimal piece; "
               "the segment check confirms slice vertices stay inside the candidate bound";
    return out;
}

}  // namespace optpay
