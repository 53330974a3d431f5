#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "optpay/double_description.hpp"
#include "optpay/errors.hpp"
#include "optpay/linalg.hpp"
#include "optpay/polyhedron.hpp"
#include "optpay/rational.hpp"
#include "optpay/simplex.hpp"

namespace optpay {

/// Lower support value inf{ phi(x) : x in P }; minus_infinity when the
/// functional is unbounded below on P.
struct SupportValue {
    bool finite = true;
    Rational value;

    static SupportValue minus_infinity() { return SupportValue{false, Rational(0)}; }
};

inline SupportValue support_value(const HPolyhedron& p, const LinearFunctional& phi) {
    const LPResult r = lp_solve(p, phi.coeffs, Sense::Min);
    if (r.status == LPStatus::Infeasible) throw EmptyPolyhedron("support_value: empty polyhedron");
    if (r.status == LPStatus::Unbounded) return SupportValue::minus_infinity();
    return SupportValue{true, r.value};
}

/// Drops rows that do not change the set: exact LP test per row (minimize
/// the row functional subject to all other kept rows). Duplicate rows are
/// removed first; an empty input normalizes to the canonical empty form.
inline HPolyhedron remove_redundant(const HPolyhedron& p) {
    if (is_empty(p)) return HPolyhedron::empty_set(p.dim);

    HPolyhedron q = HPolyhedron::whole_space(p.dim);
    for (const auto& r : p.eqs) {
        Row cr = canonical_row(r);
        if (is_zero_vec(cr.a)) continue;  // 0 = 0 on a nonempty set
        if (std::find(q.eqs.begin(), q.eqs.end(), cr) == q.eqs.end()) q.eqs.push_back(cr);
    }
    std::vector<Row> candidates;
    for (const auto& r : p.ineqs) {
        Row cr = canonical_row(r);
        if (is_zero_vec(cr.a)) continue;  // 0 >= b with b <= 0
        if (std::find(candidates.begin(), candidates.end(), cr) == candidates.end())
            candidates.push_back(cr);
    }
    // Keep set starts as all candidates; test each row against the rest.
    std::vector<bool> kept(candidates.size(), true);
    for (size_t i = 0; i < candidates.size(); ++i) {
        HPolyhedron rest = q;
        for (size_t j = 0; j < candidates.size(); ++j)
            if (j != i && kept[j]) rest.ineqs.push_back(candidates[j]);
        const LPResult r = lp_solve(rest, candidates[i].a, Sense::Min);
        if (r.status == LPStatus::Optimal && r.value >= candidates[i].b)
            kept[i] = false;  // implied by the others
    }
    for (size_t i = 0; i < candidates.size(); ++i)
        if (kept[i]) q.ineqs.push_back(candidates[i]);
    return q;
}

/// The face of P where the objective attains its optimum: P intersected
/// with { c.x = opt }. Throws when the optimum is not attained.
inline HPolyhedron optimal_face(const HPolyhedron& p, const Vec& objective,
                                Sense sense = Sense::Min) {
    const LPResult r = lp_solve(p, objective, sense);
    if (r.status == LPStatus::Infeasible) throw NotAttained("optimal_face: empty polyhedron");
    if (r.status == LPStatus::Unbounded) throw NotAttained("optimal_face: objective unbounded");
    HPolyhedron face(p);
    face.add_eq(objective, r.value);
    return face;
}

/// Indices of inequality rows satisfied with equality by every point of P.
inline std::vector<size_t> implicit_equalities(const HPolyhedron& p) {
    if (is_empty(p)) throw EmptyPolyhedron("implicit_equalities: empty polyhedron");
    std::vector<size_t> idx;
    for (size_t i = 0; i < p.ineqs.size(); ++i) {
        const LPResult r = lp_solve(p, p.ineqs[i].a, Sense::Max);
        if (r.status == LPStatus::Optimal && r.value == p.ineqs[i].b) idx.push_back(i);
    }
    return idx;
}

/// Affine dimension of a nonempty polyhedron: ambient minus the rank of
/// the equality system (declared equalities plus implicit ones).
inline size_t dimension(const HPolyhedron& p) {
    const auto implicit = implicit_equalities(p);  // throws if empty
    Mat rows;
    for (const auto& r : p.eqs) rows.push_back(r.a);
    for (size_t i : implicit) rows.push_back(p.ineqs[i].a);
    return p.dim - rank(rows);
}

/// Recession cone of a nonempty polyhedron: same rows, zero right-hand
/// sides.
inline HPolyhedron recession_cone(const HPolyhedron& p) {
    if (is_empty(p)) throw EmptyPolyhedron("recession_cone: empty polyhedron");
    return p.homogenized();
}

/// Basis of the lineality space (largest subspace contained in P).
inline Mat lineality_space(const HPolyhedron& p) {
    if (is_empty(p)) throw EmptyPolyhedron("lineality_space: empty polyhedron");
    const Mat normals = p.normals();
    if (normals.empty()) {
        Mat id;
        for (size_t i = 0; i < p.dim; ++i) id.push_back(unit_vec(p.dim, i));
        return id;
    }
    return null_space(normals);
}

/// Fourier-Motzkin elimination of one direction: returns rows describing
/// P + span(d) in the same ambient space (every surviving row is
/// orthogonal to d). An equality row with nonzero component along d is
/// used as an exact pivot when available.
namespace detail {

inline HPolyhedron fm_eliminate_one(const HPolyhedron& p, const Vec& d) {
    std::vector<Row> eq_zero, eq_hit, in_zero, in_plus, in_minus;
    std::vector<Rational> gp, gm;
    for (const auto& r : p.eqs) {
        const Rational g = dot(r.a, d);
        (g == 0 ? eq_zero : eq_hit).push_back(r);
    }
    for (const auto& r : p.ineqs) {
        const Rational g = dot(r.a, d);
        if (g == 0) {
            in_zero.push_back(r);
        } else if (g > 0) {
            in_plus.push_back(r);
            gp.push_back(g);
        } else {
            in_minus.push_back(r);
            gm.push_back(g);
        }
    }
    HPolyhedron out = HPolyhedron::whole_space(p.dim);
    out.eqs = eq_zero;
    out.ineqs = in_zero;
    if (!eq_hit.empty()) {
        // Pivot on the first hit equality: subtract multiples from every
        // other row so the d-component vanishes, then drop the pivot.
        const Row piv = eq_hit.front();
        const Rational gpiv = dot(piv.a, d);
        auto reduce = [&](const Row& r) {
            const Rational f = dot(r.a, d) / gpiv;
            return Row{sub(r.a, scale(piv.a, f)), r.b - f * piv.b};
        };
        for (size_t i = 1; i < eq_hit.size(); ++i) out.eqs.push_back(reduce(eq_hit[i]));
        for (const auto& r : in_plus) out.ineqs.push_back(reduce(r));
        for (const auto& r : in_minus) out.ineqs.push_back(reduce(r));
        return out;
    }
    for (size_t i = 0; i < in_plus.size(); ++i)
        for (size_t j = 0; j < in_minus.size(); ++j) {
            // gp[i] * minus_row - gm[j] * plus_row: positive combination
            // with zero component along d.
            out.ineqs.push_back(Row{
                sub(scale(in_minus[j].a, gp[i]), scale(in_plus[i].a, gm[j])),
                gp[i] * in_minus[j].b - gm[j] * in_plus[i].b});
        }
    return out;
}

}  // namespace detail

/// H-representation of P + span(directions): Fourier-Motzkin elimination
/// direction by direction with exact LP redundancy pruning after each
/// step. The result lives in the same ambient space; every row is
/// orthogonal to every eliminated direction.
inline HPolyhedron fm_project(const HPolyhedron& p, const Mat& directions) {
    HPolyhedron cur = remove_redundant(p);
    for (const auto& d : directions) {
        if (d.size() != p.dim) throw BadParameter("fm_project: direction dimension mismatch");
        if (is_zero_vec(d)) continue;
        cur = remove_redundant(detail::fm_eliminate_one(cur, d));
    }
    return cur;
}

/// Eliminates the given coordinates (adds their spans, then drops the
/// columns). Coordinates must be distinct.
inline HPolyhedron project_out_coords(const HPolyhedron& p, std::vector<size_t> coords) {
    Mat dirs;
    for (size_t c : coords) dirs.push_back(unit_vec(p.dim, c));
    const HPolyhedron lifted = fm_project(p, dirs);
    std::sort(coords.begin(), coords.end());
    auto shrink = [&](const Row& r) {
        Vec a;
        a.reserve(r.a.size() - coords.size());
        size_t next = 0;
        for (size_t j = 0; j < r.a.size(); ++j) {
            if (next < coords.size() && coords[next] == j) {
                if (r.a[j] != 0) throw InternalCheck("project_out: nonzero eliminated coord");
                ++next;
                continue;
            }
            a.push_back(r.a[j]);
        }
        return Row{std::move(a), r.b};
    };
    HPolyhedron out = HPolyhedron::whole_space(p.dim - coords.size());
    for (const auto& r : lifted.ineqs) out.ineqs.push_back(shrink(r));
    for (const auto& r : lifted.eqs) out.eqs.push_back(shrink(r));
    return out;
}

/// Exact l-infinity distance from a point to a nonempty polyhedron.
inline Rational dist_linf(const Vec& point, const HPolyhedron& p) {
    if (point.size() != p.dim) throw BadParameter("dist_linf: dimension mismatch");
    // Variables (x, t): minimize t subject to x in P, |x - point|_inf <= t.
    HPolyhedron lifted = HPolyhedron::whole_space(p.dim + 1);
    auto lift = [&](const Row& r) {
        Vec a = r.a;
        a.push_back(Rational(0));
        return Row{std::move(a), r.b};
    };
    for (const auto& r : p.ineqs) lifted.ineqs.push_back(lift(r));
    for (const auto& r : p.eqs) lifted.eqs.push_back(lift(r));
    for (size_t j = 0; j < p.dim; ++j) {
        Vec a1 = zeros(p.dim + 1);  // t - x_j >= -point_j
        a1[j] = -1;
        a1[p.dim] = 1;
        lifted.ineqs.push_back(Row{a1, -point[j]});
        Vec a2 = zeros(p.dim + 1);  // t + x_j >= point_j
        a2[j] = 1;
        a2[p.dim] = 1;
        lifted.ineqs.push_back(Row{a2, point[j]});
    }
    Vec obj = zeros(p.dim + 1);
    obj[p.dim] = 1;
    const LPResult r = lp_solve(lifted, obj, Sense::Min);
    if (r.status == LPStatus::Infeasible) throw EmptyPolyhedron("dist_linf: empty polyhedron");
    if (r.status != LPStatus::Optimal) throw InternalCheck("dist_linf: distance LP unbounded");
    return r.value;
}

/// Both one-sided l-infinity deviations between box truncations:
///   first  = sup over P cap box of distance to (Q cap box)
///   second = sup over Q cap box of distance to (P cap box).
/// The sup over a polytope of a convex function is attained at a vertex,
/// so vertices of the truncation are enumerated exactly.
inline std::pair<Rational, Rational> hausdorff_boxed(const HPolyhedron& p, const HPolyhedron& q,
                                                     const Rational& box,
                                                     size_t dim_cap = kDefaultDimCap) {
    if (p.dim != q.dim) throw BadParameter("hausdorff_boxed: dimension mismatch");
    const HPolyhedron pb = p.intersect_box(box);
    const HPolyhedron qb = q.intersect_box(box);
    const VRep pv = vrep(remove_redundant(pb), dim_cap);
    const VRep qv = vrep(remove_redundant(qb), dim_cap);
    if (pv.empty() || qv.empty())
        throw EmptyAfterBoxing("hausdorff_boxed: truncation emptied a set");
    auto one_sided = [&](const VRep& from, const HPolyhedron& to) {
        Rational worst = 0;
        for (const auto& v : from.vertices) {
            const Rational d = dist_linf(v, to);
            if (d > worst) worst = d;
        }
        return worst;
    };
    return {one_sided(pv, qb), one_sided(qv, pb)};
}

/// Is P a subset of Q? Exact: every row of Q must be valid on P.
inline bool polyhedron_subset(const HPolyhedron& p, const HPolyhedron& q) {
    if (p.dim != q.dim) throw BadParameter("polyhedron_subset: dimension mismatch");
    if (is_empty(p)) return true;
    auto valid_min = [&](const Vec& a, const Rational& b) {
        const LPResult r = lp_solve(p, a, Sense::Min);
        return r.status == LPStatus::Optimal && r.value >= b;
    };
    for (const auto& row : q.ineqs)
        if (!valid_min(row.a, row.b)) return false;
    for (const auto& row : q.eqs) {
        if (!valid_min(row.a, row.b)) return false;
        const LPResult r = lp_solve(p, row.a, Sense::Max);
        if (!(r.status == LPStatus::Optimal && r.value <= row.b)) return false;
    }
    return true;
}

inline bool polyhedra_equal(const HPolyhedron& p, const HPolyhedron& q) {
    return polyhedron_subset(p, q) && polyhedron_subset(q, p);
}

}  // namespace optpay
