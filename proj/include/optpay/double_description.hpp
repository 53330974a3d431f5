#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "optpay/errors.hpp"
#include "optpay/linalg.hpp"
#include "optpay/polyhedron.hpp"
#include "optpay/rational.hpp"

namespace optpay {

/// Generator (V-) representation of a closed convex polyhedron:
///   P = conv(vertices) + cone(rays) + span(lineality).
/// Invariant maintained by vrep(): vertices is nonempty iff P is nonempty.
/// Rays are primitive integer vectors (direction preserved); lineality
/// directions are primitive with first nonzero entry positive; all three
/// lists are lexicographically sorted, so equal polyhedra produced from
/// equal row lists serialize identically.
struct VRep {
    size_t dim = 0;
    std::vector<Vec> vertices;
    std::vector<Vec> rays;
    std::vector<Vec> lineality;

    bool empty() const { return vertices.empty(); }
};

namespace detail {

/// Bitmask over constraint-row indices: which rows a generator satisfies
/// with equality. Drives the combinatorial adjacency test.
struct ZeroSet {
    std::vector<uint64_t> bits;

    explicit ZeroSet(size_t nrows) : bits((nrows + 63) / 64, 0) {}
    void set(size_t i) { bits[i / 64] |= uint64_t(1) << (i % 64); }
    static ZeroSet intersect(const ZeroSet& a, const ZeroSet& b) {
        ZeroSet r = a;
        for (size_t i = 0; i < r.bits.size(); ++i) r.bits[i] &= b.bits[i];
        return r;
    }
    bool subset_of(const ZeroSet& other) const {
        for (size_t i = 0; i < bits.size(); ++i)
            if (bits[i] & ~other.bits[i]) return false;
        return true;
    }
};

struct ConeRow {
    Vec a;
    bool eq = false;
};

struct ConeGenerators {
    std::vector<Vec> lineality;
    std::vector<Vec> rays;
};

/// Double description with explicit lineality handling, after the cddlib
/// scheme. Maintains cone = span(L) + cone(R) while inserting the rows
/// { y : a.y >= 0 } (or = 0) one at a time:
///   - if some lineality vector meets the new row, it leaves L, repairs
///     every other generator onto the hyperplane, and (for inequalities)
///     joins R on the satisfying side;
///   - otherwise rays split by sign and adjacent (+,-) pairs combine.
/// Adjacency is the standard combinatorial test on zero-sets. Rays stay
/// primitive to keep coefficient growth down.
inline ConeGenerators dd_cone(size_t dim, const std::vector<ConeRow>& rows) {
    struct RayRec {
        Vec v;
        ZeroSet zs;
    };
    const size_t nrows = rows.size();
    std::vector<Vec> lin;
    for (size_t i = 0; i < dim; ++i) lin.push_back(unit_vec(dim, i));
    std::vector<RayRec> rays;

    for (size_t t = 0; t < nrows; ++t) {
        const Vec& a = rows[t].a;
        const bool eq = rows[t].eq;

        size_t hit = lin.size();
        for (size_t i = 0; i < lin.size(); ++i)
            if (dot(a, lin[i]) != 0) {
                hit = i;
                break;
            }

        if (hit < lin.size()) {
            Vec l0 = lin[hit];
            lin.erase(lin.begin() + hit);
            Rational al0 = dot(a, l0);
            if (al0 < 0) {
                l0 = scale(l0, Rational(-1));
                al0 = -al0;
            }
            for (auto& l : lin) {
                const Rational c = dot(a, l) / al0;
                if (c != 0) l = primitive_signed(sub(l, scale(l0, c)));
            }
            for (auto& r : rays) {
                const Rational c = dot(a, r.v) / al0;
                if (c != 0) r.v = primitive(sub(r.v, scale(l0, c)));
                r.zs.set(t);  // now on the hyperplane of row t
            }
            if (!eq) {
                ZeroSet zs(nrows);
                for (size_t q = 0; q < t; ++q) zs.set(q);  // was lineality: tight everywhere
                rays.push_back(RayRec{primitive(l0), std::move(zs)});
            }
            continue;
        }

        // No lineality component along a: classify rays by sign.
        std::vector<Rational> val(rays.size());
        bool any_minus = false, any_plus = false;
        for (size_t i = 0; i < rays.size(); ++i) {
            val[i] = dot(a, rays[i].v);
            if (val[i] < 0) any_minus = true;
            if (val[i] > 0) any_plus = true;
        }
        std::vector<RayRec> next;
        for (size_t i = 0; i < rays.size(); ++i) {
            if (val[i] == 0) {
                rays[i].zs.set(t);
                next.push_back(rays[i]);
            } else if (val[i] > 0 && !eq) {
                next.push_back(rays[i]);
            }
        }
        if (any_minus && any_plus) {
            for (size_t ip = 0; ip < rays.size(); ++ip) {
                if (val[ip] <= 0) continue;
                for (size_t in = 0; in < rays.size(); ++in) {
                    if (val[in] >= 0) continue;
                    ZeroSet common = ZeroSet::intersect(rays[ip].zs, rays[in].zs);
                    bool adjacent = true;
                    for (size_t q = 0; q < rays.size(); ++q) {
                        if (q == ip || q == in) continue;
                        if (common.subset_of(rays[q].zs)) {
                            adjacent = false;
                            break;
                        }
                    }
                    if (!adjacent) continue;
                    Vec combo = sub(scale(rays[in].v, val[ip]), scale(rays[ip].v, val[in]));
                    common.set(t);
                    next.push_back(RayRec{primitive(combo), std::move(common)});
                }
            }
        }
        rays = std::move(next);
    }

    ConeGenerators out;
    for (auto& l : lin) out.lineality.push_back(primitive_signed(l));
    for (auto& r : rays)
        if (!is_zero_vec(r.v)) out.rays.push_back(r.v);
    return out;
}

}  // namespace detail

constexpr size_t kDefaultDimCap = 8;

/// Vertex/ray/lineality enumeration of an H-polyhedron via double
/// description of the homogenization { (x, x0) : Ax >= b x0, x0 >= 0 }.
/// Deterministic. Refuses ambient dimensions above the cap.
inline VRep vrep(const HPolyhedron& p, size_t dim_cap = kDefaultDimCap) {
    if (p.dim > dim_cap) throw DimensionCap("vrep: ambient dimension exceeds cap");
    const size_t d = p.dim;
    std::vector<detail::ConeRow> rows;
    rows.reserve(p.ineqs.size() + p.eqs.size() + 1);
    for (const auto& r : p.ineqs) {
        Vec a = r.a;
        a.push_back(-r.b);
        rows.push_back(detail::ConeRow{std::move(a), false});
    }
    for (const auto& r : p.eqs) {
        Vec a = r.a;
        a.push_back(-r.b);
        rows.push_back(detail::ConeRow{std::move(a), true});
    }
    rows.push_back(detail::ConeRow{unit_vec(d + 1, d), false});  // x0 >= 0

    const auto gen = detail::dd_cone(d + 1, rows);

    VRep v;
    v.dim = d;
    for (const auto& l : gen.lineality) {
        if (l[d] != 0) throw InternalCheck("vrep: lineality with nonzero homogenizing coord");
        v.lineality.push_back(primitive_signed(Vec(l.begin(), l.end() - 1)));
    }
    for (const auto& r : gen.rays) {
        const Rational x0 = r[d];
        if (x0 < 0) throw InternalCheck("vrep: generator with negative homogenizing coord");
        Vec head(r.begin(), r.end() - 1);
        if (x0 == 0) {
            if (!is_zero_vec(head)) v.rays.push_back(primitive(head));
        } else {
            v.vertices.push_back(scale(head, Rational(1) / x0));
        }
    }
    if (v.vertices.empty()) {
        // Empty polyhedron: recession generators of an empty set carry no
        // information, so the canonical empty V-rep is fully empty.
        v.rays.clear();
        v.lineality.clear();
    }
    sort_rows(v.vertices);
    sort_rows(v.rays);
    sort_rows(v.lineality);
    return v;
}

/// Facet enumeration: double description applied to the cone of valid
/// inequalities { (a, c) : a.v + c >= 0, a.r >= 0, a.l = 0 }. Extreme rays
/// of that cone are the facets a.x >= -c; its lineality vectors are the
/// implied equalities. A V-rep without vertices denotes the empty set.
inline HPolyhedron hrep(const VRep& v, size_t dim_cap = kDefaultDimCap) {
    if (v.dim > dim_cap) throw DimensionCap("hrep: ambient dimension exceeds cap");
    if (v.empty()) return HPolyhedron::empty_set(v.dim);
    const size_t d = v.dim;
    std::vector<detail::ConeRow> rows;
    for (const auto& vx : v.vertices) {
        Vec a = vx;
        a.push_back(Rational(1));
        rows.push_back(detail::ConeRow{std::move(a), false});
    }
    for (const auto& r : v.rays) {
        Vec a = r;
        a.push_back(Rational(0));
        rows.push_back(detail::ConeRow{std::move(a), false});
    }
    for (const auto& l : v.lineality) {
        Vec a = l;
        a.push_back(Rational(0));
        rows.push_back(detail::ConeRow{std::move(a), true});
    }
    const auto gen = detail::dd_cone(d + 1, rows);

    HPolyhedron h = HPolyhedron::whole_space(d);
    for (const auto& r : gen.rays) {
        Vec a(r.begin(), r.end() - 1);
        const Rational c = r[d];
        if (is_zero_vec(a)) {
            if (c < 0) throw InternalCheck("hrep: impossible trivial facet");
            continue;  // 0.x >= -c with c >= 0: trivially true
        }
        h.ineqs.push_back(canonical_row(Row{std::move(a), -c}));
    }
    for (const auto& l : gen.lineality) {
        Vec a(l.begin(), l.end() - 1);
        const Rational c = l[d];
        if (is_zero_vec(a)) {
            if (c != 0) throw InternalCheck("hrep: contradictory lineality on nonempty input");
            continue;
        }
        h.eqs.push_back(canonical_row(Row{std::move(a), -c}));
    }
    auto row_less = [](const Row& x, const Row& y) {
        if (x.a != y.a) return lex_less(x.a, y.a);
        return x.b < y.b;
    };
    std::sort(h.ineqs.begin(), h.ineqs.end(), row_less);
    h.ineqs.erase(std::unique(h.ineqs.begin(), h.ineqs.end()), h.ineqs.end());
    std::sort(h.eqs.begin(), h.eqs.end(), row_less);
    h.eqs.erase(std::unique(h.eqs.begin(), h.eqs.end()), h.eqs.end());
    return h;
}

}  // namespace optpay
