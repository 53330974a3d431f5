#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "optpay/linalg.hpp"
#include "optpay/rational.hpp"

namespace optpay {

/// A linear functional on a coordinatized space, phi(x) = coeffs . x.
/// Positivity (all coefficients >= 0 in atom coordinates) is what "positive
/// functional" means throughout.
struct LinearFunctional {
    Vec coeffs;

    Rational operator()(const Vec& x) const { return dot(coeffs, x); }
    bool nonnegative() const {
        for (const auto& c : coeffs)
            if (c < 0) return false;
        return true;
    }
};

/// One constraint row a . x >= b (or a . x = b when used as an equality).
struct Row {
    Vec a;
    Rational b;

    bool operator==(const Row& o) const { return a == o.a && b == o.b; }
};

/// Canonicalizes a row by positive scaling so coefficients and rhs are
/// coprime integers. Zero rows are left untouched.
inline Row canonical_row(Row r) {
    Vec ext = r.a;
    ext.push_back(r.b);
    ext = primitive(ext);
    r.b = ext.back();
    ext.pop_back();
    r.a = std::move(ext);
    return r;
}

/// Closed convex polyhedron in H-representation:
///   { x in R^dim : a.x >= b for every inequality, a.x = b for every equality }.
struct HPolyhedron {
    size_t dim = 0;
    std::vector<Row> ineqs;
    std::vector<Row> eqs;

    static HPolyhedron whole_space(size_t d) { return HPolyhedron{d, {}, {}}; }

    /// Canonical inconsistent system, used as the normal form of "empty".
    static HPolyhedron empty_set(size_t d) {
        return HPolyhedron{d, {Row{zeros(d), Rational(1)}}, {}};
    }

    bool contains(const Vec& x) const {
        for (const auto& r : ineqs)
            if (dot(r.a, x) < r.b) return false;
        for (const auto& r : eqs)
            if (dot(r.a, x) != r.b) return false;
        return true;
    }

    /// Smallest slack over all rows at x; negative means x is outside.
    /// Equality rows contribute -|a.x - b|.
    Rational margin(const Vec& x) const {
        bool first = true;
        Rational m = 0;
        auto consider = [&](const Rational& s) {
            if (first || s < m) m = s;
            first = false;
        };
        for (const auto& r : ineqs) consider(dot(r.a, x) - r.b);
        for (const auto& r : eqs) {
            Rational d = dot(r.a, x) - r.b;
            consider(d < 0 ? d : Rational(-d));
        }
        return first ? Rational(0) : m;
    }

    HPolyhedron& add_ineq(Vec a, Rational b) {
        ineqs.push_back(Row{std::move(a), std::move(b)});
        return *this;
    }
    HPolyhedron& add_eq(Vec a, Rational b) {
        eqs.push_back(Row{std::move(a), std::move(b)});
        return *this;
    }

    /// Same constraints with every right-hand side set to zero: the
    /// recession cone when the polyhedron is nonempty.
    HPolyhedron homogenized() const {
        HPolyhedron h;
        h.dim = dim;
        for (const auto& r : ineqs) h.ineqs.push_back(Row{r.a, Rational(0)});
        for (const auto& r : eqs) h.eqs.push_back(Row{r.a, Rational(0)});
        return h;
    }

    /// Intersection with [-box, box]^dim.
    HPolyhedron intersect_box(const Rational& box) const {
        HPolyhedron h(*this);
        for (size_t i = 0; i < dim; ++i) {
            h.add_ineq(unit_vec(dim, i), -box);
            h.add_ineq(scale(unit_vec(dim, i), Rational(-1)), -box);
        }
        return h;
    }

    /// All constraint normal vectors (inequalities then equalities).
    Mat normals() const {
        Mat m;
        m.reserve(ineqs.size() + eqs.size());
        for (const auto& r : ineqs) m.push_back(r.a);
        for (const auto& r : eqs) m.push_back(r.a);
        return m;
    }
};

/// Intersection (concatenates rows; dimensions must agree).
inline HPolyhedron intersect(const HPolyhedron& p, const HPolyhedron& q) {
    if (p.dim != q.dim) throw InternalCheck("intersect: dimension mismatch");
    HPolyhedron r(p);
    r.ineqs.insert(r.ineqs.end(), q.ineqs.begin(), q.ineqs.end());
    r.eqs.insert(r.eqs.end(), q.eqs.begin(), q.eqs.end());
    return r;
}

/// Deterministic lexicographic order on rational vectors.
inline bool lex_less(const Vec& a, const Vec& b) {
    for (size_t i = 0; i < a.size() && i < b.size(); ++i) {
        if (a[i] != b[i]) return a[i] < b[i];
    }
    return a.size() < b.size();
}

inline void sort_rows(std::vector<Vec>& rows) {
    std::sort(rows.begin(), rows.end(), lex_less);
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
}

}  // namespace optpay
