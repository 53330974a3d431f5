#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "optpay/errors.hpp"
#include "optpay/rational.hpp"

namespace optpay {

inline Rational dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw InternalCheck("dot: size mismatch");
    Rational s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline bool is_zero_vec(const Vec& v) {
    for (const auto& x : v)
        if (x != 0) return false;
    return true;
}

inline Vec zeros(size_t n) { return Vec(n, Rational(0)); }

inline Vec unit_vec(size_t n, size_t i) {
    Vec v(n, Rational(0));
    v[i] = 1;
    return v;
}

inline Vec add(const Vec& a, const Vec& b) {
    Vec r(a);
    for (size_t i = 0; i < r.size(); ++i) r[i] += b[i];
    return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
    Vec r(a);
    for (size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    return r;
}

inline Vec scale(const Vec& a, const Rational& c) {
    Vec r(a);
    for (auto& x : r) x *= c;
    return r;
}

/// y = M x  (M is row-major, rows x cols)
inline Vec mat_vec(const Mat& m, const Vec& x) {
    Vec y;
    y.reserve(m.size());
    for (const auto& row : m) y.push_back(dot(row, x));
    return y;
}

/// y = M^T x
inline Vec mat_t_vec(const Mat& m, const Vec& x) {
    if (m.size() != x.size()) throw InternalCheck("mat_t_vec: size mismatch");
    if (m.empty()) return {};
    Vec y(m[0].size(), Rational(0));
    for (size_t i = 0; i < m.size(); ++i)
        for (size_t j = 0; j < y.size(); ++j) y[j] += m[i][j] * x[i];
    return y;
}

inline Rational linf_norm(const Vec& v) {
    Rational m = 0;
    for (const auto& x : v) {
        Rational a = x < 0 ? Rational(-x) : x;
        if (a > m) m = a;
    }
    return m;
}

/// Reduced row echelon form in place; returns the pivot column of each
/// pivot row (row i of the result has its pivot at pivots[i]).
inline std::vector<size_t> rref(Mat& m) {
    std::vector<size_t> pivots;
    if (m.empty()) return pivots;
    const size_t cols = m[0].size();
    size_t row = 0;
    for (size_t col = 0; col < cols && row < m.size(); ++col) {
        size_t sel = row;
        while (sel < m.size() && m[sel][col] == 0) ++sel;
        if (sel == m.size()) continue;
        std::swap(m[row], m[sel]);
        const Rational inv = Rational(1) / m[row][col];
        for (auto& x : m[row]) x *= inv;
        for (size_t r = 0; r < m.size(); ++r) {
            if (r == row || m[r][col] == 0) continue;
            const Rational f = m[r][col];
            for (size_t c = 0; c < cols; ++c) m[r][c] -= f * m[row][c];
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

inline size_t rank(Mat m) { return rref(m).size(); }

/// Basis of the null space {x : M x = 0}, one vector per free column.
inline Mat null_space(Mat m) {
    if (m.empty()) return {};
    const size_t cols = m[0].size();
    const auto pivots = rref(m);
    std::vector<bool> is_pivot(cols, false);
    for (size_t p : pivots) is_pivot[p] = true;
    Mat basis;
    for (size_t free_col = 0; free_col < cols; ++free_col) {
        if (is_pivot[free_col]) continue;
        Vec v(cols, Rational(0));
        v[free_col] = 1;
        for (size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = -m[i][free_col];
        basis.push_back(std::move(v));
    }
    return basis;
}

/// Solves M x = b exactly; empty optional when inconsistent. With multiple
/// solutions, free variables are set to zero (deterministic).
inline std::optional<Vec> solve(Mat m, Vec b) {
    const size_t rows = m.size();
    if (rows != b.size()) throw InternalCheck("solve: size mismatch");
    if (rows == 0) return Vec{};
    const size_t cols = m[0].size();
    for (size_t i = 0; i < rows; ++i) m[i].push_back(b[i]);
    const auto pivots = rref(m);
    Vec x(cols, Rational(0));
    for (size_t i = 0; i < pivots.size(); ++i) {
        if (pivots[i] == cols) return std::nullopt;  // pivot in the rhs column
        x[pivots[i]] = m[i][cols];
    }
    return x;
}

/// Orthogonal complement (standard inner product) of the span of the given
/// vectors: just the null space of the matrix whose rows they are.
inline Mat orthogonal_complement(const Mat& span_rows, size_t dim) {
    if (span_rows.empty()) {
        Mat id;
        for (size_t i = 0; i < dim; ++i) id.push_back(unit_vec(dim, i));
        return id;
    }
    return null_space(span_rows);
}

/// Scales a nonzero rational vector by a positive factor so entries become
/// coprime integers (canonical form for rays; direction preserved).
inline Vec primitive(const Vec& v) {
    Integer num_gcd = 0, den_lcm = 1;
    for (const auto& x : v) {
        if (x == 0) continue;
        Integer n = numerator(x) < 0 ? Integer(-numerator(x)) : numerator(x);
        num_gcd = boost::multiprecision::gcd(num_gcd, n);
        den_lcm = den_lcm / boost::multiprecision::gcd(den_lcm, denominator(x)) * denominator(x);
    }
    if (num_gcd == 0) return v;  // zero vector
    const Rational factor = Rational(den_lcm, num_gcd);
    Vec r(v);
    for (auto& x : r) x *= factor;
    return r;
}

/// Canonical form for two-sided directions: primitive with the first
/// nonzero entry positive.
inline Vec primitive_signed(const Vec& v) {
    Vec r = primitive(v);
    for (const auto& x : r) {
        if (x == 0) continue;
        if (x < 0)
            for (auto& y : r) y = -y;
        break;
    }
    return r;
}

}  // namespace optpay
