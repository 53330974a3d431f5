#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "optpay/errors.hpp"

namespace optpay {

/// Exact rational scalar. Everything in the engine (payoffs, prices,
/// polyhedron rows, LP pivots, distances) runs on this type; no floating
/// point enters except in the dedicated smooth solver.
using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

using Vec = std::vector<Rational>;
using Mat = std::vector<Vec>;  // row-major

inline Rational rat(long long num, long long den = 1) { return Rational(num, den); }

/// Parses "p/q", "p", or "-p/q" (spaces allowed around tokens).
inline Rational parse_rational(const std::string& text) {
    std::string s;
    s.reserve(text.size());
    for (char c : text)
        if (c != ' ' && c != '\t') s.push_back(c);
    if (s.empty()) throw BadParameter("empty rational literal");
    try {
        const auto slash = s.find('/');
        if (slash == std::string::npos) return Rational(Integer(s));
        const Integer num(s.substr(0, slash));
        const Integer den(s.substr(slash + 1));
        if (den == 0) throw BadParameter("zero denominator in '" + text + "'");
        return Rational(num, den);
    } catch (const std::runtime_error&) {
        throw BadParameter("bad rational literal '" + text + "'");
    }
}

/// Renders as "p/q", or just "p" when the denominator is 1.
inline std::string format_rational(const Rational& r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

/// Fixed-point decimal rendering with the given number of digits
/// (round-half-away-from-zero). Display only; never feeds back into math.
inline std::string format_decimal(const Rational& r, int digits) {
    if (digits < 0) digits = 0;
    Integer scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    Rational scaled = r * scale;
    Integer twice = numerator(scaled) * 2;
    Integer den = denominator(scaled);
    // round(x) = floor((2x + den) / (2 den)) for den > 0, symmetric in sign
    Integer rounded;
    if (scaled >= 0)
        rounded = (twice + den) / (2 * den);
    else
        rounded = -((-twice + den) / (2 * den));
    std::ostringstream os;
    Integer mag = rounded < 0 ? Integer(-rounded) : rounded;
    std::string body = mag.str();
    if (digits == 0) {
        os << (rounded < 0 ? "-" : "") << body;
        return os.str();
    }
    while (body.size() <= static_cast<size_t>(digits)) body.insert(body.begin(), '0');
    body.insert(body.end() - digits, '.');
    os << (rounded < 0 ? "-" : "") << body;
    return os.str();
}

inline double to_double(const Rational& r) { return static_cast<double>(r); }

inline Vec parse_rational_vector(const std::vector<std::string>& parts) {
    Vec v;
    v.reserve(parts.size());
    for (const auto& p : parts) v.push_back(parse_rational(p));
    return v;
}

inline std::string format_vector(const Vec& v) {
    std::string out = "(";
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += format_rational(v[i]);
    }
    return out + ")";
}

}  // namespace optpay
