#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "optpay/errors.hpp"
#include "optpay/linalg.hpp"
#include "optpay/polyhedron.hpp"
#include "optpay/rational.hpp"

namespace optpay {

enum class LPStatus { Optimal, Infeasible, Unbounded };
enum class Sense { Min, Max };

/// Outcome of an exact LP solve over an HPolyhedron with free variables.
///
/// On Optimal, `x` is a witness point, `value` the optimum in the requested
/// sense, and (dual_ineqs, dual_eqs) a strong-duality certificate for the
/// *minimization* form actually solved (objective negated when sense was
/// Max): stationarity sum(mu_i a_i) + sum(nu_j e_j) = c~, mu >= 0, and
/// sum(mu_i b_i) + sum(nu_j b_j) = min-value. The certificate is verified
/// exactly on every Optimal solve; `dual_checked` records that.
///
/// On Unbounded, `x` is a feasible point and `ray` a recession direction of
/// the feasible set that improves the objective in the requested sense.
struct LPResult {
    LPStatus status = LPStatus::Infeasible;
    Rational value;
    Vec x;
    Vec ray;
    Vec dual_ineqs;
    Vec dual_eqs;
    bool dual_checked = false;
};

namespace detail {

/// Dense tableau simplex over exact rationals.
///
/// Standard form: free x split as xp - xm, one slack per inequality, one
/// artificial per row; two phases; Bland's rule both for the entering
/// column (lowest index with negative reduced cost) and the leaving row
/// (lowest basic index among minimum ratios), which precludes cycling.
class Simplex {
  public:
    Simplex(const HPolyhedron& p, const Vec& c_min) : p_(p), d_(p.dim) {
        const size_t k = p.ineqs.size();
        const size_t m = k + p.eqs.size();
        n_struct_ = 2 * d_ + k;
        n_total_ = n_struct_ + m;
        flip_.assign(m, Rational(1));
        rows_.assign(m, Vec(n_total_ + 1, Rational(0)));
        basis_.assign(m, 0);
        for (size_t i = 0; i < m; ++i) {
            const bool is_ineq = i < k;
            const Row& src = is_ineq ? p.ineqs[i] : p.eqs[i - k];
            Vec& row = rows_[i];
            for (size_t j = 0; j < d_; ++j) {
                row[j] = src.a[j];
                row[d_ + j] = -src.a[j];
            }
            if (is_ineq) row[2 * d_ + i] = -1;
            row[n_total_] = src.b;
            if (row[n_total_] < 0) {
                flip_[i] = -1;
                for (auto& v : row) v = -v;
            }
            row[n_struct_ + i] = 1;  // artificial, after any sign flip
            basis_[i] = n_struct_ + i;
        }
        cost_.assign(n_total_, Rational(0));
        for (size_t j = 0; j < d_; ++j) {
            cost_[j] = c_min[j];
            cost_[d_ + j] = -c_min[j];
        }
    }

    LPResult run() {
        LPResult res;
        if (!phase1()) {
            res.status = LPStatus::Infeasible;
            return res;
        }
        drive_out_artificials();
        build_reduced_costs(cost_);
        const auto ray_col = phase2();
        if (ray_col) {
            res.status = LPStatus::Unbounded;
            res.x = current_x();
            res.ray = extract_ray(*ray_col);
            return res;
        }
        res.status = LPStatus::Optimal;
        res.x = current_x();
        res.value = -z_[n_total_];
        extract_duals(res);
        return res;
    }

  private:
    const HPolyhedron& p_;
    size_t d_, n_struct_ = 0, n_total_ = 0;
    std::vector<Vec> rows_;
    Vec z_;      // reduced-cost row; last cell = -(current objective)
    Vec cost_;   // phase-2 cost vector
    Vec flip_;   // +1 / -1 per row (rhs sign normalization)
    std::vector<size_t> basis_;

    void pivot(size_t r, size_t j) {
        Vec& pr = rows_[r];
        const Rational inv = Rational(1) / pr[j];
        for (auto& v : pr) v *= inv;
        for (size_t i = 0; i < rows_.size(); ++i) {
            if (i == r || rows_[i][j] == 0) continue;
            const Rational f = rows_[i][j];
            for (size_t col = 0; col <= n_total_; ++col) rows_[i][col] -= f * pr[col];
        }
        if (!z_.empty() && z_[j] != 0) {
            const Rational f = z_[j];
            for (size_t col = 0; col <= n_total_; ++col) z_[col] -= f * pr[col];
        }
        basis_[r] = j;
    }

    void build_reduced_costs(const Vec& c) {
        z_.assign(n_total_ + 1, Rational(0));
        for (size_t j = 0; j < n_total_; ++j) z_[j] = c[j];
        for (size_t i = 0; i < rows_.size(); ++i) {
            const Rational cb = c[basis_[i]];
            if (cb == 0) continue;
            for (size_t col = 0; col <= n_total_; ++col) z_[col] -= cb * rows_[i][col];
        }
    }

    /// Bland entering column among allowed indices; nullopt when optimal.
    std::optional<size_t> entering(size_t limit) const {
        for (size_t j = 0; j < limit; ++j)
            if (z_[j] < 0) return j;
        return std::nullopt;
    }

    /// Bland leaving row for column j; nullopt when the column is
    /// unblocked (unbounded direction).
    std::optional<size_t> leaving(size_t j) const {
        std::optional<size_t> best;
        Rational best_ratio = 0;
        for (size_t i = 0; i < rows_.size(); ++i) {
            if (rows_[i][j] <= 0) continue;
            const Rational ratio = rows_[i][n_total_] / rows_[i][j];
            if (!best || ratio < best_ratio ||
                (ratio == best_ratio && basis_[i] < basis_[*best])) {
                best = i;
                best_ratio = ratio;
            }
        }
        return best;
    }

    bool phase1() {
        Vec c1(n_total_, Rational(0));
        for (size_t j = n_struct_; j < n_total_; ++j) c1[j] = 1;
        build_reduced_costs(c1);
        if (iterate(n_total_))
            throw InternalCheck("simplex: phase-1 unbounded");  // objective >= 0, impossible
        return z_[n_total_] == 0;  // phase-1 objective == 0
    }

    /// Returns the unbounded entering column if one is found.
    std::optional<size_t> phase2() { return iterate(n_struct_); }

    std::optional<size_t> iterate(size_t col_limit) {
        for (long guard = 0; guard < 1000000; ++guard) {
            const auto j = entering(col_limit);
            if (!j) return std::nullopt;
            const auto r = leaving(*j);
            if (!r) return j;
            pivot(*r, *j);
        }
        throw InternalCheck("simplex: iteration guard tripped");
    }

    void drive_out_artificials() {
        for (size_t i = 0; i < rows_.size(); ++i) {
            if (basis_[i] < n_struct_) continue;
            for (size_t j = 0; j < n_struct_; ++j) {
                if (rows_[i][j] != 0) {
                    pivot(i, j);  // rhs is 0 here, so feasibility is kept
                    break;
                }
            }
            // If the row is all-zero on structural columns it is a redundant
            // constraint; its artificial stays basic at value 0 and never
            // changes again (no pivot can touch an all-zero row).
        }
    }

    Vec current_x() const {
        Vec y(n_total_, Rational(0));
        for (size_t i = 0; i < rows_.size(); ++i) y[basis_[i]] = rows_[i][n_total_];
        Vec x(d_);
        for (size_t j = 0; j < d_; ++j) x[j] = y[j] - y[d_ + j];
        return x;
    }

    Vec extract_ray(size_t j) const {
        Vec y(n_total_, Rational(0));
        y[j] = 1;
        for (size_t i = 0; i < rows_.size(); ++i)
            y[basis_[i]] = -rows_[i][j];
        Vec x(d_);
        for (size_t jj = 0; jj < d_; ++jj) x[jj] = y[jj] - y[d_ + jj];
        return x;
    }

    /// Row multipliers read off the artificial columns of the final
    /// reduced-cost row, mapped back through the rhs sign flips.
    void extract_duals(LPResult& res) const {
        const size_t k = p_.ineqs.size();
        res.dual_ineqs.assign(k, Rational(0));
        res.dual_eqs.assign(p_.eqs.size(), Rational(0));
        for (size_t i = 0; i < rows_.size(); ++i) {
            const Rational mu = -z_[n_struct_ + i] * flip_[i];
            if (i < k)
                res.dual_ineqs[i] = mu;
            else
                res.dual_eqs[i - k] = mu;
        }
    }
};

inline void verify_certificates(const HPolyhedron& p, const Vec& c_min, LPResult& res) {
    if (res.status == LPStatus::Optimal) {
        if (!p.contains(res.x)) throw InternalCheck("lp: optimal witness infeasible");
        if (dot(c_min, res.x) != res.value) throw InternalCheck("lp: witness value mismatch");
        Vec stat = zeros(p.dim);
        Rational dual_obj = 0;
        for (size_t i = 0; i < p.ineqs.size(); ++i) {
            if (res.dual_ineqs[i] < 0) throw InternalCheck("lp: negative inequality multiplier");
            stat = add(stat, scale(p.ineqs[i].a, res.dual_ineqs[i]));
            dual_obj += res.dual_ineqs[i] * p.ineqs[i].b;
        }
        for (size_t j = 0; j < p.eqs.size(); ++j) {
            stat = add(stat, scale(p.eqs[j].a, res.dual_eqs[j]));
            dual_obj += res.dual_eqs[j] * p.eqs[j].b;
        }
        if (stat != c_min) throw InternalCheck("lp: dual stationarity failed");
        if (dual_obj != res.value) throw InternalCheck("lp: duality gap");
        res.dual_checked = true;
    } else if (res.status == LPStatus::Unbounded) {
        if (!p.contains(res.x)) throw InternalCheck("lp: unbounded witness infeasible");
        if (!p.homogenized().contains(res.ray)) throw InternalCheck("lp: ray not in recession cone");
        if (dot(c_min, res.ray) >= 0) throw InternalCheck("lp: ray does not improve objective");
    }
}

}  // namespace detail

/// Exact LP over a (possibly unbounded, possibly empty) H-polyhedron with
/// free variables. Deterministic: Bland's rule everywhere. Every Optimal
/// result carries an exactly verified strong-duality certificate; every
/// Unbounded result an exactly verified improving feasible ray.
inline LPResult lp_solve(const HPolyhedron& p, const Vec& objective, Sense sense = Sense::Min) {
    if (objective.size() != p.dim) throw InternalCheck("lp_solve: objective size mismatch");
    const Vec c_min = sense == Sense::Min ? objective : scale(objective, Rational(-1));
    detail::Simplex solver(p, c_min);
    LPResult res = solver.run();
    detail::verify_certificates(p, c_min, res);
    if (sense == Sense::Max) {
        if (res.status == LPStatus::Optimal) res.value = -res.value;
    }
    return res;
}

/// Feasibility check: a point of P, or nullopt when P is empty.
inline std::optional<Vec> lp_feasible_point(const HPolyhedron& p) {
    const LPResult res = lp_solve(p, zeros(p.dim), Sense::Min);
    if (res.status == LPStatus::Infeasible) return std::nullopt;
    return res.x;
}

inline bool is_empty(const HPolyhedron& p) { return !lp_feasible_point(p).has_value(); }

}  // namespace optpay
