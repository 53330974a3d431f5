#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "optpay/errors.hpp"
#include "optpay/linalg.hpp"
#include "optpay/polyhedron.hpp"
#include "optpay/rational.hpp"
#include "optpay/simplex.hpp"

namespace optpay {

/// Finite sample space with strictly positive atom weights summing to one.
struct FiniteSampleSpace {
    std::vector<std::string> atom_labels;
    Vec probs;

    size_t size() const { return probs.size(); }
};

inline FiniteSampleSpace make_space(Vec probs, std::vector<std::string> labels = {}) {
    if (probs.empty()) throw BadParameter("space: needs at least one atom");
    Rational total = 0;
    for (const auto& p : probs) {
        if (p <= 0) throw BadParameter("space: atom probabilities must be strictly positive");
        total += p;
    }
    if (total != 1) throw BadParameter("space: probabilities must sum to 1");
    if (labels.empty()) {
        for (size_t i = 0; i < probs.size(); ++i) labels.push_back("w" + std::to_string(i));
    } else if (labels.size() != probs.size()) {
        throw BadParameter("space: label count does not match atom count");
    }
    return FiniteSampleSpace{std::move(labels), std::move(probs)};
}

/// A market of traded assets: payoff matrix (atoms x assets, columns are
/// asset payoffs), price per asset, plus two deterministic artefacts fixed
/// at validation time: the coefficients of the canonical nonnegative
/// unit-price payoff U, and a reduced-echelon basis of the pricing kernel
/// { lambda : prices . lambda = 0 } in portfolio coordinates.
struct Market {
    Mat payoffs;
    Vec prices;
    Vec unit_coeffs;
    Mat kernel;

    size_t atoms() const { return payoffs.size(); }
    size_t assets() const { return prices.size(); }
    Vec payoff(const Vec& lambda) const { return mat_vec(payoffs, lambda); }
    Rational price(const Vec& lambda) const { return dot(prices, lambda); }
    Vec unit_payoff() const { return payoff(unit_coeffs); }
};

/// Deterministic basis of { lambda : prices . lambda = 0 }.
inline Mat kernel_basis(const Vec& prices) { return null_space(Mat{prices}); }

/// Checks market well-formedness and fixes the canonical artefacts.
/// Throws DegenerateMarket when payoff columns are linearly dependent and
/// NoUnitPayoff when no nonnegative payoff of price one exists (the
/// feasible portfolio returned is the first basic feasible solution of the
/// exact Bland-rule simplex, so reruns yield identical coefficients).
inline Market validate_market(const FiniteSampleSpace& space, Mat payoffs, Vec prices) {
    const size_t n = space.size();
    const size_t big_n = prices.size();
    if (payoffs.size() != n) throw BadParameter("market: payoff rows must match atom count");
    if (big_n == 0) throw BadParameter("market: needs at least one asset");
    for (const auto& row : payoffs)
        if (row.size() != big_n) throw BadParameter("market: ragged payoff matrix");

    Mat columns(big_n, Vec(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < big_n; ++j) columns[j][i] = payoffs[i][j];
    if (rank(columns) != big_n)
        throw DegenerateMarket("market: payoff columns are linearly dependent");

    // Canonical unit: among nonnegative unit-price payoffs, minimize the
    // payoff's largest coordinate (variables (lambda, t) with
    // payoff_i <= t). Bounded whenever feasible, and the exact Bland-rule
    // simplex makes the chosen portfolio reproducible across runs.
    HPolyhedron lifted = HPolyhedron::whole_space(big_n + 1);
    for (size_t i = 0; i < n; ++i) {
        Vec low = payoffs[i];
        low.push_back(Rational(0));
        lifted.add_ineq(std::move(low), Rational(0));
        Vec high = scale(payoffs[i], Rational(-1));
        high.push_back(Rational(1));
        lifted.add_ineq(std::move(high), Rational(0));
    }
    Vec price_row = prices;
    price_row.push_back(Rational(0));
    lifted.add_eq(std::move(price_row), Rational(1));
    const auto unit_lp = lp_solve(lifted, unit_vec(big_n + 1, big_n), Sense::Min);
    if (unit_lp.status != LPStatus::Optimal)
        throw NoUnitPayoff("market: no nonnegative payoff with unit price in the span");

    Market m;
    m.payoffs = std::move(payoffs);
    m.prices = prices;
    m.unit_coeffs = Vec(unit_lp.x.begin(), unit_lp.x.begin() + static_cast<long>(big_n));
    m.kernel = kernel_basis(prices);
    return m;
}

/// Raw inputs for one entity of a multivariate model.
struct MarketData {
    Mat payoffs;
    Vec prices;
};

/// Space/payoffs/prices triple ready for acceptance wiring and validation.
struct InstanceSkeleton {
    FiniteSampleSpace space;
    Mat payoffs;
    Vec prices;
};

/// Flattens d univariate entities into one product-coded instance: atoms
/// are tagged copies of the entity atoms with weights renormalized by 1/d,
/// payoffs are block-diagonal, prices concatenate. Validation of the
/// result (column independence, unit payoff) is the caller's move.
inline InstanceSkeleton flatten_multivariate(const std::vector<FiniteSampleSpace>& spaces,
                                             const std::vector<MarketData>& markets) {
    if (spaces.empty()) throw BadParameter("flatten: needs at least one entity");
    if (spaces.size() != markets.size())
        throw BadParameter("flatten: entity count mismatch between spaces and markets");
    const size_t d = spaces.size();
    size_t total_atoms = 0, total_assets = 0;
    for (size_t e = 0; e < d; ++e) {
        if (markets[e].payoffs.size() != spaces[e].size())
            throw BadParameter("flatten: entity market does not match its space");
        total_atoms += spaces[e].size();
        total_assets += markets[e].prices.size();
    }
    InstanceSkeleton out;
    out.payoffs.assign(total_atoms, zeros(total_assets));
    Vec probs;
    std::vector<std::string> labels;
    size_t row0 = 0, col0 = 0;
    for (size_t e = 0; e < d; ++e) {
        const auto& sp = spaces[e];
        const auto& mk = markets[e];
        for (size_t i = 0; i < sp.size(); ++i) {
            probs.push_back(sp.probs[i] / Rational(static_cast<long long>(d)));
            labels.push_back("e" + std::to_string(e + 1) + "." + sp.atom_labels[i]);
            for (size_t j = 0; j < mk.prices.size(); ++j)
                out.payoffs[row0 + i][col0 + j] = mk.payoffs[i][j];
        }
        for (const auto& pr : mk.prices) out.prices.push_back(pr);
        row0 += sp.size();
        col0 += mk.prices.size();
    }
    out.space = make_space(std::move(probs), std::move(labels));
    return out;
}

}  // namespace optpay
