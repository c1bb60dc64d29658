#pragma once

// Exact interpolation of nodes (t_i, y_i) by a finite exponential sum
//
//     f(t) = sum_j c_j exp(lambda_j t),   c_j, lambda_j complex.
//
// With the exponents fixed the coefficients solve a generalized Vandermonde
// system B c = y, B(i, j) = exp(lambda_j t_i). Exponents can be supplied or
// estimated Prony-style: resample the nodes on a uniform grid, fit a linear
// predictor, take the roots z_k of its characteristic polynomial and set
// lambda_k = log(z_k) / spacing.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "ftexp/errors.hpp"
#include "ftexp/geometry.hpp"
#include "ftexp/numerics.hpp"

namespace ftexp {

struct ExpTerm {
    Complex coefficient;
    Complex exponent;  // per unit of t
    friend bool operator==(const ExpTerm&, const ExpTerm&) = default;
};

struct ExpModel {
    std::vector<ExpTerm> terms;
    std::vector<Point2> nodes;
    double fit_residual = 0.0;  // max |f(t_i) - y_i| at fit time
    double condition = 1.0;     // condition estimate of the basis system
    std::vector<std::string> warnings;
};

struct GivenExponents {
    std::vector<Complex> exponents;
};

struct EstimateExponents {
    std::size_t m = 0;
    bool symmetrize = false;
    // 0 selects max(4 m, 32).
    std::size_t resample_count = 0;
};

using ExponentSpec = std::variant<GivenExponents, EstimateExponents>;

inline constexpr double kDefaultResidualTol = 1e-8;
inline constexpr double kOverflowExponent = 700.0;
inline constexpr double kRealTolerance = 1e-10;

inline std::size_t effective_resample_count(const EstimateExponents& spec) {
    return spec.resample_count != 0 ? spec.resample_count : std::max<std::size_t>(4 * spec.m, 32);
}

inline void require_distinct_abscissae(std::span<const Point2> nodes) {
    std::vector<double> ts;
    ts.reserve(nodes.size());
    for (const Point2& p : nodes) ts.push_back(p.x);
    std::sort(ts.begin(), ts.end());
    if (const auto it = std::adjacent_find(ts.begin(), ts.end()); it != ts.end()) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "duplicate node abscissa t = " << *it;
        throw DuplicateAbscissaError(msg.str());
    }
}

inline CMatrix basis_matrix(std::span<const Point2> nodes, std::span<const Complex> exponents) {
    if (nodes.empty() || exponents.empty()) throw DimensionMismatchError("basis needs nodes and exponents");
    require_distinct_abscissae(nodes);
    CMatrix b(nodes.size(), exponents.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (std::size_t j = 0; j < exponents.size(); ++j) b(i, j) = std::exp(exponents[j] * nodes[i].x);
    }
    return b;
}

struct Evaluation {
    double value = 0.0;
    double imag_residual = 0.0;
};

inline Evaluation evaluate(std::span<const ExpTerm> terms, double t) {
    Complex sum = 0.0;
    for (const ExpTerm& term : terms) {
        if (std::abs(term.exponent.real() * t) > kOverflowExponent) {
            std::ostringstream msg;
            msg << "exponential overflow: |Re(lambda) t| = " << std::abs(term.exponent.real() * t) << " at t = " << t;
            throw OverflowError(msg.str());
        }
        sum += term.coefficient * std::exp(term.exponent * t);
    }
    return {sum.real(), std::abs(sum.imag())};
}

inline Evaluation evaluate(const ExpModel& model, double t) { return evaluate(model.terms, t); }

struct GridPoint {
    double t = 0.0;
    double value = 0.0;
    double imag_residual = 0.0;
};

// Inclusive grid start, start + step, ..., up to stop.
inline std::vector<double> grid_abscissae(double start, double stop, double step) {
    if (!(step > 0.0)) throw DomainError("grid step must be positive");
    if (!std::isfinite(start) || !std::isfinite(stop)) throw DomainError("grid bounds must be finite");
    if (stop < start) throw DomainError("grid stop must not precede start");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> ts(count);
    for (std::size_t k = 0; k < count; ++k) ts[k] = start + static_cast<double>(k) * step;
    return ts;
}

inline std::vector<GridPoint> evaluate_grid(const ExpModel& model, double start, double stop, double step) {
    std::vector<GridPoint> out;
    for (double t : grid_abscissae(start, stop, step)) {
        const Evaluation e = evaluate(model, t);
        out.push_back({t, e.value, e.imag_residual});
    }
    return out;
}

inline double max_abs_value(std::span<const Point2> nodes) {
    double best = 0.0;
    for (const Point2& p : nodes) best = std::max(best, std::abs(p.y));
    return best;
}

namespace detail {

inline ExpModel model_from_solution(std::span<const Point2> nodes, std::span<const Complex> exponents,
                                    const LinearSolution& sol) {
    ExpModel model;
    model.nodes.assign(nodes.begin(), nodes.end());
    for (std::size_t j = 0; j < exponents.size(); ++j) model.terms.push_back({sol.x[j], exponents[j]});
    model.condition = sol.condition;
    if (sol.ill_conditioned) {
        std::ostringstream msg;
        msg << "ill-conditioned basis: condition estimate " << sol.condition;
        model.warnings.push_back(msg.str());
    }
    for (const Point2& p : nodes) {
        model.fit_residual = std::max(model.fit_residual, std::abs(evaluate(model, p.x).value - p.y));
    }
    return model;
}

}  // namespace detail

// Exact interpolation with fixed exponents. Throws InterpolationError when
// the node residual exceeds residual_tol * max(1, max |y_i|).
inline ExpModel solve_coefficients(std::span<const Point2> nodes, std::span<const Complex> exponents,
                                   double residual_tol = kDefaultResidualTol) {
    if (nodes.size() != exponents.size()) {
        throw DimensionMismatchError("exact interpolation needs as many exponents as nodes (" +
                                     std::to_string(exponents.size()) + " vs " + std::to_string(nodes.size()) +
                                     ")");
    }
    const CMatrix basis = basis_matrix(nodes, exponents);
    std::vector<Complex> rhs;
    rhs.reserve(nodes.size());
    for (const Point2& p : nodes) rhs.emplace_back(p.y);

    ExpModel model = detail::model_from_solution(nodes, exponents, solve_linear(basis, rhs));
    const double bound = residual_tol * std::max(1.0, max_abs_value(nodes));
    if (!(model.fit_residual <= bound)) {
        std::ostringstream msg;
        msg << "interpolation residual " << model.fit_residual << " exceeds tolerance " << bound;
        throw InterpolationError(msg.str(), model.fit_residual);
    }
    return model;
}

// Least-squares fit with fewer exponents than nodes. No residual bound.
inline ExpModel fit_least_squares(std::span<const Point2> nodes, std::span<const Complex> exponents) {
    if (exponents.size() > nodes.size()) throw DimensionMismatchError("more exponents than nodes");
    const CMatrix basis = basis_matrix(nodes, exponents);
    std::vector<Complex> rhs;
    rhs.reserve(nodes.size());
    for (const Point2& p : nodes) rhs.emplace_back(p.y);
    return detail::model_from_solution(nodes, exponents, least_squares(basis, rhs));
}

// True when every value with a non-negligible imaginary part has a partner
// equal to its conjugate within tol.
inline bool conjugate_closed(std::span<const Complex> values, double tol = 0.0) {
    std::vector<bool> used(values.size(), false);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (used[i] || std::abs(values[i].imag()) <= tol) continue;
        bool found = false;
        for (std::size_t j = i + 1; j < values.size() && !found; ++j) {
            if (!used[j] && std::abs(values[j] - std::conj(values[i])) <= tol) {
                used[j] = true;
                found = true;
            }
        }
        if (!found) return false;
        used[i] = true;
    }
    return true;
}

// True when the multiset equals its own negation within tol.
inline bool negation_closed(std::span<const Complex> values, double tol = 0.0) {
    std::vector<bool> used(values.size(), false);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (used[i]) continue;
        if (std::abs(values[i]) <= tol) {
            used[i] = true;
            continue;
        }
        bool found = false;
        for (std::size_t j = i + 1; j < values.size() && !found; ++j) {
            if (!used[j] && std::abs(values[j] + values[i]) <= tol) {
                used[j] = true;
                found = true;
            }
        }
        if (!found) return false;
        used[i] = true;
    }
    return true;
}

namespace detail {

// Piecewise-linear resampling of (sorted) nodes on count uniform points.
inline std::vector<Complex> resample_uniform(std::span<const Point2> sorted, std::size_t count, double& spacing) {
    const double t0 = sorted.front().x;
    const double t1 = sorted.back().x;
    spacing = (t1 - t0) / static_cast<double>(count - 1);
    std::vector<Complex> out(count);
    std::size_t seg = 0;
    for (std::size_t k = 0; k < count; ++k) {
        const double t = k + 1 == count ? t1 : t0 + static_cast<double>(k) * spacing;
        while (seg + 2 < sorted.size() && t > sorted[seg + 1].x) ++seg;
        const Point2 a = sorted[seg];
        const Point2 b = sorted[seg + 1];
        const double w = (t - a.x) / (b.x - a.x);
        out[k] = a.y + w * (b.y - a.y);
    }
    return out;
}

// Snaps near-real values to the real axis and pairs conjugates exactly.
inline std::vector<Complex> close_under_conjugation(std::vector<Complex> values, std::size_t capacity) {
    for (Complex& z : values) {
        if (std::abs(z.imag()) <= kRealTolerance) z = z.real();
    }
    std::vector<bool> paired(values.size(), false);
    std::vector<Complex> missing;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (paired[i] || values[i].imag() == 0.0) continue;
        const Complex target = std::conj(values[i]);
        std::size_t best = values.size();
        double best_gap = 0.0;
        for (std::size_t j = i + 1; j < values.size(); ++j) {
            if (paired[j]) continue;
            const double gap = std::abs(values[j] - target);
            if (best == values.size() || gap < best_gap) {
                best = j;
                best_gap = gap;
            }
        }
        paired[i] = true;
        if (best != values.size() && best_gap <= 1e-6 * std::max(1.0, std::abs(target))) {
            const Complex mid = 0.5 * (values[i] + std::conj(values[best]));
            values[i] = mid;
            values[best] = std::conj(mid);
            paired[best] = true;
        } else {
            missing.push_back(target);
        }
    }
    if (values.size() + missing.size() > capacity) {
        throw ConjugateClosureError("estimated exponents are not closed under conjugation and no room is left to "
                                    "add the missing partners");
    }
    values.insert(values.end(), missing.begin(), missing.end());
    return values;
}

}  // namespace detail

inline std::vector<Complex> estimate_exponents(std::span<const Point2> nodes, const EstimateExponents& spec) {
    if (spec.m == 0) throw DomainError("exponent count must be >= 1");
    if (spec.symmetrize && spec.m % 2 != 0) throw DomainError("symmetrized estimation needs an even exponent count");
    if (nodes.size() < 3) throw InsufficientDataError("exponent estimation needs at least 3 nodes");
    const std::size_t count = effective_resample_count(spec);
    if (count < 2 * spec.m) {
        throw InsufficientDataError("resample count " + std::to_string(count) + " is below 2 m = " +
                                    std::to_string(2 * spec.m));
    }
    require_distinct_abscissae(nodes);

    std::vector<Point2> sorted(nodes.begin(), nodes.end());
    std::sort(sorted.begin(), sorted.end(), [](Point2 a, Point2 b) { return a.x < b.x; });

    double spacing = 0.0;
    const std::vector<Complex> grid = detail::resample_uniform(sorted, count, spacing);

    const std::size_t order = spec.symmetrize ? spec.m / 2 : spec.m;
    const HankelSystem sys = hankel_system(grid, order);
    const LinearSolution pred = least_squares(sys.matrix, sys.rhs);

    std::vector<Complex> poly(pred.x);
    poly.emplace_back(1.0);
    std::vector<Complex> exponents;
    for (const Complex& z : poly_roots(poly)) {
        if (std::abs(z) <= 1e-12) throw RootAtZeroError("characteristic root at the origin; log undefined");
        exponents.push_back(std::log(z) / spacing);
    }
    if (spec.symmetrize) {
        const std::size_t half = exponents.size();
        for (std::size_t k = 0; k < half; ++k) exponents.push_back(-exponents[k]);
    }
    return detail::close_under_conjugation(std::move(exponents), spec.m);
}

inline ExpModel fit(std::span<const Point2> nodes, const ExponentSpec& spec,
                    double residual_tol = kDefaultResidualTol) {
    if (const auto* given = std::get_if<GivenExponents>(&spec)) {
        return solve_coefficients(nodes, given->exponents, residual_tol);
    }
    const std::vector<Complex> exponents = estimate_exponents(nodes, std::get<EstimateExponents>(spec));
    return solve_coefficients(nodes, exponents, residual_tol);
}

}  // namespace ftexp
