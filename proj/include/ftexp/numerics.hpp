#pragma once

// Small dense complex kernels: Gaussian elimination with partial pivoting,
// simultaneous polynomial root iteration and the Hankel (linear prediction)
// system used to estimate exponents.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ftexp/errors.hpp"

namespace ftexp {

using Complex = std::complex<double>;

// Dense row-major complex matrix.
class CMatrix {
public:
    CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {
        if (rows == 0 || cols == 0) throw DimensionMismatchError("matrix dimensions must be positive");
    }

    CMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (rows == 0 || cols == 0) throw DimensionMismatchError("matrix dimensions must be positive");
        if (data_.size() != rows * cols) throw DimensionMismatchError("entry count does not match dimensions");
    }

    static CMatrix identity(std::size_t n) {
        CMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const Complex> entries() const noexcept { return data_; }

    std::vector<Complex> apply(std::span<const Complex> x) const {
        if (x.size() != cols_) throw DimensionMismatchError("vector length does not match matrix columns");
        std::vector<Complex> y(rows_);
        for (std::size_t r = 0; r < rows_; ++r) {
            Complex acc = 0.0;
            for (std::size_t c = 0; c < cols_; ++c) acc += (*this)(r, c) * x[c];
            y[r] = acc;
        }
        return y;
    }

    double norm_inf() const {
        double best = 0.0;
        for (std::size_t r = 0; r < rows_; ++r) {
            double row = 0.0;
            for (std::size_t c = 0; c < cols_; ++c) row += std::abs((*this)(r, c));
            best = std::max(best, row);
        }
        return best;
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<Complex> data_;
};

inline double norm_inf(std::span<const Complex> v) {
    double best = 0.0;
    for (const Complex& z : v) best = std::max(best, std::abs(z));
    return best;
}

inline constexpr double kSingularPivotRatio = 1e-14;
inline constexpr double kIllConditionedThreshold = 1e12;

struct LinearSolution {
    std::vector<Complex> x;
    // Infinity-norm condition number estimate of the system matrix.
    double condition = 1.0;
    bool ill_conditioned = false;
};

namespace detail {

// In-place LU factorisation with partial pivoting by modulus.
struct LuFactors {
    CMatrix lu;
    std::vector<std::size_t> perm;

    std::vector<Complex> solve(std::span<const Complex> b) const {
        const std::size_t n = lu.rows();
        std::vector<Complex> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = b[perm[i]];
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < i; ++k) x[i] -= lu(i, k) * x[k];
        }
        for (std::size_t i = n; i-- > 0;) {
            for (std::size_t k = i + 1; k < n; ++k) x[i] -= lu(i, k) * x[k];
            x[i] /= lu(i, i);
        }
        return x;
    }
};

inline LuFactors lu_factor(const CMatrix& a) {
    const std::size_t n = a.rows();
    LuFactors f{a, std::vector<std::size_t>(n)};
    for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;

    double largest = 0.0;
    for (const Complex& z : a.entries()) largest = std::max(largest, std::abs(z));
    const double threshold = kSingularPivotRatio * largest;

    CMatrix& m = f.lu;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(m(r, col)) > std::abs(m(pivot, col))) pivot = r;
        }
        if (!(std::abs(m(pivot, col)) > threshold)) {
            throw SingularMatrixError("matrix is singular to working precision (column " + std::to_string(col) +
                                      ")");
        }
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(m(pivot, c), m(col, c));
            std::swap(f.perm[pivot], f.perm[col]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const Complex factor = m(r, col) / m(col, col);
            m(r, col) = factor;
            for (std::size_t c = col + 1; c < n; ++c) m(r, c) -= factor * m(col, c);
        }
    }
    return f;
}

}  // namespace detail

inline LinearSolution solve_linear(const CMatrix& a, std::span<const Complex> b) {
    if (a.rows() != a.cols()) throw DimensionMismatchError("solve_linear needs a square matrix");
    if (b.size() != a.rows()) throw DimensionMismatchError("right-hand side length does not match matrix");

    const detail::LuFactors f = detail::lu_factor(a);
    LinearSolution out;
    out.x = f.solve(b);

    // ||A^-1||_inf from the factors, column by column.
    const std::size_t n = a.rows();
    std::vector<double> inverse_row_sums(n, 0.0);
    std::vector<Complex> unit(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::fill(unit.begin(), unit.end(), Complex{});
        unit[c] = 1.0;
        const std::vector<Complex> col = f.solve(unit);
        for (std::size_t r = 0; r < n; ++r) inverse_row_sums[r] += std::abs(col[r]);
    }
    out.condition = a.norm_inf() * *std::max_element(inverse_row_sums.begin(), inverse_row_sums.end());
    out.ill_conditioned = !(out.condition <= kIllConditionedThreshold);
    return out;
}

// Minimises ||A x - b||_2 through the normal equations A^H A x = A^H b.
inline LinearSolution least_squares(const CMatrix& a, std::span<const Complex> b) {
    if (a.rows() < a.cols()) throw DimensionMismatchError("least_squares needs rows >= cols");
    if (b.size() != a.rows()) throw DimensionMismatchError("right-hand side length does not match matrix");
    const std::size_t n = a.rows();
    const std::size_t m = a.cols();
    CMatrix gram(m, m);
    std::vector<Complex> rhs(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            Complex acc = 0.0;
            for (std::size_t r = 0; r < n; ++r) acc += std::conj(a(r, i)) * a(r, j);
            gram(i, j) = acc;
        }
        Complex acc = 0.0;
        for (std::size_t r = 0; r < n; ++r) acc += std::conj(a(r, i)) * b[r];
        rhs[i] = acc;
    }
    return solve_linear(gram, rhs);
}

// Evaluates sum_k coeffs[k] z^k (ascending powers) by Horner's rule.
inline Complex poly_eval(std::span<const Complex> coeffs, Complex z) {
    Complex acc = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * z + coeffs[k];
    return acc;
}

// |p(z)| / sum_k |a_k| |z|^k for the monic-normalised polynomial.
inline double poly_backward_error(std::span<const Complex> coeffs, Complex z) {
    const Complex lead = coeffs.back();
    double scale = 0.0;
    double power = 1.0;
    for (const Complex& c : coeffs) {
        scale += std::abs(c / lead) * power;
        power *= std::abs(z);
    }
    return std::abs(poly_eval(coeffs, z) / lead) / scale;
}

inline constexpr int kRootMaxIter = 1000;
inline constexpr double kRootTolerance = 1e-8;

// All roots of sum_k coeffs[k] z^k (coefficients in ascending powers) by
// Aberth-Ehrlich simultaneous iteration, started on a circle of radius given
// by the Fujiwara-type bound and rotated off the real axis.
inline std::vector<Complex> poly_roots(std::span<const Complex> coeffs) {
    if (coeffs.size() < 2) throw DomainError("poly_roots needs degree >= 1");
    if (coeffs.back() == Complex{}) throw DomainError("leading coefficient must be nonzero");
    const std::size_t degree = coeffs.size() - 1;

    std::vector<Complex> monic(coeffs.begin(), coeffs.end());
    for (Complex& c : monic) c /= coeffs.back();

    // Factor out roots at the origin.
    std::size_t zeros = 0;
    while (zeros < degree && monic[zeros] == Complex{}) ++zeros;
    std::vector<Complex> roots(zeros, Complex{});
    if (zeros == degree) return roots;
    const std::span<const Complex> reduced(monic.begin() + static_cast<std::ptrdiff_t>(zeros), monic.end());
    const std::size_t m = reduced.size() - 1;

    std::vector<Complex> derivative(m);
    for (std::size_t k = 1; k <= m; ++k) derivative[k - 1] = static_cast<double>(k) * reduced[k];

    double radius = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        radius = std::max(radius, std::pow(std::abs(reduced[k]), 1.0 / static_cast<double>(m - k)));
    }
    std::vector<Complex> z(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m) + 0.4;
        z[k] = std::polar(radius, angle);
    }

    auto worst_error = [&] {
        double worst = 0.0;
        for (const Complex& r : z) worst = std::max(worst, poly_backward_error(reduced, r));
        return worst;
    };

    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (int iter = 0; iter < kRootMaxIter; ++iter) {
        bool moved = false;
        for (std::size_t k = 0; k < m; ++k) {
            const Complex p = poly_eval(reduced, z[k]);
            if (p == Complex{}) continue;
            const Complex dp = poly_eval(derivative, z[k]);
            Complex repulsion = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                if (j != k) repulsion += 1.0 / (z[k] - z[j]);
            }
            Complex denom = dp - p * repulsion;
            if (denom == Complex{}) denom = eps * (1.0 + std::abs(dp));
            const Complex correction = p / denom;
            z[k] -= correction;
            if (std::abs(correction) > 4.0 * eps * (1.0 + std::abs(z[k]))) moved = true;
        }
        if (!moved) break;
    }

    const double worst = worst_error();
    if (!(worst <= kRootTolerance)) {
        std::ostringstream msg;
        msg << "polynomial root iteration did not converge (backward error " << worst << ")";
        throw ConvergenceError(msg.str(), worst);
    }
    roots.insert(roots.end(), z.begin(), z.end());
    return roots;
}

struct HankelSystem {
    CMatrix matrix;
    std::vector<Complex> rhs;
};

// Linear prediction of order m: H[i][j] = s[i + j], r[i] = -s[i + m] for
// i < N - m. The least-squares solution a gives the characteristic
// polynomial z^m + a[m-1] z^(m-1) + ... + a[0].
inline HankelSystem hankel_system(std::span<const Complex> samples, std::size_t order) {
    if (order == 0) throw DomainError("prediction order must be >= 1");
    if (samples.size() < 2 * order) {
        throw InsufficientDataError("linear prediction of order " + std::to_string(order) + " needs at least " +
                                    std::to_string(2 * order) + " samples, got " +
                                    std::to_string(samples.size()));
    }
    const std::size_t rows = samples.size() - order;
    HankelSystem sys{CMatrix(rows, order), std::vector<Complex>(rows)};
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < order; ++j) sys.matrix(i, j) = samples[i + j];
        sys.rhs[i] = -samples[i + order];
    }
    return sys;
}

}  // namespace ftexp
