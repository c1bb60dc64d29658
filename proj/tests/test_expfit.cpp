#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "ftexp/expfit.hpp"
#include "reference_values.hpp"

namespace ftexp {
namespace {

using namespace std::complex_literals;

std::vector<Point2> published_nodes() {
    std::vector<Point2> out;
    for (const auto& r : testdata::kSmoothedNodes) out.push_back({r.t, r.value});
    return out;
}

std::vector<Complex> published_exponents() {
    std::vector<Complex> out;
    for (const auto& t : testdata::kModelTerms) out.emplace_back(t.l_re, t.l_im);
    return out;
}

std::vector<ExpTerm> published_terms() {
    std::vector<ExpTerm> out;
    for (const auto& t : testdata::kModelTerms) out.push_back({{t.c_re, t.c_im}, {t.l_re, t.l_im}});
    return out;
}

// Samples sum_j c_j exp(l_j t) at the given abscissae (real part).
std::vector<Point2> sample(const std::vector<ExpTerm>& terms, const std::vector<double>& ts) {
    std::vector<Point2> out;
    for (double t : ts) {
        Complex s = 0.0;
        for (const ExpTerm& term : terms) s += term.coefficient * std::exp(term.exponent * t);
        out.push_back({t, s.real()});
    }
    return out;
}

std::vector<double> uniform(double a, double b, std::size_t n) {
    std::vector<double> ts(n);
    for (std::size_t k = 0; k < n; ++k) ts[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
    return ts;
}

// Greedy nearest matching; returns the worst distance.
double multiset_distance(std::vector<Complex> got, const std::vector<Complex>& want) {
    if (got.size() != want.size()) return INFINITY;
    double worst = 0.0;
    for (const Complex& w : want) {
        auto it = std::min_element(got.begin(), got.end(),
                                   [&](Complex a, Complex b) { return std::abs(a - w) < std::abs(b - w); });
        worst = std::max(worst, std::abs(*it - w));
        got.erase(it);
    }
    return worst;
}

TEST(BasisMatrix, Examples) {
    const std::vector<Point2> one{{0, 7}};
    const std::vector<Complex> zero{0.0};
    EXPECT_EQ(basis_matrix(one, zero)(0, 0), Complex(1.0));

    const std::vector<Point2> two{{0, 2}, {1, 3}};
    const std::vector<Complex> exps{0.0, std::log(2.0)};
    const CMatrix b = basis_matrix(two, exps);
    EXPECT_EQ(b(0, 0), 1.0);
    EXPECT_EQ(b(0, 1), 1.0);
    EXPECT_EQ(b(1, 0), 1.0);
    EXPECT_NEAR(std::abs(b(1, 1) - 2.0), 0.0, 1e-15);
}

TEST(BasisMatrix, DuplicateAbscissa) {
    const std::vector<Point2> nodes{{1, 2}, {1, 3}};
    const std::vector<Complex> exps{0.0, 1.0};
    EXPECT_THROW(basis_matrix(nodes, exps), DuplicateAbscissaError);
}

TEST(SolveCoefficients, HandSolved) {
    const std::vector<Point2> nodes{{0, 2}, {1, 3}};
    const std::vector<Complex> exps{0.0, std::log(2.0)};
    const ExpModel m = solve_coefficients(nodes, exps);
    EXPECT_LE(std::abs(m.terms[0].coefficient - 1.0), 1e-14);
    EXPECT_LE(std::abs(m.terms[1].coefficient - 1.0), 1e-14);
    EXPECT_LE(m.fit_residual, 1e-14);
}

TEST(SolveCoefficients, SingleConstantTerm) {
    const std::vector<Point2> nodes{{4.5, -1.25}};
    const std::vector<Complex> exps{0.0};
    EXPECT_EQ(solve_coefficients(nodes, exps).terms[0].coefficient, Complex(-1.25));
}

TEST(SolveCoefficients, Errors) {
    const std::vector<Point2> nodes{{0, 1}, {1, 2}};
    EXPECT_THROW(solve_coefficients(nodes, std::vector<Complex>{0.0}), DimensionMismatchError);
    EXPECT_THROW(solve_coefficients(nodes, std::vector<Complex>{0.5, 0.5}), SingularMatrixError);
    const std::vector<Point2> dup{{0, 1}, {0, 2}};
    EXPECT_THROW(solve_coefficients(dup, std::vector<Complex>{0.0, 1.0}), DuplicateAbscissaError);
}

TEST(SolveCoefficients, RecoversPublishedCoefficients) {
    const ExpModel m = solve_coefficients(published_nodes(), published_exponents());
    ASSERT_EQ(m.terms.size(), 10u);
    EXPECT_TRUE(m.warnings.empty());
    const auto printed = published_terms();
    for (std::size_t j = 0; j < 10; ++j) {
        const Complex got = m.terms[j].coefficient;
        const Complex want = printed[j].coefficient;
        EXPECT_LE(std::abs(got.real() - want.real()) / std::abs(want), 1e-4) << "term " << j;
        EXPECT_LE(std::abs(got.imag() - want.imag()) / std::abs(want), 1e-4) << "term " << j;
    }
    EXPECT_LE(m.fit_residual, 1e-8 * 3.57193156);
}

TEST(Evaluate, PublishedModelAtNodes) {
    const auto terms = published_terms();
    EXPECT_NEAR(evaluate(terms, 3.0).value, 1.4, 1e-6);
    EXPECT_NEAR(evaluate(terms, 10.0).value, 3.3, 1e-6);
    for (std::size_t i = 0; i < 10; ++i) {
        EXPECT_NEAR(evaluate(terms, testdata::kSmoothedNodes[i].t).value, testdata::kModelCheckValues[i], 1e-6);
    }
}

TEST(Evaluate, ConstantTerm) {
    const std::vector<ExpTerm> terms{{5.0, 0.0}};
    const Evaluation e = evaluate(terms, 123.4);
    EXPECT_EQ(e.value, 5.0);
    EXPECT_EQ(e.imag_residual, 0.0);
}

TEST(Evaluate, OverflowGuard) {
    const std::vector<ExpTerm> terms{{1.0, 2.0}};
    EXPECT_NO_THROW(evaluate(terms, 350.0));
    EXPECT_THROW(evaluate(terms, 350.5), OverflowError);
    EXPECT_THROW(evaluate(terms, -351.0), OverflowError);
}

TEST(EvaluateGrid, PublishedModelIsReal) {
    ExpModel m;
    m.terms = published_terms();
    const auto grid = evaluate_grid(m, 1.0, 11.0, 0.1);
    ASSERT_EQ(grid.size(), 101u);
    double worst = 0.0;
    for (const GridPoint& g : grid) worst = std::max(worst, g.imag_residual);
    EXPECT_LE(worst, 1e-6);
    EXPECT_NEAR(grid.back().t, 11.0, 1e-12);
}

TEST(EvaluateGrid, Degenerate) {
    ExpModel m;
    m.terms = {{1.0, 0.0}};
    EXPECT_EQ(evaluate_grid(m, 2.0, 2.0, 0.5).size(), 1u);
    EXPECT_THROW(evaluate_grid(m, 0.0, 1.0, 0.0), DomainError);
    EXPECT_THROW(evaluate_grid(m, 0.0, 1.0, -0.1), DomainError);
    EXPECT_THROW(evaluate_grid(m, 1.0, 0.0, 0.1), DomainError);
}

TEST(Closure, PublishedExponents) {
    const auto exps = published_exponents();
    EXPECT_TRUE(negation_closed(exps));
    EXPECT_TRUE(conjugate_closed(exps));
    std::vector<Complex> broken = exps;
    broken[1] += 1e-9;
    EXPECT_FALSE(conjugate_closed(broken));
    EXPECT_FALSE(negation_closed(broken));
}

TEST(EstimateExponents, SingleGrowth) {
    const auto nodes = sample({{1.0, 0.1}}, uniform(0, 10, 32));
    const auto exps = estimate_exponents(nodes, {1, false, 32});
    ASSERT_EQ(exps.size(), 1u);
    EXPECT_LE(std::abs(exps[0] - 0.1), 1e-6);
}

TEST(EstimateExponents, Cosine) {
    const auto nodes = sample({{0.5, 1i}, {0.5, -1i}}, uniform(0, 10, 32));
    const auto exps = estimate_exponents(nodes, {2, false, 32});
    EXPECT_LE(multiset_distance(exps, {1i, -1i}), 1e-6);
    EXPECT_TRUE(conjugate_closed(exps));
}

TEST(EstimateExponents, Constant) {
    std::vector<Point2> nodes;
    for (double t : uniform(0, 5, 32)) nodes.push_back({t, 3.3});
    const auto exps = estimate_exponents(nodes, {1, false, 32});
    EXPECT_LE(std::abs(exps[0]), 1e-10);
}

TEST(EstimateExponents, Symmetrized) {
    // Order m/2 prediction sees one mode; its negation is added.
    const auto nodes = sample({{1.0, 0.2}}, uniform(0, 10, 32));
    const auto exps = estimate_exponents(nodes, {2, true, 32});
    EXPECT_LE(multiset_distance(exps, {0.2, -0.2}), 1e-6);
    EXPECT_TRUE(negation_closed(exps, 1e-15));
}

TEST(EstimateExponents, UnsortedNodes) {
    auto nodes = sample({{1.0, 0.1}}, uniform(0, 10, 32));
    std::reverse(nodes.begin(), nodes.end());
    EXPECT_LE(std::abs(estimate_exponents(nodes, {1, false, 32})[0] - 0.1), 1e-6);
}

TEST(EstimateExponents, Errors) {
    const auto nodes = sample({{1.0, 0.1}}, uniform(0, 10, 8));
    EXPECT_THROW(estimate_exponents(nodes, {3, true, 32}), DomainError);
    EXPECT_THROW(estimate_exponents(nodes, {0, false, 32}), DomainError);
    EXPECT_THROW(estimate_exponents(nodes, {4, false, 7}), InsufficientDataError);
    EXPECT_THROW(estimate_exponents(std::vector<Point2>{{0, 1}, {1, 2}}, {1, false, 8}), InsufficientDataError);

    // An impulse has a predictor root at the origin.
    std::vector<Point2> impulse;
    for (int k = 0; k < 8; ++k) impulse.push_back({double(k), k == 0 ? 1.0 : 0.0});
    EXPECT_THROW(estimate_exponents(impulse, {1, false, 8}), RootAtZeroError);

    // Alternating signs give z = -1, whose log is not self-conjugate.
    std::vector<Point2> alternating;
    for (int k = 0; k < 8; ++k) alternating.push_back({double(k), k % 2 == 0 ? 1.0 : -1.0});
    EXPECT_THROW(estimate_exponents(alternating, {1, false, 8}), ConjugateClosureError);
}

TEST(Fit, GivenPublishedExponents) {
    const auto nodes = published_nodes();
    const ExpModel m = fit(nodes, GivenExponents{published_exponents()});
    for (const Point2& p : nodes) EXPECT_NEAR(evaluate(m, p.x).value, p.y, 1e-6);
}

TEST(Fit, EstimateRoundTrip) {
    // Two real exponentials, exactly as many nodes as terms.
    const auto nodes = sample({{2.0, 0.3}, {-1.0, -0.5}}, uniform(0, 4, 8));
    const std::vector<Point2> two{nodes[1], nodes[5]};
    const auto dense = sample({{2.0, 0.3}, {-1.0, -0.5}}, uniform(0, 4, 16));
    const auto exps = estimate_exponents(dense, {2, false, 16});
    EXPECT_LE(multiset_distance(exps, {0.3, -0.5}), 1e-6);
    const ExpModel m = fit(two, GivenExponents{exps});
    EXPECT_LE(m.fit_residual, 1e-8 * std::max(1.0, max_abs_value(two)));

    const auto four = sample({{2.0, 0.3}, {-1.0, -0.5}}, uniform(0, 4, 4));
    const ExpModel direct = fit(four, EstimateExponents{4, false, 0});
    EXPECT_LE(direct.fit_residual, 1e-8 * std::max(1.0, max_abs_value(four)));
}

TEST(Fit, DimensionMismatch) {
    EXPECT_THROW(fit(published_nodes(), GivenExponents{{0.0, 1.0}}), DimensionMismatchError);
}

TEST(Fit, LeastSquaresMode) {
    const auto nodes = sample({{2.0, 0.3}, {-1.0, -0.5}}, uniform(0, 4, 12));
    const ExpModel m = fit_least_squares(nodes, std::vector<Complex>{0.3, -0.5});
    EXPECT_LE(std::abs(m.terms[0].coefficient - 2.0), 1e-8);
    EXPECT_LE(std::abs(m.terms[1].coefficient + 1.0), 1e-8);
    EXPECT_THROW(fit_least_squares(std::vector<Point2>{{0, 1}}, std::vector<Complex>{0.0, 1.0}),
                 DimensionMismatchError);
}

TEST(Fit, ResidualToleranceEnforced) {
    // Rounding alone leaves a residual far above 1e-30.
    const std::vector<Point2> nodes{{0.3, 1.7}, {1.1, -2.9}, {2.9, 5.3}};
    const std::vector<Complex> exps{0.13, 0.71, -0.37};
    EXPECT_THROW(solve_coefficients(nodes, exps, 1e-30), InterpolationError);
}

// Round trip: sample a known model and refit with its own exponents.
TEST(FitProperties, CoefficientRoundTrip) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t pairs = 1 + trial % 3;
        std::vector<ExpTerm> terms;
        for (std::size_t p = 0; p < pairs; ++p) {
            const Complex lam(0.5 * u(rng), 0.4 + 0.8 * static_cast<double>(p) + 0.2 * u(rng));
            const Complex c(u(rng), u(rng));
            terms.push_back({c, lam});
            terms.push_back({std::conj(c), std::conj(lam)});
        }
        const std::size_t m = terms.size();
        const auto nodes = sample(terms, uniform(0.0, 1.0 * static_cast<double>(m), m));
        std::vector<Complex> exps;
        for (const ExpTerm& t : terms) exps.push_back(t.exponent);
        const ExpModel fitted = solve_coefficients(nodes, exps);
        for (std::size_t j = 0; j < m; ++j) {
            EXPECT_LE(std::abs(fitted.terms[j].coefficient - terms[j].coefficient),
                      1e-7 * std::abs(terms[j].coefficient));
        }
    }
}

TEST(FitProperties, ConjugatePairedCoefficients) {
    const ExpModel m = solve_coefficients(published_nodes(), published_exponents());
    for (std::size_t j = 0; j < m.terms.size(); ++j) {
        for (std::size_t k = 0; k < m.terms.size(); ++k) {
            if (std::abs(m.terms[k].exponent - std::conj(m.terms[j].exponent)) == 0.0) {
                EXPECT_LE(std::abs(m.terms[k].coefficient - std::conj(m.terms[j].coefficient)), 1e-8);
            }
        }
    }
}

TEST(FitProperties, PronyRecovery) {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t pairs = 1 + trial % 3;
        const double spacing = 0.25;
        std::vector<ExpTerm> terms;
        std::vector<Complex> want;
        for (std::size_t p = 0; p < pairs; ++p) {
            const Complex lam(0.3 * u(rng), 0.8 + 1.5 * static_cast<double>(p) + 0.3 * u(rng));
            const Complex c(u(rng) + 1.5, u(rng));
            terms.push_back({c, lam});
            terms.push_back({std::conj(c), std::conj(lam)});
            want.push_back(lam);
            want.push_back(std::conj(lam));
        }
        const std::size_t m = terms.size();
        const std::size_t count = 4 * m;
        const auto nodes = sample(terms, uniform(0.0, spacing * static_cast<double>(count - 1), count));
        const auto exps = estimate_exponents(nodes, {m, false, count});
        EXPECT_LE(multiset_distance(exps, want), 1e-6) << "trial " << trial;
    }
}

}  // namespace
}  // namespace ftexp
