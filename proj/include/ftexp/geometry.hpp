#pragma once

// Fermat-Torricelli point of a triangle: the point F minimising
// |AF| + |BF| + |CF|. Three routes are provided:
//
//   * fermat_point_closed_form - analytic coordinates, valid when every
//     interior angle is below 2*pi/3;
//   * the obtuse-vertex rule     - when some angle reaches 2*pi/3 the
//     minimiser is that vertex;
//   * weiszfeld                  - the re-weighted averaging iteration for
//     the geometric median of any finite point set, used as the oracle.
//
// fermat_point() dispatches on classify() and is total.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <variant>
#include <vector>

#include "ftexp/errors.hpp"

namespace ftexp {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Point2, Point2) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

struct Triangle {
    std::array<Point2, 3> v;

    const Point2& operator[](std::size_t i) const { return v[i]; }
};

struct SideLengths {
    double r12 = 0.0;  // |v0 v1|
    double r13 = 0.0;  // |v0 v2|
    double r23 = 0.0;  // |v1 v2|
};

// Classification variants.
struct InteriorCase {
    friend constexpr bool operator==(InteriorCase, InteriorCase) = default;
};

struct ObtuseVertex {
    std::size_t index = 0;
    friend constexpr bool operator==(ObtuseVertex, ObtuseVertex) = default;
};

enum class DegenerateKind { Collinear, CoincidentVertices };

struct Degenerate {
    DegenerateKind kind = DegenerateKind::Collinear;
    friend constexpr bool operator==(Degenerate, Degenerate) = default;
};

using TriangleClass = std::variant<InteriorCase, ObtuseVertex, Degenerate>;

inline constexpr double kDefaultAngleTol = 1e-12;
inline constexpr double kDefaultWeiszfeldTol = 1e-12;
inline constexpr int kDefaultWeiszfeldMaxIter = 10000;

inline SideLengths side_lengths(const Triangle& t) {
    return {distance(t[0], t[1]), distance(t[0], t[2]), distance(t[1], t[2])};
}

// S = x1 y2 + x3 y1 + x2 y3 - x1 y3 - x2 y1 - x3 y2, twice the signed area
// (positive for counter-clockwise order).
inline double signed_area_2x(const Triangle& t) {
    const auto [x1, y1] = t[0];
    const auto [x2, y2] = t[1];
    const auto [x3, y3] = t[2];
    return x1 * y2 + x3 * y1 + x2 * y3 - x1 * y3 - x2 * y1 - x3 * y2;
}

inline TriangleClass classify(const Triangle& t, double angle_tol = kDefaultAngleTol) {
    const SideLengths s = side_lengths(t);
    const double longest = std::max({s.r12, s.r13, s.r23});
    if (longest == 0.0 || std::min({s.r12, s.r13, s.r23}) <= angle_tol * longest) {
        return Degenerate{DegenerateKind::CoincidentVertices};
    }
    if (std::abs(signed_area_2x(t)) <= angle_tol * longest * longest) {
        return Degenerate{DegenerateKind::Collinear};
    }

    // Cosine of the interior angle at each vertex.
    std::array<double, 3> cosines{};
    for (std::size_t i = 0; i < 3; ++i) {
        const Point2 a = t[(i + 1) % 3] - t[i];
        const Point2 b = t[(i + 2) % 3] - t[i];
        cosines[i] = dot(a, b) / (norm(a) * norm(b));
    }
    const auto widest = static_cast<std::size_t>(
        std::distance(cosines.begin(), std::min_element(cosines.begin(), cosines.end())));
    if (cosines[widest] <= -0.5 + angle_tol) {
        return ObtuseVertex{widest};
    }
    return InteriorCase{};
}

// Sum of Euclidean distances from p to every point.
inline double objective(std::span<const Point2> points, Point2 p) {
    double total = 0.0;
    for (const Point2& q : points) total += distance(q, p);
    return total;
}

// Norm of the sum of unit vectors from p towards each point that does not
// coincide with p. Zero at an interior geometric median.
inline double stationarity_residual(std::span<const Point2> points, Point2 p) {
    Point2 sum{};
    for (const Point2& q : points) {
        const double d = distance(q, p);
        if (d > 0.0) sum = sum + (1.0 / d) * (q - p);
    }
    return norm(sum);
}

// Analytic Fermat-Torricelli point for a triangle with every angle below
// 2*pi/3:
//
//   d = (r12^2 + r13^2 + r23^2) / 2 + sqrt(3) |S|
//   x = X / (2 sqrt(3) d),  y = Y / (2 sqrt(3) d)
//   X = sqrt(3)(x1 r23^2 + x2 r13^2 + x3 r12^2) + (x1 + x2 + x3)|S|
//       + 3 sign(S) [(y2 - y1) P12 + (y1 - y3) P13 + (y3 - y2) P23]
//   Y = sqrt(3)(y1 r23^2 + y2 r13^2 + y3 r12^2) + (y1 + y2 + y3)|S|
//       - 3 sign(S) [(x2 - x1) P12 + (x1 - x3) P13 + (x3 - x2) P23]
//
// with Pij = xi xj + yi yj.
inline Point2 fermat_point_closed_form(const Triangle& t) {
    if (!std::holds_alternative<InteriorCase>(classify(t))) {
        throw DomainError("closed-form Fermat point requires every angle below 2*pi/3");
    }
    const auto [x1, y1] = t[0];
    const auto [x2, y2] = t[1];
    const auto [x3, y3] = t[2];
    const SideLengths s = side_lengths(t);
    const double q12 = s.r12 * s.r12;
    const double q13 = s.r13 * s.r13;
    const double q23 = s.r23 * s.r23;

    const double area = signed_area_2x(t);
    const double abs_area = std::abs(area);
    const double sgn = area > 0.0 ? 1.0 : -1.0;
    constexpr double sqrt3 = std::numbers::sqrt3;

    const double p12 = x1 * x2 + y1 * y2;
    const double p13 = x1 * x3 + y1 * y3;
    const double p23 = x2 * x3 + y2 * y3;

    const double d = (q12 + q13 + q23) / 2.0 + abs_area * sqrt3;
    const double big_x = sqrt3 * (x1 * q23 + x2 * q13 + x3 * q12) + (x1 + x2 + x3) * abs_area +
                         3.0 * sgn * ((y2 - y1) * p12 + (y1 - y3) * p13 + (y3 - y2) * p23);
    const double big_y = sqrt3 * (y1 * q23 + y2 * q13 + y3 * q12) + (y1 + y2 + y3) * abs_area -
                         3.0 * sgn * ((x2 - x1) * p12 + (x1 - x3) * p13 + (x3 - x2) * p23);
    const double denom = 2.0 * sqrt3 * d;
    return {big_x / denom, big_y / denom};
}

namespace detail {

struct VertexTest {
    bool optimal = false;
    Point2 resultant{};  // sum of unit vectors towards the other points
    double multiplicity = 0.0;
    double inverse_distance_sum = 0.0;
    Point2 weighted_sum{};  // sum of q / |q - v| over the other points
};

// A data point v of multiplicity w is the geometric median iff the resultant
// of unit vectors from v to the remaining points has norm <= w.
inline VertexTest test_vertex(std::span<const Point2> points, Point2 v) {
    VertexTest out;
    for (const Point2& q : points) {
        const double d = distance(q, v);
        if (d == 0.0) {
            out.multiplicity += 1.0;
            continue;
        }
        out.resultant = out.resultant + (1.0 / d) * (q - v);
        out.inverse_distance_sum += 1.0 / d;
        out.weighted_sum = out.weighted_sum + (1.0 / d) * q;
    }
    out.optimal = norm(out.resultant) <= out.multiplicity;
    return out;
}

}  // namespace detail

// Geometric median of a finite point set by Weiszfeld's iteration, started at
// the centroid. Data points are tested for optimality up front and whenever
// an iterate lands on one; a non-optimal landing point is left along the
// descent direction (Vardi-Zhang step).
namespace detail {

// Newton step for the sum of distances; empty when the Hessian is singular.
inline std::optional<Point2> newton_step(std::span<const Point2> points, Point2 p) {
    double gx = 0.0, gy = 0.0, hxx = 0.0, hxy = 0.0, hyy = 0.0;
    for (const Point2& q : points) {
        const Point2 d = p - q;
        const double r = norm(d);
        if (r == 0.0) return std::nullopt;
        const double ux = d.x / r, uy = d.y / r;
        gx += ux;
        gy += uy;
        hxx += (1.0 - ux * ux) / r;
        hxy += -ux * uy / r;
        hyy += (1.0 - uy * uy) / r;
    }
    const double det = hxx * hyy - hxy * hxy;
    if (!(det > 1e-14 * (hxx * hyy))) return std::nullopt;
    const Point2 next{p.x - (hyy * gx - hxy * gy) / det, p.y - (hxx * gy - hxy * gx) / det};
    if (!is_finite(next)) return std::nullopt;
    return next;
}

}  // namespace detail

inline Point2 weiszfeld(std::span<const Point2> points, double tol = kDefaultWeiszfeldTol,
                        int max_iter = kDefaultWeiszfeldMaxIter) {
    if (points.empty()) throw DomainError("weiszfeld needs at least one point");
    if (!(tol > 0.0)) throw DomainError("weiszfeld tolerance must be positive");
    if (max_iter < 1) throw DomainError("weiszfeld max_iter must be >= 1");

    for (const Point2& v : points) {
        if (detail::test_vertex(points, v).optimal) return v;
    }

    Point2 current{};
    for (const Point2& q : points) current = current + q;
    current = (1.0 / static_cast<double>(points.size())) * current;

    double step = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iter; ++iter) {
        Point2 weighted{};
        double weight_sum = 0.0;
        const Point2* landed = nullptr;
        for (const Point2& q : points) {
            const double d = distance(q, current);
            if (d <= tol) {
                landed = &q;
                break;
            }
            weighted = weighted + (1.0 / d) * q;
            weight_sum += 1.0 / d;
        }

        Point2 next;
        if (landed != nullptr) {
            const Point2 v = *landed;
            const detail::VertexTest vt = detail::test_vertex(points, v);
            if (vt.optimal) return v;
            const Point2 towards = (1.0 / vt.inverse_distance_sum) * vt.weighted_sum;
            const double shrink = 1.0 - vt.multiplicity / norm(vt.resultant);
            next = v + shrink * (towards - v);
        } else {
            next = (1.0 / weight_sum) * weighted;
            // Near a 120 degree configuration the plain map contracts very
            // slowly, so try a Newton step and keep it only if it does better.
            if (const auto newton = detail::newton_step(points, current);
                newton && objective(points, *newton) <= objective(points, next)) {
                next = *newton;
            }
        }

        step = distance(next, current);
        current = next;
        if (step <= tol) return current;
    }

    std::ostringstream msg;
    msg.precision(17);
    msg << "weiszfeld did not converge after " << max_iter << " iterations; last iterate (" << current.x
        << ", " << current.y << "), step " << step;
    throw ConvergenceError(msg.str(), stationarity_residual(points, current));
}

inline Point2 weiszfeld(const Triangle& t, double tol = kDefaultWeiszfeldTol,
                        int max_iter = kDefaultWeiszfeldMaxIter) {
    return weiszfeld(std::span<const Point2>(t.v), tol, max_iter);
}

// Total Fermat-Torricelli point.
inline Point2 fermat_point(const Triangle& t, double angle_tol = kDefaultAngleTol) {
    const TriangleClass cls = classify(t, angle_tol);
    if (std::holds_alternative<InteriorCase>(cls)) return fermat_point_closed_form(t);
    if (const auto* obtuse = std::get_if<ObtuseVertex>(&cls)) return t[obtuse->index];

    const SideLengths s = side_lengths(t);
    if (std::get<Degenerate>(cls).kind == DegenerateKind::CoincidentVertices) {
        // The repeated vertex carries two of the three unit weights.
        if (s.r12 <= s.r13 && s.r12 <= s.r23) return t[0];
        if (s.r13 <= s.r23) return t[0];
        return t[1];
    }
    // Collinear: the vertex opposite the longest side lies between the others.
    if (s.r23 >= s.r12 && s.r23 >= s.r13) return t[0];
    if (s.r13 >= s.r12) return t[1];
    return t[2];
}

}  // namespace ftexp
