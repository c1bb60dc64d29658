#pragma once

// Time series validation and Fermat-Torricelli smoothing over sliding
// triples of consecutive samples.

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "ftexp/errors.hpp"
#include "ftexp/geometry.hpp"

namespace ftexp {

struct Sample {
    double t = 0.0;
    double value = 0.0;
    friend constexpr bool operator==(Sample, Sample) = default;
};

// Samples with strictly increasing, finite abscissae and finite values.
class TimeSeries {
public:
    const std::vector<Sample>& samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }
    const Sample& operator[](std::size_t i) const { return samples_[i]; }
    Point2 point(std::size_t i) const { return {samples_[i].t, samples_[i].value}; }

private:
    explicit TimeSeries(std::vector<Sample> samples) : samples_(std::move(samples)) {}
    friend TimeSeries validate(std::vector<Sample> samples);

    std::vector<Sample> samples_;
};

inline TimeSeries validate(std::vector<Sample> samples) {
    if (samples.empty()) throw ValidationError(0, "series is empty");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i].t) || !std::isfinite(samples[i].value)) {
            throw ValidationError(i, "non-finite entry");
        }
        if (i > 0 && !(samples[i].t > samples[i - 1].t)) {
            throw ValidationError(i, "abscissa not strictly increasing");
        }
    }
    return TimeSeries(std::move(samples));
}

// Year numbers count from 2010, so year 2011 is t = 1.
inline constexpr double kYearOffset = 2010.0;

inline double year_to_t(double year, double offset = kYearOffset) { return year - offset; }
inline double t_to_year(double t, double offset = kYearOffset) { return t + offset; }

inline std::vector<Triangle> sliding_triangles(const TimeSeries& s) {
    if (s.size() < 3) throw TooShortError("smoothing needs at least 3 samples");
    std::vector<Triangle> out;
    out.reserve(s.size() - 2);
    for (std::size_t k = 0; k + 2 < s.size(); ++k) {
        out.push_back(Triangle{{s.point(k), s.point(k + 1), s.point(k + 2)}});
    }
    return out;
}

struct SmoothedSeries {
    std::vector<Point2> nodes;
    // Inclusive sample index range that produced each node.
    std::vector<std::pair<std::size_t, std::size_t>> source_window;
    // Set when two consecutive nodes have non-increasing abscissae.
    bool monotonicity_warning = false;
};

inline SmoothedSeries smooth(const TimeSeries& s, double angle_tol = kDefaultAngleTol) {
    const std::vector<Triangle> windows = sliding_triangles(s);
    SmoothedSeries out;
    out.nodes.reserve(windows.size());
    out.source_window.reserve(windows.size());
    for (std::size_t k = 0; k < windows.size(); ++k) {
        out.nodes.push_back(fermat_point(windows[k], angle_tol));
        out.source_window.emplace_back(k, k + 2);
        if (k > 0 && !(out.nodes[k].x > out.nodes[k - 1].x)) out.monotonicity_warning = true;
    }
    return out;
}

}  // namespace ftexp
