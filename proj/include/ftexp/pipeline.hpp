#pragma once

// Command implementations behind the ftexp CLI. Every command returns a
// process exit code: 0 success, 1 numeric/internal failure, 2 input or
// validation failure.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ftexp/errors.hpp"
#include "ftexp/expfit.hpp"
#include "ftexp/geometry.hpp"
#include "ftexp/io.hpp"
#include "ftexp/series.hpp"

namespace ftexp {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitInput = 2 };

enum class LogLevel { Off, Warn, Debug };

// Diagnostics sink; verbosity comes from FT_EXPFIT_LOG (off|warn|debug).
class Diagnostics {
public:
    explicit Diagnostics(LogLevel level = LogLevel::Warn, std::ostream& sink = std::cerr)
        : level_(level), sink_(&sink) {}

    static LogLevel level_from_env() {
        const char* raw = std::getenv("FT_EXPFIT_LOG");
        if (raw == nullptr) return LogLevel::Warn;
        const std::string_view v(raw);
        if (v == "off") return LogLevel::Off;
        if (v == "debug") return LogLevel::Debug;
        return LogLevel::Warn;
    }

    void error(std::string_view msg) const { *sink_ << "error: " << msg << '\n'; }
    void warn(std::string_view msg) const {
        if (level_ != LogLevel::Off) *sink_ << "warning: " << msg << '\n';
    }
    void debug(std::string_view msg) const {
        if (level_ == LogLevel::Debug) *sink_ << "debug: " << msg << '\n';
    }

private:
    LogLevel level_;
    std::ostream* sink_;
};

struct GridSpec {
    double start = 0.0;
    double stop = 0.0;
    double step = 0.0;
};

// Parses START:STOP:STEP.
inline GridSpec parse_grid(std::string_view text) {
    std::vector<double> parts;
    std::size_t start = 0;
    while (true) {
        const auto colon = text.find(':', start);
        const auto piece = text.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start);
        try {
            parts.push_back(detail::parse_real(detail::trim(piece), 1));
        } catch (const ParseError&) {
            throw DomainError("grid must be START:STOP:STEP, got '" + std::string(text) + "'");
        }
        if (colon == std::string_view::npos) break;
        start = colon + 1;
    }
    if (parts.size() != 3) throw DomainError("grid must be START:STOP:STEP, got '" + std::string(text) + "'");
    const GridSpec g{parts[0], parts[1], parts[2]};
    if (!(g.step > 0.0)) throw DomainError("grid step must be positive");
    if (g.stop < g.start) throw DomainError("grid stop must not precede start");
    return g;
}

struct ExponentsFromFile {
    std::filesystem::path path;
};

using ExponentMode = std::variant<std::monostate, ExponentsFromFile, EstimateExponents>;

struct PipelineConfig {
    std::filesystem::path input_path;
    std::filesystem::path output_path;
    std::filesystem::path model_path;
    std::filesystem::path nodes_path;  // run: fit these nodes instead of the smoothed ones
    std::filesystem::path output_dir;  // run: destination of all artifacts
    ExponentMode exponent_mode;
    bool least_squares = false;
    std::optional<GridSpec> grid;
    double residual_tol = kDefaultResidualTol;
    double oracle_tol = 1e-9;
    double coefficient_tol = 1e-4;  // advisory only
    double year_offset = kYearOffset;
};

// Runs body, converting library errors into exit codes.
inline int guarded(const Diagnostics& diag, const std::function<int()>& body) {
    try {
        return body();
    } catch (const InputError& e) {
        diag.error(e.what());
        return kExitInput;
    } catch (const NumericError& e) {
        diag.error(e.what());
        return kExitFailure;
    } catch (const std::exception& e) {
        diag.error(std::string("internal error: ") + e.what());
        return kExitFailure;
    }
}

inline std::vector<Complex> load_exponents(const std::filesystem::path& path) {
    if (path.extension() == ".json") {
        std::vector<Complex> out;
        for (const ExpTerm& t : read_model(path).terms) out.push_back(t.exponent);
        return out;
    }
    return read_exponents_csv(path);
}

namespace detail {

inline SmoothedSeries smooth_to_file(const PipelineConfig& cfg, const std::filesystem::path& output,
                                     const Diagnostics& diag) {
    const TimeSeries series = read_series_csv(cfg.input_path, cfg.year_offset);
    SmoothedSeries smoothed = smooth(series);
    if (smoothed.monotonicity_warning) diag.warn("smoothed abscissae are not strictly increasing");
    write_text_file_atomic(output, smoothed_csv(smoothed));
    diag.debug("wrote " + std::to_string(smoothed.nodes.size()) + " smoothed nodes to " + output.string());
    return smoothed;
}

inline ExpModel fit_nodes(const std::vector<Point2>& nodes, const PipelineConfig& cfg, const Diagnostics& diag,
                          std::ostream& out) {
    std::vector<Complex> exponents;
    if (const auto* file = std::get_if<ExponentsFromFile>(&cfg.exponent_mode)) {
        exponents = load_exponents(file->path);
    } else if (const auto* est = std::get_if<EstimateExponents>(&cfg.exponent_mode)) {
        exponents = estimate_exponents(nodes, *est);
    } else {
        throw DomainError("fit needs --exponents or --estimate");
    }

    // The residual bound is applied below so it can be reported first.
    const ExpModel model = cfg.least_squares
                               ? fit_least_squares(nodes, exponents)
                               : solve_coefficients(nodes, exponents, std::numeric_limits<double>::infinity());
    for (const std::string& w : model.warnings) diag.warn(w);
    out << "fit_residual " << format_double(model.fit_residual) << '\n';
    if (!cfg.least_squares) {
        const double bound = cfg.residual_tol * std::max(1.0, max_abs_value(nodes));
        if (!(model.fit_residual <= bound)) {
            throw InterpolationError("interpolation residual " + format_double(model.fit_residual) +
                                         " exceeds tolerance " + format_double(bound),
                                     model.fit_residual);
        }
    }
    return model;
}

inline GridSpec default_grid(const ExpModel& model) {
    double lo = model.nodes.front().x;
    double hi = lo;
    for (const Point2& p : model.nodes) {
        lo = std::min(lo, p.x);
        hi = std::max(hi, p.x);
    }
    return {std::floor(lo), std::ceil(hi), 0.05};
}

inline void eval_to_file(const ExpModel& model, const GridSpec& grid, const std::filesystem::path& output,
                         const Diagnostics& diag) {
    const std::vector<GridPoint> points = evaluate_grid(model, grid.start, grid.stop, grid.step);
    write_text_file_atomic(output, grid_csv(points));
    double worst = 0.0;
    for (const GridPoint& g : points) worst = std::max(worst, g.imag_residual);
    diag.debug("max imag_residual on grid " + format_double(worst));
}

}  // namespace detail

inline int cmd_smooth(const PipelineConfig& cfg, const Diagnostics& diag) {
    return guarded(diag, [&] {
        detail::smooth_to_file(cfg, cfg.output_path, diag);
        return kExitOk;
    });
}

inline int cmd_fit(const PipelineConfig& cfg, const Diagnostics& diag, std::ostream& out = std::cout) {
    return guarded(diag, [&] {
        const std::vector<Point2> nodes = read_nodes_csv(cfg.input_path, cfg.year_offset);
        const ExpModel model = detail::fit_nodes(nodes, cfg, diag, out);
        write_model(cfg.output_path, ModelFile::from_model(model));
        return kExitOk;
    });
}

inline int cmd_eval(const PipelineConfig& cfg, const Diagnostics& diag) {
    return guarded(diag, [&] {
        const ExpModel model = read_model(cfg.model_path).to_model();
        if (model.terms.empty()) throw SchemaError("model has no terms");
        if (!cfg.grid && model.nodes.empty()) throw DomainError("eval needs --grid for a model without nodes");
        detail::eval_to_file(model, cfg.grid ? *cfg.grid : detail::default_grid(model), cfg.output_path, diag);
        return kExitOk;
    });
}

// smooth -> fit -> eval. Writes smoothed.csv, model.json and grid.csv into
// output_dir.
inline int cmd_run(const PipelineConfig& cfg, const Diagnostics& diag, std::ostream& out = std::cout) {
    return guarded(diag, [&] {
        std::error_code ec;
        std::filesystem::create_directories(cfg.output_dir, ec);
        if (ec) throw IoError("cannot create output directory " + cfg.output_dir.string());

        const SmoothedSeries smoothed = detail::smooth_to_file(cfg, cfg.output_dir / "smoothed.csv", diag);
        const std::vector<Point2> nodes =
            cfg.nodes_path.empty() ? smoothed.nodes : read_nodes_csv(cfg.nodes_path, cfg.year_offset);
        const ExpModel model = detail::fit_nodes(nodes, cfg, diag, out);
        write_model(cfg.output_dir / "model.json", ModelFile::from_model(model));
        detail::eval_to_file(model, cfg.grid ? *cfg.grid : detail::default_grid(model),
                             cfg.output_dir / "grid.csv", diag);
        out << "wrote " << (cfg.output_dir / "smoothed.csv").string() << ", "
            << (cfg.output_dir / "model.json").string() << ", " << (cfg.output_dir / "grid.csv").string() << '\n';
        return kExitOk;
    });
}

// Bundled fixture names inside the data directory.
struct BundledFixtures {
    std::filesystem::path series = "czech_inflation.csv";
    std::filesystem::path nine = "table2_nine.csv";
    std::filesystem::path ten = "table2_ten.csv";
    std::filesystem::path model = "eq2_model.json";
};

inline constexpr double kNodeTolerance = 1e-6;

// Largest per-component deviation of a coefficient, relative to the modulus
// of the printed value.
inline double coefficient_relative_error(Complex got, Complex printed) {
    const double scale = std::abs(printed);
    const double err = std::max(std::abs(got.real() - printed.real()), std::abs(got.imag() - printed.imag()));
    return scale > 0.0 ? err / scale : err;
}

// Whether p lies in the closed triangle (barycentric coordinates >= -slack).
inline bool in_triangle(const Triangle& t, Point2 p, double slack = 1e-9) {
    const double area = signed_area_2x(t);
    if (area == 0.0) return false;
    const double w0 = signed_area_2x(Triangle{{p, t[1], t[2]}}) / area;
    const double w1 = signed_area_2x(Triangle{{t[0], p, t[2]}}) / area;
    const double w2 = 1.0 - w0 - w1;
    return w0 >= -slack && w1 >= -slack && w2 >= -slack;
}

inline int cmd_verify_paper(const std::filesystem::path& data_dir, const PipelineConfig& cfg,
                            const Diagnostics& diag, std::ostream& out = std::cout) {
    return guarded(diag, [&]() -> int {
        const BundledFixtures fx;
        bool ok = true;
        auto check = [&](bool pass, const std::string& label) {
            out << (pass ? "PASS " : "FAIL ") << label << '\n';
            ok = ok && pass;
        };

        // (a) smoothing reproduces the nine derivable nodes.
        const TimeSeries series = read_series_csv(data_dir / fx.series);
        const std::vector<Point2> nine = read_nodes_csv(data_dir / fx.nine);
        const SmoothedSeries smoothed = smooth(series);
        check(smoothed.nodes.size() == nine.size(), "smoothed node count " + std::to_string(smoothed.nodes.size()) +
                                                       " == table2_nine rows " + std::to_string(nine.size()));
        const std::vector<Triangle> windows = sliding_triangles(series);
        for (std::size_t k = 0; k < std::min(nine.size(), smoothed.nodes.size()); ++k) {
            const Point2 got = smoothed.nodes[k];
            const double err = std::max(std::abs(got.x - nine[k].x), std::abs(got.y - nine[k].y));
            check(err <= kNodeTolerance, "table2_nine row " + std::to_string(k + 1) + ": smoothed (" +
                                             format_double(got.x) + ", " + format_double(got.y) + ") vs (" +
                                             format_double(nine[k].x) + ", " + format_double(nine[k].y) +
                                             "), error " + format_double(err));
            if (std::holds_alternative<InteriorCase>(classify(windows[k]))) {
                const Point2 oracle = weiszfeld(windows[k]);
                const double gap = std::max(std::abs(oracle.x - got.x), std::abs(oracle.y - got.y));
                check(gap <= cfg.oracle_tol, "row " + std::to_string(k + 1) +
                                                 " closed form vs Weiszfeld, gap " + format_double(gap));
            }
        }

        // (b) the exponential model.
        const std::vector<Point2> ten = read_nodes_csv(data_dir / fx.ten);
        const ExpModel printed = read_model(data_dir / fx.model).to_model();
        std::vector<Complex> exponents;
        for (const ExpTerm& t : printed.terms) exponents.push_back(t.exponent);
        check(negation_closed(exponents) && conjugate_closed(exponents),
              "model exponents closed under negation and conjugation");
        for (std::size_t i = 0; i < ten.size(); ++i) {
            const double err = std::abs(evaluate(printed, ten[i].x).value - ten[i].y);
            check(err <= kNodeTolerance, "printed model at table2_ten row " + std::to_string(i + 1) + " (t = " +
                                             format_double(ten[i].x) + "), error " + format_double(err));
        }

        const ExpModel recovered = solve_coefficients(ten, exponents, cfg.residual_tol);
        for (const std::string& w : recovered.warnings) diag.warn(w);
        for (std::size_t i = 0; i < ten.size(); ++i) {
            const double err = std::abs(evaluate(recovered, ten[i].x).value - ten[i].y);
            check(err <= kNodeTolerance, "recovered model at table2_ten row " + std::to_string(i + 1) +
                                             ", error " + format_double(err));
        }
        double worst_rel = 0.0;
        for (std::size_t j = 0; j < printed.terms.size(); ++j) {
            const double rel =
                coefficient_relative_error(recovered.terms[j].coefficient, printed.terms[j].coefficient);
            worst_rel = std::max(worst_rel, rel);
            if (rel > cfg.coefficient_tol) {
                out << "WARN coefficient " << j + 1 << " differs from the printed value by " << format_double(rel)
                    << " relative (advisory)\n";
                diag.warn("coefficient " + std::to_string(j + 1) + " mismatch is advisory only");
            }
        }
        out << "INFO worst coefficient relative deviation " << format_double(worst_rel) << " (advisory limit "
            << format_double(cfg.coefficient_tol) << ")\n";

        // (c) known discrepancies in the printed node table.
        out << "NOTE table2_ten lists " << ten.size() << " nodes; sliding triples over " << series.size()
            << " samples give " << smoothed.nodes.size() << '\n';
        for (std::size_t i = 0; i < ten.size(); ++i) {
            const bool derived = std::any_of(smoothed.nodes.begin(), smoothed.nodes.end(), [&](Point2 p) {
                return std::abs(p.x - ten[i].x) <= kNodeTolerance && std::abs(p.y - ten[i].y) <= kNodeTolerance;
            });
            if (derived) continue;
            out << "NOTE table2_ten row " << i + 1 << " (" << format_double(ten[i].x) << ", "
                << format_double(ten[i].y) << ") is not produced by smoothing";
            if (!windows.empty() && !in_triangle(windows.back(), ten[i])) out << " and lies outside the last window";
            out << '\n';
        }

        out << (ok ? "verify-paper: all binding checks passed\n" : "verify-paper: FAILED\n");
        return ok ? kExitOk : kExitFailure;
    });
}

}  // namespace ftexp
