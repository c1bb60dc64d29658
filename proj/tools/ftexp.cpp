// ftexp: Fermat-Torricelli smoothing and exponential-sum interpolation.
//
//   ftexp smooth --input series.csv --output nodes.csv
//   ftexp fit --input nodes.csv --output model.json (--exponents F | --estimate M [--symmetrize] [--resample N])
//   ftexp eval --model model.json --grid START:STOP:STEP --output grid.csv
//   ftexp run --input series.csv --output-dir DIR (--exponents F | --estimate M ...) [--nodes F] [--grid ...]
//   ftexp verify-paper [--data-dir DIR]

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ftexp/pipeline.hpp"

#ifndef FTEXP_DATA_DIR
#define FTEXP_DATA_DIR "data"
#endif

namespace {

struct FitOptions {
    std::string exponents;
    std::size_t estimate = 0;
    bool symmetrize = false;
    std::size_t resample = 0;
    bool least_squares = false;
};

void add_fit_options(CLI::App* cmd, FitOptions& fo) {
    auto* exps = cmd->add_option("--exponents", fo.exponents, "exponent file (model JSON or CSV with re,im)");
    auto* est = cmd->add_option("--estimate", fo.estimate, "estimate M exponents from the nodes");
    exps->excludes(est);
    cmd->add_flag("--symmetrize", fo.symmetrize, "estimate M/2 exponents and add their negations")->needs(est);
    cmd->add_option("--resample", fo.resample, "uniform resampling size for estimation (default max(4M, 32))")
        ->needs(est);
    cmd->add_flag("--least-squares", fo.least_squares, "allow fewer exponents than nodes (no exact interpolation)");
}

void apply_fit_options(const FitOptions& fo, ftexp::PipelineConfig& cfg) {
    if (!fo.exponents.empty()) {
        cfg.exponent_mode = ftexp::ExponentsFromFile{fo.exponents};
    } else if (fo.estimate > 0) {
        cfg.exponent_mode = ftexp::EstimateExponents{fo.estimate, fo.symmetrize, fo.resample};
    }
    cfg.least_squares = fo.least_squares;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fermat-Torricelli smoothing and exponential-sum interpolation of time series"};
    app.require_subcommand(1);
    app.fallthrough();

    ftexp::PipelineConfig cfg;
    FitOptions fo;
    std::string grid_text;
    std::string data_dir = FTEXP_DATA_DIR;

    app.add_option("--tol", cfg.residual_tol, "relative interpolation residual tolerance")
        ->check(CLI::PositiveNumber);
    app.add_option("--year-offset", cfg.year_offset, "calendar year of t = 0 for year,value input");

    auto* smooth = app.add_subcommand("smooth", "smooth a t,value series by sliding Fermat-Torricelli points");
    smooth->add_option("--input", cfg.input_path)->required();
    smooth->add_option("--output", cfg.output_path)->required();

    auto* fit = app.add_subcommand("fit", "interpolate nodes by a sum of complex exponentials");
    fit->add_option("--input", cfg.input_path)->required();
    fit->add_option("--output", cfg.output_path)->required();
    add_fit_options(fit, fo);

    auto* eval = app.add_subcommand("eval", "evaluate a model on a grid");
    eval->add_option("--model", cfg.model_path)->required();
    eval->add_option("--grid", grid_text, "START:STOP:STEP")->required();
    eval->add_option("--output", cfg.output_path)->required();

    auto* run = app.add_subcommand("run", "smooth, fit and evaluate in one go");
    run->add_option("--input", cfg.input_path)->required();
    run->add_option("--output-dir", cfg.output_dir)->required();
    run->add_option("--nodes", cfg.nodes_path, "fit these nodes instead of the smoothed ones");
    run->add_option("--grid", grid_text, "START:STOP:STEP");
    add_fit_options(run, fo);

    auto* verify = app.add_subcommand("verify-paper", "check the bundled inflation fixtures end to end");
    verify->add_option("--data-dir", data_dir, "fixture directory");
    verify->add_option("--coef-tol", cfg.coefficient_tol, "advisory relative coefficient tolerance")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return ftexp::kExitInput;
    }

    const ftexp::Diagnostics diag(ftexp::Diagnostics::level_from_env());
    if (!grid_text.empty()) {
        try {
            cfg.grid = ftexp::parse_grid(grid_text);
        } catch (const ftexp::Error& e) {
            diag.error(e.what());
            return ftexp::kExitInput;
        }
    }
    apply_fit_options(fo, cfg);

    if (smooth->parsed()) return ftexp::cmd_smooth(cfg, diag);
    if (fit->parsed()) return ftexp::cmd_fit(cfg, diag);
    if (eval->parsed()) return ftexp::cmd_eval(cfg, diag);
    if (run->parsed()) return ftexp::cmd_run(cfg, diag);
    return ftexp::cmd_verify_paper(data_dir, cfg, diag);
}
