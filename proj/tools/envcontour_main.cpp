#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "envcontour/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"environmental contours via Voronoi cells"};
    app.require_subcommand(1);

    envc::RunConfig cfg;

    CLI::App* contour = app.add_subcommand("contour", "construct a contour for a model config");
    contour->add_option("--config", cfg.config_path, "model JSON (path or preset name)")
        ->required();
    contour->add_option("--pe", cfg.pe, "target exceedance probability in (0, 0.5)");
    contour->add_option("--directions", cfg.directions, "grid2d:M | uniform:M:seed | file:PATH");
    contour->add_option("--n", cfg.n, "Monte Carlo sample count");
    contour->add_option("--seed", cfg.seed, "RNG seed");
    contour->add_option("--origin", cfg.origin, "median | lp | x,y[,z]");
    contour->add_option("--out", cfg.out_dir, "output directory");
    contour->add_flag("--corrected", cfg.corrected, "also emit the corrected contour");
    contour->add_flag("--analytic", cfg.analytic, "emit the parametric contour of the fitted field");
    contour->add_flag("--direct-baseline", cfg.direct_baseline,
                      "emit the direct tangent-intersection baseline (2D)");
    contour->add_option("--conservative", cfg.conservative, "bump the order-statistic rank by k");
    contour->add_option("--bootstrap", cfg.bootstrap, "bootstrap resamples for spread diagnostic");
    contour->add_option("--tol", cfg.tol, "validity tolerance (default 1e-6 * diameter)");
    contour->add_option("--refine-rounds", cfg.refine_rounds,
                        "re-estimation rounds for disconnected directions");
    contour->add_option("--scan-res", cfg.scan_res, "grid resolution per angle for --analytic");
    contour->add_option("--harmonic-degree", cfg.harmonic_degree, "3D field fit degree");

    CLI::App* exist = app.add_subcommand("existence", "existence diagnostics for a model config");
    exist->add_option("--config", cfg.config_path, "model JSON (path or preset name)")->required();
    exist->add_option("--pe", cfg.pe, "target exceedance probability in (0, 0.5)");
    exist->add_option("--n", cfg.n, "samples for the field estimate (non-Gaussian models)");
    exist->add_option("--seed", cfg.seed, "RNG seed");
    exist->add_option("--out", cfg.out_dir, "output directory");
    exist->add_option("--scan-res", cfg.scan_res, "grid resolution per angle (>= 90 per angle)");
    exist->add_option("--harmonic-degree", cfg.harmonic_degree, "3D field fit degree");

    std::string study;
    std::string rep_out = "out";
    CLI::App* rep = app.add_subcommand("reproduce", "run a bundled example study");
    rep->add_option("study", study, "fig6-grid | fig7 | fig9")->required();
    rep->add_option("--out", rep_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (contour->parsed()) return envc::cmd_contour(cfg);
        if (exist->parsed()) return envc::cmd_existence(cfg);
        if (rep->parsed()) return envc::cmd_reproduce(study, rep_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
