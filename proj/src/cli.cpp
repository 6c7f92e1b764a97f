#include "envcontour/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "envcontour/analytic.hpp"
#include "envcontour/contour.hpp"
#include "envcontour/errors.hpp"
#include "envcontour/io.hpp"
#include "envcontour/model.hpp"

namespace envc {

namespace fs = std::filesystem;
using nlohmann::json;

std::string resolve_config(const std::string& name) {
    if (fs::exists(name)) return name;
    const fs::path preset = fs::path(ENVC_PRESET_DIR) / name;
    if (fs::exists(preset)) return preset.string();
    const fs::path preset_json = fs::path(ENVC_PRESET_DIR) / (name + ".json");
    if (fs::exists(preset_json)) return preset_json.string();
    throw std::invalid_argument("config not found: " + name +
                                " (also looked in " ENVC_PRESET_DIR ")");
}

std::vector<Vec> make_directions(const std::string& spec, int dim) {
    std::stringstream ss(spec);
    std::string head;
    std::getline(ss, head, ':');
    if (head == "grid2d") {
        if (dim != 2) throw std::invalid_argument("directions grid2d requires a 2D model");
        std::string ms;
        std::getline(ss, ms, ':');
        return grid_directions_2d(std::stoi(ms));
    }
    if (head == "uniform") {
        std::string ms, seeds;
        std::getline(ss, ms, ':');
        std::getline(ss, seeds, ':');
        const std::uint64_t seed = seeds.empty() ? 1 : std::stoull(seeds);
        return sample_directions_uniform(std::stoi(ms), dim, seed);
    }
    if (head == "file") {
        std::string path;
        std::getline(ss, path);
        auto dirs = directions_from_csv(path);
        if (static_cast<int>(dirs[0].size()) != dim)
            throw std::invalid_argument("direction file dimension mismatch");
        return dirs;
    }
    throw std::invalid_argument("unknown direction spec: " + spec +
                                " (expected grid2d:M, uniform:M:seed, or file:PATH)");
}

namespace {

Vec parse_point(const std::string& s) {
    Vec p;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) p.push_back(std::stod(cell));
    return p;
}

std::vector<Vec> polygon_2d(const Polytope& poly) {
    std::vector<Vec> ring;
    for (int i : polygon_order_2d(poly)) ring.push_back(poly.vertices[i]);
    return ring;
}

json connectivity_json(const ConnectivityReport& conn) {
    json j;
    j["all_connected"] = conn.all_connected();
    j["disconnected"] = conn.offending;
    json deg = json::array();
    for (size_t i = 0; i < conn.degenerate_position.size(); ++i)
        if (conn.degenerate_position[i]) deg.push_back(i);
    j["degenerate_position"] = deg;
    j["any_degenerate"] = conn.any_degenerate;
    return j;
}

json validity_json(const ValidityReport& rep) {
    json j;
    j["classification"] = to_string(rep.classification);
    j["max_gap"] = rep.max_gap;
    j["min_gap"] = rep.min_gap;
    j["tol"] = rep.tol;
    j["gaps"] = rep.gaps;
    return j;
}

struct ContourRun {
    JointModel model;
    ContourResult result;
    ValidityReport validity;
    Polytope corrected;
    ValidityReport corrected_validity;
    bool has_corrected = false;
    std::unique_ptr<DirectContour2D> direct;
};

void write_2d_svg(const fs::path& out, const RunConfig& cfg, const ContourRun& run) {
    const Polytope& cell = run.result.cell;
    std::vector<Vec> cell_ring = polygon_2d(cell);
    double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
    for (const Vec& v : cell_ring) {
        lo_x = std::min(lo_x, v[0]);
        hi_x = std::max(hi_x, v[0]);
        lo_y = std::min(lo_y, v[1]);
        hi_y = std::max(hi_y, v[1]);
    }
    SvgPlot plot(lo_x - 0.12 * (hi_x - lo_x), hi_x + 0.12 * (hi_x - lo_x),
                 lo_y - 0.12 * (hi_y - lo_y), hi_y + 0.12 * (hi_y - lo_y));

    // grey samples: leading rows of the same deterministic stream
    const SampleSet head = sample(run.model, std::min<std::int64_t>(cfg.n, 4000), cfg.seed);
    std::vector<Vec> pts(head.n, Vec(2));
    for (std::int64_t i = 0; i < head.n; ++i) {
        pts[i][0] = head.row(i)[0];
        pts[i][1] = head.row(i)[1];
    }
    plot.add_points(pts, "#c0c0c0", 1.2);

    if (run.direct) {
        plot.add_polyline(run.direct->points, true, "black", 1.2);
        Polytope dh = convex_hull(run.direct->points);
        plot.add_polyline(polygon_2d(dh), true, "red", 1.2);
    }
    if (run.has_corrected) {
        std::vector<Vec> corr_ring = polygon_2d(run.corrected);
        plot.add_band(corr_ring, cell_ring, "#4060ff", 0.35);
        plot.add_polyline(corr_ring, true, "#2030c0", 1.4);
    }
    plot.add_polyline(cell_ring, true, "#4060ff", 1.6);
    plot.add_text(12, 18, "status: " + std::string(to_string(run.result.status)));
    write_text_atomic((out / "contour.svg").string(), plot.finish());
}

ContourRun run_contour(const RunConfig& cfg) {
    ContourRun run;
    run.model = model_from_json_file(resolve_config(cfg.config_path));
    const int dim = run.model.dim();
    const std::vector<Vec> dirs = make_directions(cfg.directions, dim);

    ContourOptions opts;
    opts.refine_rounds = cfg.refine_rounds;
    opts.estimate.conservative_k = cfg.conservative;
    opts.estimate.bootstrap_resamples = cfg.bootstrap;
    if (cfg.origin == "median" || cfg.origin == "lp") {
        opts.origin_strategy = cfg.origin;
    } else {
        opts.origin_strategy = "explicit";
        opts.origin_explicit = parse_point(cfg.origin);
    }

    run.result = voronoi_contour(run.model, cfg.pe, dirs, cfg.n, cfg.seed, opts);
    const double tol = cfg.tol > 0.0 ? cfg.tol : 1e-6 * run.result.cell.diameter();
    run.validity = validate_contour(run.result.cell, run.result.table, tol);

    if (cfg.corrected || run.result.status != ContourResult::Status::proper_candidate) {
        run.corrected = corrected_contour(run.result);
        run.corrected_validity = validate_contour(run.corrected, run.result.table, tol);
        run.has_corrected = true;
    }
    if (cfg.direct_baseline && dim == 2)
        run.direct = std::make_unique<DirectContour2D>(direct_contour_2d(run.result.table));
    return run;
}

void write_artifacts(const RunConfig& cfg, const ContourRun& run) {
    const ContourResult& res = run.result;
    const int dim = run.model.dim();
    const fs::path out(cfg.out_dir);
    fs::create_directories(out);

    write_table_csv(res.table, (out / "table.csv").string());
    write_table_meta_json(res.table, (out / "table_meta.json").string());
    write_text_atomic((out / "contour_vertices.csv").string(), polytope_vertices_csv(res.cell));
    write_text_atomic((out / "contour_facets.json").string(), polytope_facets_json(res.cell));
    write_text_atomic((out / "validity.json").string(), validity_json(run.validity).dump(2) + "\n");

    if (run.has_corrected) {
        write_text_atomic((out / "corrected_vertices.csv").string(),
                          polytope_vertices_csv(run.corrected));
        write_text_atomic((out / "corrected_validity.json").string(),
                          validity_json(run.corrected_validity).dump(2) + "\n");
        if (dim == 3)
            write_text_atomic((out / "corrected.obj").string(), polytope_obj(run.corrected));
    }

    if (run.direct) {
        std::string csv = "x_1,x_2\n";
        for (const Vec& p : run.direct->points) {
            char buf[80];
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p[0], p[1]);
            csv += buf;
        }
        write_text_atomic((out / "direct.csv").string(), csv);
    }

    json report;
    report["status"] = to_string(res.status);
    report["origin"] = res.origin;
    report["origin_strategy"] = res.origin_strategy;
    report["connectivity"] = connectivity_json(res.connectivity);
    report["validity"] = to_string(run.validity.classification);
    report["max_gap"] = run.validity.max_gap;
    report["refined_directions"] = res.refined_directions;
    report["refinement_rounds"] = res.refinement_rounds;
    if (run.direct) {
        report["direct_loop_pairs"] = run.direct->loop_pairs.size();
        report["direct_has_loops"] = run.direct->has_loops();
    }
    if (run.has_corrected)
        report["corrected_validity"] = to_string(run.corrected_validity.classification);
    json echo;
    echo["pe"] = cfg.pe;
    echo["n"] = cfg.n;
    echo["seed"] = cfg.seed;
    echo["directions"] = cfg.directions;
    echo["config"] = cfg.config_path;
    report["config"] = echo;

    if (cfg.analytic) {
        const auto field = interpolate_field(res.table, cfg.harmonic_degree);
        const auto chart = SphericalChart::standard(dim);
        const int res_grid = cfg.scan_res > 0 ? cfg.scan_res : (dim == 2 ? 360 : 90);
        const ParametricContour pc = evaluate_contour(chart, *field, res_grid);
        std::string csv;
        for (int a = 0; a < dim - 1; ++a) csv += "theta_" + std::to_string(a) + ",";
        for (int k = 0; k < dim; ++k)
            csv += "b_" + std::to_string(k + 1) + (k + 1 < dim ? "," : "\n");
        for (size_t i = 0; i < pc.points.size(); ++i) {
            char buf[64];
            for (int a = 0; a < dim - 1; ++a) {
                std::snprintf(buf, sizeof buf, "%.17g,", pc.thetas[i][a]);
                csv += buf;
            }
            for (int k = 0; k < dim; ++k) {
                std::snprintf(buf, sizeof buf, "%.17g%s", pc.points[i][k], k + 1 < dim ? "," : "\n");
                csv += buf;
            }
        }
        write_text_atomic((out / "analytic_points.csv").string(), csv);
    }

    if (dim == 2) write_2d_svg(out, cfg, run);
    if (dim == 3) write_text_atomic((out / "cell.obj").string(), polytope_obj(res.cell));

    const SampleSet head = sample(run.model, std::min<std::int64_t>(cfg.n, 5000), cfg.seed);
    write_samples_csv(head, variable_names(run.model), (out / "samples_head.csv").string());

    write_text_atomic((out / "contour.json").string(), report.dump(2) + "\n");
}

// Field for existence diagnostics: Gaussian closed form when available,
// otherwise a smooth interpolant of an estimated dense table.
std::unique_ptr<PercentileField> existence_field(const JointModel& model, const RunConfig& cfg) {
    if (const auto* mvn = std::get_if<MultivariateNormal>(&model.spec))
        return std::make_unique<GaussianField>(mvn->mean, mvn->cov, cfg.pe);
    const int dim = model.dim();
    std::vector<Vec> dirs = dim == 2 ? grid_directions_2d(720)
                                     : sample_directions_uniform(2000, dim, cfg.seed ^ 0xD1A0ULL);
    const SampleSet samples = sample(model, cfg.n, cfg.seed);
    const PercentileTable table = estimate_table(samples, dirs, cfg.pe);
    return interpolate_field(table, cfg.harmonic_degree);
}

}  // namespace

int cmd_contour(const RunConfig& cfg) {
    const ContourRun run = run_contour(cfg);
    if (run.result.table.low_tail_warning)
        std::fprintf(stderr, "warning: effective tail count n*pe < 20; estimates are coarse\n");
    write_artifacts(cfg, run);
    if (!run.result.connectivity.all_connected()) {
        std::fprintf(stderr, "disconnected directions:");
        for (int j : run.result.connectivity.offending) std::fprintf(stderr, " %d", j);
        std::fprintf(stderr, "\n");
    }
    return run.result.status == ContourResult::Status::proper_candidate ? 0 : 2;
}

int cmd_existence(const RunConfig& cfg) {
    JointModel model = model_from_json_file(resolve_config(cfg.config_path));
    const int dim = model.dim();
    if (dim < 2 || dim > 3)
        throw std::invalid_argument("cmd_existence: supported for 2D and 3D models");

    const auto field = existence_field(model, cfg);
    const auto atlas = SphericalChart::atlas(dim);
    const int res = cfg.scan_res > 0 ? cfg.scan_res : (dim == 2 ? 360 : 90);
    const ExistenceScan scan = existence_scan(atlas, *field, res);
    const HessianScan hess = hessian_scan(atlas, *field, res);

    json j;
    j["verdict"] = to_string(scan.verdict);
    j["kappa_min"] = scan.min_kappa;
    j["argmin_theta"] = scan.argmin_th;
    j["argmin_theta_prime"] = scan.argmin_th_prime;
    j["argmin_chart"] = scan.argmin_chart;
    j["argmin_on_diagonal"] = scan.argmin_on_diagonal;
    j["scale"] = scan.scale;
    j["hessian_min_eig"] = hess.min_eig;
    j["hessian_argmin_theta"] = hess.argmin_th;
    j["hessian_argmin_chart"] = hess.argmin_chart;
    j["grid_resolution"] = res;
    // A failed Hessian condition disproves existence; a passing one is
    // inconclusive and defers to the scan.
    const double tol = 1e-9 * std::max(1.0, scan.scale);
    const bool hess_fails = hess.min_eig < -tol;
    const Verdict combined = hess_fails ? Verdict::fails : scan.verdict;
    j["combined_verdict"] = to_string(combined);
    // Hessian failure alongside scan success would contradict the necessity of
    // the Hessian condition; surface it rather than hiding it.
    j["inconsistent"] = hess_fails && (scan.verdict == Verdict::admits);

    const fs::path out(cfg.out_dir);
    fs::create_directories(out);
    write_text_atomic((out / "existence.json").string(), j.dump(2) + "\n");
    std::printf("verdict: %s (kappa_min = %.6g, hessian_min_eig = %.6g)\n",
                j["combined_verdict"].get<std::string>().c_str(), j["kappa_min"].get<double>(),
                j["hessian_min_eig"].get<double>());
    return combined == Verdict::fails ? 2 : 0;
}

namespace {

void reproduce_fig6_grid(const fs::path& root) {
    const std::vector<std::int64_t> sizes{10000, 100000, 1000000};
    const std::vector<int> mcounts{90, 360, 1440};
    std::string summary = "n,M,loop_pairs,simple_max_gap,corrected_max_gap,band_max\n";
    for (size_t r = 0; r < sizes.size(); ++r) {
        for (int m : mcounts) {
            RunConfig cfg;
            cfg.config_path = "table1_2d";
            cfg.pe = 0.05;
            cfg.n = sizes[r];
            cfg.seed = 1000 + r;  // identical samples within a row
            cfg.directions = "grid2d:" + std::to_string(m);
            cfg.corrected = true;
            cfg.direct_baseline = true;
            cfg.out_dir =
                (root / ("n" + std::to_string(sizes[r]) + "_M" + std::to_string(m))).string();
            const ContourRun run = run_contour(cfg);
            write_artifacts(cfg, run);

            double band = 0.0;
            for (size_t jj = 0; jj < run.result.table.size(); ++jj)
                band = std::max(band,
                                run.corrected.support(run.result.table.directions[jj]) -
                                    run.result.cell.support(run.result.table.directions[jj]));
            char buf[160];
            std::snprintf(buf, sizeof buf, "%lld,%d,%zu,%.6g,%.6g,%.6g\n",
                          static_cast<long long>(sizes[r]), m, run.direct->loop_pairs.size(),
                          run.validity.max_gap, run.corrected_validity.max_gap, band);
            summary += buf;
        }
    }
    write_text_atomic((root / "summary.csv").string(), summary);
}

void reproduce_fig7(const fs::path& root) {
    const std::vector<std::int64_t> sizes{10000, 100000, 1000000};
    std::string summary = "model,n,loop_pairs\n";
    for (const char* which : {"ellipse2d", "fig7_mixture"}) {
        for (size_t r = 0; r < sizes.size(); ++r) {
            RunConfig cfg;
            cfg.config_path = which;
            cfg.pe = 0.15;
            cfg.n = sizes[r];
            cfg.seed = 2000 + r;
            cfg.directions = "grid2d:90";
            cfg.corrected = true;
            cfg.direct_baseline = true;
            cfg.out_dir = (root / (std::string(which) + "_n" + std::to_string(sizes[r]))).string();
            const ContourRun run = run_contour(cfg);
            write_artifacts(cfg, run);
            char buf[96];
            std::snprintf(buf, sizeof buf, "%s,%lld,%zu\n", which,
                          static_cast<long long>(sizes[r]), run.direct->loop_pairs.size());
            summary += buf;
        }
    }
    write_text_atomic((root / "summary.csv").string(), summary);
}

void reproduce_fig9(const fs::path& root) {
    RunConfig cfg;
    cfg.config_path = "table2_3d";
    cfg.pe = 0.1;
    cfg.n = 1000000;
    cfg.seed = 7;
    cfg.directions = "uniform:2000:7";
    cfg.corrected = true;
    cfg.out_dir = root.string();
    const ContourRun run = run_contour(cfg);
    write_artifacts(cfg, run);

    // difference mesh: per-direction support gap between corrected and simple
    // contours, drawn over the direction-sphere triangulation
    Polytope sphere = convex_hull(run.result.table.directions);
    Polytope diff = sphere;
    double max_gap = 0.0;
    for (size_t i = 0; i < sphere.vertices.size(); ++i) {
        const double g = run.corrected.support(sphere.vertices[i]) -
                         run.result.cell.support(sphere.vertices[i]);
        max_gap = std::max(max_gap, g);
        for (int k = 0; k < 3; ++k) diff.vertices[i][k] = sphere.vertices[i][k] * g;
    }
    write_text_atomic((root / "difference.obj").string(), polytope_obj(diff));
    json j;
    j["max_support_gap"] = max_gap;
    write_text_atomic((root / "difference.json").string(), j.dump(2) + "\n");
}

}  // namespace

int cmd_reproduce(const std::string& study, const std::string& out_dir) {
    const fs::path root = fs::path(out_dir) / study;
    fs::create_directories(root);
    if (study == "fig6-grid") reproduce_fig6_grid(root);
    else if (study == "fig7") reproduce_fig7(root);
    else if (study == "fig9") reproduce_fig9(root);
    else
        throw std::invalid_argument("unknown study: " + study +
                                    " (expected fig6-grid, fig7, or fig9)");
    return 0;
}

}  // namespace envc
