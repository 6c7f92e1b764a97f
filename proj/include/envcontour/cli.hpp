#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "envcontour/linalg.hpp"

namespace envc {

struct RunConfig {
    std::string config_path;                 // model JSON (path or preset name)
    double pe = 0.05;
    std::string directions = "grid2d:360";   // grid2d:M | uniform:M:seed | file:PATH
    std::int64_t n = 100000;
    std::uint64_t seed = 1;
    std::string origin = "median";           // median | lp | "x,y[,z]"
    std::string out_dir = "out";
    bool corrected = false;
    bool analytic = false;
    bool direct_baseline = false;
    int conservative = 0;
    int bootstrap = 0;
    int scan_res = 0;      // 0: 360 in 2D, 90 per angle in 3D
    int harmonic_degree = 12;
    double tol = 0.0;      // validity tolerance; 0 means 1e-6 * contour diameter
    int refine_rounds = 3;
};

// Resolves a model config: plain path first, then the bundled preset directory.
std::string resolve_config(const std::string& name);

std::vector<Vec> make_directions(const std::string& spec, int dim);

// exit status: 0 proper-candidate, 2 invalid (corrected artifacts still written), 1 error
int cmd_contour(const RunConfig& cfg);

// exit status: 0 admits/marginal, 2 fails, 1 error
int cmd_existence(const RunConfig& cfg);

// study: fig6-grid | fig7 | fig9
int cmd_reproduce(const std::string& study, const std::string& out_dir);

}  // namespace envc
