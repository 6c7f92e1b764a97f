#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "envcontour/geometry.hpp"
#include "envcontour/model.hpp"
#include "envcontour/percentile.hpp"

namespace envc {

struct ContourResult {
    enum class Status { proper_candidate, invalid, degenerate };

    Polytope cell;
    PercentileTable table;
    Vec origin;
    ConnectivityReport connectivity;
    Status status = Status::invalid;
    std::string origin_strategy;        // strategy actually used, e.g. "median" or "median->lp"
    std::vector<int> refined_directions;
    int refinement_rounds = 0;
};

struct ValidityReport {
    enum class Classification { proper, valid_improper, invalid };

    Vec gaps;  // g_j = C_j - max_v u_j.v
    double max_gap = 0.0;
    double min_gap = 0.0;
    Classification classification = Classification::invalid;
    double tol = 0.0;
};

struct ContourOptions {
    std::string origin_strategy = "median";  // median | lp | explicit
    Vec origin_explicit;
    int refine_rounds = 3;       // step-5 re-estimation rounds for disconnected directions
    int refine_factor = 4;       // sample multiplier per round
    EstimateOptions estimate;
};

// Geometric median by Weiszfeld iteration (tol 1e-8, max 500 iterations);
// falls back to the coordinate-wise median when it fails to converge.
Vec select_origin(const SampleSet& samples, bool* fell_back = nullptr);

// End-to-end pipeline: sample, estimate the percentile table, pick and verify
// an interior origin, build the Voronoi cell, and check Delaunay connectivity
// with optional refinement of disconnected directions.
ContourResult voronoi_contour(const JointModel& model, double pe,
                              const std::vector<Vec>& directions, std::int64_t n,
                              std::uint64_t seed, const ContourOptions& opts = {});

// Projection correction: for each direction, the support vertex is projected
// onto the percentile plane and the convex hull of the union is returned. The
// result meets every plane, so it is a valid contour for the direction set.
Polytope corrected_contour(const ContourResult& result);

ValidityReport validate_contour(const Polytope& poly, const PercentileTable& table, double tol);

struct Exceedance {
    double p_hat = 0.0;
    double se = 0.0;
};

// Monte Carlo exceedance P(u.X > c) with binomial standard error. Requires
// n >= 1e4 and a finite offset.
Exceedance exceedance_probability(const HalfSpace& h, const JointModel& model,
                                  std::int64_t n, std::uint64_t seed);
Exceedance exceedance_probability_serial(const HalfSpace& h, const JointModel& model,
                                         std::int64_t n, std::uint64_t seed);

// Shared-sample audit of many half-spaces (one pass over the samples each).
std::vector<Exceedance> exceedance_on_samples(const std::vector<HalfSpace>& hs,
                                              const SampleSet& samples);

// Direct-sampling baseline: consecutive tangent-line intersections. May
// self-intersect; crossing segment pairs are recorded.
struct DirectContour2D {
    std::vector<Vec> points;                       // closed polyline
    std::vector<std::pair<int, int>> loop_pairs;   // indices of crossing segments

    bool has_loops() const { return !loop_pairs.empty(); }
};

DirectContour2D direct_contour_2d(const PercentileTable& table);

const char* to_string(ContourResult::Status s);
const char* to_string(ValidityReport::Classification c);

}  // namespace envc
