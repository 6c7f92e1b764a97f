#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "envcontour/linalg.hpp"
#include "envcontour/stats.hpp"

namespace envc {

// Parameter link for conditional distributions:
//   power:       c1 + c2 * h^c3
//   exponential: c1 + c2 * exp(c3 * h)
struct ConditionalLink {
    enum class Kind { power, exponential };
    Kind kind = Kind::power;
    double c1 = 0.0, c2 = 0.0, c3 = 0.0;

    double operator()(double h) const;
};

// Significant wave height (3-p Weibull) with conditional lognormal wave period.
struct Hierarchical2D {
    Weibull3P hs;
    ConditionalLink mu_t;     // E(ln T_Z | H_S = h)
    ConditionalLink sigma_t;  // sd(ln T_Z | H_S = h)
};

// 2D model extended with conditional 2-p Weibull mean wind speed.
struct Hierarchical3D {
    Hierarchical2D base;
    ConditionalLink lambda_u;  // scale of U_10 | H_S = h
    ConditionalLink kappa_u;   // shape of U_10 | H_S = h
};

struct MultivariateNormal {
    Vec mean;
    Mat cov;
    Mat chol;  // lower Cholesky factor, filled by validate()
};

struct GaussianMixture {
    std::vector<double> weights;
    std::vector<Vec> means;
    std::vector<Mat> covs;
    std::vector<Mat> chols;
    std::vector<double> cum_weights;
};

struct JointModel {
    std::variant<Hierarchical2D, Hierarchical3D, MultivariateNormal, GaussianMixture> spec;
    std::string tag;

    int dim() const;
    // Checks invariants (positive shapes/scales, SPD covariances, weights summing
    // to one) and caches Cholesky factors. Throws std::invalid_argument.
    void validate();
};

struct ConditionalParams {
    double mu_t = 0.0;
    double sigma_t = 0.0;
    std::optional<double> lambda_u;
    std::optional<double> kappa_u;
};

struct SampleSet {
    int dim = 0;
    std::int64_t n = 0;
    Vec points;  // n x dim, row-major
    std::uint64_t seed = 0;
    std::string model_tag;

    const double* row(std::int64_t i) const { return points.data() + i * dim; }
};

// Monte Carlo sample of n rows. Each row is drawn from its own RNG stream keyed
// by (seed, row), so results are identical for the serial and parallel paths.
SampleSet sample(const JointModel& model, std::int64_t n, std::uint64_t seed);
SampleSet sample_serial(const JointModel& model, std::int64_t n, std::uint64_t seed);

// Link-evaluated conditional parameters at wave height h. Throws
// degenerate_conditional_error when sigma_t / lambda_u / kappa_u <= 0.
ConditionalParams conditional_params(const JointModel& model, double h);

// The bimodal Gaussian mixture 0.8 N([0,0], 0.16 I) + 0.1 N([0.5,1], 0.04 I)
// + 0.1 N([-0.5,1], 0.04 I).
JointModel mixture_fig7();

JointModel model_from_json_text(const std::string& text);
JointModel model_from_json_file(const std::string& path);

std::vector<std::string> variable_names(const JointModel& model);
void write_samples_csv(const SampleSet& s, const std::vector<std::string>& names,
                       const std::string& path);

}  // namespace envc
