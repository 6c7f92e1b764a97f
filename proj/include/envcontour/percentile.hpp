#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "envcontour/linalg.hpp"
#include "envcontour/model.hpp"

namespace envc {

// Unit vector; normalized on construction, rejected if the input is near zero.
struct Direction {
    Vec u;

    explicit Direction(Vec v);
    int dim() const { return static_cast<int>(u.size()); }
};

struct PercentileTable {
    double pe = 0.0;
    int dim = 0;
    std::vector<Vec> directions;
    Vec values;  // estimated C_pe(u_j)

    // estimator provenance
    std::int64_t n_samples = 0;
    std::uint64_t seed = 0;
    std::string rule;
    int conservative_k = 0;
    bool low_tail_warning = false;   // n * pe < 20
    Vec bootstrap_sd;                // per-direction spread, empty unless requested

    std::size_t size() const { return values.size(); }
    void check() const;  // pe in (0, 0.5), equal lengths
};

struct EstimateOptions {
    int conservative_k = 0;  // bump the order-statistic rank upward by k
    int bootstrap_resamples = 0;
};

// Upper-tail empirical percentile of the projections u.x_i: the order statistic
// at rank ceil(n (1 - pe)), i.e. the smallest c with fraction strictly above c
// at most pe. `warned` is set when n*pe < 20.
double estimate_percentile(const SampleSet& samples, const double* u, double pe,
                           int conservative_k = 0, bool* warned = nullptr);

PercentileTable estimate_table(const SampleSet& samples, const std::vector<Vec>& directions,
                               double pe, const EstimateOptions& opts = {});
PercentileTable estimate_table_serial(const SampleSet& samples, const std::vector<Vec>& directions,
                                      double pe, const EstimateOptions& opts = {});

// Closed-form projection quantile of a Gaussian: u.mean + z_{1-pe} sqrt(u' cov u).
double exact_percentile_gaussian(const Vec& mean, const Mat& cov, const double* u, double pe);

// Percentile table filled from the Gaussian closed form (test/oracle helper).
PercentileTable gaussian_oracle_table(const Vec& mean, const Mat& cov,
                                      const std::vector<Vec>& directions, double pe);

// C^o(u) = C(u) - u.o
double recentre(double c, const double* u, const double* o, int dim);
inline double recentre(double c, const Vec& u, const Vec& o) {
    return recentre(c, u.data(), o.data(), static_cast<int>(u.size()));
}

// Moves a reflection point from origin o to origin o_star:
//   s* = s + 2 (u.(o - o*)) u - (o - o*)
Vec shift_reflection(const Vec& s, const Vec& u, const Vec& o, const Vec& o_star);

// Standard deviation of the percentile estimate over B bootstrap resamples,
// one value per direction. Diagnostic only.
Vec bootstrap_spread(const SampleSet& samples, const std::vector<Vec>& directions,
                     double pe, int resamples, std::uint64_t seed);

void write_table_csv(const PercentileTable& t, const std::string& path);
void write_table_meta_json(const PercentileTable& t, const std::string& path);

}  // namespace envc
