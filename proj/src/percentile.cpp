#include "envcontour/percentile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

#include "envcontour/parallel.hpp"
#include "envcontour/rng.hpp"
#include "envcontour/stats.hpp"

namespace envc {

Direction::Direction(Vec v) : u(std::move(v)) {
    const double len = norm(u);
    if (!(len > 1e-14)) throw std::invalid_argument("Direction: zero vector");
    for (double& x : u) x /= len;
}

void PercentileTable::check() const {
    if (!(pe > 0.0 && pe < 0.5))
        throw std::invalid_argument("PercentileTable: pe must lie in (0, 0.5)");
    if (directions.size() != values.size())
        throw std::invalid_argument("PercentileTable: directions/values length mismatch");
}

namespace {

// rank (1-based) of the order statistic for the empirical inf{c : P(>c) <= pe}
std::int64_t order_rank(std::int64_t n, double pe, int conservative_k) {
    std::int64_t r = static_cast<std::int64_t>(std::ceil(static_cast<double>(n) * (1.0 - pe)));
    r += conservative_k;
    if (r < 1) r = 1;
    if (r > n) r = n;
    return r;
}

double percentile_of_projections(Vec& proj, double pe, int conservative_k) {
    const std::int64_t n = static_cast<std::int64_t>(proj.size());
    const std::int64_t r = order_rank(n, pe, conservative_k);
    std::nth_element(proj.begin(), proj.begin() + (r - 1), proj.end());
    return proj[r - 1];
}

}  // namespace

double estimate_percentile(const SampleSet& samples, const double* u, double pe,
                           int conservative_k, bool* warned) {
    if (samples.n < 1) throw std::invalid_argument("estimate_percentile: empty sample set");
    if (!(pe > 0.0 && pe < 0.5))
        throw std::invalid_argument("estimate_percentile: pe must lie in (0, 0.5)");
    if (warned) *warned = static_cast<double>(samples.n) * pe < 20.0;

    Vec proj(samples.n);
    for (std::int64_t i = 0; i < samples.n; ++i)
        proj[i] = dot(samples.row(i), u, samples.dim);
    return percentile_of_projections(proj, pe, conservative_k);
}

namespace {

PercentileTable estimate_table_impl(const SampleSet& samples, const std::vector<Vec>& directions,
                                    double pe, const EstimateOptions& opts, bool parallel) {
    if (samples.n < 1) throw std::invalid_argument("estimate_table: empty sample set");
    if (!(pe > 0.0 && pe < 0.5))
        throw std::invalid_argument("estimate_table: pe must lie in (0, 0.5)");

    PercentileTable t;
    t.pe = pe;
    t.dim = samples.dim;
    t.directions = directions;
    t.values.resize(directions.size());
    t.n_samples = samples.n;
    t.seed = samples.seed;
    t.conservative_k = opts.conservative_k;
    t.rule = "order statistic ceil(n*(1-pe))" +
             (opts.conservative_k ? " + " + std::to_string(opts.conservative_k) : "");
    t.low_tail_warning = static_cast<double>(samples.n) * pe < 20.0;

    const int m = static_cast<int>(directions.size());
#ifdef _OPENMP
#pragma omp parallel num_threads(worker_count()) if (parallel)
#endif
    {
        Vec proj(samples.n);
#ifdef _OPENMP
#pragma omp for schedule(dynamic)
#endif
        for (int j = 0; j < m; ++j) {
            const double* u = directions[j].data();
            for (std::int64_t i = 0; i < samples.n; ++i)
                proj[i] = dot(samples.row(i), u, samples.dim);
            t.values[j] = percentile_of_projections(proj, pe, opts.conservative_k);
        }
    }

    if (opts.bootstrap_resamples > 0)
        t.bootstrap_sd = bootstrap_spread(samples, directions, pe, opts.bootstrap_resamples,
                                          samples.seed ^ 0xB007ULL);
    return t;
}

}  // namespace

PercentileTable estimate_table(const SampleSet& samples, const std::vector<Vec>& directions,
                               double pe, const EstimateOptions& opts) {
    return estimate_table_impl(samples, directions, pe, opts, true);
}

PercentileTable estimate_table_serial(const SampleSet& samples, const std::vector<Vec>& directions,
                                      double pe, const EstimateOptions& opts) {
    return estimate_table_impl(samples, directions, pe, opts, false);
}

double exact_percentile_gaussian(const Vec& mean, const Mat& cov, const double* u, double pe) {
    if (!(pe > 0.0 && pe < 1.0))
        throw std::invalid_argument("exact_percentile_gaussian: pe must lie in (0, 1)");
    Mat l = cov;
    if (!cholesky(l))
        throw std::invalid_argument("exact_percentile_gaussian: covariance not positive definite");
    const int d = static_cast<int>(mean.size());
    Vec cu = matvec(cov, Vec(u, u + d));
    const double var = dot(cu.data(), u, d);
    return dot(mean.data(), u, d) + norm_quantile(1.0 - pe) * std::sqrt(var);
}

PercentileTable gaussian_oracle_table(const Vec& mean, const Mat& cov,
                                      const std::vector<Vec>& directions, double pe) {
    PercentileTable t;
    t.pe = pe;
    t.dim = static_cast<int>(mean.size());
    t.directions = directions;
    t.rule = "gaussian closed form";
    for (const Vec& u : directions)
        t.values.push_back(exact_percentile_gaussian(mean, cov, u.data(), pe));
    return t;
}

double recentre(double c, const double* u, const double* o, int dim) {
    return c - dot(u, o, dim);
}

Vec shift_reflection(const Vec& s, const Vec& u, const Vec& o, const Vec& o_star) {
    Vec d = sub(o, o_star);
    const double k = 2.0 * dot(u, d);
    Vec r(s.size());
    for (size_t i = 0; i < s.size(); ++i) r[i] = s[i] + k * u[i] - d[i];
    return r;
}

Vec bootstrap_spread(const SampleSet& samples, const std::vector<Vec>& directions,
                     double pe, int resamples, std::uint64_t seed) {
    const int m = static_cast<int>(directions.size());
    Vec sd(m, 0.0);
    if (resamples < 2) return sd;

    std::vector<Vec> est(m, Vec(resamples));
#ifdef _OPENMP
#pragma omp parallel num_threads(worker_count())
#endif
    {
        Vec proj(samples.n);
#ifdef _OPENMP
#pragma omp for schedule(dynamic)
#endif
        for (int b = 0; b < resamples; ++b) {
            Xoshiro256 rng = row_rng(seed, static_cast<std::uint64_t>(b));
            std::vector<std::int64_t> idx(samples.n);
            for (std::int64_t i = 0; i < samples.n; ++i)
                idx[i] = static_cast<std::int64_t>(rng.uniform01() * samples.n);
            for (int j = 0; j < m; ++j) {
                const double* u = directions[j].data();
                for (std::int64_t i = 0; i < samples.n; ++i)
                    proj[i] = dot(samples.row(idx[i]), u, samples.dim);
                est[j][b] = percentile_of_projections(proj, pe, 0);
            }
        }
    }
    for (int j = 0; j < m; ++j) {
        double mean = 0.0;
        for (double v : est[j]) mean += v;
        mean /= resamples;
        double ss = 0.0;
        for (double v : est[j]) ss += (v - mean) * (v - mean);
        sd[j] = std::sqrt(ss / (resamples - 1));
    }
    return sd;
}

void write_table_csv(const PercentileTable& t, const std::string& path) {
    const std::string tmp = path + ".tmp";
    std::FILE* f = std::fopen(tmp.c_str(), "w");
    if (!f) throw std::runtime_error("cannot write " + tmp);
    for (int j = 0; j < t.dim; ++j) std::fprintf(f, "u_%d,", j + 1);
    std::fprintf(f, "C_value\n");
    for (size_t k = 0; k < t.size(); ++k) {
        for (int j = 0; j < t.dim; ++j) std::fprintf(f, "%.17g,", t.directions[k][j]);
        std::fprintf(f, "%.17g\n", t.values[k]);
    }
    std::fclose(f);
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename " + tmp);
}

void write_table_meta_json(const PercentileTable& t, const std::string& path) {
    nlohmann::json j;
    j["pe"] = t.pe;
    j["n"] = t.n_samples;
    j["seed"] = t.seed;
    j["rule"] = t.rule;
    j["conservative_k"] = t.conservative_k;
    j["low_tail_warning"] = t.low_tail_warning;
    if (!t.bootstrap_sd.empty()) j["bootstrap_sd"] = t.bootstrap_sd;
    const std::string tmp = path + ".tmp";
    std::FILE* f = std::fopen(tmp.c_str(), "w");
    if (!f) throw std::runtime_error("cannot write " + tmp);
    const std::string text = j.dump(2);
    std::fwrite(text.data(), 1, text.size(), f);
    std::fputc('\n', f);
    std::fclose(f);
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename " + tmp);
}

}  // namespace envc
