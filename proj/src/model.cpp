#include "envcontour/model.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "envcontour/errors.hpp"
#include "envcontour/parallel.hpp"
#include "envcontour/rng.hpp"

namespace envc {

double ConditionalLink::operator()(double h) const {
    if (kind == Kind::power) return c1 + c2 * std::pow(h, c3);
    return c1 + c2 * std::exp(c3 * h);
}

int JointModel::dim() const {
    struct V {
        int operator()(const Hierarchical2D&) const { return 2; }
        int operator()(const Hierarchical3D&) const { return 3; }
        int operator()(const MultivariateNormal& m) const { return static_cast<int>(m.mean.size()); }
        int operator()(const GaussianMixture& m) const {
            return m.means.empty() ? 0 : static_cast<int>(m.means[0].size());
        }
    };
    return std::visit(V{}, spec);
}

namespace {

Mat spd_chol_or_throw(const Mat& cov, const char* what) {
    if (cov.rows != cov.cols) throw std::invalid_argument(std::string(what) + ": covariance not square");
    for (int i = 0; i < cov.rows; ++i)
        for (int j = 0; j < cov.cols; ++j)
            if (std::fabs(cov(i, j) - cov(j, i)) > 1e-12 * (1.0 + std::fabs(cov(i, j))))
                throw std::invalid_argument(std::string(what) + ": covariance not symmetric");
    Mat l = cov;
    if (!cholesky(l)) throw std::invalid_argument(std::string(what) + ": covariance not positive definite");
    return l;
}

}  // namespace

void JointModel::validate() {
    if (auto* h2 = std::get_if<Hierarchical2D>(&spec)) {
        h2->hs.validate();
    } else if (auto* h3 = std::get_if<Hierarchical3D>(&spec)) {
        h3->base.hs.validate();
    } else if (auto* mvn = std::get_if<MultivariateNormal>(&spec)) {
        if (mvn->mean.empty()) throw std::invalid_argument("MultivariateNormal: empty mean");
        if (mvn->cov.rows != static_cast<int>(mvn->mean.size()))
            throw std::invalid_argument("MultivariateNormal: mean/cov dimension mismatch");
        mvn->chol = spd_chol_or_throw(mvn->cov, "MultivariateNormal");
    } else if (auto* gm = std::get_if<GaussianMixture>(&spec)) {
        if (gm->weights.empty() || gm->weights.size() != gm->means.size() ||
            gm->weights.size() != gm->covs.size())
            throw std::invalid_argument("GaussianMixture: component count mismatch");
        double wsum = 0.0;
        for (double w : gm->weights) {
            if (w < 0.0) throw std::invalid_argument("GaussianMixture: negative weight");
            wsum += w;
        }
        if (std::fabs(wsum - 1.0) > 1e-9)
            throw std::invalid_argument("GaussianMixture: weights must sum to 1");
        const size_t d = gm->means[0].size();
        gm->chols.clear();
        gm->cum_weights.clear();
        double acc = 0.0;
        for (size_t k = 0; k < gm->weights.size(); ++k) {
            if (gm->means[k].size() != d)
                throw std::invalid_argument("GaussianMixture: inconsistent component dimensions");
            gm->chols.push_back(spd_chol_or_throw(gm->covs[k], "GaussianMixture"));
            acc += gm->weights[k];
            gm->cum_weights.push_back(acc);
        }
        gm->cum_weights.back() = 1.0;
    }
}

ConditionalParams conditional_params(const JointModel& model, double h) {
    ConditionalParams p;
    const Hierarchical2D* h2 = std::get_if<Hierarchical2D>(&model.spec);
    const Hierarchical3D* h3 = std::get_if<Hierarchical3D>(&model.spec);
    if (!h2 && !h3)
        throw std::invalid_argument("conditional_params: model has no conditional structure");
    const Hierarchical2D& base = h2 ? *h2 : h3->base;
    p.mu_t = base.mu_t(h);
    p.sigma_t = base.sigma_t(h);
    if (!(p.sigma_t > 0.0)) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "degenerate conditional: sigma_t(h=%.6g) = %.6g <= 0", h, p.sigma_t);
        throw degenerate_conditional_error(buf);
    }
    if (h3) {
        p.lambda_u = h3->lambda_u(h);
        p.kappa_u = h3->kappa_u(h);
        if (!(*p.lambda_u > 0.0) || !(*p.kappa_u > 0.0)) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "degenerate conditional: lambda_u/kappa_u <= 0 at h=%.6g", h);
            throw degenerate_conditional_error(buf);
        }
    }
    return p;
}

namespace {

// Draw protocol for one row. Using a fixed number of variates per row keeps the
// serial and parallel samplers identical.
void draw_row(const JointModel& model, Xoshiro256& rng, double* out, bool& degenerate) {
    if (const auto* h2 = std::get_if<Hierarchical2D>(&model.spec)) {
        const double h = h2->hs.quantile(rng.uniform01());
        const double mu = h2->mu_t(h);
        const double sd = h2->sigma_t(h);
        if (!(sd > 0.0)) { degenerate = true; return; }
        out[0] = h;
        out[1] = std::exp(mu + sd * norm_quantile(rng.uniform01()));
    } else if (const auto* h3 = std::get_if<Hierarchical3D>(&model.spec)) {
        const double h = h3->base.hs.quantile(rng.uniform01());
        const double mu = h3->base.mu_t(h);
        const double sd = h3->base.sigma_t(h);
        const double lam = h3->lambda_u(h);
        const double kap = h3->kappa_u(h);
        if (!(sd > 0.0) || !(lam > 0.0) || !(kap > 0.0)) { degenerate = true; return; }
        out[0] = h;
        out[1] = std::exp(mu + sd * norm_quantile(rng.uniform01()));
        out[2] = lam * std::pow(-std::log1p(-rng.uniform01()), 1.0 / kap);
    } else if (const auto* mvn = std::get_if<MultivariateNormal>(&model.spec)) {
        const int d = static_cast<int>(mvn->mean.size());
        double z[16];
        for (int k = 0; k < d; ++k) z[k] = norm_quantile(rng.uniform01());
        for (int i = 0; i < d; ++i) {
            double s = mvn->mean[i];
            for (int k = 0; k <= i; ++k) s += mvn->chol(i, k) * z[k];
            out[i] = s;
        }
    } else {
        const auto& gm = std::get<GaussianMixture>(model.spec);
        const double pick = rng.uniform01();
        size_t c = 0;
        while (c + 1 < gm.cum_weights.size() && pick > gm.cum_weights[c]) ++c;
        const int d = static_cast<int>(gm.means[c].size());
        double z[16];
        for (int k = 0; k < d; ++k) z[k] = norm_quantile(rng.uniform01());
        for (int i = 0; i < d; ++i) {
            double s = gm.means[c][i];
            for (int k = 0; k <= i; ++k) s += gm.chols[c](i, k) * z[k];
            out[i] = s;
        }
    }
}

SampleSet sample_impl(const JointModel& model, std::int64_t n, std::uint64_t seed, bool parallel) {
    if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
    const int d = model.dim();
    if (d < 1 || d > 16) throw std::invalid_argument("sample: unsupported dimension");

    SampleSet s;
    s.dim = d;
    s.n = n;
    s.seed = seed;
    s.model_tag = model.tag;
    s.points.resize(static_cast<size_t>(n) * d);

    std::atomic<bool> degenerate{false};
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(worker_count()) if (parallel)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
        if (degenerate.load(std::memory_order_relaxed)) continue;
        Xoshiro256 rng = row_rng(seed, static_cast<std::uint64_t>(i));
        bool bad = false;
        draw_row(model, rng, s.points.data() + static_cast<size_t>(i) * d, bad);
        if (bad) degenerate.store(true, std::memory_order_relaxed);
    }
    if (degenerate.load())
        throw degenerate_conditional_error("sample: conditional parameters degenerate in marginal support");
    return s;
}

}  // namespace

SampleSet sample(const JointModel& model, std::int64_t n, std::uint64_t seed) {
    return sample_impl(model, n, seed, true);
}

SampleSet sample_serial(const JointModel& model, std::int64_t n, std::uint64_t seed) {
    return sample_impl(model, n, seed, false);
}

JointModel mixture_fig7() {
    GaussianMixture gm;
    gm.weights = {0.8, 0.1, 0.1};
    gm.means = {{0.0, 0.0}, {0.5, 1.0}, {-0.5, 1.0}};
    Mat c1(2, 2), c2(2, 2), c3(2, 2);
    c1(0, 0) = c1(1, 1) = 0.16;
    c2(0, 0) = c2(1, 1) = 0.04;
    c3(0, 0) = c3(1, 1) = 0.04;
    gm.covs = {c1, c2, c3};
    JointModel m{gm, "mixture_fig7"};
    m.validate();
    return m;
}

namespace {

using nlohmann::json;

ConditionalLink link_from_json(const json& j, const char* what) {
    ConditionalLink l;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "power") l.kind = ConditionalLink::Kind::power;
    else if (kind == "exponential") l.kind = ConditionalLink::Kind::exponential;
    else throw std::invalid_argument(std::string(what) + ": link kind must be power or exponential");
    const auto& c = j.at("c");
    if (c.size() != 3 && c.size() != 2)
        throw std::invalid_argument(std::string(what) + ": link needs 2 or 3 coefficients");
    l.c1 = c.at(0).get<double>();
    l.c2 = c.at(1).get<double>();
    l.c3 = c.size() == 3 ? c.at(2).get<double>() : 1.0;  // omitted exponent defaults to 1
    return l;
}

Mat mat_from_json(const json& j) {
    const int r = static_cast<int>(j.size());
    const int c = static_cast<int>(j.at(0).size());
    Mat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int k = 0; k < c; ++k) m(i, k) = j.at(i).at(k).get<double>();
    return m;
}

}  // namespace

JointModel model_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("model config: ") + e.what());
    }
    const json& jm = j.contains("model") ? j.at("model") : j;
    JointModel m;
    m.tag = j.value("name", std::string("model"));
    const std::string type = jm.at("type").get<std::string>();
    if (type == "hierarchical2d" || type == "hierarchical3d") {
        Hierarchical2D base;
        const auto& hs = jm.at("hs");
        base.hs.alpha = hs.at("alpha").get<double>();
        base.hs.beta = hs.at("beta").get<double>();
        base.hs.gamma = hs.at("gamma").get<double>();
        base.mu_t = link_from_json(jm.at("ln_tz").at("mean"), "ln_tz.mean");
        base.sigma_t = link_from_json(jm.at("ln_tz").at("sd"), "ln_tz.sd");
        if (type == "hierarchical2d") {
            m.spec = base;
        } else {
            Hierarchical3D h3;
            h3.base = base;
            h3.lambda_u = link_from_json(jm.at("u10").at("scale"), "u10.scale");
            h3.kappa_u = link_from_json(jm.at("u10").at("shape"), "u10.shape");
            m.spec = h3;
        }
    } else if (type == "multivariate_normal") {
        MultivariateNormal mvn;
        mvn.mean = jm.at("mean").get<std::vector<double>>();
        mvn.cov = mat_from_json(jm.at("cov"));
        m.spec = mvn;
    } else if (type == "gaussian_mixture") {
        GaussianMixture gm;
        gm.weights = jm.at("weights").get<std::vector<double>>();
        for (const auto& mu : jm.at("means")) gm.means.push_back(mu.get<std::vector<double>>());
        for (const auto& cv : jm.at("covs")) gm.covs.push_back(mat_from_json(cv));
        m.spec = gm;
    } else {
        throw std::invalid_argument("model config: unknown type '" + type + "'");
    }
    m.validate();
    return m;
}

JointModel model_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("model config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    JointModel m = model_from_json_text(ss.str());
    if (m.tag == "model") m.tag = path;
    return m;
}

std::vector<std::string> variable_names(const JointModel& model) {
    if (std::holds_alternative<Hierarchical2D>(model.spec)) return {"H_S", "T_Z"};
    if (std::holds_alternative<Hierarchical3D>(model.spec)) return {"H_S", "T_Z", "U_10"};
    std::vector<std::string> names;
    for (int i = 0; i < model.dim(); ++i) names.push_back("x" + std::to_string(i + 1));
    return names;
}

void write_samples_csv(const SampleSet& s, const std::vector<std::string>& names,
                       const std::string& path) {
    const std::string tmp = path + ".tmp";
    std::FILE* f = std::fopen(tmp.c_str(), "w");
    if (!f) throw std::runtime_error("cannot write " + tmp);
    for (int j = 0; j < s.dim; ++j)
        std::fprintf(f, "%s%s", names[j].c_str(), j + 1 < s.dim ? "," : "\n");
    for (std::int64_t i = 0; i < s.n; ++i) {
        const double* r = s.row(i);
        for (int j = 0; j < s.dim; ++j)
            std::fprintf(f, "%.17g%s", r[j], j + 1 < s.dim ? "," : "\n");
    }
    std::fclose(f);
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename " + tmp);
}

}  // namespace envc
