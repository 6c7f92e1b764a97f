#include "envcontour/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "envcontour/errors.hpp"
#include "envcontour/parallel.hpp"

namespace envc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// u_k is a product of one trig factor per angle in its support:
// sin(th_r) for r < k plus cos(th_k) when k <= n-2.
struct Factors {
    std::vector<int> angle;
    std::vector<int> kind;  // 0 = sin, 1 = cos
};

Factors component_factors(int k, int n) {
    Factors f;
    const int top = (k <= n - 2) ? k : n - 2;
    for (int r = 0; r < top; ++r) {
        f.angle.push_back(r);
        f.kind.push_back(0);
    }
    if (k <= n - 2) {
        f.angle.push_back(k);
        f.kind.push_back(1);
    } else {
        f.angle.push_back(n - 2);
        f.kind.push_back(0);
    }
    return f;
}

double factor_value(int kind, double s, double c) { return kind == 0 ? s : c; }
double factor_deriv(int kind, double s, double c) { return kind == 0 ? c : -s; }

}  // namespace

SphericalChart SphericalChart::standard(int n) {
    SphericalChart ch;
    ch.ambient = n;
    ch.rotation = Mat::identity(n);
    return ch;
}

SphericalChart SphericalChart::rotated(int n) {
    SphericalChart ch;
    ch.ambient = n;
    ch.rotation = Mat::identity(n);
    ch.rotation(0, 0) = 0.0;
    ch.rotation(n - 1, n - 1) = 0.0;
    ch.rotation(0, n - 1) = -1.0;
    ch.rotation(n - 1, 0) = 1.0;
    return ch;
}

std::vector<SphericalChart> SphericalChart::atlas(int n) {
    if (n == 2) return {standard(2)};
    return {standard(n), rotated(n)};
}

Vec SphericalChart::u(const Vec& th) const {
    const int n = ambient;
    Vec s(n - 1), c(n - 1);
    for (int i = 0; i < n - 1; ++i) {
        s[i] = std::sin(th[i]);
        c[i] = std::cos(th[i]);
    }
    Vec local(n);
    for (int k = 0; k < n; ++k) {
        const Factors f = component_factors(k, n);
        double v = 1.0;
        for (size_t r = 0; r < f.angle.size(); ++r)
            v *= factor_value(f.kind[r], s[f.angle[r]], c[f.angle[r]]);
        local[k] = v;
    }
    return matvec(rotation, local);
}

Mat SphericalChart::jacobian(const Vec& th) const {
    const int n = ambient;
    Vec s(n - 1), c(n - 1);
    for (int i = 0; i < n - 1; ++i) {
        s[i] = std::sin(th[i]);
        c[i] = std::cos(th[i]);
    }
    Mat local(n, n - 1);
    for (int k = 0; k < n; ++k) {
        const Factors f = component_factors(k, n);
        for (size_t dr = 0; dr < f.angle.size(); ++dr) {
            double v = 1.0;
            for (size_t r = 0; r < f.angle.size(); ++r) {
                const double sv = s[f.angle[r]], cv = c[f.angle[r]];
                v *= (r == dr) ? factor_deriv(f.kind[r], sv, cv) : factor_value(f.kind[r], sv, cv);
            }
            local(k, f.angle[dr]) += v;
        }
    }
    Mat world(n, n - 1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n - 1; ++j) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += rotation(i, k) * local(k, j);
            world(i, j) = acc;
        }
    return world;
}

std::vector<Mat> SphericalChart::second_derivatives(const Vec& th) const {
    const int n = ambient;
    Vec s(n - 1), c(n - 1);
    for (int i = 0; i < n - 1; ++i) {
        s[i] = std::sin(th[i]);
        c[i] = std::cos(th[i]);
    }
    std::vector<Mat> local(n, Mat(n - 1, n - 1));
    for (int k = 0; k < n; ++k) {
        const Factors f = component_factors(k, n);
        const int nf = static_cast<int>(f.angle.size());
        for (int da = 0; da < nf; ++da)
            for (int db = 0; db <= da; ++db) {
                double v = 1.0;
                if (da == db) {
                    // second derivative of any single trig factor is its negative
                    for (int r = 0; r < nf; ++r) {
                        const double sv = s[f.angle[r]], cv = c[f.angle[r]];
                        v *= (r == da) ? -factor_value(f.kind[r], sv, cv)
                                       : factor_value(f.kind[r], sv, cv);
                    }
                } else {
                    for (int r = 0; r < nf; ++r) {
                        const double sv = s[f.angle[r]], cv = c[f.angle[r]];
                        v *= (r == da || r == db) ? factor_deriv(f.kind[r], sv, cv)
                                                  : factor_value(f.kind[r], sv, cv);
                    }
                }
                local[k](f.angle[da], f.angle[db]) += v;
                if (da != db) local[k](f.angle[db], f.angle[da]) += v;
            }
    }
    std::vector<Mat> world(n, Mat(n - 1, n - 1));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const double r = rotation(i, k);
            if (r == 0.0) continue;
            for (int a = 0; a < n - 1; ++a)
                for (int b = 0; b < n - 1; ++b) world[i](a, b) += r * local[k](a, b);
        }
    return world;
}

Mat SphericalChart::metric(const Vec& th) const {
    const Mat j = jacobian(th);
    Mat g(ambient - 1, ambient - 1);
    for (int a = 0; a < ambient - 1; ++a)
        for (int b = 0; b < ambient - 1; ++b) {
            double acc = 0.0;
            for (int k = 0; k < ambient; ++k) acc += j(k, a) * j(k, b);
            g(a, b) = acc;
        }
    return g;
}

Mat SphericalChart::metric_closed_form(const Vec& th) const {
    Mat g(ambient - 1, ambient - 1);
    double prod = 1.0;
    for (int i = 0; i < ambient - 1; ++i) {
        g(i, i) = prod;
        const double s = std::sin(th[i]);
        prod *= s * s;
    }
    return g;
}

std::vector<Mat> SphericalChart::christoffel(const Vec& th) const {
    const int n = ambient;
    const int m = n - 1;
    const Mat j = jacobian(th);
    const std::vector<Mat> dd = second_derivatives(th);
    // first kind: Gamma_l,ij = sum_k u_{k,l} u_{k,ij}
    std::vector<Mat> first(m, Mat(m, m));
    for (int l = 0; l < m; ++l)
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) {
                double acc = 0.0;
                for (int k = 0; k < n; ++k) acc += j(k, l) * dd[k](a, b);
                first[l](a, b) = acc;
            }
    const Mat g = metric(th);
    std::vector<Mat> second(m, Mat(m, m));
    // Gamma^mm_ij solves g w = Gamma_.,ij per (i,j)
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            Vec rhs(m), w;
            for (int l = 0; l < m; ++l) rhs[l] = first[l](a, b);
            if (!solve(g, rhs, w))
                throw chart_singularity_error("christoffel: metric singular at pole");
            for (int mm = 0; mm < m; ++mm) second[mm](a, b) = w[mm];
        }
    return second;
}

double SphericalChart::pole_margin(const Vec& th) const {
    if (ambient == 2) return kPi;
    double margin = kPi;
    for (int i = 0; i < ambient - 2; ++i)
        margin = std::min(margin, std::min(std::fabs(th[i]), std::fabs(kPi - th[i])));
    return margin;
}

// ---------------------------------------------------------------------------
// chain rule helpers: derivatives of C(u(th)) from u-space value/grad/hessian

namespace {

Vec chain_gradient(const Mat& jac, const Vec& grad_u) {
    const int n = jac.rows, m = jac.cols;
    Vec g(m, 0.0);
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < n; ++k) g[i] += jac(k, i) * grad_u[k];
    return g;
}

Mat chain_hessian(const Mat& jac, const std::vector<Mat>& dd, const Vec& grad_u,
                  const Mat& hess_u) {
    const int n = jac.rows, m = jac.cols;
    Mat h(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += dd[k](a, b) * grad_u[k];
            for (int k = 0; k < n; ++k) {
                double hk = 0.0;
                for (int l = 0; l < n; ++l) hk += hess_u(k, l) * jac(l, b);
                acc += jac(k, a) * hk;
            }
            h(a, b) = acc;
        }
    return h;
}

}  // namespace

// ---------------------------------------------------------------------------
// GaussianField

GaussianField::GaussianField(Vec mean, Mat cov, double pe)
    : mean_(std::move(mean)), cov_(std::move(cov)), z_(norm_quantile(1.0 - pe)) {
    Mat l = cov_;
    if (!cholesky(l)) throw std::invalid_argument("GaussianField: covariance not positive definite");
}

void GaussianField::eval_u(const Vec& u, double& val, Vec& grad, Mat& hess) const {
    const int n = ambient_dim();
    const Vec cu = matvec(cov_, u);
    const double s2 = dot(cu, u);
    const double s = std::sqrt(s2);
    val = dot(mean_, u) + z_ * s;
    grad.resize(n);
    for (int k = 0; k < n; ++k) grad[k] = mean_[k] + z_ * cu[k] / s;
    hess = Mat(n, n);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
            hess(k, l) = z_ * (cov_(k, l) / s - cu[k] * cu[l] / (s2 * s));
}

double GaussianField::value(const SphericalChart& chart, const Vec& th) const {
    const Vec u = chart.u(th);
    const Vec cu = matvec(cov_, u);
    return dot(mean_, u) + z_ * std::sqrt(dot(cu, u));
}

Vec GaussianField::gradient(const SphericalChart& chart, const Vec& th) const {
    double val;
    Vec gu;
    Mat hu;
    eval_u(chart.u(th), val, gu, hu);
    return chain_gradient(chart.jacobian(th), gu);
}

Mat GaussianField::hessian(const SphericalChart& chart, const Vec& th) const {
    double val;
    Vec gu;
    Mat hu;
    eval_u(chart.u(th), val, gu, hu);
    return chain_hessian(chart.jacobian(th), chart.second_derivatives(th), gu, hu);
}

// ---------------------------------------------------------------------------
// Spline2DField

Spline2DField::Spline2DField(const PercentileTable& table) {
    if (table.dim != 2) throw std::invalid_argument("Spline2DField: table is not 2D");
    const int m = static_cast<int>(table.size());
    if (m < 4) throw std::invalid_argument("Spline2DField: need at least 4 directions");

    std::vector<std::pair<double, double>> pts(m);
    for (int j = 0; j < m; ++j) {
        double a = std::atan2(table.directions[j][1], table.directions[j][0]);
        if (a < 0.0) a += kTwoPi;
        pts[j] = {a, table.values[j]};
    }
    std::sort(pts.begin(), pts.end());
    knots_.resize(m);
    y_.resize(m);
    for (int j = 0; j < m; ++j) {
        knots_[j] = pts[j].first;
        y_[j] = pts[j].second;
        if (j > 0 && !(knots_[j] > knots_[j - 1] + 1e-12))
            throw std::invalid_argument("Spline2DField: duplicate direction angles");
    }

    // periodic cubic spline: cyclic tridiagonal system for the knot second
    // derivatives, solved by the Sherman-Morrison correction of a Thomas solve
    Vec h(m);
    for (int j = 0; j < m; ++j)
        h[j] = (j + 1 < m ? knots_[j + 1] : knots_[0] + kTwoPi) - knots_[j];
    Vec sub(m), diag(m), sup(m), rhs(m);
    for (int j = 0; j < m; ++j) {
        const int prev = (j + m - 1) % m;
        sub[j] = h[prev] / 6.0;
        diag[j] = (h[prev] + h[j]) / 3.0;
        sup[j] = h[j] / 6.0;
        const double yn = (j + 1 < m) ? y_[j + 1] : y_[0];
        const double yp = y_[prev];
        rhs[j] = (yn - y_[j]) / h[j] - (y_[j] - yp) / h[prev];
    }
    auto thomas = [&](Vec a, Vec b, Vec c, Vec d) {
        const int nn = static_cast<int>(b.size());
        for (int i = 1; i < nn; ++i) {
            const double w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            d[i] -= w * d[i - 1];
        }
        Vec x(nn);
        x[nn - 1] = d[nn - 1] / b[nn - 1];
        for (int i = nn - 2; i >= 0; --i) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
        return x;
    };
    const double alpha = sub[0];     // corner: row 0 couples to M_{m-1}
    const double beta = sup[m - 1];  // corner: last row couples to M_0
    const double gamma = -diag[0];
    Vec bmod = diag;
    bmod[0] -= gamma;
    bmod[m - 1] -= alpha * beta / gamma;
    Vec uvec(m, 0.0);
    uvec[0] = gamma;
    uvec[m - 1] = beta;
    const Vec x1 = thomas(sub, bmod, sup, rhs);
    const Vec x2 = thomas(sub, bmod, sup, uvec);
    const double vx1 = x1[0] + alpha / gamma * x1[m - 1];
    const double vx2 = x2[0] + alpha / gamma * x2[m - 1];
    m_.resize(m);
    const double f = vx1 / (1.0 + vx2);
    for (int j = 0; j < m; ++j) m_[j] = x1[j] - f * x2[j];
}

double Spline2DField::eval(double angle, int deriv) const {
    const int m = static_cast<int>(knots_.size());
    double x = std::fmod(angle - knots_[0], kTwoPi);
    if (x < 0.0) x += kTwoPi;
    x += knots_[0];
    int lo = 0, hi = m;  // interval j: knots_[j] <= x, with wrap interval at the end
    while (lo + 1 < hi) {
        const int mid = (lo + hi) / 2;
        if (mid < m && knots_[mid] <= x) lo = mid;
        else hi = mid;
    }
    const int j = lo;
    const double xj = knots_[j];
    const double xn = (j + 1 < m) ? knots_[j + 1] : knots_[0] + kTwoPi;
    const double yj = y_[j], yn = (j + 1 < m) ? y_[j + 1] : y_[0];
    const double mj = m_[j], mn = (j + 1 < m) ? m_[j + 1] : m_[0];
    const double h = xn - xj;
    const double a = (xn - x) / h;
    const double b = (x - xj) / h;
    switch (deriv) {
        case 0:
            return a * yj + b * yn +
                   ((a * a * a - a) * mj + (b * b * b - b) * mn) * h * h / 6.0;
        case 1:
            return (yn - yj) / h - (3.0 * a * a - 1.0) / 6.0 * h * mj +
                   (3.0 * b * b - 1.0) / 6.0 * h * mn;
        default:
            return a * mj + b * mn;
    }
}

double Spline2DField::value(const SphericalChart& chart, const Vec& th) const {
    const Vec u = chart.u(th);
    return eval(std::atan2(u[1], u[0]), 0);
}

Vec Spline2DField::gradient(const SphericalChart& chart, const Vec& th) const {
    const Vec u = chart.u(th);
    // a 2D chart angle maps to the world angle with unit rate
    return {eval(std::atan2(u[1], u[0]), 1)};
}

Mat Spline2DField::hessian(const SphericalChart& chart, const Vec& th) const {
    const Vec u = chart.u(th);
    Mat h(1, 1);
    h(0, 0) = eval(std::atan2(u[1], u[0]), 2);
    return h;
}

// ---------------------------------------------------------------------------
// SphereFitField

namespace {

void gen_exponents(int dim, int total, int pos, std::vector<int>& cur,
                   std::vector<std::vector<int>>& out) {
    if (pos == dim - 1) {
        cur[pos] = total;
        out.push_back(cur);
        return;
    }
    for (int e = total; e >= 0; --e) {
        cur[pos] = e;
        gen_exponents(dim, total - e, pos + 1, cur, out);
    }
}

}  // namespace

SphereFitField::SphereFitField(const PercentileTable& table, int degree)
    : dim_(table.dim), degree_(degree) {
    if (degree < 2) throw std::invalid_argument("SphereFitField: degree must be >= 2");
    std::vector<int> cur(dim_, 0);
    gen_exponents(dim_, degree, 0, cur, exponents_);
    gen_exponents(dim_, degree - 1, 0, cur, exponents_);
    const int nb = static_cast<int>(exponents_.size());
    const int m = static_cast<int>(table.size());
    if (m < nb)
        throw std::invalid_argument("SphereFitField: table too small for the requested degree");

    // design matrix with column scaling, ridge-regularized normal equations
    Mat a(m, nb);
    for (int j = 0; j < m; ++j) {
        const Vec& u = table.directions[j];
        for (int b = 0; b < nb; ++b) {
            double v = 1.0;
            for (int k = 0; k < dim_; ++k)
                for (int e = 0; e < exponents_[b][k]; ++e) v *= u[k];
            a(j, b) = v;
        }
    }
    Vec colscale(nb, 0.0);
    for (int b = 0; b < nb; ++b) {
        double ss = 0.0;
        for (int j = 0; j < m; ++j) ss += a(j, b) * a(j, b);
        colscale[b] = std::sqrt(ss / m) + 1e-30;
        for (int j = 0; j < m; ++j) a(j, b) /= colscale[b];
    }
    Mat g(nb, nb);
    Vec rhs(nb, 0.0);
    for (int b = 0; b < nb; ++b) {
        for (int b2 = b; b2 < nb; ++b2) {
            double acc = 0.0;
            for (int j = 0; j < m; ++j) acc += a(j, b) * a(j, b2);
            g(b, b2) = g(b2, b) = acc;
        }
        for (int j = 0; j < m; ++j) rhs[b] += a(j, b) * table.values[j];
    }
    double trace = 0.0;
    for (int b = 0; b < nb; ++b) trace += g(b, b);
    const double ridge = 1e-10 * trace / nb;
    for (int b = 0; b < nb; ++b) g(b, b) += ridge;
    Mat l = g;
    if (!cholesky(l)) throw std::runtime_error("SphereFitField: normal equations not PD");
    // forward/back substitution
    Vec w(nb), cf(nb);
    for (int i = 0; i < nb; ++i) {
        double s = rhs[i];
        for (int k = 0; k < i; ++k) s -= l(i, k) * w[k];
        w[i] = s / l(i, i);
    }
    for (int i = nb - 1; i >= 0; --i) {
        double s = w[i];
        for (int k = i + 1; k < nb; ++k) s -= l(k, i) * cf[k];
        cf[i] = s / l(i, i);
    }
    coef_.resize(nb);
    for (int b = 0; b < nb; ++b) coef_[b] = cf[b] / colscale[b];

    double ss = 0.0;
    for (int j = 0; j < m; ++j) {
        const double r = value_u(table.directions[j]) - table.values[j];
        ss += r * r;
    }
    fit_rms_ = std::sqrt(ss / m);
}

void SphereFitField::eval_u(const Vec& u, double& val, Vec* grad, Mat* hess) const {
    const int n = dim_;
    // power tables u_k^e for e = 0..degree
    std::vector<Vec> pw(n, Vec(degree_ + 1, 1.0));
    for (int k = 0; k < n; ++k)
        for (int e = 1; e <= degree_; ++e) pw[k][e] = pw[k][e - 1] * u[k];

    val = 0.0;
    if (grad) grad->assign(n, 0.0);
    if (hess) *hess = Mat(n, n);
    for (size_t b = 0; b < exponents_.size(); ++b) {
        const std::vector<int>& ex = exponents_[b];
        const double c = coef_[b];
        double mono = c;
        for (int k = 0; k < n; ++k) mono *= pw[k][ex[k]];
        val += mono;
        if (!grad && !hess) continue;
        for (int k = 0; k < n; ++k) {
            if (ex[k] == 0) continue;
            double gk = c * ex[k] * pw[k][ex[k] - 1];
            for (int l = 0; l < n; ++l)
                if (l != k) gk *= pw[l][ex[l]];
            if (grad) (*grad)[k] += gk;
            if (hess) {
                // diagonal second derivative
                if (ex[k] >= 2) {
                    double hk = c * ex[k] * (ex[k] - 1) * pw[k][ex[k] - 2];
                    for (int l = 0; l < n; ++l)
                        if (l != k) hk *= pw[l][ex[l]];
                    (*hess)(k, k) += hk;
                }
                for (int l = k + 1; l < n; ++l) {
                    if (ex[l] == 0) continue;
                    double hkl = c * ex[k] * ex[l] * pw[k][ex[k] - 1] * pw[l][ex[l] - 1];
                    for (int r = 0; r < n; ++r)
                        if (r != k && r != l) hkl *= pw[r][ex[r]];
                    (*hess)(k, l) += hkl;
                    (*hess)(l, k) += hkl;
                }
            }
        }
    }
}

double SphereFitField::value_u(const Vec& u) const {
    double v;
    eval_u(u, v, nullptr, nullptr);
    return v;
}

double SphereFitField::value(const SphericalChart& chart, const Vec& th) const {
    double v;
    eval_u(chart.u(th), v, nullptr, nullptr);
    return v;
}

Vec SphereFitField::gradient(const SphericalChart& chart, const Vec& th) const {
    double v;
    Vec gu;
    eval_u(chart.u(th), v, &gu, nullptr);
    return chain_gradient(chart.jacobian(th), gu);
}

Mat SphereFitField::hessian(const SphericalChart& chart, const Vec& th) const {
    double v;
    Vec gu;
    Mat hu;
    eval_u(chart.u(th), v, &gu, &hu);
    return chain_hessian(chart.jacobian(th), chart.second_derivatives(th), gu, hu);
}

std::unique_ptr<PercentileField> interpolate_field(const PercentileTable& table, int degree) {
    if (table.dim == 2) return std::make_unique<Spline2DField>(table);
    return std::make_unique<SphereFitField>(table, degree);
}

// ---------------------------------------------------------------------------
// operations

Vec contour_point(const SphericalChart& chart, const PercentileField& field, const Vec& th) {
    if (chart.ambient >= 3 && chart.pole_margin(th) < 1e-9)
        throw chart_singularity_error("contour_point: chart singular at pole");
    const Vec u = chart.u(th);
    const Mat jac = chart.jacobian(th);
    const Mat g = chart.metric(th);
    const double c = field.value(chart, th);
    const Vec grad = field.gradient(chart, th);
    Vec w;
    if (!solve(g, grad, w))
        throw chart_singularity_error("contour_point: metric singular");
    Vec b(chart.ambient);
    for (int k = 0; k < chart.ambient; ++k) {
        double acc = c * u[k];
        for (int i = 0; i < chart.ambient - 1; ++i) acc += jac(k, i) * w[i];
        b[k] = acc;
    }
    return b;
}

std::pair<double, double> tangency_check(const SphericalChart& chart, const PercentileField& field,
                                         const Vec& th, double fd_step) {
    const Vec u = chart.u(th);
    const Vec b = contour_point(chart, field, th);
    const double r1 = std::fabs(dot(u, b) - field.value(chart, th));
    double r2sq = 0.0;
    for (int i = 0; i < chart.angle_count(); ++i) {
        Vec tp = th, tm = th;
        tp[i] += fd_step;
        tm[i] -= fd_step;
        const Vec bp = contour_point(chart, field, tp);
        const Vec bm = contour_point(chart, field, tm);
        const double di = (dot(u, bp) - dot(u, bm)) / (2.0 * fd_step);
        r2sq += di * di;
    }
    return {r1, std::sqrt(r2sq)};
}

double kappa(const SphericalChart& chart, const PercentileField& field, const Vec& th,
             const Vec& th_prime) {
    const Vec b = contour_point(chart, field, th_prime);
    return field.value(chart, th) - dot(chart.u(th), b);
}

std::vector<Vec> chart_grid(const SphericalChart& chart, int res_per_angle, double pole_eps) {
    const int m = chart.angle_count();
    std::vector<Vec> grid;
    std::vector<int> idx(m, 0);
    const auto angle_at = [&](int axis, int k) {
        if (axis == m - 1) return kTwoPi * k / res_per_angle;  // periodic, endpoint excluded
        return pole_eps + (kPi - 2.0 * pole_eps) * k / (res_per_angle - 1);
    };
    while (true) {
        Vec th(m);
        for (int a = 0; a < m; ++a) th[a] = angle_at(a, idx[a]);
        grid.push_back(std::move(th));
        int a = m - 1;
        while (a >= 0 && ++idx[a] == res_per_angle) idx[a--] = 0;
        if (a < 0) break;
    }
    return grid;
}

namespace {

ExistenceScan scan_impl(const std::vector<SphericalChart>& charts, const PercentileField& field,
                        int res, double pole_eps, bool parallel) {
    if (res < 2) throw std::invalid_argument("existence_scan: resolution too small");
    ExistenceScan out;
    out.min_kappa = 1e300;
    out.scale = 0.0;

    for (size_t ci = 0; ci < charts.size(); ++ci) {
        const SphericalChart& chart = charts[ci];
        const std::vector<Vec> grid = chart_grid(chart, res, pole_eps);
        const int gn = static_cast<int>(grid.size());
        std::vector<Vec> us(gn), bs(gn);
        Vec cs(gn);
        for (int i = 0; i < gn; ++i) {
            us[i] = chart.u(grid[i]);
            cs[i] = field.value(chart, grid[i]);
            bs[i] = contour_point(chart, field, grid[i]);
            out.scale = std::max(out.scale, std::fabs(cs[i]));
        }
        // row i: fixed th' = grid[i]; minimize over th = grid[j]
        Vec row_min(gn);
        std::vector<int> row_arg(gn);
        const int nd = chart.ambient;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(worker_count()) if (parallel)
#endif
        for (int i = 0; i < gn; ++i) {
            double best = 1e300;
            int arg = -1;
            const double* b = bs[i].data();
            for (int j = 0; j < gn; ++j) {
                const double k = cs[j] - dot(us[j].data(), b, nd);
                if (k < best) {
                    best = k;
                    arg = j;
                }
            }
            row_min[i] = best;
            row_arg[i] = arg;
        }
        for (int i = 0; i < gn; ++i) {
            if (row_min[i] < out.min_kappa) {
                out.min_kappa = row_min[i];
                out.argmin_th = grid[row_arg[i]];
                out.argmin_th_prime = grid[i];
                out.argmin_chart = static_cast<int>(ci);
                out.argmin_on_diagonal = (row_arg[i] == i);
            }
        }
    }

    const double s = std::max(1.0, out.scale);
    if (out.min_kappa >= -1e-9 * s)
        out.verdict = Verdict::admits;
    else if (out.min_kappa < -1e-6 * s)
        out.verdict = Verdict::fails;
    else
        out.verdict = Verdict::marginal;
    return out;
}

}  // namespace

ExistenceScan existence_scan(const std::vector<SphericalChart>& charts,
                             const PercentileField& field, int res_per_angle, double pole_eps) {
    return scan_impl(charts, field, res_per_angle, pole_eps, true);
}

ExistenceScan existence_scan_serial(const std::vector<SphericalChart>& charts,
                                    const PercentileField& field, int res_per_angle,
                                    double pole_eps) {
    return scan_impl(charts, field, res_per_angle, pole_eps, false);
}

double hessian_criterion(const SphericalChart& chart, const PercentileField& field, const Vec& th) {
    if (chart.ambient >= 3 && chart.pole_margin(th) < 1e-9)
        throw chart_singularity_error("hessian_criterion: chart singular at pole");
    const int m = chart.angle_count();
    const Mat g = chart.metric(th);
    const double c = field.value(chart, th);
    const Vec grad = field.gradient(chart, th);
    Mat a = field.hessian(chart, th);
    const std::vector<Mat> gamma = chart.christoffel(th);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            double corr = 0.0;
            for (int mm = 0; mm < m; ++mm) corr += gamma[mm](i, j) * grad[mm];
            a(i, j) += g(i, j) * c - corr;
        }
    return sym_eigenvalues(a)[0];
}

HessianScan hessian_scan(const std::vector<SphericalChart>& charts, const PercentileField& field,
                         int res_per_angle, double pole_eps) {
    HessianScan out;
    out.min_eig = 1e300;
    for (size_t ci = 0; ci < charts.size(); ++ci) {
        for (const Vec& th : chart_grid(charts[ci], res_per_angle, pole_eps)) {
            const double e = hessian_criterion(charts[ci], field, th);
            if (e < out.min_eig) {
                out.min_eig = e;
                out.argmin_th = th;
                out.argmin_chart = static_cast<int>(ci);
            }
        }
    }
    return out;
}

ParametricContour evaluate_contour(const SphericalChart& chart, const PercentileField& field,
                                   int res_per_angle, double pole_eps) {
    ParametricContour pc;
    for (const Vec& th : chart_grid(chart, res_per_angle, pole_eps)) {
        pc.thetas.push_back(th);
        pc.points.push_back(contour_point(chart, field, th));
    }
    return pc;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::admits: return "admits";
        case Verdict::marginal: return "marginal";
        case Verdict::fails: return "fails";
    }
    return "?";
}

}  // namespace envc
