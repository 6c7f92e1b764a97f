#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "envcontour/linalg.hpp"
#include "envcontour/percentile.hpp"

namespace envc {

// Standard spherical chart of the unit (n-1)-sphere, optionally rotated:
//   u_k = cos(th_k) prod_{j<k} sin(th_j),  u_{n-1} = prod_{j<=n-2} sin(th_j)
// with th_0..th_{n-3} in (0, pi) and th_{n-2} in [0, 2pi). The induced metric
// is diagonal with g_00 = 1 and g_ii = prod_{j<i} sin^2(th_j).
struct SphericalChart {
    int ambient = 2;  // n
    Mat rotation;     // n x n orthogonal; world u = rotation * u_chart

    int angle_count() const { return ambient - 1; }

    Vec u(const Vec& th) const;
    Mat jacobian(const Vec& th) const;                       // n x (n-1)
    std::vector<Mat> second_derivatives(const Vec& th) const;  // per ambient component
    Mat metric(const Vec& th) const;                         // jac^T jac
    Mat metric_closed_form(const Vec& th) const;
    std::vector<Mat> christoffel(const Vec& th) const;       // Gamma^m_ij, one matrix per m

    // distance of any non-azimuthal angle from {0, pi}
    double pole_margin(const Vec& th) const;

    static SphericalChart standard(int n);
    // chart rotated so the standard chart's poles land on its equator
    static SphericalChart rotated(int n);
    static std::vector<SphericalChart> atlas(int n);
};

// Percentile function over the sphere with derivatives in chart angles.
class PercentileField {
public:
    virtual ~PercentileField() = default;
    virtual int ambient_dim() const = 0;
    virtual double value(const SphericalChart& chart, const Vec& th) const = 0;
    virtual Vec gradient(const SphericalChart& chart, const Vec& th) const = 0;
    virtual Mat hessian(const SphericalChart& chart, const Vec& th) const = 0;
};

// Closed-form Gaussian backing: C = u.mean + z sqrt(u' cov u).
class GaussianField : public PercentileField {
public:
    GaussianField(Vec mean, Mat cov, double pe);
    int ambient_dim() const override { return static_cast<int>(mean_.size()); }
    double value(const SphericalChart&, const Vec& th) const override;
    Vec gradient(const SphericalChart&, const Vec& th) const override;
    Mat hessian(const SphericalChart&, const Vec& th) const override;

private:
    void eval_u(const Vec& u, double& val, Vec& grad, Mat& hess) const;
    Vec mean_;
    Mat cov_;
    double z_;
};

// Periodic cubic spline through a 2D percentile table.
class Spline2DField : public PercentileField {
public:
    explicit Spline2DField(const PercentileTable& table);
    int ambient_dim() const override { return 2; }
    double value(const SphericalChart&, const Vec& th) const override;
    Vec gradient(const SphericalChart&, const Vec& th) const override;
    Mat hessian(const SphericalChart&, const Vec& th) const override;

    double eval(double angle, int deriv) const;  // deriv in {0, 1, 2}

private:
    Vec knots_;  // ascending angles in [0, 2pi)
    Vec y_;
    Vec m_;  // second derivatives at the knots
};

// Least-squares harmonic fit of a table on the (n-1)-sphere, realized as the
// homogeneous monomials of degree L and L-1 restricted to the sphere (the same
// function space as spherical harmonics up to degree L). Twice differentiable.
class SphereFitField : public PercentileField {
public:
    SphereFitField(const PercentileTable& table, int degree = 12);
    int ambient_dim() const override { return dim_; }
    double value(const SphericalChart&, const Vec& th) const override;
    Vec gradient(const SphericalChart&, const Vec& th) const override;
    Mat hessian(const SphericalChart&, const Vec& th) const override;

    double value_u(const Vec& u) const;
    double fit_rms() const { return fit_rms_; }

private:
    void eval_u(const Vec& u, double& val, Vec* grad, Mat* hess) const;
    int dim_ = 3;
    int degree_ = 12;
    std::vector<std::vector<int>> exponents_;
    Vec coef_;
    double fit_rms_ = 0.0;
};

// Builds the smoother the CLI uses: periodic spline in 2D, sphere fit in 3D+.
std::unique_ptr<PercentileField> interpolate_field(const PercentileTable& table, int degree = 12);

// b(th) = C u + Jac g^{-1} (grad C)^T. Throws chart_singularity_error at poles.
Vec contour_point(const SphericalChart& chart, const PercentileField& field, const Vec& th);

// Residual pair (|u.b - C|, ||u^T d(b)/d(th)|| via central differences).
std::pair<double, double> tangency_check(const SphericalChart& chart, const PercentileField& field,
                                         const Vec& th, double fd_step);

// kappa(th | th') = C(th) - u(th) . b(th')
double kappa(const SphericalChart& chart, const PercentileField& field, const Vec& th,
             const Vec& th_prime);

enum class Verdict { admits, marginal, fails };

struct ExistenceScan {
    double min_kappa = 0.0;
    Vec argmin_th, argmin_th_prime;
    int argmin_chart = 0;
    bool argmin_on_diagonal = false;
    double scale = 1.0;  // max |C| over the grid
    Verdict verdict = Verdict::marginal;
};

// Grid scan of kappa over all (th, th') pairs per chart; the diagonal is part
// of the grid, so the Theorem-level minimum location check is exact there.
ExistenceScan existence_scan(const std::vector<SphericalChart>& charts,
                             const PercentileField& field, int res_per_angle,
                             double pole_eps = 1e-3);
ExistenceScan existence_scan_serial(const std::vector<SphericalChart>& charts,
                                    const PercentileField& field, int res_per_angle,
                                    double pole_eps = 1e-3);

// Smallest eigenvalue of Hess(C) + g C at th, with the covariant Hessian
// Hess_ij = d2C/dth_i dth_j - Gamma^m_ij dC/dth_m.
double hessian_criterion(const SphericalChart& chart, const PercentileField& field, const Vec& th);

struct HessianScan {
    double min_eig = 0.0;
    Vec argmin_th;
    int argmin_chart = 0;
};

HessianScan hessian_scan(const std::vector<SphericalChart>& charts, const PercentileField& field,
                         int res_per_angle, double pole_eps = 1e-3);

struct ParametricContour {
    std::vector<Vec> thetas;
    std::vector<Vec> points;
};

ParametricContour evaluate_contour(const SphericalChart& chart, const PercentileField& field,
                                   int res_per_angle, double pole_eps = 1e-3);

// Chart grid used by the scans: non-azimuthal angles clamped to
// [pole_eps, pi - pole_eps], azimuthal angle uniform over [0, 2pi).
std::vector<Vec> chart_grid(const SphericalChart& chart, int res_per_angle, double pole_eps);

const char* to_string(Verdict v);

}  // namespace envc
