#pragma once

#include <stdexcept>

namespace envc {

// Standard normal CDF.
double norm_cdf(double x);

// Standard normal quantile, Wichura's AS 241 (PPND16, ~1e-15 relative).
// Throws std::invalid_argument outside (0, 1).
double norm_quantile(double p);

// Three-parameter Weibull: scale alpha > 0, shape beta > 0, location gamma.
struct Weibull3P {
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 0.0;

    void validate() const {
        if (!(alpha > 0.0) || !(beta > 0.0))
            throw std::invalid_argument("Weibull3P: alpha and beta must be positive");
    }
    double quantile(double p) const;  // gamma + alpha * (-ln(1-p))^(1/beta)
    double cdf(double x) const;
    double pdf(double x) const;
};

}  // namespace envc
