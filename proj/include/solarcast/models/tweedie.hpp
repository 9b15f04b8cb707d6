#pragma once

// Tweedie (1 < p < 2) unit deviance and its log-link derivatives.

#include "solarcast/core.hpp"

namespace solarcast::models {

struct TweedieSpec {
    double power = 1.5;
    // scalar dispersion, estimated after fitting; not used for point prediction
    double dispersion = 1.0;

    void validate() const {
        if (!(power > 1.0 && power < 2.0)) throw ToolError(ErrorKind::ConfigError, "tweedie power must lie in (1,2)");
    }
};

/// d(y, mu) = 2 [ y^(2-p)/((1-p)(2-p)) - y mu^(1-p)/(1-p) + mu^(2-p)/(2-p) ]
inline double tweedie_deviance(double y, double mu, double p) {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw ToolError(ErrorKind::NonFinite, "tweedie mean must be positive");
    if (y < 0.0 || !std::isfinite(y)) throw ToolError(ErrorKind::NonFinite, "tweedie response must be non-negative");
    const double a = 1.0 - p, b = 2.0 - p;
    const double yterm = y > 0.0 ? std::pow(y, b) / (a * b) : 0.0;
    const double d = 2.0 * (yterm - y * std::pow(mu, a) / a + std::pow(mu, b) / b);
    return std::max(0.0, d);
}

/// Half deviance at log-mean F, without the mu-free term. Differs from
/// tweedie_deviance(y, exp(F), p)/2 by a constant in F.
inline double tweedie_log_link_loss(double y, double F, double p) {
    return -y * std::exp((1.0 - p) * F) / (1.0 - p) + std::exp((2.0 - p) * F) / (2.0 - p);
}

inline double tweedie_gradient(double y, double F, double p) {
    return -y * std::exp((1.0 - p) * F) + std::exp((2.0 - p) * F);
}

inline double tweedie_hessian(double y, double F, double p) {
    return -(1.0 - p) * y * std::exp((1.0 - p) * F) + (2.0 - p) * std::exp((2.0 - p) * F);
}

/// phi = sum d / (n - dof)
inline double estimate_dispersion(std::span<const double> y, std::span<const double> mu, double p, std::size_t dof) {
    if (y.size() != mu.size() || y.size() <= dof) return 1.0;
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += tweedie_deviance(y[i], mu[i], p);
    return s / static_cast<double>(y.size() - dof);
}

}  // namespace solarcast::models
