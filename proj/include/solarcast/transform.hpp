#pragma once

// Yeo-Johnson power transform: per-column maximum-likelihood lambda, forward
// and inverse maps, and standardization with train-set constants.

#include "solarcast/core.hpp"

#include <limits>
#include <numbers>

namespace solarcast::transform {

inline constexpr double kLambdaMin = -5.0;
inline constexpr double kLambdaMax = 5.0;
inline constexpr double kSingularTol = 1e-8;

namespace detail {

inline bool near_zero(double lambda) noexcept { return std::abs(lambda) < kSingularTol; }
inline bool near_two(double lambda) noexcept { return std::abs(lambda - 2.0) < kSingularTol; }

inline double checked(double v) {
    if (!std::isfinite(v)) throw ToolError(ErrorKind::NonFinite, "power transform overflow");
    return v;
}

}  // namespace detail

inline double yeo_johnson(double x, double lambda) {
    if (!std::isfinite(x) || !std::isfinite(lambda)) throw ToolError(ErrorKind::NonFinite, "non-finite input");
    if (x >= 0.0) {
        if (detail::near_zero(lambda)) return std::log1p(x);
        return detail::checked(std::expm1(lambda * std::log1p(x)) / lambda);
    }
    if (detail::near_two(lambda)) return -std::log1p(-x);
    const double a = 2.0 - lambda;
    return detail::checked(-std::expm1(a * std::log1p(-x)) / a);
}

/// Inverse map. The image of the forward map is bounded above by -1/lambda
/// when lambda < 0 and below by -1/(lambda-2) when lambda > 2.
inline double yeo_johnson_inverse(double y, double lambda) {
    if (!std::isfinite(y) || !std::isfinite(lambda)) throw ToolError(ErrorKind::NonFinite, "non-finite input");
    if (y >= 0.0) {
        if (detail::near_zero(lambda)) return detail::checked(std::expm1(y));
        const double base = lambda * y + 1.0;
        if (!(base > 0.0)) throw ToolError(ErrorKind::NonFinite, "value outside the transform image");
        return detail::checked(std::expm1(std::log(base) / lambda));
    }
    if (detail::near_two(lambda)) return detail::checked(-std::expm1(-y));
    const double a = 2.0 - lambda;
    const double base = 1.0 - a * y;
    if (!(base > 0.0)) throw ToolError(ErrorKind::NonFinite, "value outside the transform image");
    return detail::checked(-std::expm1(std::log(base) / a));
}

/// Largest open interval (lo, hi) the inverse accepts for this lambda.
inline std::pair<double, double> image_bounds(double lambda) noexcept {
    constexpr double inf = std::numeric_limits<double>::infinity();
    double lo = -inf, hi = inf;
    if (lambda < 0.0 && !detail::near_zero(lambda)) hi = -1.0 / lambda;
    if (lambda > 2.0 && !detail::near_two(lambda)) lo = -1.0 / (lambda - 2.0);
    return {lo, hi};
}

/// Profile log-likelihood of lambda under a normal model for the transformed
/// column: -(n/2) ln(var) + (lambda - 1) * sum sign(x) ln(|x| + 1).
/// Returns -inf when the transformed column overflows or collapses.
inline double yeo_johnson_log_likelihood(std::span<const double> x, double lambda) {
    const auto n = static_cast<double>(x.size());
    double mean = 0.0;
    double jacobian = 0.0;
    std::vector<double> t(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        if (xi >= 0.0) {
            t[i] = detail::near_zero(lambda) ? std::log1p(xi) : std::expm1(lambda * std::log1p(xi)) / lambda;
            jacobian += std::log1p(xi);
        } else {
            const double a = 2.0 - lambda;
            t[i] = detail::near_two(lambda) ? -std::log1p(-xi) : -std::expm1(a * std::log1p(-xi)) / a;
            jacobian -= std::log1p(-xi);
        }
        if (!std::isfinite(t[i])) return -std::numeric_limits<double>::infinity();
        mean += t[i];
    }
    mean /= n;
    double var = 0.0;
    for (double v : t) var += (v - mean) * (v - mean);
    var /= n;
    if (!(var > 0.0) || !std::isfinite(var)) return -std::numeric_limits<double>::infinity();
    return -0.5 * n * std::log(var) + (lambda - 1.0) * jacobian;
}

struct LambdaFit {
    double lambda = 1.0;
    double log_likelihood = 0.0;
    bool at_boundary = false;
};

/// Maximizes the profile log-likelihood over [-5, 5]: grid with step 0.1,
/// then golden-section search on the bracket around the best grid point.
inline LambdaFit fit_lambda(std::span<const double> column) {
    std::size_t finite = 0;
    for (double v : column) {
        if (!std::isfinite(v)) throw ToolError(ErrorKind::NonFinite, "non-finite value in column");
        ++finite;
    }
    if (finite < 3) throw ToolError(ErrorKind::ConvergenceFailure, "need at least 3 values to fit lambda");
    const auto [mn, mx] = std::minmax_element(column.begin(), column.end());
    if (*mn == *mx) throw ToolError(ErrorKind::ConvergenceFailure, "constant column has a flat likelihood");

    auto ll = [&](double lam) { return yeo_johnson_log_likelihood(column, lam); };

    constexpr int steps = 100;
    double best_lambda = kLambdaMin;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= steps; ++k) {
        const double lam = kLambdaMin + (kLambdaMax - kLambdaMin) * k / steps;
        const double v = ll(lam);
        if (v > best_ll) {
            best_ll = v;
            best_lambda = lam;
        }
    }
    if (!std::isfinite(best_ll)) throw ToolError(ErrorKind::NonFinite, "log-likelihood non-finite on the whole grid");

    double a = std::max(kLambdaMin, best_lambda - 0.1);
    double b = std::min(kLambdaMax, best_lambda + 0.1);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = ll(c), fd = ll(d);
    while (b - a > 1e-6) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = ll(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = ll(d);
        }
    }
    LambdaFit fit;
    fit.lambda = 0.5 * (a + b);
    fit.log_likelihood = ll(fit.lambda);
    if (fit.log_likelihood < best_ll) {
        fit.lambda = best_lambda;
        fit.log_likelihood = best_ll;
    }
    fit.at_boundary = fit.lambda - kLambdaMin < 1e-3 || kLambdaMax - fit.lambda < 1e-3;
    return fit;
}

/// Per-column parameters. A column that cannot be fitted (constant) passes
/// through untouched with `transformed == false`.
struct ColumnParams {
    bool transformed = true;
    double lambda = 1.0;
    double mean = 0.0;
    double sd = 1.0;
    double log_likelihood = 0.0;
};

struct PowerTransformParams {
    std::vector<ColumnParams> columns;

    std::size_t size() const noexcept { return columns.size(); }
    friend bool operator==(const PowerTransformParams& a, const PowerTransformParams& b) {
        if (a.columns.size() != b.columns.size()) return false;
        for (std::size_t j = 0; j < a.columns.size(); ++j) {
            const auto &x = a.columns[j], &y = b.columns[j];
            if (x.transformed != y.transformed || x.lambda != y.lambda || x.mean != y.mean || x.sd != y.sd) return false;
        }
        return true;
    }
};

inline ColumnParams fit_column(std::span<const double> column) {
    const auto [mn, mx] = std::minmax_element(column.begin(), column.end());
    if (column.size() < 3 || *mn == *mx) return ColumnParams{false, 1.0, 0.0, 1.0, 0.0};
    const auto fit = fit_lambda(column);
    ColumnParams p;
    p.lambda = fit.lambda;
    p.log_likelihood = fit.log_likelihood;
    double mean = 0.0;
    std::vector<double> t(column.size());
    for (std::size_t i = 0; i < column.size(); ++i) {
        t[i] = yeo_johnson(column[i], p.lambda);
        mean += t[i];
    }
    mean /= static_cast<double>(t.size());
    double var = 0.0;
    for (double v : t) var += (v - mean) * (v - mean);
    var /= static_cast<double>(t.size());
    if (!(var > 0.0)) return ColumnParams{false, 1.0, 0.0, 1.0, 0.0};
    p.mean = mean;
    p.sd = std::sqrt(var);
    return p;
}

inline double apply_value(const ColumnParams& p, double x) {
    if (!p.transformed) return x;
    return (yeo_johnson(x, p.lambda) - p.mean) / p.sd;
}

inline double invert_value(const ColumnParams& p, double z) {
    if (!p.transformed) return z;
    return yeo_johnson_inverse(z * p.sd + p.mean, p.lambda);
}

/// Inverse for model outputs, which may stray outside the forward image:
/// values past an image bound are pulled just inside it.
inline double invert_value_clamped(const ColumnParams& p, double z) {
    if (!p.transformed) return z;
    double y = z * p.sd + p.mean;
    const auto [lo, hi] = image_bounds(p.lambda);
    if (y >= hi) y = std::nextafter(hi, 0.0) - 1e-12 * std::abs(hi);
    if (y <= lo) y = std::nextafter(lo, 0.0) + 1e-12 * std::abs(lo);
    return yeo_johnson_inverse(y, p.lambda);
}

inline PowerTransformParams fit_transformer(const Matrix& X) {
    PowerTransformParams params;
    for (std::size_t j = 0; j < X.cols(); ++j) {
        const auto col = X.column(j);
        params.columns.push_back(fit_column(col));
    }
    return params;
}

inline Matrix apply(const PowerTransformParams& params, const Matrix& X) {
    if (params.size() != X.cols()) throw ToolError(ErrorKind::SchemaError, "transform column count mismatch");
    Matrix out(X.rows(), X.cols());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        for (std::size_t j = 0; j < X.cols(); ++j) out(i, j) = apply_value(params.columns[j], X(i, j));
    }
    return out;
}

inline Matrix invert(const PowerTransformParams& params, const Matrix& Z) {
    if (params.size() != Z.cols()) throw ToolError(ErrorKind::SchemaError, "transform column count mismatch");
    Matrix out(Z.rows(), Z.cols());
    for (std::size_t i = 0; i < Z.rows(); ++i) {
        for (std::size_t j = 0; j < Z.cols(); ++j) out(i, j) = invert_value(params.columns[j], Z(i, j));
    }
    return out;
}

inline std::vector<double> apply_column(const ColumnParams& p, std::span<const double> x) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = apply_value(p, x[i]);
    return out;
}

inline std::vector<double> invert_column_clamped(const ColumnParams& p, std::span<const double> z) {
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = invert_value_clamped(p, z[i]);
    return out;
}

}  // namespace solarcast::transform
