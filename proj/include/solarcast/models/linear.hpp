#pragma once

// Ordinary least squares with optional ridge penalty, and logistic
// regression by iteratively reweighted least squares.

#include "solarcast/core.hpp"

#include <Eigen/Dense>

namespace solarcast::models {

struct LinearModel {
    double intercept = 0.0;
    std::vector<double> coefficients;
    double l2 = 0.0;

    double predict_row(std::span<const double> x) const {
        double s = intercept;
        for (std::size_t j = 0; j < coefficients.size(); ++j) s += coefficients[j] * x[j];
        return s;
    }

    std::vector<double> predict(const Matrix& X) const {
        if (X.cols() != coefficients.size()) throw ToolError(ErrorKind::SchemaError, "linear model feature count mismatch");
        std::vector<double> out(X.rows());
        for (std::size_t i = 0; i < X.rows(); ++i) {
            out[i] = predict_row(X.row(i));
            if (!std::isfinite(out[i])) throw ToolError(ErrorKind::NonFinite, "non-finite linear prediction");
        }
        return out;
    }

    friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

namespace detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// [1 | X] with ridge rows sqrt(l2) * e_j appended for every non-intercept column.
inline Eigen::MatrixXd design(const Matrix& X, double l2) {
    const auto n = static_cast<Eigen::Index>(X.rows());
    const auto d = static_cast<Eigen::Index>(X.cols());
    const Eigen::Index extra = l2 > 0.0 ? d : 0;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + extra, d + 1);
    A.block(0, 0, n, 1).setOnes();
    if (n > 0 && d > 0) {
        A.block(0, 1, n, d) = Eigen::Map<const RowMatrix>(X.data().data(), n, d);
    }
    for (Eigen::Index j = 0; j < extra; ++j) A(n + j, j + 1) = std::sqrt(l2);
    return A;
}

}  // namespace detail

/// Minimizes ||y - b0 - X b||^2 + l2 ||b||^2 through a column-pivoted
/// Householder QR of the (augmented) design matrix.
inline LinearModel fit_linear(const Matrix& X, std::span<const double> y, double l2 = 0.0) {
    if (y.size() != X.rows()) throw ToolError(ErrorKind::ConfigError, "target length does not match rows");
    if (l2 < 0.0) throw ToolError(ErrorKind::ConfigError, "l2 penalty must be non-negative");
    if (l2 == 0.0 && X.rows() <= X.cols()) {
        throw ToolError(ErrorKind::SingularMatrix, "need more rows than features without a ridge penalty");
    }
    const auto A = detail::design(X, l2);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(A.rows());
    for (std::size_t i = 0; i < y.size(); ++i) b(static_cast<Eigen::Index>(i)) = y[i];

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < A.cols()) throw ToolError(ErrorKind::SingularMatrix, "design matrix is rank deficient");
    const Eigen::VectorXd beta = qr.solve(b);

    LinearModel m;
    m.l2 = l2;
    m.intercept = beta(0);
    m.coefficients.resize(X.cols());
    for (std::size_t j = 0; j < X.cols(); ++j) m.coefficients[j] = beta(static_cast<Eigen::Index>(j + 1));
    for (double c : m.coefficients) {
        if (!std::isfinite(c)) throw ToolError(ErrorKind::NonFinite, "non-finite coefficient");
    }
    return m;
}

// ------------------------------------------------------------
// logistic regression
// ------------------------------------------------------------

struct LogisticModel {
    double intercept = 0.0;
    std::vector<double> coefficients;
    bool converged = true;
    std::size_t iterations = 0;

    double logit(std::span<const double> x) const {
        double s = intercept;
        for (std::size_t j = 0; j < coefficients.size(); ++j) s += coefficients[j] * x[j];
        return s;
    }

    /// P(z = 1 | x), strictly inside (0, 1).
    double predict_row(std::span<const double> x) const {
        constexpr double eps = 1e-15;
        const double s = logit(x);
        const double p = s >= 0.0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
        return std::clamp(p, eps, 1.0 - eps);
    }

    std::vector<double> predict(const Matrix& X) const {
        if (X.cols() != coefficients.size()) throw ToolError(ErrorKind::SchemaError, "logistic model feature count mismatch");
        std::vector<double> out(X.rows());
        for (std::size_t i = 0; i < X.rows(); ++i) out[i] = predict_row(X.row(i));
        return out;
    }

    friend bool operator==(const LogisticModel& a, const LogisticModel& b) {
        return a.intercept == b.intercept && a.coefficients == b.coefficients;
    }
};

struct LogisticOptions {
    std::size_t max_iterations = 100;
    double tolerance = 1e-8;
    // throw ConvergenceFailure instead of returning the last iterate
    bool strict = false;
};

/// Bernoulli maximum likelihood by IRLS. Under (quasi-)separation the
/// coefficients diverge; the last finite iterate is returned with
/// `converged == false` unless `strict` is set.
inline LogisticModel fit_logistic(const Matrix& X, std::span<const double> z, const LogisticOptions& opts = {}) {
    if (z.size() != X.rows() || z.empty()) throw ToolError(ErrorKind::ConfigError, "label length does not match rows");
    std::size_t ones = 0;
    for (double v : z) {
        if (v != 0.0 && v != 1.0) throw ToolError(ErrorKind::ConfigError, "labels must be 0 or 1");
        ones += v == 1.0 ? 1 : 0;
    }
    if (ones == 0 || ones == z.size()) throw ToolError(ErrorKind::ConfigError, "logistic regression needs both classes");

    const auto A = detail::design(X, 0.0);
    const auto n = A.rows();
    const auto d = A.cols();
    Eigen::VectorXd zt(n);
    for (Eigen::Index i = 0; i < n; ++i) zt(i) = z[static_cast<std::size_t>(i)];

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
    const double base = static_cast<double>(ones) / static_cast<double>(z.size());
    theta(0) = std::log(base / (1.0 - base));
    bool converged = false;
    std::size_t it = 0;
    for (; it < opts.max_iterations; ++it) {
        const Eigen::VectorXd eta = A * theta;
        Eigen::VectorXd p(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double e = eta(i);
            p(i) = e >= 0.0 ? 1.0 / (1.0 + std::exp(-e)) : std::exp(e) / (1.0 + std::exp(e));
            w(i) = std::max(p(i) * (1.0 - p(i)), 1e-12);
        }
        const Eigen::MatrixXd H = A.transpose() * w.asDiagonal() * A + 1e-10 * Eigen::MatrixXd::Identity(d, d);
        const Eigen::VectorXd g = A.transpose() * (zt - p);
        const Eigen::VectorXd step = H.ldlt().solve(g);
        if (!step.allFinite()) break;
        const Eigen::VectorXd next = theta + step;
        if (!next.allFinite()) break;
        const double change = step.cwiseAbs().maxCoeff();
        theta = next;
        if (change < opts.tolerance) {
            converged = true;
            ++it;
            break;
        }
    }
    if (!converged && opts.strict) {
        throw ToolError(ErrorKind::ConvergenceFailure, "IRLS did not converge (possible separation)");
    }
    LogisticModel m;
    m.intercept = theta(0);
    m.coefficients.resize(X.cols());
    for (std::size_t j = 0; j < X.cols(); ++j) m.coefficients[j] = theta(static_cast<Eigen::Index>(j + 1));
    m.converged = converged;
    m.iterations = it;
    return m;
}

}  // namespace solarcast::models
