#pragma once

// Two-part (hurdle) model for zero-inflated responses: a gate estimating the
// probability pi(x) of a zero, and a positive-part model for the mean mu(x)
// of the non-zero response. E[Y | x] = (1 - pi(x)) * mu(x).

#include "solarcast/models/boosting.hpp"
#include "solarcast/models/forest.hpp"
#include "solarcast/models/linear.hpp"

#include <variant>

namespace solarcast::models {

enum class GateKind { logistic, boosted, forest };
enum class PositiveKind { boosted_tweedie, forest, log_linear };

/// Linear model on log(y) for y > 0. Duan's smearing factor maps the
/// log-scale fit back to a mean.
struct LogLinearModel {
    LinearModel log_model;
    double smearing = 1.0;

    double predict_row(std::span<const double> x) const { return std::exp(log_model.predict_row(x)) * smearing; }

    friend bool operator==(const LogLinearModel&, const LogLinearModel&) = default;
};

using GateModel = std::variant<LogisticModel, BoostedModel, ForestModel>;
using PositiveModel = std::variant<BoostedModel, ForestModel, LogLinearModel>;

struct ZeroInflatedModel {
    GateModel gate;
    PositiveModel positive;
    std::size_t n_features = 0;
    // share of zeros in the training response
    double zero_fraction = 0.0;

    double zero_probability(std::span<const double> x) const {
        const double pi = std::visit([&](const auto& g) { return g.predict_row(x); }, gate);
        return std::clamp(pi, 0.0, 1.0);
    }

    double positive_mean(std::span<const double> x) const {
        const double mu = std::visit([&](const auto& m) { return m.predict_row(x); }, positive);
        return std::max(mu, 0.0);
    }

    double predict_row(std::span<const double> x) const { return (1.0 - zero_probability(x)) * positive_mean(x); }

    std::vector<double> predict(const Matrix& X) const {
        if (X.cols() != n_features) throw ToolError(ErrorKind::SchemaError, "zero-inflated model feature count mismatch");
        std::vector<double> out(X.rows());
        for (std::size_t i = 0; i < X.rows(); ++i) {
            out[i] = predict_row(X.row(i));
            if (!std::isfinite(out[i])) throw ToolError(ErrorKind::NonFinite, "non-finite zero-inflated prediction");
        }
        return out;
    }

    friend bool operator==(const ZeroInflatedModel&, const ZeroInflatedModel&) = default;
};

struct ZeroInflatedParams {
    GateKind gate = GateKind::logistic;
    PositiveKind positive = PositiveKind::boosted_tweedie;
    BoostParams gate_boost{};
    BoostParams positive_boost{};
    ForestParams forest{};
    LogisticOptions logistic{};
    double l2 = 0.0;
};

inline LogLinearModel fit_log_linear(const Matrix& X, std::span<const double> y, double l2 = 0.0) {
    std::vector<double> logy(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] > 0.0)) throw ToolError(ErrorKind::ConfigError, "log-linear model needs a positive response");
        logy[i] = std::log(y[i]);
    }
    LogLinearModel m;
    m.log_model = fit_linear(X, logy, l2);
    const auto fitted = m.log_model.predict(X);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += std::exp(logy[i] - fitted[i]);
    m.smearing = s / static_cast<double>(y.size());
    return m;
}

/// Gate on z = 1{y == 0} over all rows, positive part on the y > 0 rows only.
inline ZeroInflatedModel fit_zero_inflated(const Matrix& X, std::span<const double> y, const ZeroInflatedParams& params) {
    if (y.size() != X.rows() || y.empty()) throw ToolError(ErrorKind::ConfigError, "target length does not match rows");
    std::vector<double> z(y.size());
    std::vector<std::size_t> positive_rows;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 0.0 || !std::isfinite(y[i])) throw ToolError(ErrorKind::ConfigError, "zero-inflated response must be non-negative");
        z[i] = y[i] == 0.0 ? 1.0 : 0.0;
        if (y[i] > 0.0) positive_rows.push_back(i);
    }
    if (positive_rows.size() == y.size()) throw ToolError(ErrorKind::ConfigError, "zero-inflated model needs zeros in the response");
    if (positive_rows.empty()) throw ToolError(ErrorKind::ConfigError, "zero-inflated model needs positive responses");

    ZeroInflatedModel m;
    m.n_features = X.cols();
    m.zero_fraction = 1.0 - static_cast<double>(positive_rows.size()) / static_cast<double>(y.size());

    switch (params.gate) {
        case GateKind::logistic: m.gate = fit_logistic(X, z, params.logistic); break;
        case GateKind::boosted: {
            auto bp = params.gate_boost;
            bp.loss = Loss::logistic;
            m.gate = fit_gbm(X, z, bp);
            break;
        }
        case GateKind::forest: {
            auto fp = params.forest;
            fp.seed = derive_seed(params.forest.seed, "gate");
            m.gate = fit_forest(X, z, fp);
            break;
        }
    }

    const Matrix Xp = X.select_rows(positive_rows);
    std::vector<double> yp;
    yp.reserve(positive_rows.size());
    for (auto i : positive_rows) yp.push_back(y[i]);
    switch (params.positive) {
        case PositiveKind::boosted_tweedie: {
            auto bp = params.positive_boost;
            bp.loss = Loss::tweedie;
            m.positive = fit_gbm(Xp, yp, bp);
            break;
        }
        case PositiveKind::forest: {
            auto fp = params.forest;
            fp.seed = derive_seed(params.forest.seed, "positive");
            m.positive = fit_forest(Xp, yp, fp);
            break;
        }
        case PositiveKind::log_linear: m.positive = fit_log_linear(Xp, yp, params.l2); break;
    }
    return m;
}

}  // namespace solarcast::models
