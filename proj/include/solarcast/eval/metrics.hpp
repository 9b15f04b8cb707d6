#pragma once

#include "solarcast/core.hpp"

namespace solarcast::eval {

namespace detail {

inline void check_lengths(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size()) throw ToolError(ErrorKind::ConfigError, "prediction length does not match targets");
    if (y.empty()) throw ToolError(ErrorKind::ConfigError, "metrics need at least one observation");
}

}  // namespace detail

inline double mae(std::span<const double> y, std::span<const double> yhat) {
    detail::check_lengths(y, yhat);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - yhat[i]);
    return s / static_cast<double>(y.size());
}

inline double rmse(std::span<const double> y, std::span<const double> yhat) {
    detail::check_lengths(y, yhat);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    return std::sqrt(s / static_cast<double>(y.size()));
}

/// 1 - SSE/SST. Undefined for a constant target.
inline double r2(std::span<const double> y, std::span<const double> yhat) {
    detail::check_lengths(y, yhat);
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double sse = 0.0, sst = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        sse += (y[i] - yhat[i]) * (y[i] - yhat[i]);
        sst += (y[i] - mean) * (y[i] - mean);
    }
    if (!(sst > 0.0)) throw ToolError(ErrorKind::NonFinite, "R2 is undefined for a constant target");
    return 1.0 - sse / sst;
}

struct Metrics {
    double r2 = 0.0;
    double mae = 0.0;
    double rmse = 0.0;
};

inline Metrics compute_metrics(std::span<const double> y, std::span<const double> yhat) {
    return Metrics{r2(y, yhat), mae(y, yhat), rmse(y, yhat)};
}

enum class ScoreMetric { r2, mae, rmse };

inline constexpr std::string_view to_string(ScoreMetric m) {
    switch (m) {
        case ScoreMetric::r2: return "r2";
        case ScoreMetric::mae: return "mae";
        case ScoreMetric::rmse: return "rmse";
    }
    return "?";
}

inline ScoreMetric score_metric_from_name(std::string_view s) {
    if (s == "r2") return ScoreMetric::r2;
    if (s == "mae") return ScoreMetric::mae;
    if (s == "rmse") return ScoreMetric::rmse;
    throw ToolError(ErrorKind::ConfigError, "unknown scoring metric", std::string{s});
}

inline double metric_value(const Metrics& m, ScoreMetric which) {
    switch (which) {
        case ScoreMetric::r2: return m.r2;
        case ScoreMetric::mae: return m.mae;
        case ScoreMetric::rmse: return m.rmse;
    }
    return m.r2;
}

/// true when a beats b under `which` (higher R2, lower error).
inline bool better(double a, double b, ScoreMetric which) { return which == ScoreMetric::r2 ? a > b : a < b; }

}  // namespace solarcast::eval
