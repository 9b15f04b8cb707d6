#pragma once

#include "solarcast/models/boosting.hpp"
#include "solarcast/models/forest.hpp"

namespace solarcast::models {

/// Weighted average of a random forest and a boosted model.
struct AveragingEnsemble {
    ForestModel forest;
    BoostedModel boosted;
    double forest_weight = 0.5;
    double boosted_weight = 0.5;

    double predict_row(std::span<const double> x) const {
        return forest_weight * forest.predict_row(x) + boosted_weight * boosted.predict_row(x);
    }

    std::vector<double> predict(const Matrix& X) const {
        const auto a = forest.predict(X);
        const auto b = boosted.predict(X);
        std::vector<double> out(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) out[i] = forest_weight * a[i] + boosted_weight * b[i];
        return out;
    }

    friend bool operator==(const AveragingEnsemble&, const AveragingEnsemble&) = default;
};

inline void check_ensemble_weights(std::span<const double> weights) {
    if (weights.size() != 2) throw ToolError(ErrorKind::ConfigError, "ensemble needs exactly two weights");
    double s = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ToolError(ErrorKind::ConfigError, "ensemble weights must be non-negative");
        s += w;
    }
    if (std::abs(s - 1.0) > 1e-9) throw ToolError(ErrorKind::ConfigError, "ensemble weights must sum to 1");
}

inline AveragingEnsemble make_ensemble(ForestModel forest, BoostedModel boosted, std::span<const double> weights) {
    check_ensemble_weights(weights);
    if (forest.n_features != boosted.n_features) {
        throw ToolError(ErrorKind::SchemaError, "ensemble members were trained on different feature schemas");
    }
    return AveragingEnsemble{std::move(forest), std::move(boosted), weights[0], weights[1]};
}

struct EnsembleParams {
    ForestParams forest{};
    BoostParams boosted = BoostParams::second_order_defaults();
    std::vector<double> weights{0.5, 0.5};
};

inline AveragingEnsemble fit_ensemble(const Matrix& X, std::span<const double> y, const EnsembleParams& params) {
    check_ensemble_weights(params.weights);
    return make_ensemble(fit_forest(X, y, params.forest), fit_gbm(X, y, params.boosted), params.weights);
}

}  // namespace solarcast::models
