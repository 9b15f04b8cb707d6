#pragma once

// A fitted forecasting pipeline: optional power transforms around one model,
// plus evaluation, cross-validation and grid search over pipelines.

#include "solarcast/eval/metrics.hpp"
#include "solarcast/features.hpp"
#include "solarcast/models/model.hpp"
#include "solarcast/transform.hpp"

namespace solarcast::eval {

enum class Methodology { regular, zero_inflated, power_transform };

inline constexpr std::string_view to_string(Methodology m) {
    switch (m) {
        case Methodology::regular: return "regular";
        case Methodology::zero_inflated: return "zero_inflated";
        case Methodology::power_transform: return "power_transform";
    }
    return "?";
}

inline Methodology methodology_from_name(std::string_view s) {
    if (s == "regular") return Methodology::regular;
    if (s == "zero_inflated") return Methodology::zero_inflated;
    if (s == "power_transform") return Methodology::power_transform;
    throw ToolError(ErrorKind::ConfigError, "unknown methodology", std::string{s});
}

enum class MetricScale { raw, transformed, inverse_transformed };

inline constexpr std::string_view to_string(MetricScale s) {
    switch (s) {
        case MetricScale::raw: return "raw";
        case MetricScale::transformed: return "transformed";
        case MetricScale::inverse_transformed: return "inverse_transformed";
    }
    return "?";
}

struct EvalReport {
    std::string model;
    Methodology methodology = Methodology::regular;
    int horizon_hours = 24;
    double r2 = 0.0;
    double mae = 0.0;
    double rmse = 0.0;
    MetricScale metric_scale = MetricScale::raw;
};

struct PipelineSpec {
    Methodology methodology = Methodology::regular;
    models::ModelKind kind = models::ModelKind::LinearRegression;
    models::Hyperparameters hyperparameters;
    // power-transform methodology only
    bool transform_features = true;
    bool transform_target = true;
};

struct FittedPipeline {
    Methodology methodology = Methodology::regular;
    std::string model_name;
    int horizon_hours = 24;
    std::vector<std::string> feature_names;
    std::optional<transform::PowerTransformParams> feature_transform;
    std::optional<transform::ColumnParams> target_transform;
    models::AnyModel model;

    Matrix prepare(const Matrix& X) const {
        if (X.cols() != feature_names.size()) throw ToolError(ErrorKind::SchemaError, "pipeline feature count mismatch");
        return feature_transform ? transform::apply(*feature_transform, X) : X;
    }

    /// Predictions on the scale the model was trained on.
    std::vector<double> predict_model_scale(const Matrix& X) const { return models::predict(model, prepare(X)); }

    /// Predictions on the raw generation scale.
    std::vector<double> predict_raw(const Matrix& X) const {
        auto z = predict_model_scale(X);
        if (target_transform) z = transform::invert_column_clamped(*target_transform, z);
        return z;
    }
};

inline FittedPipeline fit_pipeline(const PipelineSpec& spec, const SupervisedDataset& train, std::uint64_t seed) {
    require_finite(train);
    FittedPipeline p;
    p.methodology = spec.methodology;
    p.model_name = std::string{models::to_string(spec.kind)};
    p.horizon_hours = train.horizon_hours;
    p.feature_names = train.feature_names;

    Matrix X = train.X;
    std::vector<double> y = train.y;
    if (spec.methodology == Methodology::power_transform) {
        if (spec.transform_features) {
            p.feature_transform = transform::fit_transformer(X);
            X = transform::apply(*p.feature_transform, X);
        }
        if (spec.transform_target) {
            p.target_transform = transform::fit_column(y);
            y = transform::apply_column(*p.target_transform, y);
        }
    }
    if (spec.methodology == Methodology::zero_inflated) {
        p.model = models::fit_zero_inflated_kind(spec.kind, spec.hyperparameters, X, y, seed);
    } else {
        p.model = models::fit_regressor(spec.kind, spec.hyperparameters, X, y, seed);
    }
    return p;
}

/// One report per scale. The power-transform methodology with a transformed
/// target reports the transformed scale first and the inverse-transformed
/// raw scale second; everything else reports the raw scale.
inline std::vector<EvalReport> evaluate(const FittedPipeline& p, const SupervisedDataset& test) {
    require_finite(test);
    if (test.feature_names != p.feature_names) throw ToolError(ErrorKind::SchemaError, "test features do not match pipeline");
    auto make = [&](std::span<const double> y, std::span<const double> yhat, MetricScale scale) {
        const auto m = compute_metrics(y, yhat);
        return EvalReport{p.model_name, p.methodology, test.horizon_hours, m.r2, m.mae, m.rmse, scale};
    };
    std::vector<EvalReport> out;
    const auto z = p.predict_model_scale(test.X);
    if (p.target_transform) {
        const auto yt = transform::apply_column(*p.target_transform, test.y);
        out.push_back(make(yt, z, MetricScale::transformed));
        const auto raw = transform::invert_column_clamped(*p.target_transform, z);
        out.push_back(make(test.y, raw, MetricScale::inverse_transformed));
    } else {
        out.push_back(make(test.y, z, MetricScale::raw));
    }
    return out;
}

// ------------------------------------------------------------
// cross-validation and grid search
// ------------------------------------------------------------

struct CvResult {
    std::vector<double> fold_scores;
    double mean = 0.0;
    double sd = 0.0;
};

inline CvResult summarize(std::vector<double> scores) {
    CvResult r;
    r.fold_scores = std::move(scores);
    for (double s : r.fold_scores) r.mean += s;
    r.mean /= static_cast<double>(r.fold_scores.size());
    double v = 0.0;
    for (double s : r.fold_scores) v += (s - r.mean) * (s - r.mean);
    r.sd = r.fold_scores.size() > 1 ? std::sqrt(v / static_cast<double>(r.fold_scores.size() - 1)) : 0.0;
    return r;
}

/// Fits on each fold's fit rows and scores the primary report of its
/// validation block. Fold f uses seed derive_seed(seed, "fold/f").
inline CvResult cross_validate(const PipelineSpec& spec, const SupervisedDataset& train, const std::vector<features::Fold>& folds,
                               ScoreMetric metric, std::uint64_t seed) {
    if (folds.empty()) throw ToolError(ErrorKind::ConfigError, "no folds");
    std::vector<double> scores;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const auto fit_ds = train.select(folds[f].fit);
        const auto val_ds = train.select(folds[f].validate);
        const auto p = fit_pipeline(spec, fit_ds, derive_seed(seed, "fold/" + std::to_string(f)));
        const auto reports = evaluate(p, val_ds);
        const auto& r = reports.front();
        scores.push_back(metric_value(Metrics{r.r2, r.mae, r.rmse}, metric));
    }
    return summarize(std::move(scores));
}

inline CvResult cross_validate(const PipelineSpec& spec, const SupervisedDataset& train, const features::FoldPlan& plan,
                               ScoreMetric metric, std::uint64_t seed) {
    return cross_validate(spec, train, features::make_cv_folds(train.size(), plan), metric, seed);
}

struct GridSpec {
    std::map<std::string, std::vector<double>> values;
    ScoreMetric metric = ScoreMetric::r2;
    features::FoldPlan folds{};
};

/// Cartesian product in key order; the last key varies fastest.
inline std::vector<models::Hyperparameters> grid_points(const GridSpec& grid) {
    std::vector<models::Hyperparameters> points{{}};
    for (const auto& [name, vals] : grid.values) {
        if (vals.empty()) throw ToolError(ErrorKind::ConfigError, "grid entry '" + name + "' has no values");
        std::vector<models::Hyperparameters> next;
        for (const auto& p : points) {
            for (double v : vals) {
                auto q = p;
                q[name] = v;
                next.push_back(std::move(q));
            }
        }
        points = std::move(next);
    }
    return points;
}

struct GridRow {
    std::size_t point = 0;
    std::size_t fold = 0;
    double score = 0.0;
};

struct GridResult {
    models::Hyperparameters best;
    double best_score = 0.0;
    std::vector<models::Hyperparameters> points;
    std::vector<double> mean_scores;
    std::vector<GridRow> table;
};

/// Exhaustive search; grid values override `spec.hyperparameters`. Best is
/// the highest mean validation score (lowest for error metrics), first point
/// on ties.
inline GridResult grid_search(const PipelineSpec& spec, const GridSpec& grid, const SupervisedDataset& train, std::uint64_t seed) {
    if (grid.values.empty()) throw ToolError(ErrorKind::ConfigError, "grid is empty");
    for (const auto& [name, _] : grid.values) {
        if (!models::hyperparameter_names(spec.kind).contains(name)) {
            throw ToolError(ErrorKind::ConfigError,
                            "grid names '" + name + "', which does not exist for " + std::string{models::to_string(spec.kind)});
        }
    }
    const auto folds = features::make_cv_folds(train.size(), grid.folds);
    GridResult out;
    out.points = grid_points(grid);
    for (std::size_t k = 0; k < out.points.size(); ++k) {
        auto s = spec;
        for (const auto& [name, v] : out.points[k]) s.hyperparameters[name] = v;
        const auto cv = cross_validate(s, train, folds, grid.metric, seed);
        for (std::size_t f = 0; f < cv.fold_scores.size(); ++f) out.table.push_back({k, f, cv.fold_scores[f]});
        out.mean_scores.push_back(cv.mean);
        if (k == 0 || better(cv.mean, out.best_score, grid.metric)) {
            out.best_score = cv.mean;
            out.best = out.points[k];
        }
    }
    return out;
}

}  // namespace solarcast::eval
