#pragma once

// Model kinds addressed by name, hyperparameter maps, and a closed variant
// over every fitted predictor.

#include "solarcast/models/ensemble.hpp"
#include "solarcast/models/zero_inflated.hpp"

#include <map>
#include <set>

namespace solarcast::models {

using AnyModel = std::variant<LinearModel, DecisionTree, ForestModel, BoostedModel, LogisticModel, ZeroInflatedModel,
                              AveragingEnsemble>;

inline std::string_view kind_tag(const AnyModel& m) {
    constexpr std::array<std::string_view, 7> tags{"linear", "tree", "forest", "boosted", "logistic", "zero_inflated", "ensemble"};
    return tags[m.index()];
}

inline std::vector<double> predict(const AnyModel& m, const Matrix& X) {
    return std::visit([&](const auto& model) { return model.predict(X); }, m);
}

inline double predict_row(const AnyModel& m, std::span<const double> x) {
    return std::visit([&](const auto& model) { return model.predict_row(x); }, m);
}

inline std::size_t feature_count(const AnyModel& m) {
    return std::visit(
        [](const auto& model) -> std::size_t {
            using T = std::decay_t<decltype(model)>;
            if constexpr (std::is_same_v<T, LinearModel> || std::is_same_v<T, LogisticModel>) {
                return model.coefficients.size();
            } else if constexpr (std::is_same_v<T, AveragingEnsemble>) {
                return model.forest.n_features;
            } else {
                return model.n_features;
            }
        },
        m);
}

/// Regression families by their table names.
enum class ModelKind { LinearRegression, DecisionTree, GradientBoosting, XGBoost, RandomForest, RandomForestXGBoost };

inline constexpr std::array<std::pair<ModelKind, std::string_view>, 6> kModelNames{{
    {ModelKind::LinearRegression, "LinearRegression"},
    {ModelKind::DecisionTree, "DecisionTree"},
    {ModelKind::GradientBoosting, "GradientBoosting"},
    {ModelKind::XGBoost, "XGBoost"},
    {ModelKind::RandomForest, "RandomForest"},
    {ModelKind::RandomForestXGBoost, "RandomForest+XGBoost"},
}};

inline std::string_view to_string(ModelKind k) {
    for (const auto& [kind, name] : kModelNames) {
        if (kind == k) return name;
    }
    return "?";
}

inline ModelKind model_kind_from_name(std::string_view name) {
    for (const auto& [kind, n] : kModelNames) {
        if (n == name) return kind;
    }
    throw ToolError(ErrorKind::ConfigError, "unknown model", std::string{name});
}

using Hyperparameters = std::map<std::string, double>;

/// Names accepted in a hyperparameter map for each kind.
inline const std::set<std::string>& hyperparameter_names(ModelKind kind) {
    static const std::set<std::string> linear{"l2"};
    static const std::set<std::string> tree{"max_depth", "min_samples_leaf"};
    static const std::set<std::string> forest{"n_trees", "max_depth", "min_samples_leaf", "feature_fraction", "bootstrap"};
    static const std::set<std::string> boost{"n_stages",      "learning_rate", "max_depth", "min_samples_leaf",
                                             "min_child_weight", "row_subsample", "col_subsample", "l2_leaf",
                                             "tweedie_power"};
    static const std::set<std::string> ensemble = [] {
        std::set<std::string> s{"forest_weight", "boosted_weight"};
        for (const auto& n : forest) s.insert("forest." + n);
        for (const auto& n : boost) s.insert("boosted." + n);
        return s;
    }();
    switch (kind) {
        case ModelKind::LinearRegression: return linear;
        case ModelKind::DecisionTree: return tree;
        case ModelKind::GradientBoosting:
        case ModelKind::XGBoost: return boost;
        case ModelKind::RandomForest: return forest;
        case ModelKind::RandomForestXGBoost: return ensemble;
    }
    return linear;
}

inline void check_hyperparameters(ModelKind kind, const Hyperparameters& hp) {
    const auto& known = hyperparameter_names(kind);
    for (const auto& [name, _] : hp) {
        if (!known.contains(name)) {
            throw ToolError(ErrorKind::ConfigError, "hyperparameter '" + name + "' does not exist for " + std::string{to_string(kind)});
        }
    }
}

namespace detail {

inline double get(const Hyperparameters& hp, const std::string& key, double fallback) {
    auto it = hp.find(key);
    return it == hp.end() ? fallback : it->second;
}

inline std::size_t get_count(const Hyperparameters& hp, const std::string& key, std::size_t fallback) {
    const double v = get(hp, key, static_cast<double>(fallback));
    if (v < 0.0 || v != std::floor(v)) throw ToolError(ErrorKind::ConfigError, "'" + key + "' must be a non-negative integer");
    return static_cast<std::size_t>(v);
}

inline ForestParams forest_params(const Hyperparameters& hp, const std::string& prefix, std::uint64_t seed) {
    ForestParams p;
    p.n_trees = get_count(hp, prefix + "n_trees", 100);
    p.max_depth = static_cast<int>(get(hp, prefix + "max_depth", -1));
    p.min_samples_leaf = get_count(hp, prefix + "min_samples_leaf", 1);
    p.feature_fraction = get(hp, prefix + "feature_fraction", 1.0 / 3.0);
    p.bootstrap = get(hp, prefix + "bootstrap", 1.0) != 0.0;
    p.seed = seed;
    return p;
}

inline BoostParams boost_params(const Hyperparameters& hp, const std::string& prefix, bool second_order, std::uint64_t seed) {
    BoostParams p = second_order ? BoostParams::second_order_defaults() : BoostParams{};
    p.n_stages = get_count(hp, prefix + "n_stages", p.n_stages);
    p.learning_rate = get(hp, prefix + "learning_rate", p.learning_rate);
    p.max_depth = static_cast<int>(get(hp, prefix + "max_depth", p.max_depth));
    p.min_samples_leaf = get_count(hp, prefix + "min_samples_leaf", p.min_samples_leaf);
    p.min_child_weight = get(hp, prefix + "min_child_weight", p.min_child_weight);
    p.row_subsample = get(hp, prefix + "row_subsample", p.row_subsample);
    p.col_subsample = get(hp, prefix + "col_subsample", p.col_subsample);
    p.l2_leaf = get(hp, prefix + "l2_leaf", p.l2_leaf);
    p.tweedie_power = get(hp, prefix + "tweedie_power", p.tweedie_power);
    p.seed = seed;
    return p;
}

}  // namespace detail

/// Fits a plain regression model (squared loss) of the given kind.
inline AnyModel fit_regressor(ModelKind kind, const Hyperparameters& hp, const Matrix& X, std::span<const double> y,
                              std::uint64_t seed) {
    check_hyperparameters(kind, hp);
    switch (kind) {
        case ModelKind::LinearRegression: return fit_linear(X, y, detail::get(hp, "l2", 0.0));
        case ModelKind::DecisionTree:
            return fit_tree(X, y, {}, static_cast<int>(detail::get(hp, "max_depth", 6)),
                            detail::get_count(hp, "min_samples_leaf", 1));
        case ModelKind::GradientBoosting: return fit_gbm(X, y, detail::boost_params(hp, "", false, seed));
        case ModelKind::XGBoost: return fit_gbm(X, y, detail::boost_params(hp, "", true, seed));
        case ModelKind::RandomForest: return fit_forest(X, y, detail::forest_params(hp, "", seed));
        case ModelKind::RandomForestXGBoost: {
            EnsembleParams ep;
            ep.forest = detail::forest_params(hp, "forest.", derive_seed(seed, "forest"));
            ep.boosted = detail::boost_params(hp, "boosted.", true, derive_seed(seed, "boosted"));
            ep.weights = {detail::get(hp, "forest_weight", 0.5), detail::get(hp, "boosted_weight", 0.5)};
            return fit_ensemble(X, y, ep);
        }
    }
    throw ToolError(ErrorKind::ConfigError, "unsupported model kind");
}

/// Zero-inflated counterpart of a regression family: gate and positive part
/// from the same family (boosting pairs a logistic-loss gate with a Tweedie
/// positive part; linear pairs logistic regression with a log-linear model).
inline ZeroInflatedParams zero_inflated_params(ModelKind kind, const Hyperparameters& hp, std::uint64_t seed) {
    check_hyperparameters(kind, hp);
    ZeroInflatedParams zp;
    switch (kind) {
        case ModelKind::LinearRegression:
            zp.gate = GateKind::logistic;
            zp.positive = PositiveKind::log_linear;
            zp.l2 = detail::get(hp, "l2", 0.0);
            break;
        case ModelKind::GradientBoosting:
        case ModelKind::XGBoost: {
            const bool second = kind == ModelKind::XGBoost;
            zp.gate = GateKind::boosted;
            zp.positive = PositiveKind::boosted_tweedie;
            zp.gate_boost = detail::boost_params(hp, "", second, derive_seed(seed, "gate"));
            zp.positive_boost = detail::boost_params(hp, "", second, derive_seed(seed, "positive"));
            break;
        }
        case ModelKind::RandomForest:
            zp.gate = GateKind::forest;
            zp.positive = PositiveKind::forest;
            zp.forest = detail::forest_params(hp, "", seed);
            break;
        default:
            throw ToolError(ErrorKind::ConfigError, "no zero-inflated variant for " + std::string{to_string(kind)});
    }
    return zp;
}

inline AnyModel fit_zero_inflated_kind(ModelKind kind, const Hyperparameters& hp, const Matrix& X,
                                       std::span<const double> y, std::uint64_t seed) {
    return fit_zero_inflated(X, y, zero_inflated_params(kind, hp, seed));
}

}  // namespace solarcast::models
