#pragma once

#include "solarcast/models/tree.hpp"

namespace solarcast::models {

struct ForestParams {
    std::size_t n_trees = 100;
    int max_depth = -1;
    std::size_t min_samples_leaf = 1;
    double feature_fraction = 1.0 / 3.0;
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

/// Bagged regression trees; the prediction is the unweighted mean of the trees.
struct ForestModel {
    std::vector<DecisionTree> trees;
    std::vector<std::uint64_t> tree_seeds;
    double feature_fraction = 1.0;
    bool bootstrap = true;
    std::size_t n_features = 0;

    double predict_row(std::span<const double> x) const {
        double s = 0.0;
        for (const auto& t : trees) s += t.predict_row(x);
        return s / static_cast<double>(trees.size());
    }

    std::vector<double> predict(const Matrix& X) const {
        if (X.cols() != n_features) throw ToolError(ErrorKind::SchemaError, "forest feature count mismatch");
        std::vector<double> out(X.rows());
        for (std::size_t i = 0; i < X.rows(); ++i) out[i] = predict_row(X.row(i));
        return out;
    }

    friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

/// Tree j draws n rows with replacement from its own stream seeded by
/// derive_seed(seed, "tree/j"); the draw counts become CART weights.
inline ForestModel fit_forest(const Matrix& X, std::span<const double> y, const ForestParams& params) {
    if (params.n_trees == 0) throw ToolError(ErrorKind::ConfigError, "forest needs at least one tree");
    if (X.rows() == 0 || y.size() != X.rows()) throw ToolError(ErrorKind::ConfigError, "forest input shape mismatch");
    ForestModel m;
    m.feature_fraction = params.feature_fraction;
    m.bootstrap = params.bootstrap;
    m.n_features = X.cols();
    const std::size_t n = X.rows();
    std::vector<double> weights(n);
    for (std::size_t j = 0; j < params.n_trees; ++j) {
        const auto tree_seed = derive_seed(params.seed, "tree/" + std::to_string(j));
        Rng rng(tree_seed);
        if (params.bootstrap) {
            std::fill(weights.begin(), weights.end(), 0.0);
            for (std::size_t k = 0; k < n; ++k) weights[uniform_index(rng, n)] += 1.0;
        } else {
            std::fill(weights.begin(), weights.end(), 1.0);
        }
        m.trees.push_back(fit_tree(X, y, weights, params.max_depth, params.min_samples_leaf, params.feature_fraction, &rng));
        m.tree_seeds.push_back(tree_seed);
    }
    return m;
}

}  // namespace solarcast::models
