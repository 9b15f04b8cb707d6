#pragma once

// Stagewise tree boosting. First order fits CART to the negative gradient and
// line-searches each leaf; second order scores splits from gradient/hessian
// sums with an L2 leaf penalty and row/column subsampling per stage.

#include "solarcast/models/tree.hpp"
#include "solarcast/models/tweedie.hpp"

namespace solarcast::models {

enum class Loss { squared, tweedie, logistic };
enum class BoostOrder { first, second };

inline constexpr std::string_view to_string(Loss l) {
    switch (l) {
        case Loss::squared: return "squared";
        case Loss::tweedie: return "tweedie";
        case Loss::logistic: return "logistic";
    }
    return "?";
}

inline constexpr std::string_view to_string(BoostOrder o) { return o == BoostOrder::first ? "first" : "second"; }

struct BoostParams {
    BoostOrder order = BoostOrder::first;
    Loss loss = Loss::squared;
    double tweedie_power = 1.5;
    std::size_t n_stages = 100;
    double learning_rate = 0.1;
    int max_depth = 3;
    std::size_t min_samples_leaf = 1;
    double min_child_weight = 0.0;
    double row_subsample = 1.0;
    double col_subsample = 1.0;
    double l2_leaf = 0.0;
    std::uint64_t seed = 0;

    /// Common second-order defaults: depth 6, 0.8 row/column subsampling, leaf L2 1.
    static BoostParams second_order_defaults() {
        BoostParams p;
        p.order = BoostOrder::second;
        p.learning_rate = 0.3;
        p.max_depth = 6;
        p.min_child_weight = 1.0;
        p.row_subsample = 0.8;
        p.col_subsample = 0.8;
        p.l2_leaf = 1.0;
        return p;
    }
};

namespace detail {

inline double sigmoid(double z) noexcept {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline double loss_value(Loss loss, double y, double F, double p) {
    switch (loss) {
        case Loss::squared: return 0.5 * (y - F) * (y - F);
        case Loss::tweedie: return tweedie_log_link_loss(y, F, p);
        case Loss::logistic: {
            // log(1 + e^F) - y F, overflow-safe
            const double softplus = F > 0.0 ? F + std::log1p(std::exp(-F)) : std::log1p(std::exp(F));
            return softplus - y * F;
        }
    }
    return 0.0;
}

inline double gradient(Loss loss, double y, double F, double p) {
    switch (loss) {
        case Loss::squared: return F - y;
        case Loss::tweedie: return tweedie_gradient(y, F, p);
        case Loss::logistic: return sigmoid(F) - y;
    }
    return 0.0;
}

inline double hessian(Loss loss, double y, double F, double p) {
    switch (loss) {
        case Loss::squared: return 1.0;
        case Loss::tweedie: return tweedie_hessian(y, F, p);
        case Loss::logistic: {
            const double s = sigmoid(F);
            return s * (1.0 - s);
        }
    }
    return 0.0;
}

}  // namespace detail

/// prediction = link^-1( f0 + sum_k weight_k * tree_k(x) )
struct BoostedModel {
    double f0 = 0.0;
    std::vector<DecisionTree> trees;
    std::vector<double> stage_weights;
    Loss loss = Loss::squared;
    BoostOrder order = BoostOrder::first;
    double tweedie_power = 1.5;
    double learning_rate = 0.1;
    double row_subsample = 1.0;
    double col_subsample = 1.0;
    double l2_leaf = 0.0;
    std::size_t n_features = 0;
    // scalar tweedie dispersion, reported only
    double dispersion = 1.0;
    // mean training loss before stage 1 and after every stage
    std::vector<double> train_loss;

    double raw_score(std::span<const double> x) const {
        double s = f0;
        for (std::size_t k = 0; k < trees.size(); ++k) s += stage_weights[k] * trees[k].predict_row(x);
        return s;
    }

    double predict_row(std::span<const double> x) const {
        const double s = raw_score(x);
        switch (loss) {
            case Loss::squared: return s;
            case Loss::tweedie: return std::exp(s);
            case Loss::logistic: return detail::sigmoid(s);
        }
        return s;
    }

    std::vector<double> predict(const Matrix& X) const {
        if (X.cols() != n_features) throw ToolError(ErrorKind::SchemaError, "boosted model feature count mismatch");
        std::vector<double> out(X.rows());
        for (std::size_t i = 0; i < X.rows(); ++i) {
            out[i] = predict_row(X.row(i));
            if (!std::isfinite(out[i])) throw ToolError(ErrorKind::NonFinite, "non-finite boosted prediction");
        }
        return out;
    }

    friend bool operator==(const BoostedModel&, const BoostedModel&) = default;
};

namespace detail {

inline double initial_score(Loss loss, std::span<const double> y) {
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    switch (loss) {
        case Loss::squared: return mean;
        case Loss::tweedie:
            if (!(mean > 0.0)) throw ToolError(ErrorKind::ConfigError, "tweedie loss needs a positive mean response");
            return std::log(mean);
        case Loss::logistic: {
            const double q = std::clamp(mean, 1e-6, 1.0 - 1e-6);
            return std::log(q / (1.0 - q));
        }
    }
    return mean;
}

inline double mean_loss(Loss loss, std::span<const double> y, std::span<const double> F, double p) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += loss_value(loss, y[i], F[i], p);
    return s / static_cast<double>(y.size());
}

/// Minimizes sum_i L(y_i, F_i + gamma) over gamma by safeguarded Newton.
inline double leaf_line_search(Loss loss, std::span<const double> y, std::span<const double> F,
                               std::span<const std::size_t> rows, double p, double start) {
    if (loss == Loss::squared) {
        double s = 0.0;
        for (auto r : rows) s += y[r] - F[r];
        return s / static_cast<double>(rows.size());
    }
    constexpr double max_abs = 20.0;
    double gamma = std::clamp(start, -max_abs, max_abs);
    for (int it = 0; it < 50; ++it) {
        double G = 0.0, H = 0.0;
        for (auto r : rows) {
            G += gradient(loss, y[r], F[r] + gamma, p);
            H += hessian(loss, y[r], F[r] + gamma, p);
        }
        if (!(H > 0.0) || !std::isfinite(G) || !std::isfinite(H)) break;
        const double step = std::clamp(G / H, -1.0, 1.0);
        const double next = std::clamp(gamma - step, -max_abs, max_abs);
        if (std::abs(next - gamma) < 1e-12) {
            gamma = next;
            break;
        }
        gamma = next;
    }
    return gamma;
}

}  // namespace detail

inline BoostedModel fit_gbm(const Matrix& X, std::span<const double> y, const BoostParams& params) {
    const std::size_t n = X.rows();
    if (n == 0 || y.size() != n) throw ToolError(ErrorKind::ConfigError, "boosting input shape mismatch");
    if (!(params.learning_rate > 0.0 && params.learning_rate <= 1.0)) {
        throw ToolError(ErrorKind::ConfigError, "learning rate must lie in (0,1]");
    }
    if (!(params.row_subsample > 0.0 && params.row_subsample <= 1.0) ||
        !(params.col_subsample > 0.0 && params.col_subsample <= 1.0)) {
        throw ToolError(ErrorKind::ConfigError, "subsample fractions must lie in (0,1]");
    }
    const double p = params.tweedie_power;
    if (params.loss == Loss::tweedie) {
        TweedieSpec{p}.validate();
        for (double v : y) {
            if (v < 0.0) throw ToolError(ErrorKind::ConfigError, "tweedie loss needs a non-negative response");
        }
    }
    if (params.loss == Loss::logistic) {
        for (double v : y) {
            if (v != 0.0 && v != 1.0) throw ToolError(ErrorKind::ConfigError, "logistic loss needs 0/1 labels");
        }
    }

    BoostedModel m;
    m.loss = params.loss;
    m.order = params.order;
    m.tweedie_power = p;
    m.learning_rate = params.learning_rate;
    m.row_subsample = params.row_subsample;
    m.col_subsample = params.col_subsample;
    m.l2_leaf = params.order == BoostOrder::second ? params.l2_leaf : 0.0;
    m.n_features = X.cols();
    m.f0 = detail::initial_score(params.loss, y);

    std::vector<double> F(n, m.f0), grad(n), hess(n), unit(n, 1.0);
    m.train_loss.push_back(detail::mean_loss(params.loss, y, F, p));
    Rng rng(params.seed);
    const auto all_features = iota_indices(X.cols());
    const auto all_rows = iota_indices(n);

    for (std::size_t k = 0; k < params.n_stages; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            grad[i] = detail::gradient(params.loss, y[i], F[i], p);
            hess[i] = detail::hessian(params.loss, y[i], F[i], p);
        }
        std::vector<std::size_t> rows = all_rows;
        if (params.row_subsample < 1.0) {
            const auto m_rows = std::max<std::size_t>(1, static_cast<std::size_t>(params.row_subsample * static_cast<double>(n)));
            auto perm = permutation(n, rng);
            rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m_rows));
            std::sort(rows.begin(), rows.end());
        }
        std::vector<std::size_t> features = all_features;
        if (params.col_subsample < 1.0) {
            const auto m_cols = std::max<std::size_t>(
                1, static_cast<std::size_t>(params.col_subsample * static_cast<double>(X.cols())));
            auto perm = permutation(X.cols(), rng);
            features.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m_cols));
            std::sort(features.begin(), features.end());
        }

        TreeParams tp;
        tp.max_depth = params.max_depth;
        tp.min_samples_leaf = std::max<std::size_t>(1, params.min_samples_leaf);
        DecisionTree tree;
        if (params.order == BoostOrder::second) {
            tp.l2 = params.l2_leaf;
            tp.min_child_weight = params.min_child_weight;
            tree = fit_tree_gh(X, grad, hess, rows, features, tp);
        } else {
            // CART on the pseudo-residuals -grad: unit hessians make leaves their mean
            tree = fit_tree_gh(X, grad, unit, rows, features, tp);
            // per-leaf line search on the sampled rows
            std::vector<std::vector<std::size_t>> members(tree.nodes.size());
            for (auto r : rows) members[tree.leaf_index(X.row(r))].push_back(r);
            for (std::size_t node = 0; node < tree.nodes.size(); ++node) {
                if (!tree.nodes[node].is_leaf() || members[node].empty()) continue;
                tree.nodes[node].value = detail::leaf_line_search(params.loss, y, F, members[node], p, tree.nodes[node].value);
            }
        }
        for (std::size_t i = 0; i < n; ++i) F[i] += params.learning_rate * tree.predict_row(X.row(i));
        m.trees.push_back(std::move(tree));
        m.stage_weights.push_back(params.learning_rate);
        const double L = detail::mean_loss(params.loss, y, F, p);
        if (!std::isfinite(L)) {
            throw ToolError(ErrorKind::ConvergenceFailure, "training loss became non-finite", "stage " + std::to_string(k + 1));
        }
        m.train_loss.push_back(L);
    }

    if (params.loss == Loss::tweedie) {
        std::vector<double> mu(n);
        for (std::size_t i = 0; i < n; ++i) mu[i] = std::exp(F[i]);
        std::size_t dof = 1;
        for (const auto& t : m.trees) dof += t.leaf_count();
        m.dispersion = dof < n ? estimate_dispersion(y, mu, p, dof) : estimate_dispersion(y, mu, p, 0);
    }
    return m;
}

}  // namespace solarcast::models
