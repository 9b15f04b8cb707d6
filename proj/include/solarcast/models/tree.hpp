#pragma once

// Greedy binary regression trees over presorted feature columns. One builder
// serves both variance-reduction CART (gradients -w*y, hessians w, no
// penalty) and second-order boosting (arbitrary gradients/hessians with an L2
// leaf penalty), since the split score G^2/(H + l2) covers both.

#include "solarcast/core.hpp"
#include "solarcast/random.hpp"

#include <limits>
#include <numeric>

namespace solarcast::models {

struct TreeNode {
    // -1 marks a leaf
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;
    int max_depth = 0;
    std::size_t min_samples_leaf = 1;
    std::size_t n_features = 0;

    double predict_row(std::span<const double> x) const {
        std::size_t k = 0;
        while (!nodes[k].is_leaf()) {
            k = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[k].feature)] <= nodes[k].threshold ? nodes[k].left
                                                                                                              : nodes[k].right);
        }
        return nodes[k].value;
    }

    /// Index of the leaf reached by x.
    std::size_t leaf_index(std::span<const double> x) const {
        std::size_t k = 0;
        while (!nodes[k].is_leaf()) {
            k = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[k].feature)] <= nodes[k].threshold ? nodes[k].left
                                                                                                              : nodes[k].right);
        }
        return k;
    }

    std::vector<double> predict(const Matrix& X) const {
        if (X.cols() != n_features) throw ToolError(ErrorKind::SchemaError, "tree feature count mismatch");
        std::vector<double> out(X.rows());
        for (std::size_t i = 0; i < X.rows(); ++i) out[i] = predict_row(X.row(i));
        return out;
    }

    std::size_t leaf_count() const {
        return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const auto& n) { return n.is_leaf(); }));
    }

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct TreeParams {
    // depth limit; a negative value means unlimited
    int max_depth = -1;
    std::size_t min_samples_leaf = 1;
    // minimum hessian mass per child
    double min_child_weight = 0.0;
    // L2 penalty on leaf values
    double l2 = 0.0;
    // fraction of candidate features drawn at every split (1 = all)
    double feature_fraction = 1.0;
    // relative gain a split must exceed
    double min_gain = 1e-10;
};

namespace detail {

/// Presorted-column tree builder. Each feature owns one index array; a node
/// covers the same [begin, end) slice of every array, and splitting a node
/// stably partitions all slices, so each slice stays sorted by its feature.
class TreeBuilder {
public:
    TreeBuilder(const Matrix& X, std::span<const double> grad, std::span<const double> hess,
                std::span<const std::size_t> rows, std::span<const std::size_t> allowed_features,
                const TreeParams& params, Rng* rng)
        : X_(X), grad_(grad), hess_(hess), params_(params), rng_(rng), features_(allowed_features.begin(), allowed_features.end()) {
        const std::size_t d = X.cols();
        sorted_.resize(d);
        for (std::size_t f : features_) {
            auto& s = sorted_[f];
            s.assign(rows.begin(), rows.end());
            std::stable_sort(s.begin(), s.end(), [&](std::size_t a, std::size_t b) {
                const double va = X_(a, f), vb = X_(b, f);
                return va < vb || (va == vb && a < b);
            });
        }
        goes_left_.assign(X.rows(), 0);
        scratch_.resize(rows.size());
        node_rows_.assign(rows.begin(), rows.end());
    }

    DecisionTree build() {
        DecisionTree tree;
        tree.max_depth = params_.max_depth;
        tree.min_samples_leaf = params_.min_samples_leaf;
        tree.n_features = X_.cols();
        tree.nodes.emplace_back();
        grow(tree, 0, 0, node_rows_.size(), 0);
        return tree;
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double gain = 0.0;
        std::size_t left_count = 0;
    };

    double score(double g, double h) const { return g * g / (h + params_.l2); }

    double leaf_value(double g, double h) const {
        const double denom = h + params_.l2;
        return denom > 0.0 ? -g / denom : 0.0;
    }

    // Rows of node as a contiguous slice of the first feature array, or of
    // node_rows_ when no feature is allowed.
    std::span<const std::size_t> slice(std::size_t begin, std::size_t end) const {
        if (features_.empty()) return {node_rows_.data() + begin, end - begin};
        return {sorted_[features_.front()].data() + begin, end - begin};
    }

    void grow(DecisionTree& tree, std::size_t node, std::size_t begin, std::size_t end, int depth) {
        double G = 0.0, H = 0.0;
        for (std::size_t r : slice(begin, end)) {
            G += grad_[r];
            H += hess_[r];
        }
        tree.nodes[node].value = leaf_value(G, H);

        const std::size_t count = end - begin;
        if ((params_.max_depth >= 0 && depth >= params_.max_depth) || count < 2 * params_.min_samples_leaf ||
            features_.empty()) {
            return;
        }
        const Split best = find_split(begin, end, G, H);
        if (best.feature < 0) return;

        partition(static_cast<std::size_t>(best.feature), best.left_count, begin, end);
        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        tree.nodes[node].feature = best.feature;
        tree.nodes[node].threshold = best.threshold;
        tree.nodes[node].left = left;
        tree.nodes[node].right = left + 1;
        grow(tree, static_cast<std::size_t>(left), begin, begin + best.left_count, depth + 1);
        grow(tree, static_cast<std::size_t>(left + 1), begin + best.left_count, end, depth + 1);
    }

    std::vector<std::size_t> candidate_features() {
        if (params_.feature_fraction >= 1.0 || rng_ == nullptr) return features_;
        const std::size_t m = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(params_.feature_fraction * static_cast<double>(features_.size()))));
        auto perm = permutation(features_.size(), *rng_);
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < m; ++i) out.push_back(features_[perm[i]]);
        std::sort(out.begin(), out.end());
        return out;
    }

    Split find_split(std::size_t begin, std::size_t end, double G, double H) {
        const double parent = score(G, H);
        const double tol = params_.min_gain * std::max(1.0, std::abs(parent));
        Split best;
        best.gain = tol;
        const std::size_t count = end - begin;
        for (std::size_t f : candidate_features()) {
            const auto& s = sorted_[f];
            double gl = 0.0, hl = 0.0;
            for (std::size_t k = begin; k + 1 < end; ++k) {
                const std::size_t r = s[k];
                gl += grad_[r];
                hl += hess_[r];
                const std::size_t nl = k - begin + 1;
                const double v = X_(r, f);
                const double next = X_(s[k + 1], f);
                if (v == next) continue;
                if (nl < params_.min_samples_leaf || count - nl < params_.min_samples_leaf) continue;
                const double hr = H - hl;
                if (hl < params_.min_child_weight || hr < params_.min_child_weight) continue;
                const double gain = score(gl, hl) + score(G - gl, hr) - parent;
                if (gain > best.gain) {
                    best.gain = gain;
                    best.feature = static_cast<int>(f);
                    double mid = v + (next - v) / 2.0;
                    if (!(mid < next)) mid = v;
                    best.threshold = mid;
                    best.left_count = nl;
                }
            }
        }
        return best;
    }

    void partition(std::size_t feature, std::size_t left_count, std::size_t begin, std::size_t end) {
        const auto& key = sorted_[feature];
        for (std::size_t k = begin; k < end; ++k) goes_left_[key[k]] = k - begin < left_count ? 1 : 0;
        for (std::size_t f : features_) {
            if (f == feature) continue;
            stable_split(sorted_[f], begin, end);
        }
    }

    void stable_split(std::vector<std::size_t>& v, std::size_t begin, std::size_t end) {
        std::size_t l = begin, r = 0;
        for (std::size_t k = begin; k < end; ++k) {
            if (goes_left_[v[k]]) {
                v[l++] = v[k];
            } else {
                scratch_[r++] = v[k];
            }
        }
        std::copy_n(scratch_.begin(), r, v.begin() + static_cast<std::ptrdiff_t>(l));
    }

    const Matrix& X_;
    std::span<const double> grad_;
    std::span<const double> hess_;
    TreeParams params_;
    Rng* rng_;
    std::vector<std::size_t> features_;
    std::vector<std::vector<std::size_t>> sorted_;
    std::vector<char> goes_left_;
    std::vector<std::size_t> scratch_;
    std::vector<std::size_t> node_rows_;
};

}  // namespace detail

/// Fits a tree on rows `rows` from gradient/hessian statistics. Leaves hold
/// -G/(H + l2).
inline DecisionTree fit_tree_gh(const Matrix& X, std::span<const double> grad, std::span<const double> hess,
                                std::span<const std::size_t> rows, std::span<const std::size_t> allowed_features,
                                const TreeParams& params, Rng* rng = nullptr) {
    if (rows.empty()) throw ToolError(ErrorKind::EmptySplit, "tree needs at least one row");
    detail::TreeBuilder builder(X, grad, hess, rows, allowed_features, params, rng);
    return builder.build();
}

/// Weighted variance-reduction CART. Rows with zero weight are ignored; leaf
/// values are weighted means. An empty `weights` means unit weights.
inline DecisionTree fit_tree(const Matrix& X, std::span<const double> y, std::span<const double> weights,
                             int max_depth, std::size_t min_samples_leaf = 1, double feature_fraction = 1.0,
                             Rng* rng = nullptr) {
    if (y.size() != X.rows()) throw ToolError(ErrorKind::ConfigError, "target length does not match rows");
    if (!weights.empty() && weights.size() != y.size()) throw ToolError(ErrorKind::ConfigError, "weight length mismatch");
    std::vector<double> grad(y.size()), hess(y.size());
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        if (w <= 0.0) continue;
        grad[i] = -w * y[i];
        hess[i] = w;
        rows.push_back(i);
    }
    TreeParams p;
    p.max_depth = max_depth;
    p.min_samples_leaf = std::max<std::size_t>(1, min_samples_leaf);
    p.feature_fraction = feature_fraction;
    const auto all = iota_indices(X.cols());
    return fit_tree_gh(X, grad, hess, rows, all, p, rng);
}

}  // namespace solarcast::models
