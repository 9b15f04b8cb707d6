#include "solarcast/models/model.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace solarcast;
using namespace solarcast::models;

namespace {

DecisionTree leaf(double v, std::size_t d) {
    DecisionTree t;
    t.nodes.push_back(TreeNode{-1, 0.0, -1, -1, v});
    t.n_features = d;
    return t;
}

ForestModel constant_forest(double v, std::size_t d) {
    ForestModel f;
    f.trees.push_back(leaf(v, d));
    f.tree_seeds.push_back(0);
    f.n_features = d;
    return f;
}

BoostedModel constant_boosted(double v, std::size_t d) {
    BoostedModel b;
    b.f0 = v;
    b.n_features = d;
    return b;
}

}  // namespace

using namespace solarcast::test;

TEST(ZeroInflatedTest, ExpectationDefinition) {
    ZeroInflatedModel certain_zero{constant_forest(1.0, 1), constant_forest(10.0, 1), 1, 0.5};
    EXPECT_EQ(certain_zero.predict(Matrix(2, 1))[0], 0.0);
    ZeroInflatedModel half{LogisticModel{0.0, {0.0}, true, 0}, constant_forest(10.0, 1), 1, 0.5};
    EXPECT_DOUBLE_EQ(half.predict(Matrix(1, 1))[0], 5.0);
}

TEST(ZeroInflatedTest, UninformativeFeaturesGiveTheMixtureMean) {
    Rng rng(51);
    const std::size_t n = 400;
    const auto X = test::random_matrix(n, 2, rng);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = i % 2 == 0 ? 0.0 : 10.0;
    for (auto kind : {ModelKind::LinearRegression, ModelKind::GradientBoosting, ModelKind::XGBoost, ModelKind::RandomForest}) {
        Hyperparameters hp;
        if (kind == ModelKind::RandomForest) hp["n_trees"] = 30;
        const auto m = fit_zero_inflated_kind(kind, hp, X, y, 7);
        double mean = 0;
        for (double v : predict(m, X)) mean += v;
        mean /= static_cast<double>(n);
        EXPECT_NEAR(mean, 5.0, 0.25) << to_string(kind);
    }
}

TEST(ZeroInflatedTest, ExpectationMatchesMonteCarloMixture) {
    Rng rng(52);
    const auto f = noisy_gate_fixture(600, rng);
    const auto m = fit_zero_inflated(f.X, f.y, zero_inflated_params(ModelKind::XGBoost, {}, 3));
    for (const std::vector<double> x : {std::vector<double>{0.0, 0.0}, std::vector<double>{0.7, -0.4}}) {
        const double pi = m.zero_probability(x);
        const double mu = m.positive_mean(x);
        ASSERT_GT(pi, 0.01);
        ASSERT_LT(pi, 0.99);
        const double mc = mixture_monte_carlo(pi, mu, 1000000, rng);
        EXPECT_NEAR(m.predict_row(x), mc, 0.01 * mc);
    }
}

TEST(ZeroInflatedTest, NightRowsPredictNearZero) {
    const auto f = night_fixture(24 * 60, 54);
    for (auto kind : {ModelKind::LinearRegression, ModelKind::GradientBoosting, ModelKind::XGBoost, ModelKind::RandomForest}) {
        Hyperparameters hp;
        if (kind == ModelKind::RandomForest) {
            // every split may use the indicator
            hp["n_trees"] = 30;
            hp["feature_fraction"] = 1.0;
        }
        const auto m = fit_zero_inflated_kind(kind, hp, f.X, f.y, 5);
        const auto p = predict(m, f.X);
        double worst_night = 0, day_mean = 0;
        std::size_t days = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            EXPECT_GE(p[i], 0.0);
            if (f.X(i, 0) <= 0.0) {
                worst_night = std::max(worst_night, p[i]);
            } else {
                day_mean += p[i];
                ++days;
            }
        }
        EXPECT_LT(worst_night, 0.1) << to_string(kind);
        EXPECT_GT(day_mean / static_cast<double>(days), 20.0) << to_string(kind);
    }
}

TEST(ZeroInflatedTest, ResponseWithoutZerosIsRejected) {
    Rng rng(55);
    const auto X = test::random_matrix(50, 2, rng);
    const auto y = test::random_vector(50, rng, 1, 2);
    try {
        fit_zero_inflated(X, y, {});
        FAIL();
    } catch (const ToolError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
    }
    EXPECT_THROW(fit_zero_inflated(X, std::vector<double>(50, 0.0), {}), ToolError);
}

TEST(ZeroInflatedTest, OutputIsNonNegativeOnRandomInputs) {
    const auto f = night_fixture(24 * 10, 56);
    const auto m = fit_zero_inflated_kind(ModelKind::XGBoost, {}, f.X, f.y, 1);
    Rng rng(57);
    const auto X = test::random_matrix(1000, 3, rng, -5, 5);
    for (double v : predict(m, X)) EXPECT_GE(v, 0.0);
}

TEST(ZeroInflatedTest, LogLinearSmearingRestoresTheMean) {
    Rng rng(58);
    const auto X = test::random_matrix(300, 1, rng);
    std::vector<double> y(300);
    for (std::size_t i = 0; i < 300; ++i) y[i] = std::exp(1 + X(i, 0) + 0.5 * (uniform01(rng) - 0.5));
    const auto m = fit_log_linear(X, y);
    double fitted = 0, actual = 0;
    for (std::size_t i = 0; i < 300; ++i) {
        fitted += m.predict_row(X.row(i));
        actual += y[i];
    }
    EXPECT_NEAR(fitted / actual, 1.0, 0.01);
    EXPECT_GE(m.smearing, 1.0);
}

TEST(EnsembleTest, WeightedAverageExamples) {
    const Matrix X(1, 2);
    const std::vector<double> equal{0.5, 0.5}, forest_only{1.0, 0.0}, mixed{0.3, 0.7};
    EXPECT_EQ(make_ensemble(constant_forest(2, 2), constant_boosted(4, 2), equal).predict(X)[0], 3.0);
    EXPECT_EQ(make_ensemble(constant_forest(2, 2), constant_boosted(4, 2), forest_only).predict(X)[0], 2.0);
    EXPECT_NEAR(make_ensemble(constant_forest(10, 2), constant_boosted(0, 2), mixed).predict(X)[0], 3.0, 1e-12);
}

TEST(EnsembleTest, InvalidWeightsAndSchemas) {
    const std::vector<double> bad_sum{0.5, 0.6}, negative{-0.5, 1.5}, three{0.2, 0.3, 0.5}, ok{0.5, 0.5};
    for (const auto& w : {bad_sum, negative, three}) {
        try {
            make_ensemble(constant_forest(1, 2), constant_boosted(1, 2), w);
            FAIL();
        } catch (const ToolError& e) {
            EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
        }
    }
    try {
        make_ensemble(constant_forest(1, 2), constant_boosted(1, 3), ok);
        FAIL();
    } catch (const ToolError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SchemaError);
    }
}

TEST(ModelKindTest, NamesRoundTrip) {
    for (const auto& [kind, name] : kModelNames) EXPECT_EQ(model_kind_from_name(name), kind);
    EXPECT_THROW(model_kind_from_name("SVR"), ToolError);
}

TEST(ModelKindTest, EveryKindFitsAndPredictsFinite) {
    Rng rng(59);
    const auto X = test::random_matrix(120, 3, rng);
    std::vector<double> y(120);
    for (std::size_t i = 0; i < 120; ++i) y[i] = X(i, 0) - 2 * X(i, 1) + 0.1 * uniform01(rng);
    for (const auto& [kind, name] : kModelNames) {
        Hyperparameters hp;
        if (kind == ModelKind::RandomForest) hp["n_trees"] = 10;
        if (kind == ModelKind::RandomForestXGBoost) hp["forest.n_trees"] = 10;
        const auto m = fit_regressor(kind, hp, X, y, 11);
        EXPECT_EQ(feature_count(m), 3u) << name;
        const auto p = predict(m, X);
        for (double v : p) EXPECT_TRUE(std::isfinite(v)) << name;
        EXPECT_EQ(predict_row(m, X.row(4)), p[4]) << name;
    }
}

TEST(ModelKindTest, UnknownHyperparameterIsConfigError) {
    try {
        fit_regressor(ModelKind::LinearRegression, {{"max_depth", 3}}, Matrix(5, 1), std::vector<double>(5), 0);
        FAIL();
    } catch (const ToolError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
        EXPECT_NE(e.message().find("max_depth"), std::string::npos);
    }
    EXPECT_THROW(zero_inflated_params(ModelKind::RandomForestXGBoost, {}, 0), ToolError);
    EXPECT_THROW(zero_inflated_params(ModelKind::DecisionTree, {}, 0), ToolError);
}

TEST(ModelKindTest, FractionalCountsAreRejected) {
    EXPECT_THROW(fit_regressor(ModelKind::RandomForest, {{"n_trees", 2.5}}, Matrix(5, 1), std::vector<double>(5), 0),
                 ToolError);
}
