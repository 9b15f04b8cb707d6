#include "solarcast/cli/artifact.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace solarcast;
using namespace solarcast::cli;
using eval::Methodology;
using models::ModelKind;

namespace {

// positive target with about a third zeros, so every methodology fits
SupervisedDataset zero_heavy(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    SupervisedDataset ds;
    ds.horizon_hours = 24;
    ds.X = test::random_matrix(n, 4, rng, -1, 1);
    ds.feature_names = {"a", "b", "c", "d"};
    for (std::size_t i = 0; i < n; ++i) {
        const double s = ds.X(i, 0) + 0.3 * ds.X(i, 1);
        ds.y.push_back(s < -0.3 ? 0.0 : 5 + 10 * (s + 0.3) + 2 * ds.X(i, 2) * ds.X(i, 2) + uniform01(rng));
        ds.timestamps.push_back(test::t0().plus_hours(static_cast<std::int64_t>(i)));
    }
    return ds;
}

models::Hyperparameters small(ModelKind k) {
    switch (k) {
        case ModelKind::RandomForest: return {{"n_trees", 5}, {"max_depth", 6}};
        case ModelKind::GradientBoosting:
        case ModelKind::XGBoost: return {{"n_stages", 10}, {"max_depth", 3}};
        case ModelKind::RandomForestXGBoost: return {{"forest.n_trees", 4}, {"boosted.n_stages", 8}};
        default: return {};
    }
}

ModelArtifact make_artifact(Methodology m, ModelKind k, const SupervisedDataset& train) {
    eval::PipelineSpec spec;
    spec.methodology = m;
    spec.kind = k;
    spec.hyperparameters = small(k);
    ModelArtifact a;
    a.pipeline = eval::fit_pipeline(spec, train, 17);
    a.features.lags = {0, 24};
    a.seed = 17;
    a.config_digest = "0123456789abcdef";
    a.trained_through = train.timestamps.back().to_string();
    a.train_rows = train.size();
    return a;
}

std::vector<std::pair<Methodology, ModelKind>> all_cells() {
    std::vector<std::pair<Methodology, ModelKind>> out;
    for (auto m : {Methodology::regular, Methodology::power_transform}) {
        for (auto k : {ModelKind::LinearRegression, ModelKind::DecisionTree, ModelKind::GradientBoosting, ModelKind::XGBoost,
                       ModelKind::RandomForest, ModelKind::RandomForestXGBoost}) {
            out.emplace_back(m, k);
        }
    }
    for (auto k : {ModelKind::LinearRegression, ModelKind::GradientBoosting, ModelKind::XGBoost, ModelKind::RandomForest}) {
        out.emplace_back(Methodology::zero_inflated, k);
    }
    return out;
}

ErrorKind parse_error(const std::string& text) {
    try {
        (void)parse_artifact(text);
    } catch (const ToolError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "parsed without error";
    return ErrorKind::IoError;
}

}  // namespace

TEST(ArtifactTest, RoundTripIsBitIdenticalForEveryModel) {
    const auto train = zero_heavy(300, 1);
    Rng rng(2);
    const Matrix probe = test::random_matrix(1000, 4, rng, -1.5, 1.5);
    for (const auto& [m, k] : all_cells()) {
        SCOPED_TRACE(std::string{eval::to_string(m)} + "/" + std::string{models::to_string(k)});
        const auto a = make_artifact(m, k, train);
        const auto text = artifact_text(a);
        const auto b = parse_artifact(text);
        EXPECT_TRUE(test::bit_equal(a.pipeline.predict_raw(probe), b.pipeline.predict_raw(probe)));
        EXPECT_EQ(artifact_text(b), text);
        EXPECT_EQ(b.pipeline.methodology, m);
        EXPECT_EQ(b.pipeline.model_name, models::to_string(k));
        EXPECT_EQ(b.pipeline.feature_names, a.pipeline.feature_names);
        EXPECT_EQ(b.features.lags, a.features.lags);
        EXPECT_EQ(b.seed, 17u);
        EXPECT_EQ(b.config_digest, a.config_digest);
        EXPECT_EQ(b.trained_through, a.trained_through);
        EXPECT_EQ(b.train_rows, 300u);
    }
}

TEST(ArtifactTest, NonFiniteParametersSurvive) {
    const auto train = zero_heavy(100, 3);
    auto a = make_artifact(Methodology::regular, ModelKind::DecisionTree, train);
    auto& tree = std::get<models::DecisionTree>(a.pipeline.model);
    tree.nodes.back().threshold = std::numeric_limits<double>::infinity();
    tree.nodes.front().value = std::numeric_limits<double>::quiet_NaN();
    const auto b = parse_artifact(artifact_text(a));
    const auto& t2 = std::get<models::DecisionTree>(b.pipeline.model);
    EXPECT_TRUE(std::isinf(t2.nodes.back().threshold));
    EXPECT_TRUE(std::isnan(t2.nodes.front().value));
}

TEST(ArtifactTest, SaveAndLoadFromDisk) {
    const auto train = zero_heavy(120, 4);
    const auto a = make_artifact(Methodology::power_transform, ModelKind::LinearRegression, train);
    const auto path = std::filesystem::temp_directory_path() / "solarcast_artifact_test.json";
    {
        std::ofstream f(path);
        f << artifact_text(a);
    }
    const auto b = load_artifact(path);
    EXPECT_TRUE(test::bit_equal(a.pipeline.predict_raw(train.X), b.pipeline.predict_raw(train.X)));
    std::filesystem::remove(path);
}

TEST(ArtifactTest, MissingFileIsIoError) {
    try {
        (void)load_artifact("/nonexistent/model.json");
        FAIL();
    } catch (const ToolError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::IoError);
        EXPECT_NE(std::string{e.what()}.find("/nonexistent/model.json"), std::string::npos);
    }
}

TEST(ArtifactTest, MalformedArtifactsAreSchemaErrors) {
    const auto train = zero_heavy(120, 5);
    const auto good = artifact_to_json(make_artifact(Methodology::zero_inflated, ModelKind::GradientBoosting, train));

    EXPECT_EQ(parse_error("not json"), ErrorKind::SchemaError);
    EXPECT_EQ(parse_error("[]"), ErrorKind::SchemaError);
    EXPECT_EQ(parse_error(good.dump().substr(0, 200)), ErrorKind::SchemaError);

    auto mutate = [&](auto fn) {
        json j = good;
        fn(j);
        return parse_error(j.dump());
    };
    EXPECT_EQ(mutate([](json& j) { j["format_version"] = 2; }), ErrorKind::SchemaError);
    EXPECT_EQ(mutate([](json& j) { j.erase("estimator"); }), ErrorKind::SchemaError);
    EXPECT_EQ(mutate([](json& j) { j["methodology"] = "fancy"; }), ErrorKind::SchemaError);
    EXPECT_EQ(mutate([](json& j) { j["model"] = "Perceptron"; }), ErrorKind::SchemaError);
    EXPECT_EQ(mutate([](json& j) { j["horizon_hours"] = 36; }), ErrorKind::SchemaError);
    EXPECT_EQ(mutate([](json& j) { j["horizon_hours"] = "24"; }), ErrorKind::SchemaError);
    EXPECT_EQ(mutate([](json& j) { j["estimator"]["tag"] = "svm"; }), ErrorKind::SchemaError);
    EXPECT_EQ(mutate([](json& j) { j["features"]["names"].push_back("extra"); }), ErrorKind::SchemaError);
    EXPECT_EQ(mutate([](json& j) { j["estimator"]["params"]["gate"]["kind"] = "oracle"; }), ErrorKind::SchemaError);
    EXPECT_EQ(mutate([](json& j) { j["estimator"]["params"]["positive"]["model"]["loss"] = "hinge"; }),
              ErrorKind::SchemaError);
    EXPECT_EQ(mutate([](json& j) { j["estimator"]["params"]["positive"]["model"]["stage_weights"].push_back(1.0); }),
              ErrorKind::SchemaError);
    EXPECT_EQ(mutate([](json& j) { j["metadata"].erase("seed"); }), ErrorKind::SchemaError);
}

TEST(ArtifactTest, CorruptTreeIsRejected) {
    const auto train = zero_heavy(120, 6);
    const auto good = artifact_to_json(make_artifact(Methodology::regular, ModelKind::DecisionTree, train));
    auto bad_child = good;
    bad_child["estimator"]["params"]["left"][0] = 0;
    EXPECT_EQ(parse_error(bad_child.dump()), ErrorKind::SchemaError);
    auto bad_feature = good;
    bad_feature["estimator"]["params"]["feature"][0] = 99;
    EXPECT_EQ(parse_error(bad_feature.dump()), ErrorKind::SchemaError);
    auto short_arrays = good;
    short_arrays["estimator"]["params"]["value"].erase(0);
    EXPECT_EQ(parse_error(short_arrays.dump()), ErrorKind::SchemaError);
}

TEST(ArtifactTest, TransformWidthMustMatchFeatures) {
    const auto train = zero_heavy(120, 7);
    auto j = artifact_to_json(make_artifact(Methodology::power_transform, ModelKind::LinearRegression, train));
    j["feature_transform"].erase(0);
    EXPECT_EQ(parse_error(j.dump()), ErrorKind::SchemaError);
    auto k = artifact_to_json(make_artifact(Methodology::power_transform, ModelKind::LinearRegression, train));
    k["target_transform"]["sd"] = 0.0;
    EXPECT_EQ(parse_error(k.dump()), ErrorKind::SchemaError);
}

TEST(ArtifactTest, TextIsDeterministic) {
    const auto train = zero_heavy(150, 8);
    EXPECT_EQ(artifact_text(make_artifact(Methodology::regular, ModelKind::RandomForestXGBoost, train)),
              artifact_text(make_artifact(Methodology::regular, ModelKind::RandomForestXGBoost, train)));
}
