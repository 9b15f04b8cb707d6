#pragma once

// Model artifact files: a fitted pipeline plus its feature schema and
// training metadata, as JSON. Doubles are written in shortest round-trip
// form, so a load reproduces every parameter bit for bit.

#include "solarcast/eval/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

namespace solarcast::cli {

using nlohmann::json;

inline constexpr int kArtifactFormatVersion = 1;

struct ModelArtifact {
    int format_version = kArtifactFormatVersion;
    eval::FittedPipeline pipeline;
    features::FeatureOptions features;
    std::uint64_t seed = 0;
    std::string config_digest;
    // last source timestamp seen in training; stands in for a wall-clock stamp
    std::string trained_through;
    std::size_t train_rows = 0;
};

namespace detail {

[[noreturn]] inline void bad_artifact(const std::string& what) {
    throw ToolError(ErrorKind::SchemaError, "malformed model artifact: " + what);
}

// JSON has no inf/nan; those travel as strings.
inline json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

inline double get_num(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    bad_artifact("expected a number");
}

inline const json& at(const json& j, const char* key) {
    if (!j.is_object()) bad_artifact(std::string{"expected an object holding '"} + key + "'");
    auto it = j.find(key);
    if (it == j.end()) bad_artifact(std::string{"missing field '"} + key + "'");
    return *it;
}

inline double get_d(const json& j, const char* key) { return get_num(at(j, key)); }

template <class T>
T get_as(const json& j, const char* key) {
    try {
        return at(j, key).get<T>();
    } catch (const json::exception&) {
        bad_artifact(std::string{"bad field '"} + key + "'");
    }
}

inline json nums(std::span<const double> v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

inline std::vector<double> get_nums(const json& j, const char* key) {
    const auto& a = at(j, key);
    if (!a.is_array()) bad_artifact(std::string{"field '"} + key + "' is not an array");
    std::vector<double> out;
    out.reserve(a.size());
    for (const auto& x : a) out.push_back(get_num(x));
    return out;
}

// ---- models ----

inline json to_json(const models::LinearModel& m) {
    return {{"intercept", num(m.intercept)}, {"coefficients", nums(m.coefficients)}, {"l2", num(m.l2)}};
}

inline models::LinearModel linear_from(const json& j) {
    models::LinearModel m;
    m.intercept = get_d(j, "intercept");
    m.coefficients = get_nums(j, "coefficients");
    m.l2 = get_d(j, "l2");
    return m;
}

inline json to_json(const models::LogisticModel& m) {
    return {{"intercept", num(m.intercept)},
            {"coefficients", nums(m.coefficients)},
            {"converged", m.converged},
            {"iterations", m.iterations}};
}

inline models::LogisticModel logistic_from(const json& j) {
    models::LogisticModel m;
    m.intercept = get_d(j, "intercept");
    m.coefficients = get_nums(j, "coefficients");
    m.converged = get_as<bool>(j, "converged");
    m.iterations = get_as<std::size_t>(j, "iterations");
    return m;
}

inline json to_json(const models::DecisionTree& t) {
    json feature = json::array(), left = json::array(), right = json::array();
    std::vector<double> threshold, value;
    for (const auto& n : t.nodes) {
        feature.push_back(n.feature);
        left.push_back(n.left);
        right.push_back(n.right);
        threshold.push_back(n.threshold);
        value.push_back(n.value);
    }
    return {{"max_depth", t.max_depth},     {"min_samples_leaf", t.min_samples_leaf},
            {"n_features", t.n_features},   {"feature", feature},
            {"threshold", nums(threshold)}, {"left", left},
            {"right", right},               {"value", nums(value)}};
}

inline models::DecisionTree tree_from(const json& j) {
    models::DecisionTree t;
    t.max_depth = get_as<int>(j, "max_depth");
    t.min_samples_leaf = get_as<std::size_t>(j, "min_samples_leaf");
    t.n_features = get_as<std::size_t>(j, "n_features");
    const auto feature = get_as<std::vector<int>>(j, "feature");
    const auto left = get_as<std::vector<int>>(j, "left");
    const auto right = get_as<std::vector<int>>(j, "right");
    const auto threshold = get_nums(j, "threshold");
    const auto value = get_nums(j, "value");
    const auto n = feature.size();
    if (n == 0 || left.size() != n || right.size() != n || threshold.size() != n || value.size() != n) {
        bad_artifact("tree arrays have inconsistent lengths");
    }
    t.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& node = t.nodes[i];
        node.feature = feature[i];
        node.threshold = threshold[i];
        node.left = left[i];
        node.right = right[i];
        node.value = value[i];
        if (node.feature >= 0) {
            const auto valid = [&](int c) { return c > static_cast<int>(i) && c < static_cast<int>(n); };
            if (static_cast<std::size_t>(node.feature) >= t.n_features || !valid(node.left) || !valid(node.right)) {
                bad_artifact("tree node " + std::to_string(i) + " is out of range");
            }
        }
    }
    return t;
}

inline json to_json(const models::ForestModel& m) {
    json trees = json::array();
    for (const auto& t : m.trees) trees.push_back(to_json(t));
    return {{"trees", trees},
            {"tree_seeds", m.tree_seeds},
            {"feature_fraction", num(m.feature_fraction)},
            {"bootstrap", m.bootstrap},
            {"n_features", m.n_features}};
}

inline models::ForestModel forest_from(const json& j) {
    models::ForestModel m;
    for (const auto& t : at(j, "trees")) m.trees.push_back(tree_from(t));
    if (m.trees.empty()) bad_artifact("forest has no trees");
    m.tree_seeds = get_as<std::vector<std::uint64_t>>(j, "tree_seeds");
    m.feature_fraction = get_d(j, "feature_fraction");
    m.bootstrap = get_as<bool>(j, "bootstrap");
    m.n_features = get_as<std::size_t>(j, "n_features");
    return m;
}

inline std::string_view loss_name(models::Loss l) {
    switch (l) {
        case models::Loss::squared: return "squared";
        case models::Loss::tweedie: return "tweedie";
        case models::Loss::logistic: return "logistic";
    }
    return "?";
}

inline models::Loss loss_from(const std::string& s) {
    if (s == "squared") return models::Loss::squared;
    if (s == "tweedie") return models::Loss::tweedie;
    if (s == "logistic") return models::Loss::logistic;
    bad_artifact("unknown loss '" + s + "'");
}

inline json to_json(const models::BoostedModel& m) {
    json trees = json::array();
    for (const auto& t : m.trees) trees.push_back(to_json(t));
    return {{"f0", num(m.f0)},
            {"trees", trees},
            {"stage_weights", nums(m.stage_weights)},
            {"loss", loss_name(m.loss)},
            {"order", m.order == models::BoostOrder::first ? "first" : "second"},
            {"tweedie_power", num(m.tweedie_power)},
            {"learning_rate", num(m.learning_rate)},
            {"row_subsample", num(m.row_subsample)},
            {"col_subsample", num(m.col_subsample)},
            {"l2_leaf", num(m.l2_leaf)},
            {"n_features", m.n_features},
            {"dispersion", num(m.dispersion)},
            {"train_loss", nums(m.train_loss)}};
}

inline models::BoostedModel boosted_from(const json& j) {
    models::BoostedModel m;
    m.f0 = get_d(j, "f0");
    for (const auto& t : at(j, "trees")) m.trees.push_back(tree_from(t));
    m.stage_weights = get_nums(j, "stage_weights");
    if (m.stage_weights.size() != m.trees.size()) bad_artifact("stage weights do not match trees");
    m.loss = loss_from(get_as<std::string>(j, "loss"));
    const auto order = get_as<std::string>(j, "order");
    if (order != "first" && order != "second") bad_artifact("unknown boosting order '" + order + "'");
    m.order = order == "first" ? models::BoostOrder::first : models::BoostOrder::second;
    m.tweedie_power = get_d(j, "tweedie_power");
    m.learning_rate = get_d(j, "learning_rate");
    m.row_subsample = get_d(j, "row_subsample");
    m.col_subsample = get_d(j, "col_subsample");
    m.l2_leaf = get_d(j, "l2_leaf");
    m.n_features = get_as<std::size_t>(j, "n_features");
    m.dispersion = get_d(j, "dispersion");
    m.train_loss = get_nums(j, "train_loss");
    return m;
}

inline json to_json(const models::ZeroInflatedModel& m) {
    json gate = std::visit(
        [](const auto& g) -> json {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, models::LogisticModel>) return {{"kind", "logistic"}, {"model", to_json(g)}};
            else if constexpr (std::is_same_v<T, models::BoostedModel>) return {{"kind", "boosted"}, {"model", to_json(g)}};
            else return {{"kind", "forest"}, {"model", to_json(g)}};
        },
        m.gate);
    json positive = std::visit(
        [](const auto& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, models::BoostedModel>) return {{"kind", "boosted"}, {"model", to_json(p)}};
            else if constexpr (std::is_same_v<T, models::ForestModel>) return {{"kind", "forest"}, {"model", to_json(p)}};
            else return {{"kind", "log_linear"}, {"model", to_json(p.log_model)}, {"smearing", num(p.smearing)}};
        },
        m.positive);
    return {{"gate", gate}, {"positive", positive}, {"n_features", m.n_features}, {"zero_fraction", num(m.zero_fraction)}};
}

inline models::ZeroInflatedModel zero_inflated_from(const json& j) {
    models::ZeroInflatedModel m;
    const auto& g = at(j, "gate");
    const auto gk = get_as<std::string>(g, "kind");
    if (gk == "logistic") {
        m.gate = logistic_from(at(g, "model"));
    } else if (gk == "boosted") {
        m.gate = boosted_from(at(g, "model"));
    } else if (gk == "forest") {
        m.gate = forest_from(at(g, "model"));
    } else {
        bad_artifact("unknown gate kind '" + gk + "'");
    }
    const auto& p = at(j, "positive");
    const auto pk = get_as<std::string>(p, "kind");
    if (pk == "boosted") {
        m.positive = boosted_from(at(p, "model"));
    } else if (pk == "forest") {
        m.positive = forest_from(at(p, "model"));
    } else if (pk == "log_linear") {
        m.positive = models::LogLinearModel{linear_from(at(p, "model")), get_d(p, "smearing")};
    } else {
        bad_artifact("unknown positive kind '" + pk + "'");
    }
    m.n_features = get_as<std::size_t>(j, "n_features");
    m.zero_fraction = get_d(j, "zero_fraction");
    return m;
}

inline json to_json(const models::AveragingEnsemble& m) {
    return {{"forest", to_json(m.forest)},
            {"boosted", to_json(m.boosted)},
            {"forest_weight", num(m.forest_weight)},
            {"boosted_weight", num(m.boosted_weight)}};
}

inline models::AveragingEnsemble ensemble_from(const json& j) {
    models::AveragingEnsemble m;
    m.forest = forest_from(at(j, "forest"));
    m.boosted = boosted_from(at(j, "boosted"));
    m.forest_weight = get_d(j, "forest_weight");
    m.boosted_weight = get_d(j, "boosted_weight");
    return m;
}

inline json to_json(const transform::ColumnParams& p) {
    return {{"transformed", p.transformed},
            {"lambda", num(p.lambda)},
            {"mean", num(p.mean)},
            {"sd", num(p.sd)},
            {"log_likelihood", num(p.log_likelihood)}};
}

inline transform::ColumnParams column_from(const json& j) {
    transform::ColumnParams p;
    p.transformed = get_as<bool>(j, "transformed");
    p.lambda = get_d(j, "lambda");
    p.mean = get_d(j, "mean");
    p.sd = get_d(j, "sd");
    p.log_likelihood = get_d(j, "log_likelihood");
    if (p.transformed && !(p.sd > 0.0)) bad_artifact("transform sd must be positive");
    return p;
}

}  // namespace detail

/// The estimator alone, tagged with its kind.
inline json model_to_json(const models::AnyModel& m) {
    json body = std::visit([](const auto& model) { return detail::to_json(model); }, m);
    return {{"tag", models::kind_tag(m)}, {"params", body}};
}

inline models::AnyModel model_from_json(const json& j) {
    const auto tag = detail::get_as<std::string>(j, "tag");
    const auto& p = detail::at(j, "params");
    if (tag == "linear") return detail::linear_from(p);
    if (tag == "tree") return detail::tree_from(p);
    if (tag == "forest") return detail::forest_from(p);
    if (tag == "boosted") return detail::boosted_from(p);
    if (tag == "logistic") return detail::logistic_from(p);
    if (tag == "zero_inflated") return detail::zero_inflated_from(p);
    if (tag == "ensemble") return detail::ensemble_from(p);
    detail::bad_artifact("unknown model tag '" + tag + "'");
}

inline json artifact_to_json(const ModelArtifact& a) {
    const auto& p = a.pipeline;
    json feature_transform = nullptr;
    if (p.feature_transform) {
        feature_transform = json::array();
        for (const auto& c : p.feature_transform->columns) feature_transform.push_back(detail::to_json(c));
    }
    json target_transform = nullptr;
    if (p.target_transform) target_transform = detail::to_json(*p.target_transform);
    return {{"format_version", a.format_version},
            {"methodology", eval::to_string(p.methodology)},
            {"model", p.model_name},
            {"horizon_hours", p.horizon_hours},
            {"features", {{"names", p.feature_names}, {"lags", a.features.lags}, {"calendar", a.features.calendar}}},
            {"feature_transform", feature_transform},
            {"target_transform", target_transform},
            {"estimator", model_to_json(p.model)},
            {"metadata",
             {{"seed", a.seed},
              {"config_digest", a.config_digest},
              {"trained_through", a.trained_through},
              {"train_rows", a.train_rows}}}};
}

inline ModelArtifact artifact_from_json(const json& j) {
    using namespace detail;
    ModelArtifact a;
    a.format_version = get_as<int>(j, "format_version");
    if (a.format_version != kArtifactFormatVersion) {
        throw ToolError(ErrorKind::SchemaError, "unsupported artifact format_version " + std::to_string(a.format_version));
    }
    auto& p = a.pipeline;
    try {
        p.methodology = eval::methodology_from_name(get_as<std::string>(j, "methodology"));
        p.model_name = std::string{models::to_string(models::model_kind_from_name(get_as<std::string>(j, "model")))};
    } catch (const ToolError& e) {
        bad_artifact(e.message());
    }
    p.horizon_hours = get_as<int>(j, "horizon_hours");
    if (!valid_horizon(p.horizon_hours)) bad_artifact("horizon must be 24, 48 or 72");
    const auto& f = at(j, "features");
    p.feature_names = get_as<std::vector<std::string>>(f, "names");
    a.features.lags = get_as<std::vector<int>>(f, "lags");
    a.features.calendar = get_as<bool>(f, "calendar");
    if (const auto& ft = at(j, "feature_transform"); !ft.is_null()) {
        transform::PowerTransformParams params;
        for (const auto& c : ft) params.columns.push_back(column_from(c));
        if (params.size() != p.feature_names.size()) bad_artifact("feature transform width does not match the feature list");
        p.feature_transform = std::move(params);
    }
    if (const auto& tt = at(j, "target_transform"); !tt.is_null()) p.target_transform = column_from(tt);
    p.model = model_from_json(at(j, "estimator"));
    if (models::feature_count(p.model) != p.feature_names.size()) bad_artifact("estimator width does not match the feature list");
    const auto& meta = at(j, "metadata");
    a.seed = get_as<std::uint64_t>(meta, "seed");
    a.config_digest = get_as<std::string>(meta, "config_digest");
    a.trained_through = get_as<std::string>(meta, "trained_through");
    a.train_rows = get_as<std::size_t>(meta, "train_rows");
    return a;
}

inline std::string artifact_text(const ModelArtifact& a) { return artifact_to_json(a).dump(1) + "\n"; }

inline ModelArtifact parse_artifact(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        detail::bad_artifact(e.what());
    }
    return artifact_from_json(j);
}

inline ModelArtifact load_artifact(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ToolError(ErrorKind::IoError, "cannot open model artifact", path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_artifact(ss.str());
    } catch (const ToolError& e) {
        throw ToolError(e.kind(), e.message(), path.string());
    }
}

}  // namespace solarcast::cli
