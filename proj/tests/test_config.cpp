#include "solarcast/cli/config.hpp"

#include <gtest/gtest.h>

using namespace solarcast;
using namespace solarcast::cli;

namespace {

ErrorKind build_error(const std::string& text) {
    try {
        (void)build_config(parse_ini(text));
    } catch (const ToolError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected an error for:\n" << text;
    return ErrorKind::IoError;
}

}  // namespace

TEST(IniTest, SectionsKeysAndComments) {
    const auto s = parse_ini("# header\n[run]\nseed = 7 ; trailing\n\n[features]\n  horizons=24,48  \n");
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s.at("run").at("seed"), "7");
    EXPECT_EQ(s.at("features").at("horizons"), "24,48");
}

TEST(IniTest, MalformedInputIsConfigError) {
    for (const std::string bad : {"[run]\nseed = 1\nseed = 2\n", "seed = 1\n", "[run]\nseed\n", "[run\nseed = 1\n", "[]\n",
                                  "[run]\n= 3\n"}) {
        try {
            (void)parse_ini(bad, "x.ini");
            ADD_FAILURE() << bad;
        } catch (const ToolError& e) {
            EXPECT_EQ(e.kind(), ErrorKind::ConfigError) << bad;
            EXPECT_NE(e.context().find("x.ini:"), std::string::npos);
        }
    }
}

TEST(IniTest, DuplicateKeyNamesLine) {
    try {
        (void)parse_ini("[run]\nseed = 1\nseed = 2\n", "c.ini");
        FAIL();
    } catch (const ToolError& e) {
        EXPECT_EQ(e.context(), "c.ini:3");
    }
}

TEST(ConfigDigestTest, IgnoresOrderAndFormatting) {
    const auto a = parse_ini("[run]\nseed = 1\nout = x\n[features]\nhorizons = 24\n");
    const auto b = parse_ini("[features]\nhorizons=24\n# note\n[run]\nout=x\nseed=1\n");
    EXPECT_EQ(config_digest(a), config_digest(b));
    EXPECT_EQ(config_digest(a).size(), 16u);
    const auto c = parse_ini("[run]\nseed = 2\nout = x\n[features]\nhorizons = 24\n");
    EXPECT_NE(config_digest(a), config_digest(c));
}

TEST(ConfigTest, DefaultsWithoutSections) {
    const auto cfg = build_config({});
    EXPECT_EQ(cfg.seed, 42u);
    EXPECT_EQ(cfg.horizons(), (std::vector<int>{24, 48, 72}));
    EXPECT_DOUBLE_EQ(cfg.benchmark.split.train_fraction, 0.7);
    EXPECT_TRUE(cfg.benchmark.methodologies.empty());
}

TEST(ConfigTest, ParsesEverySection) {
    const auto cfg = build_config(parse_ini(R"(
[ingest]
generation_agg = mean
aqi_staleness_hours = 12
max_generation = 500
[features]
horizons = 48, 72
lags = 0, 1, 24
calendar = false
split_mode = random
train_fraction = 0.8
cv_folds = 3
cv_mode = shuffled
[models]
regular = LinearRegression, RandomForest
zero_inflated = XGBoost
[model.RandomForest]
n_trees = 7
[grid.LinearRegression]
l2 = 0, 1
[grid]
scoring = mae
[run]
seed = 99
[synth]
days = 40
start = 2021-03-01
[plot]
methodology = regular
model = LinearRegression
horizon = 48
bins = 10
)"));
    EXPECT_EQ(cfg.generation_agg, ingest::Aggregation::mean);
    EXPECT_EQ(cfg.merge.aqi_staleness_hours, 12);
    EXPECT_DOUBLE_EQ(cfg.limits.max_generation, 500);
    EXPECT_EQ(cfg.horizons(), (std::vector<int>{48, 72}));
    EXPECT_EQ(cfg.benchmark.features.lags, (std::vector<int>{0, 1, 24}));
    EXPECT_FALSE(cfg.benchmark.features.calendar);
    EXPECT_EQ(cfg.benchmark.split.mode, features::SplitMode::random);
    EXPECT_DOUBLE_EQ(cfg.benchmark.split.train_fraction, 0.8);
    EXPECT_EQ(cfg.folds.k, 3u);
    EXPECT_EQ(cfg.folds.mode, features::FoldMode::shuffled);
    EXPECT_EQ(cfg.scoring, eval::ScoreMetric::mae);
    EXPECT_EQ(cfg.seed, 99u);
    EXPECT_EQ(cfg.benchmark.seed, 99u);
    EXPECT_EQ(cfg.synth.n_days, 40);
    EXPECT_EQ(cfg.synth.start_month, 3);
    EXPECT_EQ(cfg.plot.horizon, 48);
    EXPECT_EQ(cfg.plot.bins, 10u);

    ASSERT_EQ(cfg.benchmark.methodologies.size(), 2u);
    const auto& [m0, regular] = cfg.benchmark.methodologies[0];
    EXPECT_EQ(m0, eval::Methodology::regular);
    ASSERT_EQ(regular.size(), 2u);
    ASSERT_TRUE(regular[0].grid.has_value());
    EXPECT_EQ(regular[0].grid->values.at("l2"), (std::vector<double>{0, 1}));
    EXPECT_EQ(regular[0].grid->metric, eval::ScoreMetric::mae);
    EXPECT_EQ(regular[0].grid->folds.k, 3u);
    EXPECT_DOUBLE_EQ(regular[1].hyperparameters.at("n_trees"), 7);
    EXPECT_FALSE(regular[1].grid.has_value());
    EXPECT_EQ(cfg.benchmark.methodologies[1].first, eval::Methodology::zero_inflated);
}

TEST(ConfigTest, UnknownSectionsAndKeysAreRejected) {
    EXPECT_EQ(build_error("[runn]\nseed = 1\n"), ErrorKind::ConfigError);
    EXPECT_EQ(build_error("[run]\nsede = 1\n"), ErrorKind::ConfigError);
    EXPECT_EQ(build_error("[model.RandomForest]\ndepth = 3\n"), ErrorKind::ConfigError);
    EXPECT_EQ(build_error("[grid.LinearRegression]\nalpha = 1\n"), ErrorKind::ConfigError);
    EXPECT_EQ(build_error("[model.Perceptron]\nl2 = 1\n"), ErrorKind::ConfigError);
    EXPECT_EQ(build_error("[models]\nregular = Perceptron\n"), ErrorKind::ConfigError);
}

TEST(ConfigTest, InvalidValuesAreRejected) {
    for (const std::string bad : {
             "[features]\nhorizons = 12\n",
             "[features]\nhorizons = ,\n",
             "[features]\ntrain_fraction = 1\n",
             "[features]\ntrain_fraction = 0\n",
             "[features]\ncv_folds = 1\n",
             "[features]\nsplit_mode = sideways\n",
             "[features]\ncalendar = maybe\n",
             "[ingest]\ngeneration_agg = median\n",
             "[run]\nseed = -1\n",
             "[run]\nseed = abc\n",
             "[synth]\nstart = yesterday\n",
             "[synth]\ndays = 0\n",
             "[plot]\nhorizon = 36\n",
             "[grid.LinearRegression]\nl2 = ,\n",
             "[model.RandomForest]\nn_trees = many\n",
         }) {
        EXPECT_EQ(build_error(bad), ErrorKind::ConfigError) << bad;
    }
}

TEST(ConfigTest, ZeroInflatedEnsembleIsRejected) {
    EXPECT_EQ(build_error("[models]\nzero_inflated = RandomForest+XGBoost\n"), ErrorKind::ConfigError);
    EXPECT_NO_THROW((void)build_config(parse_ini("[models]\nregular = RandomForest+XGBoost\n")));
}

TEST(ConfigTest, RelativePathsResolveAgainstConfigDirectory) {
    const auto cfg = build_config(parse_ini("[data]\nsolar = in/solar.csv\nweather = /abs/w.csv\n[run]\nout = ../o\n"),
                                  "/etc/cfgs");
    EXPECT_EQ(cfg.solar, std::filesystem::path("/etc/cfgs/in/solar.csv"));
    EXPECT_EQ(cfg.weather, std::filesystem::path("/abs/w.csv"));
    EXPECT_EQ(cfg.out, std::filesystem::path("/etc/cfgs/../o"));
}

TEST(ConfigTest, LoadConfigFromFile) {
    const auto dir = std::filesystem::temp_directory_path() / "solarcast_config_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "c.ini";
    {
        std::ofstream f(path);
        f << "[run]\nseed = 5\nout = results\n";
    }
    const auto cfg = load_config(path);
    EXPECT_EQ(cfg.seed, 5u);
    EXPECT_EQ(cfg.out, dir / "results");
    EXPECT_EQ(cfg.digest, config_digest(parse_ini("[run]\nout=results\nseed=5\n")));
    std::filesystem::remove_all(dir);

    try {
        (void)load_config(dir / "missing.ini");
        FAIL();
    } catch (const ToolError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
        EXPECT_NE(e.context().find("missing.ini"), std::string::npos);
    }
}

TEST(ConfigTest, ShippedConfigsLoad) {
    for (const char* name : {"quick.ini", "full.ini"}) {
        const auto cfg = load_config(std::filesystem::path(SOLARCAST_CONFIG_DIR) / name);
        EXPECT_FALSE(cfg.benchmark.methodologies.empty()) << name;
    }
    const auto full = load_config(std::filesystem::path(SOLARCAST_CONFIG_DIR) / "full.ini");
    std::size_t cells = 0;
    for (const auto& [_, entries] : full.benchmark.methodologies) cells += entries.size() * full.horizons().size();
    EXPECT_EQ(cells, 42u);
}
