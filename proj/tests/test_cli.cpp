#include "solarcast/features.hpp"
#include "solarcast/ingest.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace solarcast;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string{SOLARCAST_CLI_PATH} + " " + args + " 2>&1";
    RunResult r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) r.output += buf.data();
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

double independent_generation(std::size_t i) { return 10.0 + 4.0 * std::cos(0.05 * static_cast<double>(i)) + static_cast<double>(i % 5); }

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string{"solarcast_cli_"} + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write_config(const std::string& body, const std::string& name = "run.ini") {
        const auto p = dir_ / name;
        spit(p, body);
        return p;
    }

    std::string cfg_arg(const fs::path& p) const { return "--config " + p.string(); }

    static std::string synthetic_config(const std::string& models) {
        return "[data]\nsolar = solar.csv\nweather = weather.csv\naqi = aqi.csv\n"
               "[features]\nhorizons = 24\n"
               "[models]\n" +
               models +
               "\n[model.RandomForest]\nn_trees = 4\nmax_depth = 6\n"
               "[run]\nout = .\n"
               "[synth]\ndays = 45\n"
               "[plot]\nmethodology = regular\nmodel = LinearRegression\n";
    }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, SynthThenIngest) {
    const auto cfg = write_config(synthetic_config("regular = LinearRegression"));
    const auto s = run_cli("synth " + cfg_arg(cfg));
    ASSERT_EQ(s.code, 0) << s.output;
    for (const char* f : {"solar.csv", "weather.csv", "aqi.csv"}) EXPECT_TRUE(fs::exists(dir_ / f)) << f;

    const auto i = run_cli("ingest " + cfg_arg(cfg));
    ASSERT_EQ(i.code, 0) << i.output;
    const auto table = ingest::read_table_csv(dir_ / "merged.csv");
    EXPECT_EQ(table.rows.size(), 45u * 24u);
    EXPECT_TRUE(fs::exists(dir_ / "ingest_diagnostics.json"));
}

TEST_F(CliTest, SynthSeedOverrideChangesData) {
    const auto cfg = write_config(synthetic_config("regular = LinearRegression"));
    ASSERT_EQ(run_cli("synth " + cfg_arg(cfg) + " --seed 1").code, 0);
    const auto a = slurp(dir_ / "solar.csv");
    ASSERT_EQ(run_cli("synth " + cfg_arg(cfg) + " --seed 1").code, 0);
    EXPECT_EQ(slurp(dir_ / "solar.csv"), a);
    ASSERT_EQ(run_cli("synth " + cfg_arg(cfg) + " --seed 2").code, 0);
    EXPECT_NE(slurp(dir_ / "solar.csv"), a);
}

TEST_F(CliTest, MissingSourceIsIngestFailure) {
    const auto cfg = write_config(synthetic_config("regular = LinearRegression"));
    ASSERT_EQ(run_cli("synth " + cfg_arg(cfg)).code, 0);
    fs::remove(dir_ / "weather.csv");
    const auto r = run_cli("ingest " + cfg_arg(cfg));
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.output.find((dir_ / "weather.csv").string()), std::string::npos) << r.output;
}

TEST_F(CliTest, MalformedSourceIsIngestFailure) {
    const auto cfg = write_config(synthetic_config("regular = LinearRegression"));
    ASSERT_EQ(run_cli("synth " + cfg_arg(cfg)).code, 0);
    const auto text = slurp(dir_ / "weather.csv");
    spit(dir_ / "weather.csv", text.substr(0, text.find('\n') + 1) + "garbage\n");
    EXPECT_EQ(run_cli("ingest " + cfg_arg(cfg)).code, 2);
}

TEST_F(CliTest, ConfigProblemsExitFive) {
    EXPECT_EQ(run_cli("ingest --config " + (dir_ / "absent.ini").string()).code, 5);
    const auto bad = write_config("[run]\nsed = 1\n", "bad.ini");
    const auto r = run_cli("train " + cfg_arg(bad));
    EXPECT_EQ(r.code, 5);
    EXPECT_NE(r.output.find("sed"), std::string::npos) << r.output;

    const auto ok = write_config(synthetic_config("regular = LinearRegression"));
    EXPECT_EQ(run_cli("train " + cfg_arg(ok) + " --horizon 36").code, 5);
    EXPECT_EQ(run_cli("train " + cfg_arg(ok) + " --model Perceptron").code, 5);
    EXPECT_EQ(run_cli("train " + cfg_arg(ok) + " --model XGBoost").code, 5);
    EXPECT_EQ(run_cli("train " + cfg_arg(ok) + " --bogus").code, 5);
    EXPECT_EQ(run_cli("train").code, 5);
    EXPECT_EQ(run_cli("").code, 5);
    EXPECT_EQ(run_cli("--help").code, 0);
}

TEST_F(CliTest, TrainWithoutMergedTableIsIngestFailure) {
    const auto cfg = write_config("[data]\nmerged = nowhere.csv\n[models]\nregular = LinearRegression\n[run]\nout = .\n");
    EXPECT_EQ(run_cli("train " + cfg_arg(cfg)).code, 2);
}

TEST_F(CliTest, ZeroInflatedOnPositiveTargetIsTrainFailure) {
    const auto table = test::hourly_table(24 * 30, [](std::size_t i) { return 5.0 + static_cast<double>(i % 13); });
    spit(dir_ / "merged.csv", ingest::write_table_csv(table));
    const auto cfg = write_config("[data]\nmerged = merged.csv\n[features]\nhorizons = 24\n"
                                  "[models]\nzero_inflated = LinearRegression\n[run]\nout = .\n");
    const auto r = run_cli("train " + cfg_arg(cfg));
    EXPECT_EQ(r.code, 3);
    EXPECT_FALSE(fs::exists(dir_ / "models" / "zero_inflated__LinearRegression__24h.json"));
}

TEST_F(CliTest, SingleModelTrainsOneArtifactReproducibly) {
    const auto cfg = write_config(synthetic_config("regular = RandomForest"));
    ASSERT_EQ(run_cli("synth " + cfg_arg(cfg)).code, 0);
    ASSERT_EQ(run_cli("ingest " + cfg_arg(cfg)).code, 0);
    const auto r = run_cli("train " + cfg_arg(cfg));
    ASSERT_EQ(r.code, 0) << r.output;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir_ / "models")) files.push_back(e.path());
    ASSERT_EQ(files.size(), 1u);
    EXPECT_EQ(files[0].filename(), "regular__RandomForest__24h.json");
    const auto first = slurp(files[0]);

    ASSERT_EQ(run_cli("train " + cfg_arg(cfg)).code, 0);
    EXPECT_EQ(slurp(files[0]), first);
    ASSERT_EQ(run_cli("train " + cfg_arg(cfg) + " --seed 9").code, 0);
    EXPECT_NE(slurp(files[0]), first);
}

TEST_F(CliTest, OverridesSelectCells) {
    const auto cfg = write_config(synthetic_config("regular = LinearRegression, RandomForest\npower_transform = LinearRegression"));
    ASSERT_EQ(run_cli("synth " + cfg_arg(cfg)).code, 0);
    ASSERT_EQ(run_cli("ingest " + cfg_arg(cfg)).code, 0);
    const auto out = dir_ / "elsewhere";
    ASSERT_EQ(run_cli("train " + cfg_arg(cfg) + " --model LinearRegression --horizon 48 --out " + out.string()).code, 0);
    std::set<std::string> names;
    for (const auto& e : fs::directory_iterator(out / "models")) names.insert(e.path().filename().string());
    EXPECT_EQ(names, (std::set<std::string>{"regular__LinearRegression__48h.json", "power_transform__LinearRegression__48h.json"}));
}

TEST_F(CliTest, PredictWritesOneRowPerCompleteHour) {
    const auto cfg = write_config(synthetic_config("power_transform = LinearRegression"));
    ASSERT_EQ(run_cli("synth " + cfg_arg(cfg)).code, 0);
    ASSERT_EQ(run_cli("ingest " + cfg_arg(cfg)).code, 0);
    ASSERT_EQ(run_cli("train " + cfg_arg(cfg)).code, 0);
    const auto r = run_cli("predict " + cfg_arg(cfg) + " --model LinearRegression --horizon 24");
    ASSERT_EQ(r.code, 0) << r.output;
    const auto csv = slurp(dir_ / "predictions" / "power_transform__LinearRegression__24h.csv");
    const auto table = ingest::read_table_csv(dir_ / "merged.csv");
    const auto rows = features::make_feature_rows(table, {});
    EXPECT_EQ(line_count(csv), rows.timestamps.size() + 1);

    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "timestamp,target_timestamp,predicted_generation_kwh");
    const double max_generation = ValidationLimits{}.max_generation;
    std::size_t i = 0;
    while (std::getline(in, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        const auto ts = Timestamp::parse(line.substr(0, c1));
        const auto target = Timestamp::parse(line.substr(c1 + 1, c2 - c1 - 1));
        ASSERT_TRUE(ts && target);
        EXPECT_EQ(*ts, rows.timestamps[i]);
        EXPECT_EQ(target->hours_since_epoch() - ts->hours_since_epoch(), 24);
        const double v = std::stod(line.substr(c2 + 1));
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, max_generation);
        ++i;
    }
}

TEST_F(CliTest, PredictAgainstNarrowerTableIsSchemaFailure) {
    const auto table = test::hourly_table(24 * 20, independent_generation);
    spit(dir_ / "merged.csv", ingest::write_table_csv(table));
    const auto c = write_config("[data]\nmerged = merged.csv\n[features]\nhorizons = 24\ncalendar = false\n"
                                "[models]\nregular = LinearRegression\n[run]\nout = .\n");
    ASSERT_EQ(run_cli("train " + cfg_arg(c)).code, 0);
    const auto artifact = dir_ / "models" / "regular__LinearRegression__24h.json";
    ASSERT_TRUE(fs::exists(artifact));
    EXPECT_NE(slurp(artifact).find("\"aqi\""), std::string::npos);

    auto csv = ingest::write_table_csv(table);
    const auto header_end = csv.find('\n');
    auto header = csv.substr(0, header_end);
    ASSERT_NE(header.find(",aqi"), std::string::npos);
    // drop the aqi column from every line
    std::istringstream in(csv);
    std::string out, line;
    std::size_t aqi_col = 0;
    {
        std::istringstream h(header);
        std::string cell;
        while (std::getline(h, cell, ',') && cell != "aqi") ++aqi_col;
    }
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string cell, kept;
        for (std::size_t col = 0; std::getline(ls, cell, ','); ++col) {
            if (col == aqi_col) continue;
            kept += (kept.empty() ? "" : ",") + cell;
        }
        out += kept + '\n';
    }
    spit(dir_ / "narrow.csv", out);
    const auto r = run_cli("predict " + cfg_arg(c) + " --artifact " + artifact.string() + " --table " + (dir_ / "narrow.csv").string());
    EXPECT_EQ(r.code, 4);
    EXPECT_NE(r.output.find("aqi"), std::string::npos) << r.output;
}

TEST_F(CliTest, PredictArtifactProblemsExitFour) {
    const auto table = test::hourly_table(24 * 20, independent_generation);
    spit(dir_ / "merged.csv", ingest::write_table_csv(table));
    const auto c = write_config("[data]\nmerged = merged.csv\n[features]\nhorizons = 24\n"
                                "[models]\nregular = LinearRegression\n[run]\nout = .\n");
    EXPECT_EQ(run_cli("predict " + cfg_arg(c) + " --model LinearRegression --horizon 24").code, 4);
    ASSERT_EQ(run_cli("train " + cfg_arg(c)).code, 0);
    const auto artifact = dir_ / "models" / "regular__LinearRegression__24h.json";
    EXPECT_EQ(run_cli("predict " + cfg_arg(c) + " --artifact " + artifact.string() + " --horizon 48").code, 4);
    spit(dir_ / "broken.json", slurp(artifact).substr(0, 100));
    const auto r = run_cli("predict " + cfg_arg(c) + " --artifact " + (dir_ / "broken.json").string());
    EXPECT_EQ(r.code, 4);
    EXPECT_NE(r.output.find("SchemaError"), std::string::npos) << r.output;
    EXPECT_EQ(run_cli("predict " + cfg_arg(c)).code, 5);
    EXPECT_EQ(run_cli("predict " + cfg_arg(c) + " --artifact " + artifact.string()).code, 0);
}

TEST_F(CliTest, EvaluateScoresSavedArtifacts) {
    const auto cfg = write_config(synthetic_config("regular = LinearRegression\npower_transform = LinearRegression"));
    ASSERT_EQ(run_cli("synth " + cfg_arg(cfg)).code, 0);
    ASSERT_EQ(run_cli("ingest " + cfg_arg(cfg)).code, 0);
    EXPECT_EQ(run_cli("evaluate " + cfg_arg(cfg)).code, 4);
    ASSERT_EQ(run_cli("train " + cfg_arg(cfg)).code, 0);
    const auto r = run_cli("evaluate " + cfg_arg(cfg));
    ASSERT_EQ(r.code, 0) << r.output;
    const auto csv = slurp(dir_ / "evaluation.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "methodology,model,hours_out,scale,r2,mae,rmse");
    // regular reports one scale, power_transform two
    EXPECT_EQ(line_count(csv), 1u + 1u + 2u);
}

TEST_F(CliTest, BenchmarkWritesReportsAndPlotData) {
    const auto cfg = write_config(synthetic_config("regular = LinearRegression, RandomForest"));
    ASSERT_EQ(run_cli("synth " + cfg_arg(cfg)).code, 0);
    ASSERT_EQ(run_cli("ingest " + cfg_arg(cfg)).code, 0);
    const auto r = run_cli("benchmark " + cfg_arg(cfg));
    ASSERT_EQ(r.code, 0) << r.output;
    for (const char* f : {"report.csv", "report_all_scales.csv", "report.txt", "plot_monthly_generation.csv",
                          "plot_target_histogram.csv", "plot_actual_vs_predicted.csv", "manifest.json"}) {
        EXPECT_TRUE(fs::exists(dir_ / f)) << f;
    }
    const auto report = slurp(dir_ / "report.csv");
    EXPECT_EQ(line_count(report), 3u);
    const auto plot = slurp(dir_ / "plot_monthly_generation.csv");
    EXPECT_EQ(plot.substr(0, plot.find('\n')), "series_name,x,y");
}
