#include "solarcast/cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace solarcast;
using namespace solarcast::cli;

namespace {

struct Args {
    std::string config;
    std::optional<int> horizon;
    std::optional<std::string> model;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> methodology;
    std::optional<std::string> artifact;
    std::optional<std::string> table;

    Overrides overrides() const {
        Overrides ov;
        ov.horizon = horizon;
        ov.model = model;
        ov.seed = seed;
        if (out) ov.out = *out;
        ov.methodology = methodology;
        if (artifact) ov.artifact = *artifact;
        if (table) ov.table = *table;
        return ov;
    }
};

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help, Args& args) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", args.config, "run configuration file")->required();
    sub->add_option("--horizon", args.horizon, "hours ahead: 24, 48 or 72");
    sub->add_option("--model", args.model, "restrict to one model family");
    sub->add_option("--seed", args.seed, "master seed");
    sub->add_option("--out", args.out, "output directory");
    return sub;
}

int run(int argc, char** argv) {
    CLI::App app{"Hourly solar generation forecasting and benchmarking"};
    app.require_subcommand(1);
    Args args;
    auto* ingest = add_command(app, "ingest", "merge the solar, weather and AQI sources into an hourly table", args);
    auto* train = add_command(app, "train", "fit one model artifact per methodology, model and horizon", args);
    auto* predict = add_command(app, "predict", "predict generation for a table with a saved artifact", args);
    auto* evaluate = add_command(app, "evaluate", "score saved artifacts on the held-out split", args);
    auto* benchmark = add_command(app, "benchmark", "run the methodology x model x horizon matrix", args);
    auto* synth_cmd = add_command(app, "synth", "write a synthetic solar, weather and AQI source trio", args);
    for (auto* sub : {train, predict, evaluate, benchmark}) {
        sub->add_option("--methodology", args.methodology, "regular, zero_inflated or power_transform");
    }
    predict->add_option("--artifact", args.artifact, "model artifact file");
    predict->add_option("--table", args.table, "merged hourly table to predict from");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigFailed;
    }

    const auto ov = args.overrides();
    const auto cfg = resolve_config(args.config, ov);

    if (ingest->parsed()) {
        const auto res = cmd_ingest(cfg);
        std::cout << "wrote " << cfg.merged.string() << " (" << res.table.rows.size() << " rows)\n";
    } else if (train->parsed()) {
        for (const auto& p : cmd_train(cfg)) std::cout << "wrote " << p.string() << '\n';
    } else if (predict->parsed()) {
        const auto path = cmd_predict(cfg, ov);
        std::cout << "wrote " << path.string() << '\n';
    } else if (evaluate->parsed()) {
        for (const auto& r : cmd_evaluate(cfg)) std::cout << eval::report_row(r) << '\n';
    } else if (benchmark->parsed()) {
        const auto res = cmd_benchmark(cfg);
        std::size_t failed = 0;
        for (const auto& c : res.result.cells) {
            if (c.ok()) continue;
            ++failed;
            std::cerr << "cell " << eval::to_string(c.methodology) << '/' << c.model << '/' << c.horizon_hours
                      << "h failed: " << c.error << '\n';
        }
        std::cout << "benchmark: " << res.result.cells.size() << " cells, " << failed << " failed\n";
        for (const auto& p : res.files) std::cout << "wrote " << p.string() << '\n';
    } else if (synth_cmd->parsed()) {
        const auto o = cmd_synth(cfg, ov);
        std::cout << "wrote " << o.solar.string() << ", " << o.weather.string() << ", " << o.aqi.string() << '\n';
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CommandFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code();
    } catch (const ToolError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigFailed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
