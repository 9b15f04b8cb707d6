#pragma once

// The batch commands behind the `solarcast` executable. Each command reads a
// RunConfig plus overrides, writes its outputs atomically and reports
// failures as CommandFailure carrying the process exit code.

#include "solarcast/cli/artifact.hpp"
#include "solarcast/cli/config.hpp"
#include "solarcast/eval/plot_data.hpp"

#include <unistd.h>

namespace solarcast::cli {

enum ExitCode : int { kOk = 0, kIngestFailed = 2, kTrainFailed = 3, kPredictFailed = 4, kConfigFailed = 5 };

class CommandFailure : public std::runtime_error {
public:
    CommandFailure(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
    int code() const noexcept { return code_; }

private:
    int code_;
};

struct Overrides {
    std::optional<int> horizon;
    std::optional<std::string> model;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
    // predict / evaluate
    std::optional<std::string> methodology;
    std::optional<std::filesystem::path> artifact;
    std::optional<std::filesystem::path> table;
};

/// Runs `fn`, turning any ToolError into a CommandFailure with `code`.
template <class F>
auto stage(int code, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ToolError& e) {
        throw CommandFailure(code, e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        throw CommandFailure(code, std::string{"IoError: "} + e.what());
    }
}

/// Writes to a sibling temp file, then renames over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ToolError(ErrorKind::IoError, "cannot write file", tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw ToolError(ErrorKind::IoError, "write failed", tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw ToolError(ErrorKind::IoError, "cannot rename into place", path.string());
    }
}

/// Loads the config and applies overrides; every failure here is exit 5.
inline RunConfig resolve_config(const std::filesystem::path& config_path, const Overrides& ov) {
    return stage(kConfigFailed, [&] {
        RunConfig cfg = load_config(config_path);
        if (ov.seed) {
            cfg.seed = *ov.seed;
            cfg.benchmark.seed = *ov.seed;
        }
        if (ov.out) cfg.out = *ov.out;
        if (ov.horizon) {
            if (!valid_horizon(*ov.horizon)) throw ToolError(ErrorKind::ConfigError, "horizon must be 24, 48 or 72", "--horizon");
            cfg.benchmark.horizons = {*ov.horizon};
            cfg.plot.horizon = *ov.horizon;
        }
        std::optional<eval::Methodology> only_methodology;
        if (ov.methodology) only_methodology = eval::methodology_from_name(*ov.methodology);
        std::optional<models::ModelKind> only_model;
        if (ov.model) only_model = models::model_kind_from_name(*ov.model);
        if (only_methodology || only_model) {
            auto& ms = cfg.benchmark.methodologies;
            for (auto& [m, entries] : ms) {
                if (only_methodology && m != *only_methodology) entries.clear();
                if (only_model) std::erase_if(entries, [&](const auto& e) { return e.kind != *only_model; });
            }
            std::erase_if(ms, [](const auto& p) { return p.second.empty(); });
            if (ms.empty()) throw ToolError(ErrorKind::ConfigError, "no configured model matches the overrides");
        }
        if (cfg.merged.empty()) cfg.merged = cfg.out / "merged.csv";
        return cfg;
    });
}

// ------------------------------------------------------------
// synth
// ------------------------------------------------------------

struct SynthOutputs {
    std::filesystem::path solar, weather, aqi;
};

/// Writes the synthetic source trio into the output directory. `--seed`
/// overrides the generator seed.
inline SynthOutputs cmd_synth(const RunConfig& cfg, const Overrides& ov = {}) {
    auto params = cfg.synth;
    if (ov.seed) params.seed = *ov.seed;
    const auto table = stage(kConfigFailed, [&] { return synth::generate_synthetic(params); });
    SynthOutputs out{cfg.out / "solar.csv", cfg.out / "weather.csv", cfg.out / "aqi.csv"};
    stage(kIngestFailed, [&] {
        write_atomic(out.solar, synth::solar_csv(table));
        write_atomic(out.weather, synth::weather_csv(table));
        write_atomic(out.aqi, synth::aqi_csv(table));
    });
    return out;
}

// ------------------------------------------------------------
// ingest
// ------------------------------------------------------------

struct IngestResult {
    TimeTable table;
    json diagnostics;
};

inline json report_json(const ingest::IngestReport& r) {
    return {{"rows_read", r.rows_read},
            {"malformed_rows", r.malformed_rows},
            {"missing_cells", r.missing_cells},
            {"duplicate_timestamps", r.duplicate_timestamps},
            {"gap_hours", r.gap_hours},
            {"rows_dropped_incomplete", r.rows_dropped_incomplete},
            {"rows_dropped_stale_aqi", r.rows_dropped_stale_aqi},
            {"messages", r.diagnostics}};
}

/// Parses, resamples, merges and validates the three sources in memory.
inline IngestResult ingest_sources(const RunConfig& cfg) {
    for (const auto& [name, p] : {std::pair{"solar", cfg.solar}, std::pair{"weather", cfg.weather}, std::pair{"aqi", cfg.aqi}}) {
        if (p.empty()) throw ToolError(ErrorKind::ConfigError, std::string{"[data] "} + name + " is not set");
    }
    ingest::IngestReport rs, rw, ra, rm;
    const auto solar = ingest::resample_hourly(ingest::parse_csv(cfg.solar, ingest::SourceSchema::solar(), &rs, cfg.parse),
                                               cfg.generation_agg, &rs);
    const auto weather = ingest::resample_hourly(
        ingest::parse_csv(cfg.weather, ingest::SourceSchema::weather(), &rw, cfg.parse), ingest::Aggregation::mean, &rw);
    const auto aqi = ingest::parse_csv(cfg.aqi, ingest::SourceSchema::aqi(), &ra, cfg.parse);
    auto merged = ingest::merge_sources(solar, weather, aqi, cfg.merge, &rm);

    json warnings = json::array();
    std::size_t errors = 0;
    std::string first_error;
    for (const auto& v : validate_table(merged, cfg.limits)) {
        json item = {{"row", v.row}, {"column", v.column}, {"rule", v.rule}};
        if (v.warning) {
            warnings.push_back(item);
        } else {
            if (errors++ == 0) first_error = v.rule + " (row " + std::to_string(v.row) + ", column " + v.column + ")";
        }
    }
    if (errors > 0) {
        throw ToolError(ErrorKind::ParseError, std::to_string(errors) + " validation error(s), first: " + first_error);
    }
    IngestResult out;
    out.diagnostics = {{"solar", report_json(rs)},
                       {"weather", report_json(rw)},
                       {"aqi", report_json(ra)},
                       {"merge", report_json(rm)},
                       {"merged_rows", merged.rows.size()},
                       {"errors", errors},
                       {"warnings", warnings}};
    out.table = std::move(merged);
    return out;
}

/// Writes the merged table and `ingest_diagnostics.json`.
inline IngestResult cmd_ingest(const RunConfig& cfg) {
    return stage(kIngestFailed, [&] {
        auto res = ingest_sources(cfg);
        write_atomic(cfg.merged, ingest::write_table_csv(res.table));
        write_atomic(cfg.out / "ingest_diagnostics.json", res.diagnostics.dump(2) + "\n");
        return res;
    });
}

/// The merged table; read from disk when present, otherwise built from sources.
inline TimeTable load_merged(const RunConfig& cfg) {
    return stage(kIngestFailed, [&] {
        if (std::filesystem::exists(cfg.merged)) return ingest::read_table_csv(cfg.merged);
        if (!cfg.solar.empty()) return ingest_sources(cfg).table;
        throw ToolError(ErrorKind::IoError, "merged table not found; run ingest first", cfg.merged.string());
    });
}

// ------------------------------------------------------------
// train
// ------------------------------------------------------------

inline std::string artifact_stem(eval::Methodology m, std::string_view model, int horizon) {
    std::string name{model};
    std::replace(name.begin(), name.end(), '+', '_');
    return std::string{eval::to_string(m)} + "__" + name + "__" + std::to_string(horizon) + "h";
}

inline std::filesystem::path artifact_path(const RunConfig& cfg, eval::Methodology m, std::string_view model, int horizon) {
    return cfg.out / "models" / (artifact_stem(m, model, horizon) + ".json");
}

/// Fits the pipeline for one cell on the chronological train part, with an
/// optional grid search first.
inline ModelArtifact train_cell(const RunConfig& cfg, const SupervisedDataset& train, eval::Methodology m,
                                const eval::ModelEntry& e) {
    const auto name = std::string{models::to_string(e.kind)};
    const auto seed = eval::cell_seed(cfg.seed, m, name, train.horizon_hours);
    auto spec = eval::make_spec(cfg.benchmark, m, e);
    if (e.grid) {
        const auto g = eval::grid_search(spec, *e.grid, train, derive_seed(seed, "grid"));
        for (const auto& [k, v] : g.best) spec.hyperparameters[k] = v;
    }
    ModelArtifact a;
    a.pipeline = eval::fit_pipeline(spec, train, seed);
    a.features = cfg.benchmark.features;
    a.seed = seed;
    a.config_digest = cfg.digest;
    a.trained_through = train.timestamps.empty() ? "" : train.timestamps.back().to_string();
    a.train_rows = train.size();
    return a;
}

/// One artifact per configured (methodology, model, horizon).
inline std::vector<std::filesystem::path> cmd_train(const RunConfig& cfg) {
    const auto table = load_merged(cfg);
    if (cfg.benchmark.methodologies.empty()) {
        throw CommandFailure(kConfigFailed, "ConfigError: no models configured under [models]");
    }
    std::vector<std::filesystem::path> written;
    for (int h : cfg.benchmark.horizons) {
        const auto train = stage(kTrainFailed, [&] {
            return features::split(features::make_supervised(table, h, cfg.benchmark.features), cfg.benchmark.split).first;
        });
        for (const auto& [m, entries] : cfg.benchmark.methodologies) {
            for (const auto& e : entries) {
                const auto a = stage(kTrainFailed, [&] { return train_cell(cfg, train, m, e); });
                const auto path = artifact_path(cfg, m, a.pipeline.model_name, h);
                stage(kTrainFailed, [&] { write_atomic(path, artifact_text(a)); });
                written.push_back(path);
            }
        }
    }
    return written;
}

// ------------------------------------------------------------
// predict
// ------------------------------------------------------------

/// Artifact from `--artifact`, or located by methodology/model/horizon.
inline std::filesystem::path locate_artifact(const RunConfig& cfg, const Overrides& ov) {
    if (ov.artifact) return *ov.artifact;
    if (!ov.model || !ov.horizon) {
        throw CommandFailure(kConfigFailed, "ConfigError: predict needs --artifact, or --model and --horizon");
    }
    const auto kind = models::model_kind_from_name(*ov.model);
    eval::Methodology m = eval::Methodology::regular;
    if (ov.methodology) {
        m = eval::methodology_from_name(*ov.methodology);
    } else if (!cfg.benchmark.methodologies.empty()) {
        m = cfg.benchmark.methodologies.front().first;
    }
    return artifact_path(cfg, m, models::to_string(kind), *ov.horizon);
}

struct Predictions {
    std::vector<Timestamp> timestamps;
    int horizon_hours = 24;
    std::vector<double> values;
};

/// Raw-scale predictions for every hour of `table` with complete inputs,
/// clipped to the physical range [0, max_generation].
inline Predictions predict_table(const ModelArtifact& a, const TimeTable& table, double max_generation) {
    const auto rows = features::make_feature_rows(table, a.features);
    const auto& expected = a.pipeline.feature_names;
    if (rows.feature_names != expected) {
        for (const auto& name : expected) {
            if (std::find(rows.feature_names.begin(), rows.feature_names.end(), name) == rows.feature_names.end()) {
                throw ToolError(ErrorKind::SchemaError, "table lacks feature '" + name + "' required by the model");
            }
        }
        throw ToolError(ErrorKind::SchemaError, "table features differ from the model's feature schema");
    }
    Predictions p;
    p.horizon_hours = a.pipeline.horizon_hours;
    p.timestamps = rows.timestamps;
    if (rows.X.rows() > 0) p.values = a.pipeline.predict_raw(rows.X);
    for (double& v : p.values) v = std::clamp(v, 0.0, max_generation);
    return p;
}

inline std::string predictions_csv(const Predictions& p) {
    std::string out = "timestamp,target_timestamp,predicted_generation_kwh\n";
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        out += p.timestamps[i].to_string() + ',' + p.timestamps[i].plus_hours(p.horizon_hours).to_string() + ',' +
               format_double(p.values[i]) + '\n';
    }
    return out;
}

/// Writes `predictions/<artifact stem>.csv`. Schema and artifact problems are exit 4.
inline std::filesystem::path cmd_predict(const RunConfig& cfg, const Overrides& ov) {
    const auto path = locate_artifact(cfg, ov);
    return stage(kPredictFailed, [&] {
        const auto a = load_artifact(path);
        if (ov.horizon && *ov.horizon != a.pipeline.horizon_hours) {
            throw ToolError(ErrorKind::SchemaError, "artifact was trained for horizon " + std::to_string(a.pipeline.horizon_hours) +
                                                        "h, not " + std::to_string(*ov.horizon) + "h");
        }
        const auto table_path = ov.table ? *ov.table : cfg.merged;
        const auto table = ingest::read_table_csv(table_path);
        const auto p = predict_table(a, table, cfg.limits.max_generation);
        const auto out = cfg.out / "predictions" / (path.stem().string() + ".csv");
        write_atomic(out, predictions_csv(p));
        return out;
    });
}

// ------------------------------------------------------------
// evaluate
// ------------------------------------------------------------

/// Scores each configured cell's saved artifact on the held-out split and
/// writes `evaluation.csv` (every scale).
inline std::vector<eval::EvalReport> cmd_evaluate(const RunConfig& cfg) {
    const auto table = load_merged(cfg);
    std::vector<eval::EvalReport> reports;
    for (int h : cfg.benchmark.horizons) {
        const auto test = stage(kPredictFailed, [&] {
            return features::split(features::make_supervised(table, h, cfg.benchmark.features), cfg.benchmark.split).second;
        });
        for (const auto& [m, entries] : cfg.benchmark.methodologies) {
            for (const auto& e : entries) {
                stage(kPredictFailed, [&] {
                    const auto a = load_artifact(artifact_path(cfg, m, models::to_string(e.kind), h));
                    auto r = eval::evaluate(a.pipeline, test);
                    reports.insert(reports.end(), r.begin(), r.end());
                });
            }
        }
    }
    std::string csv{eval::kReportHeader};
    csv += '\n';
    for (const auto& r : reports) csv += eval::report_row(r) + '\n';
    stage(kPredictFailed, [&] { write_atomic(cfg.out / "evaluation.csv", csv); });
    return reports;
}

// ------------------------------------------------------------
// benchmark
// ------------------------------------------------------------

struct BenchmarkOutputs {
    eval::BenchmarkResult result;
    std::vector<std::filesystem::path> files;
};

/// Series for the plot-data files: monthly totals over the whole table, then
/// the histogram and actual/predicted series for the configured plot cell.
inline std::vector<std::pair<std::string, eval::PlotSeries>> plot_series(const RunConfig& cfg, const TimeTable& table) {
    std::vector<std::pair<std::string, eval::PlotSeries>> out;
    out.emplace_back("plot_monthly_generation.csv", eval::monthly_generation(table));

    const auto& pl = cfg.plot;
    const auto ds = features::make_supervised(table, pl.horizon, cfg.benchmark.features);
    const auto [train, test] = features::split(ds, cfg.benchmark.split);
    out.emplace_back("plot_target_histogram.csv",
                     eval::target_histograms(train.y, transform::fit_column(train.y), pl.bins));

    eval::ModelEntry entry;
    entry.kind = pl.model;
    for (const auto& [m, entries] : cfg.benchmark.methodologies) {
        if (m != pl.methodology) continue;
        for (const auto& e : entries) {
            if (e.kind == pl.model) entry.hyperparameters = e.hyperparameters;
        }
    }
    const auto name = std::string{models::to_string(pl.model)};
    const auto spec = eval::make_spec(cfg.benchmark, pl.methodology, entry);
    const auto p = eval::fit_pipeline(spec, train, eval::cell_seed(cfg.seed, pl.methodology, name, pl.horizon));
    out.emplace_back("plot_actual_vs_predicted.csv", eval::actual_vs_predicted(test, p.predict_raw(test.X)));
    return out;
}

/// Runs the benchmark matrix and writes report.csv, report_all_scales.csv,
/// report.txt, the plot-data files and manifest.json. Failed cells are
/// annotated in the reports; the command still succeeds.
inline BenchmarkOutputs cmd_benchmark(const RunConfig& cfg) {
    const auto table = load_merged(cfg);
    if (cfg.benchmark.methodologies.empty()) {
        throw CommandFailure(kConfigFailed, "ConfigError: no models configured under [models]");
    }
    BenchmarkOutputs out;
    out.result = stage(kTrainFailed, [&] { return eval::benchmark_matrix(table, cfg.benchmark); });

    std::vector<std::pair<std::string, std::string>> files{
        {"report.csv", eval::report_csv(out.result)},
        {"report_all_scales.csv", eval::report_csv_all_scales(out.result)},
        {"report.txt", eval::report_text(out.result)},
    };
    json plot_error = nullptr;
    try {
        for (const auto& [name, series] : plot_series(cfg, table)) files.emplace_back(name, eval::plot_csv(series));
    } catch (const ToolError& e) {
        plot_error = e.what();
    }

    json cells = json::array();
    for (const auto& c : out.result.cells) {
        json chosen = json::object();
        for (const auto& [k, v] : c.chosen) chosen[k] = v;
        cells.push_back({{"methodology", eval::to_string(c.methodology)},
                         {"model", c.model},
                         {"hours_out", c.horizon_hours},
                         {"seed", c.seed},
                         {"chosen", chosen},
                         {"error", c.ok() ? json(nullptr) : json(c.error)}});
    }
    json names = json::array();
    for (const auto& [name, _] : files) names.push_back(name);
    const json manifest = {{"config_digest", cfg.digest}, {"seed", cfg.seed}, {"rows", table.rows.size()},
                           {"split", eval::split_label(cfg.benchmark.split)},
                           {"files", names},          {"cells", cells},    {"plot_error", plot_error}};
    files.emplace_back("manifest.json", manifest.dump(2) + "\n");

    stage(kIngestFailed, [&] {
        for (const auto& [name, content] : files) {
            write_atomic(cfg.out / name, content);
            out.files.push_back(cfg.out / name);
        }
    });
    return out;
}

}  // namespace solarcast::cli
