#pragma once

// The methodology x model x horizon benchmark matrix and its report formats.

#include "solarcast/eval/pipeline.hpp"

#include <sstream>

namespace solarcast::eval {

struct ModelEntry {
    models::ModelKind kind = models::ModelKind::LinearRegression;
    models::Hyperparameters hyperparameters;
    // optional grid; when set the cell tunes on its train split before the final fit
    std::optional<GridSpec> grid;
};

struct BenchmarkConfig {
    std::vector<std::pair<Methodology, std::vector<ModelEntry>>> methodologies;
    std::vector<int> horizons{24, 48, 72};
    features::FeatureOptions features{};
    features::SplitSpec split{};
    bool transform_features = true;
    bool transform_target = true;
    std::uint64_t seed = 42;
};

struct BenchmarkCell {
    Methodology methodology = Methodology::regular;
    std::string model;
    int horizon_hours = 24;
    std::uint64_t seed = 0;
    std::vector<EvalReport> reports;
    models::Hyperparameters chosen;
    std::string error;

    bool ok() const noexcept { return error.empty(); }
};

struct BenchmarkResult {
    std::vector<BenchmarkCell> cells;
    features::SplitSpec split{};

    /// One report per cell: the first (model-scale) report.
    std::vector<EvalReport> primary_reports() const {
        std::vector<EvalReport> out;
        for (const auto& c : cells) {
            if (c.ok()) out.push_back(c.reports.front());
        }
        return out;
    }

    std::vector<EvalReport> all_reports() const {
        std::vector<EvalReport> out;
        for (const auto& c : cells) out.insert(out.end(), c.reports.begin(), c.reports.end());
        return out;
    }

    const BenchmarkCell* find(Methodology m, std::string_view model, int horizon) const {
        for (const auto& c : cells) {
            if (c.methodology == m && c.model == model && c.horizon_hours == horizon) return &c;
        }
        return nullptr;
    }
};

/// Seed for one cell, independent of execution order.
inline std::uint64_t cell_seed(std::uint64_t master, Methodology m, std::string_view model, int horizon) {
    std::string label{to_string(m)};
    label += '|';
    label += model;
    label += '|';
    label += std::to_string(horizon);
    return derive_seed(master, label);
}

inline PipelineSpec make_spec(const BenchmarkConfig& cfg, Methodology m, const ModelEntry& e) {
    PipelineSpec s;
    s.methodology = m;
    s.kind = e.kind;
    s.hyperparameters = e.hyperparameters;
    s.transform_features = cfg.transform_features;
    s.transform_target = cfg.transform_target;
    return s;
}

/// Runs every configured (methodology, model, horizon) cell on a chronological
/// (or configured) split of each horizon's dataset. Failing cells keep their
/// error message and the run continues.
inline BenchmarkResult benchmark_matrix(const TimeTable& table, const BenchmarkConfig& cfg) {
    if (cfg.horizons.empty()) throw ToolError(ErrorKind::ConfigError, "no horizons configured");
    BenchmarkResult result;
    result.split = cfg.split;
    for (int h : cfg.horizons) {
        std::optional<std::pair<SupervisedDataset, SupervisedDataset>> parts;
        std::string data_error;
        try {
            parts = features::split(features::make_supervised(table, h, cfg.features), cfg.split);
        } catch (const ToolError& e) {
            data_error = e.what();
        }
        for (const auto& [m, entries] : cfg.methodologies) {
            for (const auto& e : entries) {
                BenchmarkCell cell;
                cell.methodology = m;
                cell.model = std::string{models::to_string(e.kind)};
                cell.horizon_hours = h;
                cell.seed = cell_seed(cfg.seed, m, cell.model, h);
                if (!parts) {
                    cell.error = data_error;
                    result.cells.push_back(std::move(cell));
                    continue;
                }
                try {
                    auto spec = make_spec(cfg, m, e);
                    if (e.grid) {
                        const auto g = grid_search(spec, *e.grid, parts->first, derive_seed(cell.seed, "grid"));
                        for (const auto& [name, v] : g.best) spec.hyperparameters[name] = v;
                        cell.chosen = g.best;
                    }
                    const auto p = fit_pipeline(spec, parts->first, cell.seed);
                    cell.reports = evaluate(p, parts->second);
                } catch (const ToolError& err) {
                    cell.error = err.what();
                }
                result.cells.push_back(std::move(cell));
            }
        }
    }
    std::stable_sort(result.cells.begin(), result.cells.end(), [](const auto& a, const auto& b) {
        if (a.methodology != b.methodology) return a.methodology < b.methodology;
        if (a.model != b.model) return a.model < b.model;
        return a.horizon_hours < b.horizon_hours;
    });
    return result;
}

// ------------------------------------------------------------
// serialization
// ------------------------------------------------------------

inline constexpr std::string_view kReportHeader = "methodology,model,hours_out,scale,r2,mae,rmse";

inline std::string report_row(const EvalReport& r) {
    std::string s{to_string(r.methodology)};
    s += ',' + r.model + ',' + std::to_string(r.horizon_hours) + ',';
    s += to_string(r.metric_scale);
    s += ',' + format_double(r.r2) + ',' + format_double(r.mae) + ',' + format_double(r.rmse);
    return s;
}

/// One row per cell; failed cells carry scale `error` and empty metrics.
inline std::string report_csv(const BenchmarkResult& res) {
    std::string out{kReportHeader};
    out += '\n';
    for (const auto& c : res.cells) {
        if (c.ok()) {
            out += report_row(c.reports.front()) + '\n';
        } else {
            out += std::string{to_string(c.methodology)} + ',' + c.model + ',' + std::to_string(c.horizon_hours) + ",error,,,\n";
        }
    }
    return out;
}

/// Every report of every cell, including inverse-transformed rows.
inline std::string report_csv_all_scales(const BenchmarkResult& res) {
    std::string out{kReportHeader};
    out += '\n';
    for (const auto& r : res.all_reports()) out += report_row(r) + '\n';
    return out;
}

inline std::string split_label(const features::SplitSpec& s) {
    char buf[80];
    std::snprintf(buf, sizeof buf, "%s, train fraction %.2f", s.mode == features::SplitMode::chronological ? "chronological" : "random",
                  s.train_fraction);
    return buf;
}

inline std::string report_text(const BenchmarkResult& res) {
    std::ostringstream os;
    os << "split: " << split_label(res.split) << '\n';
    std::optional<Methodology> current;
    char buf[160];
    for (const auto& c : res.cells) {
        if (current != c.methodology) {
            current = c.methodology;
            os << "\n[" << to_string(c.methodology) << "]\n";
            std::snprintf(buf, sizeof buf, "%-22s %9s %-20s %9s %9s %9s\n", "Model", "Hours Out", "Scale", "R2", "MAE", "RMSE");
            os << buf << std::string(83, '-') << '\n';
        }
        if (!c.ok()) {
            std::snprintf(buf, sizeof buf, "%-22s %9d %-20s ", c.model.c_str(), c.horizon_hours, "error");
            os << buf << c.error << '\n';
            continue;
        }
        for (const auto& r : c.reports) {
            std::snprintf(buf, sizeof buf, "%-22s %9d %-20s %9.4f %9.4f %9.4f\n", r.model.c_str(), r.horizon_hours,
                          std::string{to_string(r.metric_scale)}.c_str(), r.r2, r.mae, r.rmse);
            os << buf;
        }
    }
    return os.str();
}

}  // namespace solarcast::eval
