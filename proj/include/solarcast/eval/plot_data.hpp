#pragma once

// Series behind the result figures: monthly generation totals, target
// histograms before/after the power transform, and actual-vs-predicted
// hourly series. Written as `series_name,x,y` rows.

#include "solarcast/eval/pipeline.hpp"

namespace solarcast::eval {

struct PlotPoint {
    std::string series;
    std::string x;
    double y = 0.0;
};

using PlotSeries = std::vector<PlotPoint>;

/// Total generation per calendar month, x = `YYYY-MM`.
inline PlotSeries monthly_generation(const TimeTable& t) {
    std::map<std::pair<int, unsigned>, double> totals;
    for (const auto& r : t.rows) {
        if (r.gap || !r[Field::generation]) continue;
        totals[{r.ts.year(), r.ts.month()}] += *r[Field::generation];
    }
    PlotSeries out;
    for (const auto& [ym, total] : totals) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u", ym.first, ym.second);
        out.push_back({"monthly_generation", buf, total});
    }
    return out;
}

/// Equal-width histogram over [min, max]; x is the bin centre.
inline PlotSeries histogram(std::span<const double> values, std::size_t bins, const std::string& series) {
    PlotSeries out;
    if (values.empty() || bins == 0) return out;
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    const double lo = *mn;
    const double width = *mx > *mn ? (*mx - *mn) / static_cast<double>(bins) : 1.0;
    std::vector<double> counts(bins, 0.0);
    for (double v : values) {
        auto b = static_cast<std::size_t>((v - lo) / width);
        counts[std::min(b, bins - 1)] += 1.0;
    }
    for (std::size_t b = 0; b < bins; ++b) out.push_back({series, format_double(lo + (b + 0.5) * width), counts[b]});
    return out;
}

/// Raw target histogram and, when params are given, the transformed one.
inline PlotSeries target_histograms(std::span<const double> y, const std::optional<transform::ColumnParams>& params,
                                    std::size_t bins = 30) {
    auto out = histogram(y, bins, "target_raw");
    if (params) {
        const auto t = transform::apply_column(*params, y);
        auto h = histogram(t, bins, "target_transformed");
        out.insert(out.end(), h.begin(), h.end());
    }
    return out;
}

/// Aligned actual/predicted series keyed by target timestamp.
inline PlotSeries actual_vs_predicted(const SupervisedDataset& test, std::span<const double> predicted) {
    if (predicted.size() != test.size()) throw ToolError(ErrorKind::ConfigError, "prediction count does not match test rows");
    PlotSeries out;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto x = test.timestamps[i].plus_hours(test.horizon_hours).to_string();
        out.push_back({"actual", x, test.y[i]});
    }
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto x = test.timestamps[i].plus_hours(test.horizon_hours).to_string();
        out.push_back({"predicted", x, predicted[i]});
    }
    return out;
}

inline std::string plot_csv(const PlotSeries& s) {
    std::string out = "series_name,x,y\n";
    for (const auto& p : s) out += p.series + ',' + p.x + ',' + format_double(p.y) + '\n';
    return out;
}

}  // namespace solarcast::eval
