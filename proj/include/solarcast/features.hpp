#pragma once

// Horizon-shifted supervised datasets, calendar encodings, train/test
// splitting and cross-validation fold plans.

#include "solarcast/core.hpp"
#include "solarcast/random.hpp"

#include <numbers>
#include <unordered_map>

namespace solarcast::features {

struct FeatureOptions {
    // hour offsets into the past for generation features; 0 is the current value
    std::vector<int> lags{0};
    bool calendar = true;
};

/// Feature rows for every hour whose inputs are all present, regardless of
/// whether a target exists. Used for prediction on new tables.
struct FeatureRows {
    Matrix X;
    std::vector<std::string> feature_names;
    std::vector<Timestamp> timestamps;
};

namespace detail {

inline std::vector<std::string> base_feature_names(const std::vector<int>& lags) {
    std::vector<std::string> names;
    for (Field f : kExogenousFields) names.emplace_back(field_name(f));
    for (int lag : lags) names.push_back(lag == 0 ? std::string{"generation"} : "generation_lag" + std::to_string(lag));
    return names;
}

inline void check_lags(const std::vector<int>& lags) {
    if (lags.empty()) throw ToolError(ErrorKind::ConfigError, "at least one generation lag is required");
    for (int lag : lags) {
        if (lag < 0) throw ToolError(ErrorKind::ConfigError, "lags must be non-negative");
    }
}

/// hour -> row index for complete rows only; anything absent is a gap.
inline std::unordered_map<std::int64_t, std::size_t> index_complete(const TimeTable& t) {
    std::unordered_map<std::int64_t, std::size_t> idx;
    idx.reserve(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (t.rows[i].complete() && t.rows[i].ts.on_hour()) idx.emplace(t.rows[i].ts.hours_since_epoch(), i);
    }
    return idx;
}

inline bool base_features(const TimeTable& t, const std::unordered_map<std::int64_t, std::size_t>& idx,
                          std::size_t i, const std::vector<int>& lags, std::vector<double>& out) {
    const auto& r = t.rows[i];
    if (!r.complete()) return false;
    out.clear();
    for (Field f : kExogenousFields) out.push_back(*r[f]);
    const auto h = r.ts.hours_since_epoch();
    for (int lag : lags) {
        auto it = idx.find(h - lag);
        if (it == idx.end()) return false;
        out.push_back(*t.rows[it->second][Field::generation]);
    }
    return std::all_of(out.begin(), out.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace detail

inline constexpr std::array<std::string_view, 4> kCalendarFeatures{"hour_sin", "hour_cos", "doy_sin", "doy_cos"};

inline std::array<double, 4> calendar_encoding(const Timestamp& ts) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double hour = ts.hour() + ts.minute() / 60.0;
    const double doy = (ts.day_of_year() - 1) + hour / 24.0;
    return {std::sin(two_pi * hour / 24.0), std::cos(two_pi * hour / 24.0), std::sin(two_pi * doy / 365.25),
            std::cos(two_pi * doy / 365.25)};
}

/// Appends sin/cos of hour-of-day (period 24) and of day-of-year (period 365.25).
inline SupervisedDataset add_calendar_features(const SupervisedDataset& ds) {
    if (ds.timestamps.size() != ds.size()) {
        throw ToolError(ErrorKind::SchemaError, "calendar features need one timestamp per row");
    }
    SupervisedDataset out = ds;
    const std::size_t d = ds.X.cols();
    out.X = Matrix(ds.size(), d + kCalendarFeatures.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        std::copy(ds.X.row(i).begin(), ds.X.row(i).end(), out.X.row(i).begin());
        const auto cal = calendar_encoding(ds.timestamps[i]);
        std::copy(cal.begin(), cal.end(), out.X.row(i).begin() + static_cast<std::ptrdiff_t>(d));
    }
    for (auto name : kCalendarFeatures) out.feature_names.emplace_back(name);
    return out;
}

/// Builds the supervised problem for one horizon: features observed at ts_i
/// (weather, AQI, generation at each lag), target = generation at ts_i + horizon.
/// Rows whose own hour, any lag hour or the target hour is a gap are skipped.
inline SupervisedDataset make_supervised(const TimeTable& t, int horizon_hours, const FeatureOptions& opts = {}) {
    if (!valid_horizon(horizon_hours)) {
        throw ToolError(ErrorKind::ConfigError, "horizon must be 24, 48 or 72 hours", std::to_string(horizon_hours));
    }
    detail::check_lags(opts.lags);
    const auto idx = detail::index_complete(t);

    SupervisedDataset ds;
    ds.horizon_hours = horizon_hours;
    ds.feature_names = detail::base_feature_names(opts.lags);
    const std::size_t d = ds.feature_names.size();
    std::vector<double> data;
    std::vector<double> feats;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (!detail::base_features(t, idx, i, opts.lags, feats)) continue;
        auto target = idx.find(t.rows[i].ts.hours_since_epoch() + horizon_hours);
        if (target == idx.end()) continue;
        const double y = *t.rows[target->second][Field::generation];
        if (!std::isfinite(y)) continue;
        data.insert(data.end(), feats.begin(), feats.end());
        ds.y.push_back(y);
        ds.timestamps.push_back(t.rows[i].ts);
    }
    ds.X = Matrix(ds.y.size(), d, std::move(data));
    if (opts.calendar) ds = add_calendar_features(ds);
    if (ds.size() < ds.X.cols() + 1) {
        throw ToolError(ErrorKind::EmptySplit, "only " + std::to_string(ds.size()) + " usable rows for " +
                                                   std::to_string(ds.X.cols()) + " features");
    }
    return ds;
}

/// Feature rows for prediction: every hour with complete inputs, no target needed.
inline FeatureRows make_feature_rows(const TimeTable& t, const FeatureOptions& opts = {}) {
    detail::check_lags(opts.lags);
    const auto idx = detail::index_complete(t);
    FeatureRows out;
    out.feature_names = detail::base_feature_names(opts.lags);
    if (opts.calendar) {
        for (auto name : kCalendarFeatures) out.feature_names.emplace_back(name);
    }
    std::vector<double> data;
    std::vector<double> feats;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (!detail::base_features(t, idx, i, opts.lags, feats)) continue;
        if (opts.calendar) {
            const auto cal = calendar_encoding(t.rows[i].ts);
            feats.insert(feats.end(), cal.begin(), cal.end());
        }
        data.insert(data.end(), feats.begin(), feats.end());
        out.timestamps.push_back(t.rows[i].ts);
    }
    out.X = Matrix(out.timestamps.size(), out.feature_names.size(), std::move(data));
    return out;
}

// ------------------------------------------------------------
// splitting
// ------------------------------------------------------------

enum class SplitMode { chronological, random };

struct SplitSpec {
    double train_fraction = 0.7;
    SplitMode mode = SplitMode::chronological;
    std::uint64_t seed = 0;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Chronological: first ceil(f*n) rows train, clamped so both sides keep at
/// least one row. Random: a seeded permutation cut at the same size, each
/// side kept in ascending row order.
inline SplitIndices split_indices(std::size_t n, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
        throw ToolError(ErrorKind::ConfigError, "train_fraction must lie in (0,1)");
    }
    if (n < 2) throw ToolError(ErrorKind::EmptySplit, "need at least two rows to split");
    auto n_train = static_cast<std::size_t>(std::ceil(spec.train_fraction * static_cast<double>(n) - 1e-9));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

    SplitIndices out;
    if (spec.mode == SplitMode::chronological) {
        for (std::size_t i = 0; i < n; ++i) (i < n_train ? out.train : out.test).push_back(i);
    } else {
        Rng rng(spec.seed);
        auto perm = permutation(n, rng);
        out.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
        out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
        std::sort(out.train.begin(), out.train.end());
        std::sort(out.test.begin(), out.test.end());
    }
    return out;
}

inline std::pair<SupervisedDataset, SupervisedDataset> split(const SupervisedDataset& ds, const SplitSpec& spec) {
    if (ds.size() == 0) throw ToolError(ErrorKind::EmptySplit, "cannot split an empty dataset");
    const auto idx = split_indices(ds.size(), spec);
    return {ds.select(idx.train), ds.select(idx.test)};
}

// ------------------------------------------------------------
// cross-validation folds
// ------------------------------------------------------------

enum class FoldMode { blocked, shuffled };

struct FoldPlan {
    std::size_t k = 5;
    FoldMode mode = FoldMode::blocked;
    std::uint64_t seed = 0;
};

struct Fold {
    std::vector<std::size_t> fit;
    std::vector<std::size_t> validate;
};

/// Blocked mode: k contiguous validation blocks, the n % k remainder rows go
/// one each to the leading blocks. Shuffled mode assigns the same block sizes
/// over a seeded permutation.
inline std::vector<Fold> make_cv_folds(std::size_t n, const FoldPlan& plan) {
    if (plan.k == 0) throw ToolError(ErrorKind::ConfigError, "fold count must be positive");
    if (n < plan.k) {
        throw ToolError(ErrorKind::EmptySplit, std::to_string(n) + " rows cannot fill " + std::to_string(plan.k) + " folds");
    }
    std::vector<std::size_t> order = iota_indices(n);
    if (plan.mode == FoldMode::shuffled) {
        Rng rng(plan.seed);
        order = permutation(n, rng);
    }
    std::vector<std::size_t> block_of(n);
    std::vector<Fold> folds(plan.k);
    const std::size_t base = n / plan.k;
    const std::size_t extra = n % plan.k;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < plan.k; ++f) {
        const std::size_t len = base + (f < extra ? 1 : 0);
        for (std::size_t j = 0; j < len; ++j) block_of[order[pos + j]] = f;
        pos += len;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < plan.k; ++f) (block_of[i] == f ? folds[f].validate : folds[f].fit).push_back(i);
    }
    return folds;
}

}  // namespace solarcast::features
