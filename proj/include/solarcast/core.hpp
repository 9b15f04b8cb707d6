#pragma once

// Domain types shared by every solarcast module: hour-resolution timestamps,
// the merged hourly table, supervised datasets and the error taxonomy.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace solarcast {

// ------------------------------------------------------------
// errors
// ------------------------------------------------------------

enum class ErrorKind {
    ParseError,
    SchemaError,
    GapError,
    NonFinite,
    SingularMatrix,
    ConvergenceFailure,
    EmptySplit,
    ConfigError,
    IoError,
};

inline constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::SchemaError: return "SchemaError";
        case ErrorKind::GapError: return "GapError";
        case ErrorKind::NonFinite: return "NonFinite";
        case ErrorKind::SingularMatrix: return "SingularMatrix";
        case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
        case ErrorKind::EmptySplit: return "EmptySplit";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

class ToolError : public std::runtime_error {
public:
    ToolError(ErrorKind kind, std::string message, std::string context = {})
        : std::runtime_error(format(kind, message, context)),
          kind_(kind), message_(std::move(message)), context_(std::move(context)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& message() const noexcept { return message_; }
    // file/row/column where applicable, empty otherwise
    const std::string& context() const noexcept { return context_; }

private:
    static std::string format(ErrorKind kind, const std::string& message, const std::string& context) {
        std::string s{to_string(kind)};
        s += ": ";
        s += message;
        if (!context.empty()) {
            s += " [";
            s += context;
            s += "]";
        }
        return s;
    }

    ErrorKind kind_;
    std::string message_;
    std::string context_;
};

// ------------------------------------------------------------
// timestamps
// ------------------------------------------------------------

/// Timezone-naive local time, stored as seconds since 1970-01-01 00:00:00.
class Timestamp {
public:
    constexpr Timestamp() = default;
    constexpr explicit Timestamp(std::int64_t seconds) : seconds_(seconds) {}

    static Timestamp from_civil(int year, unsigned month, unsigned day,
                                int hour = 0, int minute = 0, int second = 0) {
        using namespace std::chrono;
        const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
        if (!ymd.ok()) {
            throw ToolError(ErrorKind::ParseError, "invalid calendar date");
        }
        const auto days = sys_days{ymd}.time_since_epoch().count();
        return Timestamp{static_cast<std::int64_t>(days) * 86400 + hour * 3600 + minute * 60 + second};
    }

    /// Accepts `YYYY-MM-DD HH:MM:SS`, `YYYY-MM-DDTHH:MM:SS`, `YYYY-MM-DD HH:MM` and `YYYY-MM-DD`.
    static std::optional<Timestamp> parse(std::string_view text) {
        while (!text.empty() && (text.front() == ' ' || text.front() == '"')) text.remove_prefix(1);
        while (!text.empty() && (text.back() == ' ' || text.back() == '"' || text.back() == '\r')) text.remove_suffix(1);
        int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
        char sep = ' ';
        const std::string buf{text};
        int consumed = 0;
        const int fields = std::sscanf(buf.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d%n", &y, &mo, &d, &sep, &h, &mi, &s, &consumed);
        if (fields == 7 && consumed == static_cast<int>(buf.size()) && (sep == ' ' || sep == 'T')) {
            // ok
        } else if (std::sscanf(buf.c_str(), "%4d-%2d-%2d%c%2d:%2d%n", &y, &mo, &d, &sep, &h, &mi, &consumed) == 6 &&
                   consumed == static_cast<int>(buf.size()) && (sep == ' ' || sep == 'T')) {
            s = 0;
        } else if (std::sscanf(buf.c_str(), "%4d-%2d-%2d%n", &y, &mo, &d, &consumed) == 3 &&
                   consumed == static_cast<int>(buf.size())) {
            h = mi = s = 0;
        } else {
            return std::nullopt;
        }
        if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60) {
            return std::nullopt;
        }
        const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                              std::chrono::day{static_cast<unsigned>(d)}};
        if (!ymd.ok()) return std::nullopt;
        return from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d), h, mi, s);
    }

    constexpr std::int64_t seconds() const noexcept { return seconds_; }
    constexpr std::int64_t hours_since_epoch() const noexcept { return floor_div(seconds_, 3600); }

    constexpr Timestamp floor_hour() const noexcept { return Timestamp{hours_since_epoch() * 3600}; }
    constexpr Timestamp plus_hours(std::int64_t h) const noexcept { return Timestamp{seconds_ + h * 3600}; }
    constexpr bool on_hour() const noexcept { return floor_div(seconds_, 3600) * 3600 == seconds_; }

    std::chrono::year_month_day date() const {
        using namespace std::chrono;
        return year_month_day{sys_days{days{floor_div(seconds_, 86400)}}};
    }
    int year() const { return static_cast<int>(date().year()); }
    unsigned month() const { return static_cast<unsigned>(date().month()); }
    unsigned day() const { return static_cast<unsigned>(date().day()); }
    int hour() const noexcept { return static_cast<int>(floor_mod(seconds_, 86400) / 3600); }
    int minute() const noexcept { return static_cast<int>(floor_mod(seconds_, 3600) / 60); }
    int second() const noexcept { return static_cast<int>(floor_mod(seconds_, 60)); }

    /// 1-based ordinal day within the year.
    int day_of_year() const {
        using namespace std::chrono;
        const auto ymd = date();
        const auto jan1 = sys_days{ymd.year() / January / 1};
        return static_cast<int>((sys_days{ymd} - jan1).count()) + 1;
    }

    std::string to_string() const {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02d:%02d:%02d", year(), month(), day(), hour(), minute(), second());
        return buf;
    }

    friend constexpr auto operator<=>(const Timestamp&, const Timestamp&) = default;

private:
    static constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept {
        return a / b - ((a % b != 0) && ((a < 0) != (b < 0)));
    }
    static constexpr std::int64_t floor_mod(std::int64_t a, std::int64_t b) noexcept { return a - floor_div(a, b) * b; }

    std::int64_t seconds_ = 0;
};

// ------------------------------------------------------------
// hourly records and the merged table
// ------------------------------------------------------------

enum class Field : std::size_t {
    generation,
    air_temp,
    apparent_temp,
    dew_point,
    wind_speed,
    wind_direction,
    humidity,
    aqi,
};

inline constexpr std::size_t kFieldCount = 8;

inline constexpr std::array<Field, kFieldCount> kAllFields{
    Field::generation, Field::air_temp,       Field::apparent_temp, Field::dew_point,
    Field::wind_speed, Field::wind_direction, Field::humidity,      Field::aqi,
};

inline constexpr std::array<Field, 7> kExogenousFields{
    Field::air_temp,       Field::apparent_temp, Field::dew_point, Field::wind_speed,
    Field::wind_direction, Field::humidity,      Field::aqi,
};

/// Column names as they appear in merged-table files.
inline constexpr std::string_view field_name(Field f) {
    switch (f) {
        case Field::generation: return "generation_kwh";
        case Field::air_temp: return "air_temp";
        case Field::apparent_temp: return "apparent_temp";
        case Field::dew_point: return "dew_point";
        case Field::wind_speed: return "wind_speed";
        case Field::wind_direction: return "wind_direction";
        case Field::humidity: return "humidity";
        case Field::aqi: return "aqi";
    }
    return "?";
}

inline constexpr std::string_view field_unit(Field f) {
    switch (f) {
        case Field::generation: return "kWh";
        case Field::air_temp:
        case Field::apparent_temp:
        case Field::dew_point: return "degC";
        case Field::wind_speed: return "m/s";
        case Field::wind_direction: return "deg";
        case Field::humidity: return "%";
        case Field::aqi: return "index";
    }
    return "";
}

inline std::optional<Field> field_from_name(std::string_view name) {
    for (Field f : kAllFields) {
        if (field_name(f) == name) return f;
    }
    return std::nullopt;
}

/// One row of the merged dataset. Absent cells are empty optionals; a row
/// flagged `gap` stands for an hour with no source data at all.
struct HourlyRecord {
    Timestamp ts;
    std::array<std::optional<double>, kFieldCount> values{};
    bool gap = false;

    std::optional<double>& operator[](Field f) noexcept { return values[static_cast<std::size_t>(f)]; }
    const std::optional<double>& operator[](Field f) const noexcept { return values[static_cast<std::size_t>(f)]; }

    bool complete() const noexcept {
        return !gap && std::all_of(values.begin(), values.end(), [](const auto& v) { return v.has_value(); });
    }
};

struct ColumnInfo {
    std::string name;
    std::string unit;
    std::size_t missing = 0;
};

/// Single-site static metadata (panel count, inverter type, ...). Categorical
/// values are integer-encoded by first appearance.
struct StaticColumn {
    std::string name;
    double value = 0.0;
    std::string raw;
};

struct TimeTable {
    std::vector<HourlyRecord> rows;
    std::vector<StaticColumn> statics;

    std::size_t size() const noexcept { return rows.size(); }
    bool empty() const noexcept { return rows.empty(); }

    std::vector<ColumnInfo> columns() const {
        std::vector<ColumnInfo> out;
        for (Field f : kAllFields) {
            ColumnInfo info{std::string{field_name(f)}, std::string{field_unit(f)}, 0};
            for (const auto& r : rows) {
                if (!r[f]) ++info.missing;
            }
            out.push_back(std::move(info));
        }
        return out;
    }
};

struct Violation {
    std::size_t row = 0;
    std::string column;
    std::string rule;
    bool warning = false;
};

struct ValidationLimits {
    // warning-level upper bound on generation
    double max_generation = 320.0;
};

/// Checks the table invariants. Returns one entry per violated (row, rule).
inline std::vector<Violation> validate_table(const TimeTable& t, const ValidationLimits& limits = {}) {
    std::vector<Violation> out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        if (i > 0 && !(t.rows[i - 1].ts < r.ts)) {
            out.push_back({i, "timestamp", "strictly increasing timestamps"});
        }
        if (!r.ts.on_hour()) {
            out.push_back({i, "timestamp", "hour resolution"});
        }
        if (r.gap) continue;
        for (Field f : kAllFields) {
            if (r[f] && !std::isfinite(*r[f])) {
                out.push_back({i, std::string{field_name(f)}, "finite"});
            }
        }
        auto check = [&](Field f, auto pred, const char* rule, bool warning = false) {
            if (r[f] && std::isfinite(*r[f]) && !pred(*r[f])) {
                out.push_back({i, std::string{field_name(f)}, rule, warning});
            }
        };
        check(Field::generation, [](double v) { return v >= 0.0; }, "generation non-negative");
        check(Field::generation, [&](double v) { return v <= limits.max_generation; }, "generation upper bound", true);
        check(Field::wind_speed, [](double v) { return v >= 0.0; }, "wind speed non-negative");
        check(Field::wind_direction, [](double v) { return v >= 0.0 && v < 360.0; }, "wind direction in [0,360)");
        check(Field::humidity, [](double v) { return v >= 0.0 && v <= 100.0; }, "humidity in [0,100]");
        check(Field::aqi, [](double v) { return v >= 0.0; }, "aqi non-negative");
    }
    return out;
}

// ------------------------------------------------------------
// dense matrix and supervised datasets
// ------------------------------------------------------------

/// Row-major dense matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) {
            throw ToolError(ErrorKind::ConfigError, "matrix data size does not match shape");
        }
    }

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) return {};
        Matrix m(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_) throw ToolError(ErrorKind::ConfigError, "ragged matrix rows");
            std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
        }
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::vector<double> column(std::size_t c) const {
        std::vector<double> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
        return out;
    }

    Matrix select_rows(std::span<const std::size_t> idx) const {
        Matrix m(idx.size(), cols_);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(idx[i] * cols_), cols_, m.row(i).begin());
        }
        return m;
    }

    const std::vector<double>& data() const noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

enum class TargetScale { raw, transformed };

inline bool valid_horizon(int h) noexcept { return h == 24 || h == 48 || h == 72; }

/// Horizon-shifted supervised learning problem. Row i holds features observed
/// at `timestamps[i]` and the generation `horizon_hours` later.
struct SupervisedDataset {
    Matrix X;
    std::vector<double> y;
    std::vector<std::string> feature_names;
    std::vector<Timestamp> timestamps;
    int horizon_hours = 24;
    TargetScale target_scale = TargetScale::raw;

    std::size_t size() const noexcept { return y.size(); }

    SupervisedDataset select(std::span<const std::size_t> idx) const {
        SupervisedDataset out;
        out.X = X.select_rows(idx);
        out.y.reserve(idx.size());
        out.timestamps.reserve(idx.size());
        for (auto i : idx) {
            out.y.push_back(y[i]);
            if (!timestamps.empty()) out.timestamps.push_back(timestamps[i]);
        }
        out.feature_names = feature_names;
        out.horizon_hours = horizon_hours;
        out.target_scale = target_scale;
        return out;
    }

    std::size_t feature_index(std::string_view name) const {
        for (std::size_t j = 0; j < feature_names.size(); ++j) {
            if (feature_names[j] == name) return j;
        }
        throw ToolError(ErrorKind::SchemaError, "unknown feature", std::string{name});
    }
};

/// Throws NonFinite when any entry of X or y is NaN/Inf.
inline void require_finite(const SupervisedDataset& ds) {
    for (std::size_t i = 0; i < ds.X.rows(); ++i) {
        for (double v : ds.X.row(i)) {
            if (!std::isfinite(v)) throw ToolError(ErrorKind::NonFinite, "non-finite feature", "row " + std::to_string(i));
        }
    }
    for (std::size_t i = 0; i < ds.y.size(); ++i) {
        if (!std::isfinite(ds.y[i])) throw ToolError(ErrorKind::NonFinite, "non-finite target", "row " + std::to_string(i));
    }
}

inline std::vector<std::size_t> iota_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

/// Full-precision decimal rendering used by every text format.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace solarcast
