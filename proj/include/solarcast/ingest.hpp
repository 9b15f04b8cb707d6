#pragma once

// Source CSV parsing, hourly resampling and the solar x weather x AQI merge.

#include "solarcast/core.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace solarcast::ingest {

enum class SourceKind { Solar15Min, Weather, AqiDaily };

struct SourceSchema {
    SourceKind kind = SourceKind::Solar15Min;
    std::vector<std::string> required;
    std::vector<std::string> optional;
    std::string timestamp_format = "YYYY-MM-DD HH:MM:SS";

    static SourceSchema solar() {
        return {SourceKind::Solar15Min, {"timestamp", "generation_kwh"}, {"site_id", "panel_count", "inverter_type"}};
    }
    static SourceSchema weather() {
        return {SourceKind::Weather,
                {"timestamp", "air_temp", "apparent_temp", "dew_point", "wind_speed", "wind_direction", "humidity"},
                {}};
    }
    // `date,aqi` or `timestamp,aqi`; the time column is detected from the header
    static SourceSchema aqi() { return {SourceKind::AqiDaily, {"aqi"}, {}, "YYYY-MM-DD"}; }
};

/// Counters accumulated across ingest steps.
struct IngestReport {
    std::size_t rows_read = 0;
    std::size_t malformed_rows = 0;
    std::size_t missing_cells = 0;
    std::size_t duplicate_timestamps = 0;
    std::size_t gap_hours = 0;
    std::size_t rows_dropped_incomplete = 0;
    std::size_t rows_dropped_stale_aqi = 0;
    std::vector<std::string> diagnostics;
};

struct ParseOptions {
    // malformed rows tolerated, as a fraction of data rows
    double malformed_tolerance = 0.01;
};

namespace detail {

inline std::string trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        s.remove_prefix(1);
        s.remove_suffix(1);
    }
    return std::string{s};
}

inline std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
            cell += c;
        } else if (c == ',' && !quoted) {
            out.push_back(trim(cell));
            cell.clear();
        } else {
            cell += c;
        }
    }
    out.push_back(trim(cell));
    return out;
}

inline std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ToolError(ErrorKind::IoError, "cannot open file", path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF && static_cast<unsigned char>(text[1]) == 0xBB &&
        static_cast<unsigned char>(text[2]) == 0xBF) {
        text.erase(0, 3);
    }
    return text;
}

inline std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        out.push_back(line);
    }
    return out;
}

}  // namespace detail

/// Parses one source file. The header drives the column mapping, so column
/// order is free. Unparseable numeric cells become missing; rows with a wrong
/// cell count or an unreadable timestamp are malformed and skipped. Output is
/// sorted by timestamp (stable), duplicates are kept for `resample_hourly`.
inline TimeTable parse_csv_text(const std::string& text, const SourceSchema& schema, IngestReport* report = nullptr,
                                const std::string& source_name = "<memory>", const ParseOptions& opts = {}) {
    const auto lines = detail::lines_of(text);
    if (lines.empty()) throw ToolError(ErrorKind::SchemaError, "missing header", source_name);
    const auto header = detail::split_line(lines.front());

    std::map<std::string, std::size_t> col;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (!col.emplace(header[j], j).second) {
            throw ToolError(ErrorKind::SchemaError, "duplicate column '" + header[j] + "'", source_name);
        }
    }
    std::vector<std::string> expected = schema.required;
    std::string time_col = "timestamp";
    if (schema.kind == SourceKind::AqiDaily) {
        const bool has_date = col.contains("date");
        const bool has_ts = col.contains("timestamp");
        if (has_date == has_ts) {
            throw ToolError(ErrorKind::SchemaError, "AQI file needs exactly one of 'date' or 'timestamp'", source_name);
        }
        time_col = has_date ? "date" : "timestamp";
        expected.push_back(time_col);
    }
    for (const auto& name : expected) {
        if (!col.contains(name)) throw ToolError(ErrorKind::SchemaError, "missing column '" + name + "'", source_name);
    }
    for (const auto& [name, _] : col) {
        const bool known = std::find(expected.begin(), expected.end(), name) != expected.end() ||
                           std::find(schema.optional.begin(), schema.optional.end(), name) != schema.optional.end();
        if (!known) throw ToolError(ErrorKind::SchemaError, "unexpected column '" + name + "'", source_name);
    }

    std::vector<std::pair<std::string, Field>> numeric;
    for (const auto& name : expected) {
        if (name == time_col) continue;
        if (name == "generation_kwh") {
            numeric.emplace_back(name, Field::generation);
        } else if (auto f = field_from_name(name)) {
            numeric.emplace_back(name, *f);
        }
    }

    IngestReport local;
    IngestReport& rep = report ? *report : local;
    TimeTable table;
    std::map<std::string, std::string> static_first;  // static column -> first raw value
    std::size_t malformed = 0;
    const std::size_t data_rows = lines.size() - 1;

    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto cells = detail::split_line(lines[li]);
        const std::string where = source_name + ":" + std::to_string(li + 1);
        if (cells.size() != header.size()) {
            ++malformed;
            rep.diagnostics.push_back(where + ": expected " + std::to_string(header.size()) + " cells, got " +
                                      std::to_string(cells.size()));
            continue;
        }
        auto ts = Timestamp::parse(cells[col.at(time_col)]);
        if (!ts) {
            ++malformed;
            rep.diagnostics.push_back(where + ": unreadable timestamp '" + cells[col.at(time_col)] + "'");
            continue;
        }
        HourlyRecord rec;
        rec.ts = *ts;
        for (const auto& [name, field] : numeric) {
            const auto& cell = cells[col.at(name)];
            auto v = detail::parse_number(cell);
            if (!v) {
                ++rep.missing_cells;
                rep.diagnostics.push_back(where + ": column '" + name + "' unparseable value '" + cell + "'");
            }
            rec[field] = v;
        }
        for (const auto& name : schema.optional) {
            if (col.contains(name) && !static_first.contains(name)) static_first[name] = cells[col.at(name)];
        }
        table.rows.push_back(rec);
        ++rep.rows_read;
    }
    const auto tolerated = static_cast<std::size_t>(opts.malformed_tolerance * static_cast<double>(data_rows));
    rep.malformed_rows += malformed;
    if (malformed > tolerated) {
        throw ToolError(ErrorKind::ParseError,
                        std::to_string(malformed) + " malformed rows exceed tolerance of " + std::to_string(tolerated),
                        source_name);
    }
    std::stable_sort(table.rows.begin(), table.rows.end(), [](const auto& a, const auto& b) { return a.ts < b.ts; });

    // static metadata, in schema order; non-numeric values get first-appearance codes
    std::map<std::string, int> codes;
    for (const auto& name : schema.optional) {
        auto it = static_first.find(name);
        if (it == static_first.end()) continue;
        StaticColumn sc{name, 0.0, it->second};
        if (auto v = detail::parse_number(it->second)) {
            sc.value = *v;
        } else {
            auto [pos, inserted] = codes.emplace(it->second, static_cast<int>(codes.size()));
            sc.value = pos->second;
        }
        table.statics.push_back(std::move(sc));
    }
    return table;
}

inline TimeTable parse_csv(const std::filesystem::path& path, const SourceSchema& schema, IngestReport* report = nullptr,
                           const ParseOptions& opts = {}) {
    return parse_csv_text(detail::read_file(path), schema, report, path.string(), opts);
}

enum class Aggregation { sum, mean };

/// Buckets rows by clock hour. Generation uses `agg`, every other field the
/// mean of its present values. Hours between the first and last bucket that
/// received no rows become gap rows.
inline TimeTable resample_hourly(const TimeTable& t, Aggregation agg = Aggregation::sum, IngestReport* report = nullptr) {
    if (t.empty()) throw ToolError(ErrorKind::GapError, "cannot resample an empty table");
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
        if (t.rows[i].ts < t.rows[i - 1].ts) throw ToolError(ErrorKind::ConfigError, "resample input must be sorted");
    }
    TimeTable out;
    out.statics = t.statics;

    std::size_t i = 0;
    Timestamp hour = t.rows.front().ts.floor_hour();
    const Timestamp last = t.rows.back().ts.floor_hour();
    while (hour <= last) {
        std::array<double, kFieldCount> sum{};
        std::array<std::size_t, kFieldCount> count{};
        std::size_t rows_in_hour = 0;
        std::optional<Timestamp> prev;
        while (i < t.rows.size() && t.rows[i].ts.floor_hour() == hour) {
            const auto& r = t.rows[i];
            if (prev && *prev == r.ts && report) ++report->duplicate_timestamps;
            prev = r.ts;
            if (!r.gap) {
                ++rows_in_hour;
                for (std::size_t k = 0; k < kFieldCount; ++k) {
                    if (r.values[k]) {
                        sum[k] += *r.values[k];
                        ++count[k];
                    }
                }
            }
            ++i;
        }
        HourlyRecord rec;
        rec.ts = hour;
        if (rows_in_hour == 0) {
            rec.gap = true;
            if (report) ++report->gap_hours;
        } else {
            for (std::size_t k = 0; k < kFieldCount; ++k) {
                if (count[k] == 0) continue;
                const bool use_sum = k == static_cast<std::size_t>(Field::generation) && agg == Aggregation::sum;
                rec.values[k] = use_sum ? sum[k] : sum[k] / static_cast<double>(count[k]);
            }
        }
        out.rows.push_back(rec);
        hour = hour.plus_hours(1);
    }
    return out;
}

struct MergeOptions {
    std::int64_t aqi_staleness_hours = 48;
};

/// Inner join of solar and weather on the hour, AQI carried forward from the
/// most recent reading at or before each hour (never from the future). Rows
/// with any field still missing are dropped; the result holds complete rows
/// only, so absent hours are implicit gaps.
inline TimeTable merge_sources(const TimeTable& solar, const TimeTable& weather, const TimeTable& aqi,
                               const MergeOptions& opts = {}, IngestReport* report = nullptr) {
    std::map<std::int64_t, const HourlyRecord*> weather_by_hour;
    for (const auto& r : weather.rows) {
        if (!r.gap) weather_by_hour[r.ts.hours_since_epoch()] = &r;
    }
    std::vector<std::pair<Timestamp, double>> aqi_series;
    for (const auto& r : aqi.rows) {
        if (!r.gap && r[Field::aqi]) aqi_series.emplace_back(r.ts, *r[Field::aqi]);
    }
    std::stable_sort(aqi_series.begin(), aqi_series.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    TimeTable out;
    out.statics = solar.statics;
    std::size_t joined = 0;
    for (const auto& s : solar.rows) {
        if (s.gap) continue;
        auto w = weather_by_hour.find(s.ts.hours_since_epoch());
        if (w == weather_by_hour.end()) continue;
        ++joined;
        HourlyRecord rec;
        rec.ts = s.ts.floor_hour();
        rec[Field::generation] = s[Field::generation];
        for (Field f : kExogenousFields) {
            if (f != Field::aqi) rec[f] = (*w->second)[f];
        }
        // last reading with timestamp <= hour
        auto it = std::upper_bound(aqi_series.begin(), aqi_series.end(), rec.ts,
                                   [](const Timestamp& t, const auto& p) { return t < p.first; });
        bool stale = false;
        if (it != aqi_series.begin()) {
            --it;
            const auto age_hours = (rec.ts.seconds() - it->first.seconds()) / 3600;
            if (age_hours <= opts.aqi_staleness_hours) {
                rec[Field::aqi] = it->second;
            } else {
                stale = true;
            }
        } else {
            stale = true;
        }
        if (stale) {
            if (report) ++report->rows_dropped_stale_aqi;
            continue;
        }
        if (!rec.complete()) {
            if (report) ++report->rows_dropped_incomplete;
            continue;
        }
        out.rows.push_back(rec);
    }
    if (joined == 0) throw ToolError(ErrorKind::GapError, "solar and weather share no hours");
    if (out.rows.empty()) throw ToolError(ErrorKind::GapError, "no complete rows after merge");
    return out;
}

// ------------------------------------------------------------
// merged table files
// ------------------------------------------------------------

inline std::string merged_header() {
    std::string h = "timestamp";
    for (Field f : kAllFields) {
        h += ',';
        h += field_name(f);
    }
    return h;
}

inline std::string write_table_csv(const TimeTable& t) {
    std::string out = merged_header() + "\n";
    for (const auto& r : t.rows) {
        out += r.ts.to_string();
        for (Field f : kAllFields) {
            out += ',';
            if (!r.gap && r[f]) out += format_double(*r[f]);
        }
        out += '\n';
    }
    return out;
}

/// Reads a merged table. Every column of `merged_header()` is required; a
/// missing one is a SchemaError naming it.
inline TimeTable read_table_csv_text(const std::string& text, const std::string& source_name = "<memory>") {
    const auto lines = detail::lines_of(text);
    if (lines.empty()) throw ToolError(ErrorKind::SchemaError, "missing header", source_name);
    const auto header = detail::split_line(lines.front());
    std::map<std::string, std::size_t> col;
    for (std::size_t j = 0; j < header.size(); ++j) col.emplace(header[j], j);
    if (!col.contains("timestamp")) throw ToolError(ErrorKind::SchemaError, "missing column 'timestamp'", source_name);
    for (Field f : kAllFields) {
        if (!col.contains(std::string{field_name(f)})) {
            throw ToolError(ErrorKind::SchemaError, "missing column '" + std::string{field_name(f)} + "'", source_name);
        }
    }
    TimeTable t;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto cells = detail::split_line(lines[li]);
        const std::string where = source_name + ":" + std::to_string(li + 1);
        if (cells.size() != header.size()) throw ToolError(ErrorKind::ParseError, "wrong cell count", where);
        auto ts = Timestamp::parse(cells[col.at("timestamp")]);
        if (!ts) throw ToolError(ErrorKind::ParseError, "unreadable timestamp", where);
        HourlyRecord rec;
        rec.ts = *ts;
        bool any = false;
        for (Field f : kAllFields) {
            rec[f] = detail::parse_number(cells[col.at(std::string{field_name(f)})]);
            any = any || rec[f].has_value();
        }
        rec.gap = !any;
        t.rows.push_back(rec);
    }
    return t;
}

inline TimeTable read_table_csv(const std::filesystem::path& path) {
    return read_table_csv_text(detail::read_file(path), path.string());
}

}  // namespace solarcast::ingest
