#pragma once

// Run configuration: an INI-style file of `[section]` blocks with
// `key = value` lines. Unknown sections and keys are errors.

#include "solarcast/cli/synth.hpp"
#include "solarcast/eval/benchmark.hpp"
#include "solarcast/ingest.hpp"

#include <filesystem>
#include <map>

namespace solarcast::cli {

using Sections = std::map<std::string, std::map<std::string, std::string>>;

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(ingest::detail::trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    cur = ingest::detail::trim(cur);
    if (!cur.empty() || !out.empty()) out.push_back(cur);
    out.erase(std::remove(out.begin(), out.end(), std::string{}), out.end());
    return out;
}

inline double to_double(const std::string& v, const std::string& where) {
    auto d = ingest::detail::parse_number(v);
    if (!d) throw ToolError(ErrorKind::ConfigError, "expected a number, got '" + v + "'", where);
    return *d;
}

inline std::int64_t to_int(const std::string& v, const std::string& where) {
    const double d = to_double(v, where);
    if (d != std::floor(d)) throw ToolError(ErrorKind::ConfigError, "expected an integer, got '" + v + "'", where);
    return static_cast<std::int64_t>(d);
}

inline std::uint64_t to_seed(const std::string& v, const std::string& where) {
    try {
        std::size_t pos = 0;
        const auto s = std::stoull(v, &pos);
        if (pos != v.size() || v.empty() || !std::isdigit(static_cast<unsigned char>(v.front()))) throw std::invalid_argument(v);
        return s;
    } catch (const std::exception&) {
        throw ToolError(ErrorKind::ConfigError, "expected an unsigned integer seed, got '" + v + "'", where);
    }
}

inline bool to_bool(const std::string& v, const std::string& where) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ToolError(ErrorKind::ConfigError, "expected a boolean, got '" + v + "'", where);
}

}  // namespace detail

inline Sections parse_ini(const std::string& text, const std::string& source = "<config>") {
    Sections out;
    std::string section;
    std::size_t line_no = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = source + ":" + std::to_string(line_no);
        auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = ingest::detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ToolError(ErrorKind::ConfigError, "unterminated section header", where);
            section = ingest::detail::trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ToolError(ErrorKind::ConfigError, "empty section name", where);
            out[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ToolError(ErrorKind::ConfigError, "expected key = value", where);
        if (section.empty()) throw ToolError(ErrorKind::ConfigError, "key outside of a section", where);
        const auto key = ingest::detail::trim(line.substr(0, eq));
        const auto value = ingest::detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ToolError(ErrorKind::ConfigError, "empty key", where);
        if (!out[section].emplace(key, value).second) {
            throw ToolError(ErrorKind::ConfigError, "duplicate key '" + key + "'", where);
        }
    }
    return out;
}

/// FNV-1a over the sorted `section.key=value` lines, as 16 hex digits.
/// Independent of the order of sections and keys in the file.
inline std::string config_digest(const Sections& s) {
    std::uint64_t h = fnv1a64("");
    for (const auto& [section, kv] : s) {
        for (const auto& [k, v] : kv) h = fnv1a64(section + "." + k + "=" + v + "\n", h);
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct PlotSpec {
    eval::Methodology methodology = eval::Methodology::power_transform;
    models::ModelKind model = models::ModelKind::RandomForest;
    int horizon = 24;
    std::size_t bins = 30;
};

struct RunConfig {
    std::filesystem::path solar;
    std::filesystem::path weather;
    std::filesystem::path aqi;
    std::filesystem::path merged;

    ingest::Aggregation generation_agg = ingest::Aggregation::sum;
    ingest::MergeOptions merge{};
    ingest::ParseOptions parse{};
    ValidationLimits limits{};

    eval::BenchmarkConfig benchmark{};
    features::FoldPlan folds{};
    eval::ScoreMetric scoring = eval::ScoreMetric::r2;
    PlotSpec plot{};
    synth::SynthParams synth{};

    std::uint64_t seed = 42;
    std::filesystem::path out = "out";
    std::string digest;

    std::vector<int> horizons() const { return benchmark.horizons; }
};

namespace detail {

inline const std::set<std::string>& allowed_keys(const std::string& section) {
    static const std::map<std::string, std::set<std::string>> keys{
        {"data", {"solar", "weather", "aqi", "merged"}},
        {"ingest", {"generation_agg", "aqi_staleness_hours", "max_generation", "malformed_tolerance"}},
        {"features", {"horizons", "lags", "calendar", "split_mode", "train_fraction", "split_seed", "cv_folds", "cv_mode", "cv_seed"}},
        {"transform", {"features", "target"}},
        {"models", {"regular", "zero_inflated", "power_transform"}},
        {"grid", {"scoring"}},
        {"run", {"seed", "out"}},
        {"synth", {"seed", "days", "start", "peak_kwh", "noise_sd", "cloud_daily_persistence", "cloud_hourly_persistence",
                   "cloud_attenuation", "aqi_mean"}},
        {"plot", {"methodology", "model", "horizon", "bins"}},
    };
    static const std::set<std::string> none;
    auto it = keys.find(section);
    return it == keys.end() ? none : it->second;
}

}  // namespace detail

/// Builds a RunConfig from parsed sections. Relative paths resolve against `base_dir`.
inline RunConfig build_config(const Sections& sections, const std::filesystem::path& base_dir = {}) {
    RunConfig cfg;
    cfg.digest = config_digest(sections);
    auto resolve = [&](const std::string& p) -> std::filesystem::path {
        std::filesystem::path path{p};
        return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
    };

    // structural validation first
    for (const auto& [section, kv] : sections) {
        const std::string where = "[" + section + "]";
        if (section.rfind("model.", 0) == 0 || section.rfind("grid.", 0) == 0) {
            const auto name = section.substr(section.find('.') + 1);
            const auto kind = models::model_kind_from_name(name);
            const auto& known = models::hyperparameter_names(kind);
            const bool is_grid = section.front() == 'g';
            for (const auto& [k, v] : kv) {
                if (!known.contains(k)) {
                    throw ToolError(ErrorKind::ConfigError, "unknown hyperparameter '" + k + "' for " + name, where);
                }
                const auto items = is_grid ? detail::split_list(v) : std::vector<std::string>{v};
                if (items.empty()) throw ToolError(ErrorKind::ConfigError, "grid entry has no values", where + " " + k);
                for (const auto& item : items) (void)detail::to_double(item, where + " " + k);
            }
            continue;
        }
        const auto& allowed = detail::allowed_keys(section);
        if (allowed.empty()) throw ToolError(ErrorKind::ConfigError, "unknown section", where);
        for (const auto& [k, _] : kv) {
            if (!allowed.contains(k)) throw ToolError(ErrorKind::ConfigError, "unknown key '" + k + "'", where);
        }
    }

    auto get = [&](const std::string& section, const std::string& key) -> std::optional<std::string> {
        auto s = sections.find(section);
        if (s == sections.end()) return std::nullopt;
        auto k = s->second.find(key);
        if (k == s->second.end()) return std::nullopt;
        return k->second;
    };
    auto where = [](const std::string& section, const std::string& key) { return "[" + section + "] " + key; };

    if (auto v = get("data", "solar")) cfg.solar = resolve(*v);
    if (auto v = get("data", "weather")) cfg.weather = resolve(*v);
    if (auto v = get("data", "aqi")) cfg.aqi = resolve(*v);
    if (auto v = get("data", "merged")) cfg.merged = resolve(*v);

    if (auto v = get("ingest", "generation_agg")) {
        if (*v == "sum") {
            cfg.generation_agg = ingest::Aggregation::sum;
        } else if (*v == "mean") {
            cfg.generation_agg = ingest::Aggregation::mean;
        } else {
            throw ToolError(ErrorKind::ConfigError, "generation_agg must be sum or mean", where("ingest", "generation_agg"));
        }
    }
    if (auto v = get("ingest", "aqi_staleness_hours")) cfg.merge.aqi_staleness_hours = detail::to_int(*v, where("ingest", "aqi_staleness_hours"));
    if (auto v = get("ingest", "max_generation")) cfg.limits.max_generation = detail::to_double(*v, where("ingest", "max_generation"));
    if (auto v = get("ingest", "malformed_tolerance")) cfg.parse.malformed_tolerance = detail::to_double(*v, where("ingest", "malformed_tolerance"));

    auto& bm = cfg.benchmark;
    if (auto v = get("features", "horizons")) {
        bm.horizons.clear();
        for (const auto& h : detail::split_list(*v)) {
            const auto hv = static_cast<int>(detail::to_int(h, where("features", "horizons")));
            if (!valid_horizon(hv)) throw ToolError(ErrorKind::ConfigError, "horizon must be 24, 48 or 72", where("features", "horizons"));
            bm.horizons.push_back(hv);
        }
        if (bm.horizons.empty()) throw ToolError(ErrorKind::ConfigError, "horizons must not be empty", where("features", "horizons"));
    }
    if (auto v = get("features", "lags")) {
        bm.features.lags.clear();
        for (const auto& l : detail::split_list(*v)) bm.features.lags.push_back(static_cast<int>(detail::to_int(l, where("features", "lags"))));
    }
    if (auto v = get("features", "calendar")) bm.features.calendar = detail::to_bool(*v, where("features", "calendar"));
    if (auto v = get("features", "split_mode")) {
        if (*v == "chronological") {
            bm.split.mode = features::SplitMode::chronological;
        } else if (*v == "random") {
            bm.split.mode = features::SplitMode::random;
        } else {
            throw ToolError(ErrorKind::ConfigError, "split_mode must be chronological or random", where("features", "split_mode"));
        }
    }
    if (auto v = get("features", "train_fraction")) bm.split.train_fraction = detail::to_double(*v, where("features", "train_fraction"));
    if (auto v = get("features", "split_seed")) bm.split.seed = detail::to_seed(*v, where("features", "split_seed"));
    if (auto v = get("features", "cv_folds")) {
        const auto k = detail::to_int(*v, where("features", "cv_folds"));
        if (k < 2) throw ToolError(ErrorKind::ConfigError, "cv_folds must be at least 2", where("features", "cv_folds"));
        cfg.folds.k = static_cast<std::size_t>(k);
    }
    if (auto v = get("features", "cv_mode")) {
        if (*v == "blocked") {
            cfg.folds.mode = features::FoldMode::blocked;
        } else if (*v == "shuffled") {
            cfg.folds.mode = features::FoldMode::shuffled;
        } else {
            throw ToolError(ErrorKind::ConfigError, "cv_mode must be blocked or shuffled", where("features", "cv_mode"));
        }
    }
    if (auto v = get("features", "cv_seed")) cfg.folds.seed = detail::to_seed(*v, where("features", "cv_seed"));
    if (!(bm.split.train_fraction > 0.0 && bm.split.train_fraction < 1.0)) {
        throw ToolError(ErrorKind::ConfigError, "train_fraction must lie in (0,1)", where("features", "train_fraction"));
    }

    if (auto v = get("transform", "features")) bm.transform_features = detail::to_bool(*v, where("transform", "features"));
    if (auto v = get("transform", "target")) bm.transform_target = detail::to_bool(*v, where("transform", "target"));

    if (auto v = get("grid", "scoring")) cfg.scoring = eval::score_metric_from_name(*v);

    for (auto m : {eval::Methodology::regular, eval::Methodology::zero_inflated, eval::Methodology::power_transform}) {
        const std::string key{to_string(m)};
        auto v = get("models", key);
        if (!v) continue;
        std::vector<eval::ModelEntry> entries;
        for (const auto& name : detail::split_list(*v)) {
            eval::ModelEntry e;
            e.kind = models::model_kind_from_name(name);
            if (m == eval::Methodology::zero_inflated) (void)models::zero_inflated_params(e.kind, {}, 0);
            if (auto s = sections.find("model." + name); s != sections.end()) {
                for (const auto& [k, val] : s->second) e.hyperparameters[k] = detail::to_double(val, "[model." + name + "] " + k);
            }
            if (auto s = sections.find("grid." + name); s != sections.end()) {
                eval::GridSpec g;
                g.metric = cfg.scoring;
                g.folds = cfg.folds;
                for (const auto& [k, val] : s->second) {
                    for (const auto& item : detail::split_list(val)) g.values[k].push_back(detail::to_double(item, "[grid." + name + "] " + k));
                    if (g.values[k].empty()) throw ToolError(ErrorKind::ConfigError, "grid entry has no values", "[grid." + name + "] " + k);
                }
                if (!g.values.empty()) e.grid = std::move(g);
            }
            entries.push_back(std::move(e));
        }
        if (!entries.empty()) bm.methodologies.emplace_back(m, std::move(entries));
    }

    if (auto v = get("run", "seed")) cfg.seed = detail::to_seed(*v, where("run", "seed"));
    if (auto v = get("run", "out")) cfg.out = resolve(*v);
    bm.seed = cfg.seed;

    auto& sy = cfg.synth;
    if (auto v = get("synth", "seed")) sy.seed = detail::to_seed(*v, where("synth", "seed"));
    if (auto v = get("synth", "days")) sy.n_days = static_cast<int>(detail::to_int(*v, where("synth", "days")));
    if (auto v = get("synth", "start")) {
        auto ts = Timestamp::parse(*v);
        if (!ts) throw ToolError(ErrorKind::ConfigError, "start must be YYYY-MM-DD", where("synth", "start"));
        sy.start_year = ts->year();
        sy.start_month = ts->month();
        sy.start_day = ts->day();
    }
    if (auto v = get("synth", "peak_kwh")) sy.peak_kwh = detail::to_double(*v, where("synth", "peak_kwh"));
    if (auto v = get("synth", "noise_sd")) sy.noise_sd = detail::to_double(*v, where("synth", "noise_sd"));
    if (auto v = get("synth", "cloud_daily_persistence")) sy.cloud_daily_persistence = detail::to_double(*v, where("synth", "cloud_daily_persistence"));
    if (auto v = get("synth", "cloud_hourly_persistence")) sy.cloud_hourly_persistence = detail::to_double(*v, where("synth", "cloud_hourly_persistence"));
    if (auto v = get("synth", "cloud_attenuation")) sy.cloud_attenuation = detail::to_double(*v, where("synth", "cloud_attenuation"));
    if (auto v = get("synth", "aqi_mean")) sy.aqi_mean = detail::to_double(*v, where("synth", "aqi_mean"));
    sy.validate();

    if (auto v = get("plot", "methodology")) cfg.plot.methodology = eval::methodology_from_name(*v);
    if (auto v = get("plot", "model")) cfg.plot.model = models::model_kind_from_name(*v);
    if (auto v = get("plot", "horizon")) {
        cfg.plot.horizon = static_cast<int>(detail::to_int(*v, where("plot", "horizon")));
        if (!valid_horizon(cfg.plot.horizon)) throw ToolError(ErrorKind::ConfigError, "horizon must be 24, 48 or 72", where("plot", "horizon"));
    }
    if (auto v = get("plot", "bins")) cfg.plot.bins = static_cast<std::size_t>(detail::to_int(*v, where("plot", "bins")));
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ToolError(ErrorKind::ConfigError, "cannot open config file", path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return build_config(parse_ini(ss.str(), path.string()), path.parent_path());
}

}  // namespace solarcast::cli
