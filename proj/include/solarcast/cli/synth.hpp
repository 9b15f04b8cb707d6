#pragma once

// Seeded synthetic site: diurnal clear-sky curve with an austral-summer
// seasonal peak, persistent cloud cover and daily AQI attenuating output,
// structural night zeros, and weather columns correlated with both.

#include "solarcast/core.hpp"
#include "solarcast/random.hpp"

#include <numbers>

namespace solarcast::synth {

struct SynthParams {
    std::uint64_t seed = 7;
    int n_days = 730;
    int start_year = 2020;
    unsigned start_month = 1;
    unsigned start_day = 1;
    double peak_kwh = 250.0;
    // multiplicative noise on daytime output
    double noise_sd = 0.05;
    // day-to-day persistence of the cloud regime
    double cloud_daily_persistence = 0.75;
    // hour-to-hour persistence of short-lived cloud
    double cloud_hourly_persistence = 0.9;
    // largest fractional loss under full cloud
    double cloud_attenuation = 0.8;
    double aqi_mean = 60.0;

    void validate() const {
        if (n_days < 1) throw ToolError(ErrorKind::ConfigError, "synthetic data needs at least one day");
        if (!(peak_kwh > 0.0)) throw ToolError(ErrorKind::ConfigError, "peak_kwh must be positive");
        if (noise_sd < 0.0) throw ToolError(ErrorKind::ConfigError, "noise_sd must be non-negative");
        auto unit = [](double v) { return v >= 0.0 && v < 1.0; };
        if (!unit(cloud_daily_persistence) || !unit(cloud_hourly_persistence)) {
            throw ToolError(ErrorKind::ConfigError, "cloud persistence must lie in [0,1)");
        }
        if (!(cloud_attenuation >= 0.0 && cloud_attenuation <= 1.0)) {
            throw ToolError(ErrorKind::ConfigError, "cloud_attenuation must lie in [0,1]");
        }
    }
};

/// +1 in mid-January, -1 in mid-July.
inline double season_phase(const Timestamp& ts) {
    return std::cos(2.0 * std::numbers::pi * (ts.day_of_year() - 15) / 365.25);
}

/// Daylight window in local hours; longer days in the austral summer.
inline std::pair<double, double> daylight(const Timestamp& ts) {
    const double length = 12.0 + 2.0 * season_phase(ts);
    return {12.0 - length / 2.0, 12.0 + length / 2.0};
}

inline TimeTable generate_synthetic(const SynthParams& params) {
    params.validate();
    Rng rng(params.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    const Timestamp start = Timestamp::from_civil(params.start_year, params.start_month, params.start_day);
    TimeTable t;
    t.rows.reserve(static_cast<std::size_t>(params.n_days) * 24);

    const double rho_d = params.cloud_daily_persistence;
    const double rho_h = params.cloud_hourly_persistence;
    double regime = normal(rng);
    double fast = normal(rng);
    double aqi_state = normal(rng);
    double wind_state = normal(rng);
    double wind_dir = 180.0;

    for (int d = 0; d < params.n_days; ++d) {
        regime = rho_d * regime + std::sqrt(1.0 - rho_d * rho_d) * normal(rng);
        aqi_state = 0.8 * aqi_state + 0.6 * normal(rng);
        const Timestamp day = start.plus_hours(static_cast<std::int64_t>(d) * 24);
        const double s = season_phase(day);
        // worse air in the cool season
        const double aqi = std::max(5.0, params.aqi_mean * (1.0 - 0.3 * s) + 15.0 * aqi_state);
        const auto [sunrise, sunset] = daylight(day);

        for (int h = 0; h < 24; ++h) {
            const Timestamp ts = day.plus_hours(h);
            fast = rho_h * fast + std::sqrt(1.0 - rho_h * rho_h) * normal(rng);
            const double latent = 1.2 * regime + 0.6 * fast - 0.3;
            const double cloud = 1.0 / (1.0 + std::exp(-1.5 * latent));

            double elevation = 0.0;
            if (h > sunrise && h < sunset) elevation = std::sin(std::numbers::pi * (h - sunrise) / (sunset - sunrise));

            double generation = 0.0;
            if (elevation > 0.0) {
                const double clear = params.peak_kwh * std::pow(elevation, 1.3) * (0.75 + 0.25 * s);
                const double haze = std::clamp(1.0 - 0.002 * (aqi - 50.0), 0.7, 1.05);
                const double atten = 1.0 - params.cloud_attenuation * cloud;
                generation = std::max(0.0, clear * atten * haze * (1.0 + params.noise_sd * normal(rng)));
            }

            const double diurnal = std::sin(std::numbers::pi * (h - 9.0) / 12.0);
            const double air = 18.0 + 7.0 * s + 6.0 * diurnal * (1.0 - 0.5 * cloud) + 0.8 * normal(rng);
            const double humidity = std::clamp(55.0 + 30.0 * cloud - 1.5 * (air - 18.0) + 3.0 * normal(rng), 5.0, 100.0);
            // Magnus approximation
            const double gamma = std::log(humidity / 100.0) + 17.27 * air / (237.7 + air);
            const double dew = 237.7 * gamma / (17.27 - gamma);
            wind_state = 0.9 * wind_state + 0.44 * normal(rng);
            const double wind = std::max(0.0, 3.0 + 1.5 * wind_state + 1.0 * cloud);
            wind_dir = std::fmod(wind_dir + 10.0 * normal(rng) + 360.0, 360.0);
            const double vapour = humidity / 100.0 * 6.105 * std::exp(17.27 * air / (237.7 + air));
            const double apparent = air + 0.33 * vapour - 0.7 * wind - 4.0;

            HourlyRecord r;
            r.ts = ts;
            r[Field::generation] = generation;
            r[Field::air_temp] = air;
            r[Field::apparent_temp] = apparent;
            r[Field::dew_point] = dew;
            r[Field::wind_speed] = wind;
            r[Field::wind_direction] = wind_dir;
            r[Field::humidity] = humidity;
            r[Field::aqi] = aqi;
            t.rows.push_back(r);
        }
    }
    return t;
}

// ------------------------------------------------------------
// source-format files
// ------------------------------------------------------------

/// 15-minute solar file; each hour's energy is split evenly over its quarters.
inline std::string solar_csv(const TimeTable& t) {
    std::string out = "timestamp,generation_kwh\n";
    for (const auto& r : t.rows) {
        const double q = *r[Field::generation] / 4.0;
        for (int k = 0; k < 4; ++k) out += Timestamp{r.ts.seconds() + k * 900}.to_string() + ',' + format_double(q) + '\n';
    }
    return out;
}

inline std::string weather_csv(const TimeTable& t) {
    std::string out = "timestamp,air_temp,apparent_temp,dew_point,wind_speed,wind_direction,humidity\n";
    for (const auto& r : t.rows) {
        out += r.ts.to_string();
        for (Field f : {Field::air_temp, Field::apparent_temp, Field::dew_point, Field::wind_speed, Field::wind_direction,
                        Field::humidity}) {
            out += ',' + format_double(*r[f]);
        }
        out += '\n';
    }
    return out;
}

/// Daily AQI file, one reading per date.
inline std::string aqi_csv(const TimeTable& t) {
    std::string out = "date,aqi\n";
    for (const auto& r : t.rows) {
        if (r.ts.hour() != 0) continue;
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", r.ts.year(), r.ts.month(), r.ts.day());
        out += std::string{buf} + ',' + format_double(*r[Field::aqi]) + '\n';
    }
    return out;
}

}  // namespace solarcast::synth
