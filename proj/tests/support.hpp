#pragma once

#include "solarcast/core.hpp"
#include "solarcast/random.hpp"

#include <cmath>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

namespace solarcast::test {

inline Timestamp t0() { return Timestamp::from_civil(2021, 1, 1); }

/// Gapless hourly table of `n` rows; generation from `gen(i)`, weather a
/// smooth deterministic function of the row index.
inline TimeTable hourly_table(std::size_t n, const std::function<double(std::size_t)>& gen = {},
                              Timestamp start = t0()) {
    TimeTable t;
    for (std::size_t i = 0; i < n; ++i) {
        HourlyRecord r;
        r.ts = start.plus_hours(static_cast<std::int64_t>(i));
        const double s = std::sin(0.3 * static_cast<double>(i));
        r[Field::generation] = gen ? gen(i) : 10.0 + 5.0 * s;
        r[Field::air_temp] = 20.0 + 3.0 * s;
        r[Field::apparent_temp] = 19.0 + 2.5 * std::cos(0.2 * static_cast<double>(i));
        r[Field::dew_point] = 10.0 + std::sin(0.7 * static_cast<double>(i));
        r[Field::wind_speed] = 3.0 + std::cos(0.5 * static_cast<double>(i));
        r[Field::wind_direction] = std::fmod(37.0 * static_cast<double>(i), 360.0);
        r[Field::humidity] = 60.0 + 20.0 * std::sin(0.11 * static_cast<double>(i));
        r[Field::aqi] = 40.0 + static_cast<double>(i % 7);
        t.rows.push_back(r);
    }
    return t;
}

inline Matrix random_matrix(std::size_t n, std::size_t d, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Matrix m(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) m(i, j) = lo + (hi - lo) * uniform01(rng);
    }
    return m;
}

inline std::vector<double> random_vector(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = lo + (hi - lo) * uniform01(rng);
    return v;
}

inline bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

inline bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!bit_equal(a[i], b[i])) return false;
    }
    return true;
}

}  // namespace solarcast::test
