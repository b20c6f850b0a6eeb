#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace sac {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s, exact
inline constexpr double kBoltzmann = 1.380649e-23;      // J/K, exact

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watts(double dbm) { return db_to_linear(dbm - 30.0); }
inline double watts_to_dbm(double w) { return linear_to_db(w) + 30.0; }

inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }
inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

}  // namespace sac
