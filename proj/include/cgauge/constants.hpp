#pragma once

#include <numbers>

// Physical constants (CODATA 2018) and display-unit conversions. Everything
// inside the library is strict SI; keV/c and Hz only appear at I/O edges.
namespace cgauge::constants {

inline constexpr double boltzmann = 1.380649e-23;       // J/K, exact
inline constexpr double hbar = 1.054571817e-34;         // J s
inline constexpr double atomic_mass = 1.66053906660e-27; // kg

/// 1 keV/c in kg m/s.
inline constexpr double kev_per_c = 5.344286e-25;

inline constexpr double pi = std::numbers::pi;
inline constexpr double sqrt_pi = 1.7724538509055160273;
inline constexpr double sqrt_2pi = 2.5066282746310005024;

constexpr double from_kevc(double kevc) { return kevc * kev_per_c; }
constexpr double to_kevc(double si) { return si / kev_per_c; }
constexpr double from_hz(double hz) { return 2.0 * pi * hz; }
constexpr double to_hz(double rad_per_s) { return rad_per_s / (2.0 * pi); }

} // namespace cgauge::constants
