#pragma once

// Reference computations used only by the tests. None of these call into the
// library; they rebuild each quantity from a different starting point.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

inline constexpr long double kPi = 3.141592653589793238462643383279502884L;
inline constexpr double kBoltzmann = 1.380649e-23;
inline constexpr double kHbar = 1.054571817e-34;
inline constexpr double kAmu = 1.66053906660e-27;
inline constexpr double kKevc = 5.344286e-25;

// Maclaurin series, adequate for |z| <= 3 in long double.
inline long double erf_series(long double z) {
  long double term = z, sum = z;
  for (int n = 1; n < 200; ++n) {
    term *= -z * z / n;
    const long double add = term / (2 * n + 1);
    sum += add;
    if (std::fabs(add) < 1e-22L * std::fabs(sum)) break;
  }
  return 2.0L / std::sqrt(kPi) * sum;
}

// Diffuse enhancement factor straight from its definition.
inline long double xi(long double x) {
  return std::sqrt(kPi) * x * (1.0L - 2.0L / (x * x)) * erf_series(x / 2) *
             std::exp(-x * x / 8) +
         2.0L * std::exp(-3.0L * x * x / 8);
}

// Composite Simpson rule with n (even) panels.
inline long double simpson(const std::function<long double(long double)>& f, long double a,
                           long double b, std::size_t n) {
  if (n % 2) ++n;
  const long double h = (b - a) / n;
  long double s = f(a) + f(b);
  for (std::size_t i = 1; i < n; ++i) s += f(a + h * i) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

// Flux-weighted normal speed of molecules crossing a wall: Rayleigh(vbar).
inline long double rayleigh(long double v, long double vbar) {
  if (v <= 0) return 0;
  return v / (vbar * vbar) * std::exp(-v * v / (2 * vbar * vbar));
}

// Per-collision density of the normal momentum transfer dp for a wall in
// equilibrium with the gas. Specular: dp = 2 m v_in. Diffuse: dp = m (v_in +
// v_out) with v_in, v_out independent Rayleigh variables.
inline long double specular_pdf(long double dp, long double m, long double vbar) {
  return rayleigh(dp / (2 * m), vbar) / (2 * m);
}

inline long double diffuse_pdf(long double dp, long double m, long double vbar,
                               std::size_t panels = 600) {
  const long double s = dp / m;
  if (s <= 0) return 0;
  auto f = [&](long double u) { return rayleigh(u, vbar) * rayleigh(s - u, vbar); };
  return simpson(f, 0, s, panels) / m;
}

inline long double arrival_rate(long double n, long double area, long double vbar) {
  return n * area * vbar / std::sqrt(2 * kPi);
}

// Standard normal helpers.
inline double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }
inline double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

} // namespace oracle
