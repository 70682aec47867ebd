#include "cgauge/special.hpp"

#include "cgauge/constants.hpp"
#include "cgauge/errors.hpp"

#include <cmath>

namespace cgauge::special {

double erf(double x) { return std::erf(x); }
double erfc(double x) { return std::erfc(x); }

namespace {

// Below this the direct form cancels two O(1) terms to leave O(x^2).
constexpr double xi_series_cut = 0.1;

double xi_series(double x) {
  const double x2 = x * x;
  // Taylor coefficients of xi in x^2, orders 2..12.
  constexpr double c[] = {2.0 / 3.0,           -7.0 / 60.0,
                          5.0 / 448.0,         -379.0 / 483840.0,
                          7699.0 / 170311680.0, -1483.0 / 656015360.0};
  double acc = 0.0;
  for (int k = 5; k >= 0; --k) acc = acc * x2 + c[k];
  return acc * x2;
}

} // namespace

double xi(double x) {
  if (!(x >= 0.0)) throw DomainError("xi: argument must be >= 0");
  if (x < xi_series_cut) return xi_series(x);
  const double x2 = x * x;
  return constants::sqrt_pi * x * (1.0 - 2.0 / x2) * std::erf(0.5 * x) *
             std::exp(-x2 / 8.0) +
         2.0 * std::exp(-3.0 * x2 / 8.0);
}

double specular_cutoff(double x_min) {
  if (!(x_min >= 0.0)) throw DomainError("cutoff: x_min must be >= 0");
  return std::exp(-x_min * x_min / 8.0);
}

double diffuse_cutoff(double x_min) {
  if (!(x_min >= 0.0)) throw DomainError("cutoff: x_min must be >= 0");
  const double x2 = x_min * x_min;
  return std::exp(-0.5 * x2) + 0.5 * constants::sqrt_pi * x_min *
                                   std::erf(0.5 * x_min) * std::exp(-0.25 * x2);
}

double projected_specular_cutoff(double x_min) {
  if (!(x_min >= 0.0)) throw DomainError("cutoff: x_min must be >= 0");
  const double z = x_min / std::sqrt(8.0);
  if (z < 12.0) return std::exp(-z * z) - constants::sqrt_pi * z * std::erfc(z);
  // Asymptotic series; the direct form cancels to ~1/(2 z^2).
  const double w = 1.0 / (2.0 * z * z);
  double term = w, sum = w;
  for (int k = 2; k <= 12; ++k) {
    term *= -(2.0 * k - 1.0) * w;
    sum += term;
  }
  return std::exp(-z * z) * sum;
}

} // namespace cgauge::special
