#pragma once

// Special functions shared by the kinetics closed forms.
//
// erf/erfc are the C library implementations (glibc: < 1 ulp on [0, 6]);
// tests/test_special.cpp pins them against a 50-digit reference table at the
// 1e-15 relative level.

namespace cgauge::special {

double erf(double x);
double erfc(double x);

/// Diffuse-scattering correction factor xi(x), x = dp / (m_g vbar).
/// Removable singularity at 0 is handled by a series branch for small x.
double xi(double x);

/// Detectable fraction of specular collisions above x_min = dp_min / (m_g vbar).
double specular_cutoff(double x_min);

/// Detectable fraction of diffuse collisions above x_min.
double diffuse_cutoff(double x_min);

/// Specular fraction above x_min for single-axis readout of a sphere:
/// int_0^1 eta_s(x/u) du = e^{-x^2/8} - sqrt(pi/8) x erfc(x/sqrt 8).
double projected_specular_cutoff(double x_min);

} // namespace cgauge::special
