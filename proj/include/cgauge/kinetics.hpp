#pragma once

#include "cgauge/spectrum.hpp"

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

// Gas-collision momentum-transfer spectra for a sensor immersed in a dilute,
// Maxwellian background gas. All quantities SI: kg, m, s, K, Pa; impulses in
// kg m/s and rate densities in s^-1 per (kg m/s).
namespace cgauge::kinetics {

struct GasSpecies {
  std::string name;
  double mass = 0.0;        ///< molecular mass m_g [kg]
  double temperature = 0.0; ///< gas temperature T [K]
  double density = 0.0;     ///< number density n_g [m^-3]
  /// Per-species momentum accommodation; falls back to the sensor's value.
  std::optional<double> accommodation;

  /// Builds a species from partial pressure via the ideal gas law n = P/(k_B T).
  static GasSpecies from_pressure(std::string name, double mass,
                                  double temperature, double pressure);
  double pressure() const;
  void validate() const;
};

struct Sphere {
  double radius = 0.0;
};
struct Plate {
  double area = 0.0;
};

enum class Readout { full_3d, projected_axis };
enum class Scatter { specular, diffuse };

/// How the projected-axis Monte Carlo projects a collision's momentum
/// transfer. The analytic projected spectra describe `normal_only`.
enum class Projection { normal_only, full_vector };

struct SensorGeometry {
  std::variant<Sphere, Plate> shape = Sphere{};
  double accommodation = 1.0; ///< fraction of diffuse collisions, alpha
  Readout readout = Readout::full_3d;
  /// Surface temperature when it differs from the gas; only the Monte Carlo
  /// module can model this.
  std::optional<double> surface_temperature;
  /// Thermal accommodation coefficient multiplying the surface temperature
  /// for diffusely re-emitted molecules.
  double thermal_accommodation = 1.0;
  Projection projection = Projection::normal_only;

  static SensorGeometry sphere(double radius, double accommodation,
                               Readout readout = Readout::full_3d);
  static SensorGeometry plate(double area, double accommodation);

  double area() const;
  bool is_sphere() const { return std::holds_alternative<Sphere>(shape); }
  double radius() const; ///< throws ConfigError for plates
  void validate() const;
};

/// alpha for this species on this sensor.
double accommodation_for(const GasSpecies& species, const SensorGeometry& sensor);

/// Root-mean-square one-dimensional thermal velocity sqrt(k_B T / m_g).
double thermal_velocity(const GasSpecies& species);

/// Thermal momentum scale m_g vbar = sqrt(m_g k_B T).
double thermal_momentum(const GasSpecies& species);

double xi(double x);

struct CutoffFactors {
  double specular = 1.0; ///< eta_s
  double diffuse = 1.0;  ///< eta_d
};
CutoffFactors cutoff_factors(double x_min);

/// Projected specular cutoff eta'_s(x_min), the integral of the projected
/// specular spectrum above x_min. Differs from eta_s except at x_min = 0.
double projected_specular_cutoff(double x_min);

/// Projected diffuse cutoff eta'_d(x_min) by quadrature over the readout
/// angle.
double projected_diffuse_cutoff(double x_min, double rel_tol = 1e-9);

/// dGamma/d(dp) for a full 3D readout.
double differential_rate(double dp, const GasSpecies& species,
                         const SensorGeometry& sensor);

/// Rate of collisions with dp >= dp_min for a full 3D readout.
double total_rate(double dp_min, const GasSpecies& species,
                  const SensorGeometry& sensor);

/// dGamma/d|dp_z| for a sphere read out along one axis.
double projected_differential_rate(double dp_z, const GasSpecies& species,
                                   const SensorGeometry& sensor, Scatter scatter,
                                   double rel_tol = 1e-9);

double projected_total_rate(double dp_min, const GasSpecies& species,
                            const SensorGeometry& sensor, Scatter scatter);

/// Readout-aware spectrum: full 3D or alpha-weighted projected spectrum.
double spectrum_density(double dp, const GasSpecies& species,
                        const SensorGeometry& sensor);

/// Readout-aware detectable rate above dp_min.
double detectable_rate(double dp_min, const GasSpecies& species,
                       const SensorGeometry& sensor);

/// Readout-aware combined cutoff (1-alpha) eta_s + alpha eta_d (or primed).
double combined_cutoff(double dp_min, const GasSpecies& species,
                       const SensorGeometry& sensor);

double mixture_differential_rate(double dp, std::span<const GasSpecies> species,
                                 const SensorGeometry& sensor);

enum class Spacing { linear, logarithmic };

struct GridSpec {
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
  Spacing spacing = Spacing::linear;

  std::vector<double> points() const; ///< validates, throws ConfigError
};

MomentumSpectrum tabulate_spectrum(const GridSpec& grid,
                                   std::span<const GasSpecies> species,
                                   const SensorGeometry& sensor);

std::string to_string(Readout r);
std::string to_string(Scatter s);
std::string to_string(Spacing s);

} // namespace cgauge::kinetics

namespace cgauge::kinetics {

/// Integrand of the projected diffuse spectrum in u = cos(theta):
/// u^-2 B(x/u), with B the per-area diffuse kernel. Finite on [0, 1];
/// returns the u -> 0 limit (zero) at u = 0.
double projected_diffuse_kernel(double u, double x);

nlohmann::json describe(const GasSpecies& species);
nlohmann::json describe(const SensorGeometry& sensor);
nlohmann::json describe(const GridSpec& grid);

} // namespace cgauge::kinetics
