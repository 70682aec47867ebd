#include "cgauge/kinetics.hpp"

#include "cgauge/constants.hpp"
#include "cgauge/errors.hpp"
#include "cgauge/quadrature.hpp"
#include "cgauge/special.hpp"

#include <algorithm>
#include <cmath>

namespace cgauge::kinetics {

using constants::boltzmann;
using constants::pi;

GasSpecies GasSpecies::from_pressure(std::string name, double mass,
                                     double temperature, double pressure) {
  if (!(temperature > 0.0))
    throw DomainError("species temperature must be > 0");
  GasSpecies s;
  s.name = std::move(name);
  s.mass = mass;
  s.temperature = temperature;
  s.density = pressure / (boltzmann * temperature);
  s.validate();
  return s;
}

double GasSpecies::pressure() const { return density * boltzmann * temperature; }

void GasSpecies::validate() const {
  if (!(mass > 0.0)) throw DomainError("species '" + name + "': mass must be > 0");
  if (!(temperature > 0.0))
    throw DomainError("species '" + name + "': temperature must be > 0");
  if (!(density >= 0.0))
    throw DomainError("species '" + name + "': density must be >= 0");
  if (accommodation && !(*accommodation >= 0.0 && *accommodation <= 1.0))
    throw DomainError("species '" + name + "': accommodation must be in [0, 1]");
}

SensorGeometry SensorGeometry::sphere(double radius, double accommodation,
                                      Readout readout) {
  SensorGeometry g;
  g.shape = Sphere{radius};
  g.accommodation = accommodation;
  g.readout = readout;
  g.validate();
  return g;
}

SensorGeometry SensorGeometry::plate(double area, double accommodation) {
  SensorGeometry g;
  g.shape = Plate{area};
  g.accommodation = accommodation;
  g.validate();
  return g;
}

double SensorGeometry::area() const {
  if (const auto* s = std::get_if<Sphere>(&shape)) return 4.0 * pi * s->radius * s->radius;
  return std::get<Plate>(shape).area;
}

double SensorGeometry::radius() const {
  if (const auto* s = std::get_if<Sphere>(&shape)) return s->radius;
  throw ConfigError("sensor radius requested for a plate geometry");
}

void SensorGeometry::validate() const {
  if (!(area() > 0.0)) throw DomainError("sensor area must be > 0");
  if (!(accommodation >= 0.0 && accommodation <= 1.0))
    throw DomainError("sensor accommodation must be in [0, 1]");
  if (readout == Readout::projected_axis && !is_sphere())
    throw ConfigError("projected-axis readout is only defined for spheres");
  if (surface_temperature && !(*surface_temperature > 0.0))
    throw DomainError("surface temperature must be > 0");
  if (!(thermal_accommodation > 0.0 && thermal_accommodation <= 1.0))
    throw DomainError("thermal accommodation must be in (0, 1]");
}

double accommodation_for(const GasSpecies& species, const SensorGeometry& sensor) {
  return species.accommodation.value_or(sensor.accommodation);
}

double thermal_velocity(const GasSpecies& species) {
  species.validate();
  return std::sqrt(boltzmann * species.temperature / species.mass);
}

double thermal_momentum(const GasSpecies& species) {
  return species.mass * thermal_velocity(species);
}

double xi(double x) { return special::xi(x); }

CutoffFactors cutoff_factors(double x_min) {
  return {special::specular_cutoff(x_min), special::diffuse_cutoff(x_min)};
}

namespace {

void require_equilibrium(const GasSpecies& species, const SensorGeometry& sensor) {
  if (!sensor.surface_temperature) return;
  const double t_out = *sensor.surface_temperature * sensor.thermal_accommodation;
  if (std::abs(t_out - species.temperature) > 1e-12 * species.temperature)
    throw UnsupportedConfiguration(
        "closed-form spectra assume the sensor is in thermal equilibrium with "
        "the gas; use the Monte Carlo module for a distinct surface temperature");
}

void require_sphere(const SensorGeometry& sensor) {
  if (!sensor.is_sphere())
    throw ConfigError("projected-axis spectra are only defined for spheres");
}

void check_impulse(double dp) {
  if (!(dp >= 0.0)) throw DomainError("impulse must be >= 0");
}

// Per-area diffuse kernel B(x) = e^{-x^2/8} xi(x) / 2, i.e.
// e^{-x^2/2} + (sqrt(pi)/2)(x - 2/x) erf(x/2) e^{-x^2/4}.
double diffuse_kernel(double x) { return 0.5 * std::exp(-x * x / 8.0) * special::xi(x); }

// Breakpoints for u-integrals whose mass sits near u ~ x.
std::vector<double> u_breakpoints(double x) {
  std::vector<double> pts{0.0};
  for (double f : {0.05, 0.25, 1.0, 4.0}) {
    const double u = f * x;
    if (u > pts.back() && u < 1.0) pts.push_back(u);
  }
  pts.push_back(1.0);
  return pts;
}

template <class F>
double integrate_pieces(F&& f, const std::vector<double>& pts, double rel_tol) {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    sum += quadrature::integrate(f, pts[i], pts[i + 1], rel_tol).value;
  return sum;
}

} // namespace

double projected_specular_cutoff(double x_min) { return special::projected_specular_cutoff(x_min); }

double projected_diffuse_kernel(double u, double x) {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("kernel: u must be in [0, 1]");
  if (u == 0.0) return 0.0;
  const double y = x / u;
  // u^-2 B(y); B decays like y e^{-y^2/4}, which beats u^-2.
  if (y > 60.0) return 0.0;
  return diffuse_kernel(y) / (u * u);
}

double projected_diffuse_cutoff(double x_min, double rel_tol) {
  check_impulse(x_min);
  if (x_min == 0.0) return 1.0;
  auto f = [x_min](double u) {
    if (u <= 0.0) return 0.0;
    const double y = x_min / u;
    return y > 60.0 ? 0.0 : special::diffuse_cutoff(y);
  };
  return integrate_pieces(f, u_breakpoints(x_min), rel_tol);
}

double differential_rate(double dp, const GasSpecies& species,
                         const SensorGeometry& sensor) {
  check_impulse(dp);
  species.validate();
  sensor.validate();
  require_equilibrium(species, sensor);
  const double m = species.mass;
  const double vbar = thermal_velocity(species);
  const double alpha = accommodation_for(species, sensor);
  const double v_half = dp / (2.0 * m);
  const double f_b = std::exp(-v_half * v_half / (2.0 * vbar * vbar)) /
                     std::sqrt(2.0 * pi * vbar * vbar);
  const double x = dp / (m * vbar);
  const double bracket = (1.0 - alpha) + (alpha == 0.0 ? 0.0 : alpha * special::xi(x));
  return species.density * sensor.area() * dp / (4.0 * m * m) * f_b * bracket;
}

double total_rate(double dp_min, const GasSpecies& species,
                  const SensorGeometry& sensor) {
  check_impulse(dp_min);
  species.validate();
  sensor.validate();
  require_equilibrium(species, sensor);
  const double vbar = thermal_velocity(species);
  const double alpha = accommodation_for(species, sensor);
  const auto eta = cutoff_factors(dp_min / (species.mass * vbar));
  return species.density * sensor.area() * vbar / constants::sqrt_2pi *
         ((1.0 - alpha) * eta.specular + alpha * eta.diffuse);
}

double projected_differential_rate(double dp_z, const GasSpecies& species,
                                   const SensorGeometry& sensor, Scatter scatter,
                                   double rel_tol) {
  check_impulse(dp_z);
  species.validate();
  sensor.validate();
  require_sphere(sensor);
  require_equilibrium(species, sensor);
  const double m = species.mass;
  const double vbar = thermal_velocity(species);
  const double r = sensor.radius();
  if (scatter == Scatter::specular) {
    return species.density * pi * r * r / m *
           special::erfc(dp_z / (std::sqrt(8.0) * m * vbar));
  }
  const double x = dp_z / (m * vbar);
  const double area = 4.0 * pi * r * r;
  if (x == 0.0) {
    // Limit of the angular integral: A n/(2 m sqrt(2 pi)) * int_0^inf B(s) ds.
    const double b_int =
        quadrature::integrate([](double s) { return diffuse_kernel(s); }, 0.0,
                              std::numeric_limits<double>::infinity(), rel_tol)
            .value;
    return area * species.density / (2.0 * m * constants::sqrt_2pi) * b_int;
  }
  const double prefactor = species.density * dp_z / (2.0 * m * m) /
                           (constants::sqrt_2pi * vbar) * area;
  auto f = [x](double u) { return projected_diffuse_kernel(u, x); };
  return prefactor * integrate_pieces(f, u_breakpoints(x), rel_tol);
}

double projected_total_rate(double dp_min, const GasSpecies& species,
                            const SensorGeometry& sensor, Scatter scatter) {
  check_impulse(dp_min);
  species.validate();
  sensor.validate();
  require_sphere(sensor);
  require_equilibrium(species, sensor);
  const double vbar = thermal_velocity(species);
  const double x = dp_min / (species.mass * vbar);
  const double eta = scatter == Scatter::specular ? special::projected_specular_cutoff(x)
                                                  : projected_diffuse_cutoff(x);
  return species.density * sensor.area() * vbar / constants::sqrt_2pi * eta;
}

double spectrum_density(double dp, const GasSpecies& species,
                        const SensorGeometry& sensor) {
  if (sensor.readout == Readout::full_3d) return differential_rate(dp, species, sensor);
  const double alpha = accommodation_for(species, sensor);
  double out = 0.0;
  if (alpha < 1.0)
    out += (1.0 - alpha) * projected_differential_rate(dp, species, sensor, Scatter::specular);
  if (alpha > 0.0)
    out += alpha * projected_differential_rate(dp, species, sensor, Scatter::diffuse);
  return out;
}

double combined_cutoff(double dp_min, const GasSpecies& species,
                       const SensorGeometry& sensor) {
  check_impulse(dp_min);
  const double x = dp_min / thermal_momentum(species);
  const double alpha = accommodation_for(species, sensor);
  const double eta_s = sensor.readout == Readout::full_3d ? special::specular_cutoff(x)
                                                         : special::projected_specular_cutoff(x);
  double eta_d = 1.0;
  if (alpha > 0.0) {
    eta_d = sensor.readout == Readout::full_3d ? special::diffuse_cutoff(x)
                                               : projected_diffuse_cutoff(x);
  }
  return (1.0 - alpha) * eta_s + alpha * eta_d;
}

double detectable_rate(double dp_min, const GasSpecies& species,
                       const SensorGeometry& sensor) {
  if (sensor.readout == Readout::full_3d) return total_rate(dp_min, species, sensor);
  require_equilibrium(species, sensor);
  sensor.validate();
  return species.density * sensor.area() * thermal_velocity(species) /
         constants::sqrt_2pi * combined_cutoff(dp_min, species, sensor);
}

double mixture_differential_rate(double dp, std::span<const GasSpecies> species,
                                 const SensorGeometry& sensor) {
  if (species.empty()) throw ConfigError("mixture requires at least one species");
  double sum = 0.0;
  for (const auto& s : species) sum += spectrum_density(dp, s, sensor);
  return sum;
}

std::vector<double> GridSpec::points() const {
  if (count == 0) throw ConfigError("grid count must be >= 1", "grid.count");
  if (!(min >= 0.0) || !std::isfinite(min)) throw ConfigError("grid min must be >= 0", "grid.min");
  if (count == 1) return {min};
  if (!(max > min) || !std::isfinite(max))
    throw ConfigError("grid max must exceed min", "grid.max");
  std::vector<double> pts(count);
  if (spacing == Spacing::linear) {
    const double step = (max - min) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) pts[i] = min + step * static_cast<double>(i);
  } else {
    if (!(min > 0.0))
      throw ConfigError("logarithmic grid requires min > 0", "grid.min");
    const double lmin = std::log(min), lmax = std::log(max);
    const double step = (lmax - lmin) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i)
      pts[i] = std::exp(lmin + step * static_cast<double>(i));
  }
  pts.front() = min;
  pts.back() = max;
  return pts;
}

MomentumSpectrum tabulate_spectrum(const GridSpec& grid,
                                   std::span<const GasSpecies> species,
                                   const SensorGeometry& sensor) {
  if (species.empty()) throw ConfigError("spectrum requires at least one species", "species");
  sensor.validate();
  MomentumSpectrum out;
  out.grid = grid.points();
  out.values.reserve(out.grid.size());
  for (double dp : out.grid) {
    double v = 0.0;
    for (const auto& s : species) v += spectrum_density(dp, s, sensor);
    out.values.push_back(v);
  }
  nlohmann::json sp = nlohmann::json::array();
  bool all_specular = true, all_diffuse = true;
  for (const auto& s : species) {
    sp.push_back(describe(s));
    const double a = accommodation_for(s, sensor);
    all_specular = all_specular && a == 0.0;
    all_diffuse = all_diffuse && a == 1.0;
  }
  out.metadata["species"] = std::move(sp);
  out.metadata["sensor"] = describe(sensor);
  out.metadata["scatter_model"] =
      all_specular ? "specular" : (all_diffuse ? "diffuse" : "mixed");
  out.metadata["readout"] = to_string(sensor.readout);
  out.metadata["grid"] = describe(grid);
  out.metadata["source"] = "analytic";
  return out;
}

std::string to_string(Readout r) {
  return r == Readout::full_3d ? "full_3d" : "projected_axis";
}
std::string to_string(Scatter s) { return s == Scatter::specular ? "specular" : "diffuse"; }
std::string to_string(Spacing s) { return s == Spacing::linear ? "linear" : "logarithmic"; }

nlohmann::json describe(const GasSpecies& s) {
  nlohmann::json j{{"name", s.name},
                   {"mass_kg", s.mass},
                   {"temperature_k", s.temperature},
                   {"density_m3", s.density},
                   {"pressure_pa", s.pressure()}};
  if (s.accommodation) j["accommodation"] = *s.accommodation;
  return j;
}

nlohmann::json describe(const SensorGeometry& g) {
  nlohmann::json j;
  if (g.is_sphere()) {
    j["shape"] = "sphere";
    j["radius_m"] = g.radius();
  } else {
    j["shape"] = "plate";
  }
  j["area_m2"] = g.area();
  j["accommodation"] = g.accommodation;
  j["readout"] = to_string(g.readout);
  if (g.surface_temperature) j["surface_temperature_k"] = *g.surface_temperature;
  j["thermal_accommodation"] = g.thermal_accommodation;
  j["projection"] = g.projection == Projection::normal_only ? "normal_only" : "full_vector";
  return j;
}

nlohmann::json describe(const GridSpec& g) {
  return {{"min_si", g.min},
          {"max_si", g.max},
          {"count", g.count},
          {"spacing", to_string(g.spacing)}};
}

} // namespace cgauge::kinetics
