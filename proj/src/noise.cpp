#include "cgauge/noise.hpp"

#include "cgauge/constants.hpp"
#include "cgauge/errors.hpp"
#include "cgauge/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace cgauge::noise {

using constants::boltzmann;
using constants::hbar;

void MechanicalMode::validate() const {
  if (!(mass > 0.0)) throw DomainError("mode mass must be > 0");
  if (!(omega > 0.0)) throw DomainError("mode resonance must be > 0");
  if (!(gamma > 0.0)) throw DomainError("mode damping must be > 0");
  if (!(bath_temperature >= 0.0)) throw DomainError("bath temperature must be >= 0");
}

void ReadoutConfig::validate() const {
  if (!(balance_frequency > 0.0)) throw DomainError("balance frequency must be > 0");
  if (technical) {
    if (!(technical->gamma > 0.0)) throw DomainError("technical gamma must be > 0");
    if (!(technical->bath_temperature >= 0.0))
      throw DomainError("technical bath temperature must be >= 0");
  }
}

std::complex<double> mechanical_response(double nu, const MechanicalMode& mode) {
  const std::complex<double> denom(nu * nu - mode.omega * mode.omega, -mode.gamma * nu);
  return 1.0 / (mode.mass * denom);
}

namespace {

// 1/|chi(nu)|^2 without forming chi, which overflows nothing but loses
// precision near resonance.
double inverse_response_sq(double nu, const MechanicalMode& mode) {
  const double a = nu * nu - mode.omega * mode.omega;
  const double b = mode.gamma * nu;
  return mode.mass * mode.mass * (a * a + b * b);
}

} // namespace

double quantum_force_psd(double nu, const MechanicalMode& mode,
                         const ReadoutConfig& readout) {
  const double inv0 = std::sqrt(inverse_response_sq(readout.balance_frequency, mode));
  return hbar / inv0 * (inverse_response_sq(nu, mode) + inv0 * inv0);
}

double technical_force_psd(const MechanicalMode& mode, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("technical gamma must be > 0");
  return 4.0 * mode.mass * boltzmann * mode.bath_temperature * gamma;
}

NoiseSpectrum NoiseSpectrum::quantum(const MechanicalMode& mode,
                                     const ReadoutConfig& readout) {
  mode.validate();
  readout.validate();
  NoiseSpectrum s;
  const double inv0 = std::sqrt(inverse_response_sq(readout.balance_frequency, mode));
  s.shot_ = [mode, inv0](double nu) { return hbar / inv0 * inverse_response_sq(nu, mode); };
  s.backaction_ = hbar * inv0;
  if (readout.technical) {
    MechanicalMode bath = mode;
    bath.bath_temperature = readout.technical->bath_temperature;
    s.technical_ = technical_force_psd(bath, readout.technical->gamma);
  }
  s.characteristic_ = readout.balance_frequency;
  s.features_.emplace_back(mode.omega, mode.gamma);
  return s;
}

NoiseSpectrum NoiseSpectrum::free_particle(double mass, double omega0) {
  if (!(mass > 0.0) || !(omega0 > 0.0))
    throw DomainError("free-particle noise needs mass > 0 and omega0 > 0");
  NoiseSpectrum s;
  const double level = hbar * mass * omega0 * omega0;
  s.shot_ = [level, omega0](double nu) {
    const double r = nu / omega0;
    const double r2 = r * r;
    return level * r2 * r2;
  };
  s.backaction_ = level;
  s.characteristic_ = omega0;
  return s;
}

NoiseSpectrum NoiseSpectrum::white(double level) {
  if (!(level > 0.0)) throw DomainError("white noise level must be > 0");
  NoiseSpectrum s;
  s.technical_ = level;
  return s;
}

NoiseSpectrum NoiseSpectrum::with_white_floor(double level) const {
  if (!(level >= 0.0)) throw DomainError("white floor must be >= 0");
  NoiseSpectrum s = *this;
  s.technical_ += level;
  return s;
}

NoiseSpectrum::Components NoiseSpectrum::components(double nu) const {
  Components c;
  if (shot_) c.shot = shot_(nu);
  c.backaction = backaction_;
  c.technical = technical_;
  return c;
}

double inverse_psd_integral(const NoiseSpectrum& noise, double rel_tol) {
  if (!noise.has_high_frequency_growth())
    throw NumericError("int dnu/S_FF diverges: spectrum has no high-frequency growth");
  const double w0 = noise.characteristic_frequency();

  // Breakpoints resolve narrow resonances wherever they sit.
  std::vector<double> nu_pts{0.0, w0};
  for (auto [centre, width] : noise.features()) {
    for (double k : {-30.0, -3.0, -0.5, 0.0, 0.5, 3.0, 30.0}) {
      const double p = centre + k * width;
      if (p > 0.0) nu_pts.push_back(p);
    }
  }
  std::sort(nu_pts.begin(), nu_pts.end());
  nu_pts.erase(std::unique(nu_pts.begin(), nu_pts.end()), nu_pts.end());

  auto inv = [&noise](double nu) { return 1.0 / noise(nu); };
  double total = 0.0;
  std::vector<double> u_pts{0.0};
  for (std::size_t i = 0; i + 1 < nu_pts.size(); ++i) {
    if (nu_pts[i + 1] <= w0) {
      total += quadrature::integrate(inv, nu_pts[i], nu_pts[i + 1], rel_tol).value;
    }
  }
  for (auto it = nu_pts.rbegin(); it != nu_pts.rend(); ++it)
    if (*it > w0) u_pts.push_back(w0 / *it);
  u_pts.push_back(1.0);

  // Tail: nu = w0/u, dnu = w0/u^2 du.
  auto tail = [&noise, w0](double u) {
    if (u <= 0.0) return 0.0;
    const double nu = w0 / u;
    return w0 / (u * u) / noise(nu);
  };
  for (std::size_t i = 0; i + 1 < u_pts.size(); ++i)
    total += quadrature::integrate(tail, u_pts[i], u_pts[i + 1], rel_tol).value;
  if (!std::isfinite(total) || !(total > 0.0))
    throw NumericError("int dnu/S_FF did not converge");
  return total;
}

double impulse_snr(double dp, const NoiseSpectrum& noise) {
  if (!(dp >= 0.0)) throw DomainError("impulse must be >= 0");
  return dp * std::sqrt(inverse_psd_integral(noise));
}

double min_detectable_impulse(const NoiseSpectrum& noise, double snr_target) {
  if (!(snr_target >= 0.0)) throw DomainError("snr target must be >= 0");
  if (snr_target == 0.0) return 0.0;
  return snr_target / std::sqrt(inverse_psd_integral(noise));
}

double sql_impulse(double mass, double tau) {
  if (!(mass > 0.0) || !(tau > 0.0)) throw DomainError("sql: mass and tau must be > 0");
  return std::sqrt(hbar * mass / tau);
}

double thermal_kick(double gas_mass, double gas_temperature) {
  if (!(gas_mass > 0.0) || !(gas_temperature >= 0.0))
    throw DomainError("thermal kick: invalid gas mass or temperature");
  return std::sqrt(gas_mass * boltzmann * gas_temperature);
}

double naive_rate_estimate(double pressure, double area, double gas_mass,
                           double gas_temperature) {
  if (!(pressure >= 0.0) || !(area >= 0.0))
    throw DomainError("rate estimate: pressure and area must be >= 0");
  if (!(gas_temperature > 0.0)) throw DomainError("rate estimate: temperature must be > 0");
  return pressure * area / thermal_kick(gas_mass, gas_temperature);
}

double q_requirement(double gas_mass, double gas_temperature,
                     const MechanicalMode& mode, double tau) {
  if (!(tau > 0.0)) throw DomainError("q_requirement: tau must be > 0");
  if (!(gas_temperature > 0.0))
    throw DomainError("q_requirement: gas temperature must be > 0");
  if (!(gas_mass > 0.0) || !(mode.mass > 0.0) || !(mode.omega > 0.0))
    throw DomainError("q_requirement: masses and resonance must be > 0");
  // dp_T^2 >= 4 m_s k_B T_B (omega_s / Q) tau.
  return 4.0 * mode.mass * mode.bath_temperature * mode.omega * tau /
         (gas_mass * gas_temperature);
}

} // namespace cgauge::noise
