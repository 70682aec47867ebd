#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <vector>

// Force-noise model of a continuously monitored mechanical mode.
//
// PSD convention: S_FF(nu) is one-sided over angular frequency nu (rad/s),
// in N^2 s, normalized so that the optimal (matched-filter) impulse SNR is
// exactly
//
//     SNR^2 = int_0^inf dnu  dp^2 / S_FF(nu).
//
// Equivalently S_FF(nu) = pi * S2(nu / 2pi) with S2 the two-sided PSD over
// ordinary frequency, so the force variance is (1/pi^2) int_0^inf S_FF dnu.
namespace cgauge::noise {

struct MechanicalMode {
  double mass = 0.0;             ///< m_s [kg]
  double omega = 0.0;            ///< resonance omega_s [rad/s]
  double gamma = 0.0;            ///< damping gamma_s [rad/s]
  double bath_temperature = 0.0; ///< T_B [K]

  double quality_factor() const { return omega / gamma; }
  void validate() const;
};

/// Effective Ohmic bath coupled at rate `gamma`.
struct TechnicalNoise {
  double gamma = 0.0;
  double bath_temperature = 0.0;
};

struct ReadoutConfig {
  double balance_frequency = 0.0; ///< omega_0, where shot = backaction [rad/s]
  std::optional<TechnicalNoise> technical;
  void validate() const;
};

/// chi_m(nu) = 1 / (m_s (nu^2 - omega_s^2 - i gamma_s nu)).
std::complex<double> mechanical_response(double nu, const MechanicalMode& mode);

/// Quantum readout noise: hbar|chi(w0)| [1/|chi(nu)|^2 + 1/|chi(w0)|^2].
double quantum_force_psd(double nu, const MechanicalMode& mode,
                         const ReadoutConfig& readout);

/// White Ohmic-bath PSD 4 m_s k_B T_B gamma, using the mode's bath temperature.
double technical_force_psd(const MechanicalMode& mode, double gamma);

/// Immutable force-noise PSD with a shot / backaction / technical breakdown.
class NoiseSpectrum {
public:
  struct Components {
    double shot = 0.0;
    double backaction = 0.0;
    double technical = 0.0;
    double total() const { return shot + backaction + technical; }
  };

  /// Quantum noise of `mode` under `readout`, plus the readout's technical
  /// bath if present.
  static NoiseSpectrum quantum(const MechanicalMode& mode, const ReadoutConfig& readout);

  /// Free-particle approximation hbar m w0^2 (1 + nu^4/w0^4).
  static NoiseSpectrum free_particle(double mass, double omega0);

  /// Frequency-independent PSD.
  static NoiseSpectrum white(double level);

  /// Same spectrum with an extra white technical floor.
  NoiseSpectrum with_white_floor(double level) const;

  double operator()(double nu) const { return components(nu).total(); }
  Components components(double nu) const;

  /// Frequency around which the inverse PSD is concentrated (omega_0); zero
  /// for white spectra.
  double characteristic_frequency() const { return characteristic_; }

  /// Narrow features (resonances) given as (centre, width) pairs in rad/s.
  const std::vector<std::pair<double, double>>& features() const { return features_; }

  /// True when S_FF grows at high frequency, so int dnu / S_FF converges.
  bool has_high_frequency_growth() const { return static_cast<bool>(shot_); }

private:
  std::function<double(double)> shot_;
  double backaction_ = 0.0;
  double technical_ = 0.0;
  double characteristic_ = 0.0;
  std::vector<std::pair<double, double>> features_;
};

/// int_0^inf dnu / S_FF(nu) by adaptive quadrature, split at omega_0 with the
/// tail mapped through nu = omega_0 / u. Throws NumericError when the
/// integral does not converge.
double inverse_psd_integral(const NoiseSpectrum& noise, double rel_tol = 1e-10);

/// Matched-filter SNR of an impulse dp.
double impulse_snr(double dp, const NoiseSpectrum& noise);

/// Impulse whose matched-filter SNR equals snr_target.
double min_detectable_impulse(const NoiseSpectrum& noise, double snr_target);

/// Impulse standard quantum limit sqrt(hbar m_s / tau).
double sql_impulse(double mass, double tau);

/// Thermal kick scale dp_T = sqrt(m_g k_B T).
double thermal_kick(double gas_mass, double gas_temperature);

/// Order-of-magnitude kick rate P A / dp_T.
double naive_rate_estimate(double pressure, double area, double gas_mass,
                           double gas_temperature);

/// Smallest Q = omega_s/gamma for which the thermal kick dp_T is at least the
/// Ohmic-bath impulse noise sqrt(4 m_s k_B T_B gamma tau).
double q_requirement(double gas_mass, double gas_temperature,
                     const MechanicalMode& mode, double tau);

} // namespace cgauge::noise
