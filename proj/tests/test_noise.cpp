#include "cgauge/errors.hpp"
#include "cgauge/noise.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace cgauge;
using namespace cgauge::noise;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

MechanicalMode bead(double q = 1000.0) {
  // 50 nm silica sphere, 1 kHz.
  const double m = 4.0 / 3.0 * M_PI * std::pow(5e-8, 3) * 2200.0;
  const double w = 2.0 * M_PI * 1e3;
  return {m, w, w / q, 0.0};
}

} // namespace

TEST_CASE("quantum PSD: shot equals backaction at the balance frequency") {
  const auto mode = bead();
  for (double ratio : {0.3, 1.0, 10.0}) {
    const ReadoutConfig r{ratio * mode.omega, {}};
    const auto s = NoiseSpectrum::quantum(mode, r);
    const auto c = s.components(r.balance_frequency);
    CHECK(rel(c.shot, c.backaction) < 1e-12);
    CHECK(c.technical == 0.0);
    CHECK(rel(quantum_force_psd(2.0 * mode.omega, mode, r), s(2.0 * mode.omega)) < 1e-14);
  }
}

TEST_CASE("quantum PSD is bounded below by 2 hbar / |chi|") {
  const auto mode = bead();
  const ReadoutConfig r{3.0 * mode.omega, {}};
  for (double f : {0.1, 0.9, 1.0, 1.1, 5.0, 30.0}) {
    const double nu = f * mode.omega;
    const double inv_chi = 1.0 / std::abs(mechanical_response(nu, mode));
    CHECK(quantum_force_psd(nu, mode, r) >= 2.0 * oracle::kHbar * inv_chi * (1.0 - 1e-12));
  }
}

TEST_CASE("technical force noise is white at 4 m kB T gamma") {
  auto mode = bead();
  mode.bath_temperature = 300.0;
  CHECK(rel(technical_force_psd(mode, mode.gamma),
            4.0 * mode.mass * oracle::kBoltzmann * 300.0 * mode.gamma) < 1e-15);
  const ReadoutConfig r{mode.omega, TechnicalNoise{mode.gamma, 300.0}};
  const auto s = NoiseSpectrum::quantum(mode, r);
  CHECK(s.components(mode.omega).technical > 0.0);
  CHECK(s.components(0.1).technical == s.components(1e6).technical);
}

TEST_CASE("free-particle SNR closed form") {
  const double m = 1e-18, w0 = 2.0 * M_PI * 1e4, dp = 3e-24;
  const auto s = NoiseSpectrum::free_particle(m, w0);
  const double expect = dp * std::sqrt(M_PI / (2.0 * std::sqrt(2.0) * oracle::kHbar * m * w0));
  CHECK(rel(impulse_snr(dp, s), expect) < 1e-8);
}

TEST_CASE("ringdown SNR approaches the narrow-resonance limit") {
  // int dnu / S -> pi sqrt(2) / (4 hbar m omega_s) as Q grows.
  const auto mode = bead(1e6);
  const auto s = NoiseSpectrum::quantum(mode, ReadoutConfig{mode.omega, {}});
  const double limit = M_PI * std::sqrt(2.0) / (4.0 * oracle::kHbar * mode.mass * mode.omega);
  CHECK(rel(inverse_psd_integral(s), limit) < 1e-3);
}

TEST_CASE("SNR is linear in the impulse; threshold inverts it") {
  const auto mode = bead();
  const auto s = NoiseSpectrum::quantum(mode, ReadoutConfig{10.0 * mode.omega, {}});
  const double dp = 7.0 * oracle::kKevc;
  CHECK(rel(impulse_snr(2.0 * dp, s), 2.0 * impulse_snr(dp, s)) < 1e-14);
  for (double k : {1.0, 5.0, 8.0})
    CHECK(rel(impulse_snr(min_detectable_impulse(s, k), s), k) < 1e-12);
  CHECK(min_detectable_impulse(s, 0.0) == 0.0);
}

TEST_CASE("white noise has no finite impulse SNR integral") {
  CHECK_THROWS_AS(inverse_psd_integral(NoiseSpectrum::white(1e-40)), NumericError);
  CHECK_THROWS_AS(NoiseSpectrum::white(0.0), DomainError);
}

TEST_CASE("technical floor lowers the SNR") {
  auto mode = bead();
  mode.bath_temperature = 4.0;
  const ReadoutConfig clean{mode.omega, {}};
  const ReadoutConfig noisy{mode.omega, TechnicalNoise{mode.gamma, 4.0}};
  const double dp = 7.0 * oracle::kKevc;
  CHECK(impulse_snr(dp, NoiseSpectrum::quantum(mode, noisy)) <
        impulse_snr(dp, NoiseSpectrum::quantum(mode, clean)));
}

TEST_CASE("impulse scales") {
  // sqrt(hbar m / tau).
  CHECK(rel(sql_impulse(1e-18, 1e-3), std::sqrt(oracle::kHbar * 1e-18 / 1e-3)) < 1e-15);
  const double m_h2 = 2.016 * oracle::kAmu;
  CHECK(rel(thermal_kick(m_h2, 300.0), std::sqrt(m_h2 * oracle::kBoltzmann * 300.0)) < 1e-15);
  // Gamma ~ P A / sqrt(m kB T).
  CHECK(rel(naive_rate_estimate(1e-10, 1e-13, m_h2, 300.0),
            1e-10 * 1e-13 / std::sqrt(m_h2 * oracle::kBoltzmann * 300.0)) < 1e-15);
  CHECK_THROWS_AS(sql_impulse(0.0, 1.0), DomainError);
}

TEST_CASE("Q requirement scales with bath temperature") {
  const double m_h2 = 2.016 * oracle::kAmu;
  MechanicalMode warm{1e-21, 2.0 * M_PI * 1e3, 1.0, 300.0};
  MechanicalMode cold = warm;
  cold.bath_temperature = 4.0;
  const double tau = 1.0 / warm.omega;
  CHECK(q_requirement(m_h2, 300.0, warm, tau) / q_requirement(m_h2, 300.0, cold, tau) ==
        doctest::Approx(75.0).epsilon(1e-14));
  // Gas kick variance must exceed thermal force noise over tau.
  const double q = q_requirement(m_h2, 300.0, warm, tau);
  const double dp_t2 = m_h2 * oracle::kBoltzmann * 300.0;
  CHECK(rel(4.0 * warm.mass * oracle::kBoltzmann * 300.0 * warm.omega / q * tau, dp_t2) < 1e-12);
}

TEST_CASE("mode validation") {
  CHECK_THROWS_AS((MechanicalMode{0.0, 1.0, 1.0, 0.0}.validate()), DomainError);
  CHECK_THROWS_AS((MechanicalMode{1.0, 1.0, 0.0, 0.0}.validate()), DomainError);
  CHECK_THROWS_AS((ReadoutConfig{0.0, {}}.validate()), DomainError);
  CHECK(bead(500.0).quality_factor() == doctest::Approx(500.0));
}
