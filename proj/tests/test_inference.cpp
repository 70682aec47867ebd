#include "cgauge/errors.hpp"
#include "cgauge/inference.hpp"
#include "cgauge/kinetics.hpp"
#include "cgauge/montecarlo.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace cgauge;
using namespace cgauge::inference;
using kinetics::GasSpecies;
using kinetics::SensorGeometry;

namespace {

GasSpecies h2(double p = 1e-10) {
  return GasSpecies::from_pressure("H2", 2.016 * oracle::kAmu, 300.0, p);
}
GasSpecies xe(double p = 1e-10) {
  return GasSpecies::from_pressure("Xe", 131.29 * oracle::kAmu, 300.0, p);
}
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace

TEST_CASE("pressure inversion undoes the rate formula") {
  for (const auto& g : {h2(3e-9), xe(2e-10)}) {
    const double p0 = kinetics::thermal_momentum(g);
    for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      for (double x : {0.0, 0.1, 0.5, 1.0, 2.0, 4.0}) {
        const auto sensor = SensorGeometry::sphere(5e-8, alpha);
        const double rate = kinetics::total_rate(x * p0, g, sensor);
        const auto est = pressure_from_rate(rate, x * p0, g, sensor, g.temperature);
        CAPTURE(alpha);
        CAPTURE(x);
        CHECK(rel(est.pressure, g.pressure()) < 1e-10);
      }
    }
  }
}

TEST_CASE("projected readout inversion") {
  const auto g = h2(1e-9);
  const double p0 = kinetics::thermal_momentum(g);
  for (double alpha : {0.0, 0.5, 1.0}) {
    const auto sensor = SensorGeometry::sphere(5e-8, alpha, kinetics::Readout::projected_axis);
    const double rate = kinetics::detectable_rate(0.7 * p0, g, sensor);
    CHECK(rel(pressure_from_rate(rate, 0.7 * p0, g, sensor, 300.0).pressure, 1e-9) < 1e-9);
  }
}

TEST_CASE("zero threshold is independent of accommodation") {
  const auto g = h2();
  const double rate = 12.5;
  const double expect = rate * std::sqrt(2.0 * M_PI) * oracle::kBoltzmann * 300.0 /
                        (SensorGeometry::sphere(5e-8, 0.0).area() *
                         std::sqrt(oracle::kBoltzmann * 300.0 / g.mass));
  for (double alpha : {0.0, 0.5, 1.0})
    CHECK(rel(pressure_from_rate(rate, 0.0, g, SensorGeometry::sphere(5e-8, alpha), 300.0).pressure,
              expect) < 1e-14);
}

TEST_CASE("primary flag and the specular cutoff") {
  const auto g = h2();
  const double quarter = 0.25 * kinetics::thermal_momentum(g);
  const auto sensor = SensorGeometry::sphere(5e-8, 1.0);
  CHECK(pressure_from_rate(1.0, 0.999 * quarter, g, sensor, 300.0).primary);
  CHECK_FALSE(pressure_from_rate(1.0, 1.001 * quarter, g, sensor, 300.0).primary);
  CHECK(kinetics::cutoff_factors(0.25).specular > 0.99);
}

TEST_CASE("ill-conditioned thresholds") {
  const auto g = h2();
  const double p0 = kinetics::thermal_momentum(g);
  const auto sensor = SensorGeometry::sphere(5e-8, 0.0);
  CHECK_THROWS_AS(pressure_from_rate(1.0, 20.0 * p0, g, sensor, 300.0), IllConditioned);
  const auto est = pressure_from_rate(1.0, 6.5 * p0, g, sensor, 300.0);
  CHECK_FALSE(est.warnings.empty());
  CHECK_THROWS_AS(pressure_from_rate(-1.0, 0.0, g, sensor, 300.0), DomainError);
}

TEST_CASE("Poisson rate uncertainty") {
  CHECK(rate_uncertainty(10000) == doctest::Approx(0.01));
  CHECK(rate_uncertainty(1) == 1.0);
  CHECK(rate_uncertainty(40000) == doctest::Approx(0.005));
  CHECK_THROWS(rate_uncertainty(0));
  const auto est = pressure_from_rate(2.0, 0.0, h2(), SensorGeometry::sphere(5e-8, 1.0), 300.0, 400);
  CHECK(est.relative_uncertainty == doctest::Approx(0.05));
}

TEST_CASE("dead-time correction") {
  CHECK(dead_time_corrected_rate(100, 10.0, 0.0) == 10.0);
  CHECK(dead_time_corrected_rate(100, 10.0, 0.01) == doctest::Approx(10.0 / 0.9));
  CHECK_THROWS_AS(dead_time_corrected_rate(1000, 10.0, 0.01), NumericError);
}

TEST_CASE("NNLS satisfies the optimality conditions") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 12, n = 5;
    Eigen::MatrixXd a(m, n);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
      b(i) = gauss(rng);
      for (int j = 0; j < n; ++j) a(i, j) = gauss(rng);
    }
    const auto r = nnls(a, b);
    REQUIRE(r.converged);
    const Eigen::VectorXd grad = a.transpose() * (b - a * r.x);
    const double scale = (a.transpose() * b).norm();
    for (int j = 0; j < n; ++j) {
      CHECK(r.x(j) >= 0.0);
      if (r.x(j) > 0.0)
        CHECK(std::abs(grad(j)) <= 1e-9 * scale);
      else
        CHECK(grad(j) <= 1e-9 * scale);
    }
  }
}

TEST_CASE("NNLS returns the least-squares solution when it is feasible") {
  Eigen::MatrixXd a(4, 2);
  a << 1, 0, 0, 1, 1, 1, 2, 1;
  const Eigen::VectorXd x_true = (Eigen::VectorXd(2) << 0.5, 2.0).finished();
  const Eigen::VectorXd b = a * x_true;
  const auto r = nnls(a, b);
  CHECK((r.x - x_true).norm() < 1e-12);
}

TEST_CASE("noiseless single species density is recovered exactly") {
  const auto g = h2(2e-10);
  const auto sensor = SensorGeometry::sphere(5e-8, 1.0);
  const double p0 = kinetics::thermal_momentum(g);
  MomentumSpectrum spec;
  spec.edges = montecarlo::make_edges(0.05 * p0, 6.0 * p0, 40);
  for (std::size_t i = 0; i < 40; ++i) {
    spec.grid.push_back(0.5 * (spec.edges[i] + spec.edges[i + 1]));
    spec.sigma.push_back(1.0);
  }
  spec.values = unit_template(spec, g, sensor);
  for (auto& v : spec.values) v *= g.density;
  spec.sigma = spec.values;
  const std::vector<GasSpecies> templates{h2()};
  const auto fit = fit_mixture(spec, templates, sensor);
  REQUIRE(fit.species.size() == 1);
  CHECK(rel(fit.species[0].density, g.density) < 1e-8);
  CHECK(rel(fit.species[0].partial_pressure, g.pressure()) < 1e-8);

  // Scale equivariance.
  auto scaled = spec;
  for (auto& v : scaled.values) v *= 3.0;
  for (auto& v : scaled.sigma) v *= 3.0;
  CHECK(rel(fit_mixture(scaled, templates, sensor).species[0].density, 3.0 * g.density) < 1e-8);

  // An absent species is pinned at zero by the constraint.
  const std::vector<GasSpecies> two{h2(), xe()};
  const auto fit2 = fit_mixture(spec, two, sensor);
  CHECK(fit2.species[1].density == 0.0);
  CHECK(rel(fit2.species[0].density, g.density) < 1e-6);
}

TEST_CASE("H2 + Xe mixture from simulated events") {
  // Equal event counts: arrival rate scales as n / sqrt(m).
  const double p_h2 = 1e-10;
  const double p_xe = p_h2 * std::sqrt(131.29 / 2.016);
  const std::vector<GasSpecies> truth{h2(p_h2), xe(p_xe)};
  const auto sensor = SensorGeometry::sphere(5e-8, 1.0);
  double rate = 0.0;
  for (const auto& g : truth) rate += montecarlo::arrival_rate(g, sensor);
  const double duration = 1e5 / rate;
  const auto stream = montecarlo::sample_event_stream(duration, truth, sensor, 1234);
  const double p_lo = kinetics::thermal_momentum(truth[0]) * 0.02;
  const double p_hi = kinetics::thermal_momentum(truth[1]) * 8.0;
  const auto edges = montecarlo::make_edges(p_lo, p_hi, 80, kinetics::Spacing::logarithmic);
  const auto emp = montecarlo::empirical_spectrum(stream, edges);
  const std::vector<GasSpecies> templates{h2(), xe()};
  const auto fit = fit_mixture(emp, templates, sensor);
  CHECK(fit.converged);
  CHECK(rel(fit.species[0].partial_pressure, p_h2) < 0.05);
  CHECK(rel(fit.species[1].partial_pressure, p_xe) < 0.05);
  CHECK(fit.species[0].sigma > 0.0);
  // Fitted total against the rate inversion for a single species.
  const auto est = pressure_from_rate(montecarlo::arrival_rate(truth[0], sensor), 0.0, truth[0],
                                      sensor, 300.0);
  CHECK(rel(est.pressure, p_h2) < 1e-12);
}

TEST_CASE("collinear templates trigger the conditioning warning") {
  const auto sensor = SensorGeometry::sphere(5e-8, 1.0);
  const auto g = h2(2e-10);
  const double p0 = kinetics::thermal_momentum(g);
  MomentumSpectrum spec;
  spec.edges = montecarlo::make_edges(0.1 * p0, 5.0 * p0, 30);
  for (std::size_t i = 0; i < 30; ++i) spec.grid.push_back(0.5 * (spec.edges[i] + spec.edges[i + 1]));
  spec.values = unit_template(spec, g, sensor);
  for (auto& v : spec.values) v *= g.density;
  spec.sigma = spec.values;
  const std::vector<GasSpecies> twins{h2(), h2()};
  const auto fit = fit_mixture(spec, twins, sensor);
  CHECK(fit.condition_number > 1e8);
  CHECK_FALSE(fit.warnings.empty());
  for (const auto& s : fit.species) CHECK(s.partial_pressure >= 0.0);
}
