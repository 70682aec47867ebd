#include "cgauge/inference.hpp"

#include "cgauge/constants.hpp"
#include "cgauge/errors.hpp"
#include "cgauge/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cgauge::inference {

using constants::boltzmann;

PressureEstimate pressure_from_rate(double rate, double dp_min,
                                    const GasSpecies& species_template,
                                    const SensorGeometry& sensor, double temperature,
                                    std::optional<std::size_t> n_events) {
  if (!(rate >= 0.0)) throw DomainError("measured rate must be >= 0");
  if (!(dp_min >= 0.0)) throw DomainError("dp_min must be >= 0");
  if (!(temperature > 0.0)) throw DomainError("temperature must be > 0");
  sensor.validate();
  GasSpecies gas = species_template;
  gas.temperature = temperature;
  gas.density = 0.0;
  gas.validate();

  const double vbar = kinetics::thermal_velocity(gas);
  const double cutoff = kinetics::combined_cutoff(dp_min, gas, sensor);
  if (!(cutoff > ill_conditioned_cutoff)) {
    std::ostringstream msg;
    msg << "threshold dp_min = " << dp_min << " kg m/s is far above the thermal scale "
        << gas.mass * vbar << " kg m/s (detectable fraction " << cutoff << ")";
    throw IllConditioned(msg.str(), cutoff);
  }

  PressureEstimate est;
  est.pressure = rate * constants::sqrt_2pi * boltzmann * temperature /
                 (sensor.area() * vbar * cutoff);
  est.inputs = {rate,
                dp_min,
                temperature,
                sensor.area(),
                kinetics::accommodation_for(gas, sensor),
                cutoff};
  est.primary = dp_min < 0.25 * gas.mass * vbar;
  if (cutoff < warn_cutoff) {
    std::ostringstream msg;
    msg << "ill-conditioned: only " << cutoff * 100.0
        << "% of collisions exceed the threshold; the estimate depends strongly on alpha";
    est.warnings.push_back(msg.str());
  }
  if (n_events) est.relative_uncertainty = rate_uncertainty(*n_events);
  return est;
}

double rate_uncertainty(std::size_t n_events) {
  if (n_events == 0) throw DomainError("rate uncertainty undefined for zero events");
  return 1.0 / std::sqrt(static_cast<double>(n_events));
}

double dead_time_corrected_rate(std::size_t n_events, double duration, double dead_time) {
  if (!(duration > 0.0)) throw DomainError("duration must be > 0");
  if (!(dead_time >= 0.0)) throw DomainError("dead time must be >= 0");
  const double measured = static_cast<double>(n_events) / duration;
  const double live = 1.0 - measured * dead_time;
  if (!(live > 0.0)) throw NumericError("dead time saturates the measured rate", live);
  return measured / live;
}

NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double tolerance,
                std::size_t max_iterations) {
  const auto n = a.cols();
  if (a.rows() != b.size()) throw DomainError("nnls: dimension mismatch");
  if (max_iterations == 0) max_iterations = static_cast<std::size_t>(30 * n + 30);

  NnlsResult r;
  r.x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double scale = std::max((a.transpose() * b).norm(), 1e-300);

  auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    z = Eigen::VectorXd::Zero(n);
    if (idx.empty()) return;
    Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
    const Eigen::VectorXd zs = sub.colPivHouseholderQr().solve(b);
    for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zs(static_cast<Eigen::Index>(k));
  };

  while (r.iterations < max_iterations) {
    const Eigen::VectorXd grad = a.transpose() * (b - a * r.x);
    // Largest gradient component among active (clamped) variables.
    Eigen::Index best = -1;
    double best_val = tolerance * scale;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && grad(j) > best_val) {
        best_val = grad(j);
        best = j;
      }
    }
    if (best < 0) {
      r.converged = true;
      break;
    }
    passive[static_cast<std::size_t>(best)] = true;
    ++r.iterations;

    // Inner loop: step back toward feasibility until the passive solution is
    // strictly positive.
    while (true) {
      Eigen::VectorXd z;
      solve_passive(z);
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) feasible = false;
      if (feasible) {
        r.x = z;
        break;
      }
      double step = 1.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
          const double denom = r.x(j) - z(j);
          if (denom > 0.0) step = std::min(step, r.x(j) / denom);
        }
      }
      r.x += step * (z - r.x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && r.x(j) <= 1e-15 * scale) {
          passive[static_cast<std::size_t>(j)] = false;
          r.x(j) = 0.0;
        }
      }
      ++r.iterations;
      if (r.iterations >= max_iterations) break;
    }
  }
  const Eigen::VectorXd grad = a.transpose() * (b - a * r.x);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double g = passive[static_cast<std::size_t>(j)] ? std::abs(grad(j)) : std::max(0.0, grad(j));
    r.max_projected_gradient = std::max(r.max_projected_gradient, g / scale);
  }
  return r;
}

double MixtureFit::total_pressure() const {
  double p = 0.0;
  for (const auto& s : species) p += s.partial_pressure;
  return p;
}

std::vector<double> unit_template(const MomentumSpectrum& layout, const GasSpecies& species,
                                  const SensorGeometry& sensor) {
  GasSpecies unit = species;
  unit.density = 1.0;
  std::vector<double> t(layout.size());
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (layout.binned()) {
      const double lo = layout.edges[i], hi = layout.edges[i + 1];
      const auto integral = quadrature::integrate(
          [&](double p) { return kinetics::spectrum_density(p, unit, sensor); }, lo, hi, 1e-9,
          1e-300);
      t[i] = integral.value / (hi - lo);
    } else {
      t[i] = kinetics::spectrum_density(layout.grid[i], unit, sensor);
    }
  }
  return t;
}

MixtureFit fit_mixture(const MomentumSpectrum& empirical, std::span<const GasSpecies> templates,
                       const SensorGeometry& sensor, const FitOptions& options) {
  if (templates.empty()) throw ConfigError("mixture fit needs at least one template", "species");
  empirical.validate();

  // Bins entirely above the threshold.
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < empirical.size(); ++i) {
    const double lower = empirical.binned() ? empirical.edges[i] : empirical.grid[i];
    if (lower >= options.dp_min) rows.push_back(i);
  }
  const auto nspec = static_cast<Eigen::Index>(templates.size());
  const auto nrows = static_cast<Eigen::Index>(rows.size());
  if (nrows < nspec) throw ConfigError("fewer usable bins than species in mixture fit");

  Eigen::MatrixXd t(nrows, nspec);
  for (Eigen::Index j = 0; j < nspec; ++j) {
    const auto tmpl = unit_template(empirical, templates[static_cast<std::size_t>(j)], sensor);
    for (Eigen::Index r = 0; r < nrows; ++r) t(r, j) = tmpl[rows[static_cast<std::size_t>(r)]];
  }
  Eigen::VectorXd y(nrows);
  for (Eigen::Index r = 0; r < nrows; ++r) y(r) = empirical.values[rows[static_cast<std::size_t>(r)]];

  // Poisson bins: value = c/(D w), variance = c/(D w)^2, so variance per unit
  // value is 1/(D w). Reweighting with the model prediction (IRLS) converges
  // to the Poisson maximum-likelihood densities.
  const bool poisson = empirical.binned() && empirical.metadata.contains("duration_s");
  Eigen::VectorXd var_scale = Eigen::VectorXd::Zero(nrows);
  Eigen::VectorXd var(nrows);
  for (Eigen::Index r = 0; r < nrows; ++r) {
    const auto i = rows[static_cast<std::size_t>(r)];
    if (poisson) {
      const double d = empirical.metadata["duration_s"].get<double>();
      var_scale(r) = 1.0 / (d * (empirical.edges[i + 1] - empirical.edges[i]));
      // Zero-count bins get one count's worth of variance on the first pass.
      var(r) = std::max(empirical.values[i], var_scale(r)) * var_scale(r);
    } else if (!empirical.sigma.empty() && empirical.sigma[i] > 0.0) {
      var(r) = empirical.sigma[i] * empirical.sigma[i];
    } else {
      var(r) = 1.0;
    }
  }

  MixtureFit fit;
  Eigen::VectorXd x;
  Eigen::MatrixXd aw;
  const std::size_t passes = poisson ? options.reweight_passes : 0;
  for (std::size_t pass = 0; pass <= passes; ++pass) {
    const Eigen::VectorXd w = var.cwiseInverse().cwiseSqrt();
    aw = w.asDiagonal() * t;
    const Eigen::VectorXd bw = w.asDiagonal() * y;
    // Unit-norm columns keep the active-set tolerance scale free.
    Eigen::VectorXd col_norm = aw.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < nspec; ++j)
      if (!(col_norm(j) > 0.0)) col_norm(j) = 1.0;
    const Eigen::MatrixXd as = aw * col_norm.cwiseInverse().asDiagonal();
    const auto sol = nnls(as, bw);
    x = sol.x.cwiseQuotient(col_norm);
    fit.converged = sol.converged;
    fit.iterations += sol.iterations;
    if (pass == passes) break;
    const Eigen::VectorXd model = t * x;
    for (Eigen::Index r = 0; r < nrows; ++r)
      var(r) = std::max(model(r), 1e-6 * var_scale(r)) * var_scale(r);
  }

  const Eigen::VectorXd w = var.cwiseInverse().cwiseSqrt();
  const Eigen::VectorXd resid = w.asDiagonal() * (y - t * x);
  fit.chi2 = resid.squaredNorm();
  fit.bins_used = rows.size();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(aw * aw.colwise().norm().cwiseInverse().asDiagonal());
  const auto& sv = svd.singularValues();
  fit.condition_number = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                                 : std::numeric_limits<double>::infinity();
  if (fit.condition_number > options.condition_limit) {
    std::ostringstream msg;
    msg << "ill-conditioned templates: condition number " << fit.condition_number;
    fit.warnings.push_back(msg.str());
  }

  // Covariance over the free (positive) parameters.
  std::vector<Eigen::Index> free;
  for (Eigen::Index j = 0; j < nspec; ++j)
    if (x(j) > 0.0) free.push_back(j);
  Eigen::VectorXd sigma = Eigen::VectorXd::Zero(nspec);
  if (!free.empty()) {
    Eigen::MatrixXd af(nrows, static_cast<Eigen::Index>(free.size()));
    for (std::size_t k = 0; k < free.size(); ++k) af.col(static_cast<Eigen::Index>(k)) = aw.col(free[k]);
    const Eigen::MatrixXd info = af.transpose() * af;
    const Eigen::MatrixXd cov = info.ldlt().solve(
        Eigen::MatrixXd::Identity(info.rows(), info.cols()));
    for (std::size_t k = 0; k < free.size(); ++k)
      sigma(free[k]) = std::sqrt(std::max(0.0, cov(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k))));
  }
  fit.dof = rows.size() > free.size() ? rows.size() - free.size() : 0;

  for (Eigen::Index j = 0; j < nspec; ++j) {
    const auto& s = templates[static_cast<std::size_t>(j)];
    const double kt = boltzmann * s.temperature;
    fit.species.push_back({s.name, x(j), sigma(j), x(j) * kt, sigma(j) * kt});
  }
  return fit;
}

nlohmann::json to_json(const PressureEstimate& e) {
  return {{"pressure_pa", e.pressure},
          {"relative_uncertainty", e.relative_uncertainty},
          {"primary", e.primary},
          {"warnings", e.warnings},
          {"inputs",
           {{"rate_s", e.inputs.rate},
            {"dp_min_si", e.inputs.dp_min},
            {"temperature_k", e.inputs.temperature},
            {"area_m2", e.inputs.area},
            {"accommodation", e.inputs.accommodation},
            {"cutoff", e.inputs.cutoff}}}};
}

nlohmann::json to_json(const MixtureFit& f) {
  nlohmann::json sp = nlohmann::json::array();
  for (const auto& s : f.species)
    sp.push_back({{"name", s.name},
                  {"partial_pressure_pa", s.partial_pressure},
                  {"sigma", s.sigma},
                  {"density_m3", s.density},
                  {"density_sigma_m3", s.density_sigma}});
  return {{"species", sp},
          {"residual", f.chi2},
          {"dof", f.dof},
          {"bins_used", f.bins_used},
          {"condition_number", f.condition_number},
          {"converged", f.converged},
          {"iterations", f.iterations},
          {"total_pressure_pa", f.total_pressure()},
          {"warnings", f.warnings}};
}

} // namespace cgauge::inference
