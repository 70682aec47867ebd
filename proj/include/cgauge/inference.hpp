#pragma once

#include "cgauge/kinetics.hpp"
#include "cgauge/spectrum.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

// Rate-to-pressure inversion and multi-species spectral unmixing.
namespace cgauge::inference {

using kinetics::GasSpecies;
using kinetics::SensorGeometry;

struct PressureEstimate {
  double pressure = 0.0;             ///< Pa
  double relative_uncertainty = 0.0; ///< statistical, from event counting
  struct Inputs {
    double rate = 0.0;
    double dp_min = 0.0;
    double temperature = 0.0;
    double area = 0.0;
    double accommodation = 0.0;
    double cutoff = 1.0; ///< (1-alpha) eta_s + alpha eta_d
  } inputs;
  bool primary = false; ///< dp_min < m_g vbar / 4
  std::vector<std::string> warnings;
};

/// Combined cutoff below which the inversion is refused.
inline constexpr double ill_conditioned_cutoff = 1e-10;
/// Combined cutoff below which a warning is attached (99% of events lost).
inline constexpr double warn_cutoff = 0.01;

/// P = Gamma sqrt(2 pi) k_B T / (A vbar [(1-alpha) eta_s + alpha eta_d]).
/// `species_template` supplies the molecular mass (and optional alpha); T is
/// the measured gas temperature. With `n_events` the Poisson uncertainty is
/// filled in.
PressureEstimate pressure_from_rate(double rate, double dp_min,
                                    const GasSpecies& species_template,
                                    const SensorGeometry& sensor, double temperature,
                                    std::optional<std::size_t> n_events = {});

/// 1/sqrt(N).
double rate_uncertainty(std::size_t n_events);

/// Measured rate corrected for events lost within `dead_time` of a larger
/// neighbour: Gamma = (N/T) / (1 - (N/T) dead_time).
double dead_time_corrected_rate(std::size_t n_events, double duration, double dead_time);

struct NnlsResult {
  Eigen::VectorXd x;
  std::size_t iterations = 0;
  bool converged = false;
  double max_projected_gradient = 0.0;
};

/// Lawson-Hanson active-set solution of min ||A x - b|| subject to x >= 0.
/// Converged when the projected gradient is below `tolerance` (relative to
/// ||A^T b||).
NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double tolerance = 1e-10,
                std::size_t max_iterations = 0);

struct SpeciesFit {
  std::string name;
  double density = 0.0;
  double density_sigma = 0.0;
  double partial_pressure = 0.0;
  double sigma = 0.0; ///< partial-pressure standard error
};

struct MixtureFit {
  std::vector<SpeciesFit> species;
  double chi2 = 0.0;
  std::size_t dof = 0;
  std::size_t bins_used = 0;
  double condition_number = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<std::string> warnings;

  double total_pressure() const;
};

struct FitOptions {
  /// Bins with lower edge below this are excluded.
  double dp_min = 0.0;
  /// Iteratively reweighted passes using model-predicted variances.
  std::size_t reweight_passes = 4;
  /// Condition number above which the templates count as degenerate.
  double condition_limit = 1e8;
};

/// Unit-density template of `species` on the bins (or grid) of `layout`.
std::vector<double> unit_template(const MomentumSpectrum& layout, const GasSpecies& species,
                                  const SensorGeometry& sensor);

/// Nonnegative weighted least squares for the species densities.
MixtureFit fit_mixture(const MomentumSpectrum& empirical, std::span<const GasSpecies> templates,
                       const SensorGeometry& sensor, const FitOptions& options = {});

nlohmann::json to_json(const PressureEstimate& estimate);
nlohmann::json to_json(const MixtureFit& fit);

} // namespace cgauge::inference
