#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <vector>

namespace cgauge {

/// Tabulated dGamma/d(dp) on an impulse grid.
///
/// Analytic spectra carry only `grid` and `values`. Histogram estimates also
/// carry bin `edges` (size grid.size()+1) and Poisson standard errors `sigma`.
struct MomentumSpectrum {
  std::vector<double> grid;   ///< kg m/s, strictly increasing
  std::vector<double> values; ///< s^-1 per (kg m/s), >= 0
  std::vector<double> sigma;
  std::vector<double> edges;
  nlohmann::json metadata = nlohmann::json::object();

  std::size_t size() const { return grid.size(); }
  bool binned() const { return !edges.empty(); }
  void validate() const;
};

/// Writes `<path>` as CSV (`dp_si,rate_density_si`) and `<path>.json` as the
/// metadata sidecar. Values use shortest round-trip formatting.
void write_spectrum(const MomentumSpectrum& spectrum,
                    const std::filesystem::path& csv_path);

MomentumSpectrum read_spectrum(const std::filesystem::path& csv_path);

std::filesystem::path sidecar_path(const std::filesystem::path& data_path);

} // namespace cgauge
