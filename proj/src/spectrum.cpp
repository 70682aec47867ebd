#include "cgauge/spectrum.hpp"

#include "cgauge/errors.hpp"
#include "cgauge/io_util.hpp"

#include <cmath>
#include <string>

namespace cgauge {

namespace {
constexpr std::string_view spectrum_header = "dp_si,rate_density_si";
}

void MomentumSpectrum::validate() const {
  if (grid.size() != values.size())
    throw ConfigError("spectrum grid and values differ in length");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw ConfigError("spectrum grid must be strictly increasing");
  for (double v : values)
    if (!(v >= 0.0)) throw ConfigError("spectrum values must be >= 0");
  if (!sigma.empty() && sigma.size() != grid.size())
    throw ConfigError("spectrum sigma has wrong length");
  if (!edges.empty() && edges.size() != grid.size() + 1)
    throw ConfigError("spectrum edges must have size grid + 1");
}

std::filesystem::path sidecar_path(const std::filesystem::path& data_path) {
  auto p = data_path;
  p.replace_extension(".json");
  return p;
}

void write_spectrum(const MomentumSpectrum& spectrum,
                    const std::filesystem::path& csv_path) {
  spectrum.validate();
  {
    auto out = io::open_output(csv_path);
    out << spectrum_header << '\n';
    for (std::size_t i = 0; i < spectrum.size(); ++i)
      out << io::format_double(spectrum.grid[i]) << ','
          << io::format_double(spectrum.values[i]) << '\n';
    if (!out) throw IoError("failed writing " + csv_path.string());
  }
  nlohmann::json side = spectrum.metadata;
  side["code_version"] = CGAUGE_VERSION;
  side["columns"] = {"dp_si", "rate_density_si"};
  if (!spectrum.sigma.empty()) side["sigma_si"] = spectrum.sigma;
  if (!spectrum.edges.empty()) side["bin_edges_si"] = spectrum.edges;
  io::write_json(sidecar_path(csv_path), side);
}

MomentumSpectrum read_spectrum(const std::filesystem::path& csv_path) {
  MomentumSpectrum s;
  auto in = io::open_input(csv_path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(csv_path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != spectrum_header)
    throw IoError(csv_path.string() + ": expected header '" +
                  std::string(spectrum_header) + "'");
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cols = io::split_csv(line);
    if (cols.size() != 2) throw IoError(csv_path.string() + ": expected 2 columns");
    s.grid.push_back(io::parse_double(cols[0]));
    s.values.push_back(io::parse_double(cols[1]));
  }
  const auto side = sidecar_path(csv_path);
  if (std::filesystem::exists(side)) {
    s.metadata = io::read_json(side);
    if (s.metadata.contains("sigma_si")) {
      s.sigma = s.metadata["sigma_si"].get<std::vector<double>>();
      s.metadata.erase("sigma_si");
    }
    if (s.metadata.contains("bin_edges_si")) {
      s.edges = s.metadata["bin_edges_si"].get<std::vector<double>>();
      s.metadata.erase("bin_edges_si");
    }
  }
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw IoError(csv_path.string() + ": " + e.what());
  }
  return s;
}

} // namespace cgauge
