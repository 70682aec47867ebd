#pragma once

#include "cgauge/kinetics.hpp"
#include "cgauge/noise.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

// JSON run configuration. Sections: species[], sensor, mode, readout, grid,
// run, infer. Values are SI; keys ending in _kevc (impulse), _hz (angular
// frequencies given in Hz) and mass_u (atomic mass units) are converted here.
// Every error names the offending key, e.g. "species[0].mass_kg".
namespace cgauge::config {

nlohmann::json load(const std::filesystem::path& path);

/// Stable hash of the canonical (sorted, compact) config text.
std::string config_hash(const nlohmann::json& cfg);

std::vector<kinetics::GasSpecies> parse_species(const nlohmann::json& cfg);
kinetics::SensorGeometry parse_sensor(const nlohmann::json& cfg);
noise::MechanicalMode parse_mode(const nlohmann::json& cfg);

/// Readout tunings: one entry per balance frequency (a sweep when the config
/// lists several).
std::vector<noise::ReadoutConfig> parse_readouts(const nlohmann::json& cfg,
                                                 const noise::MechanicalMode& mode);
kinetics::GridSpec parse_grid(const nlohmann::json& cfg, const std::string& section = "grid");

/// Scatter-model overrides requested for spectrum output (empty: as configured).
std::vector<kinetics::Scatter> parse_scatter_list(const nlohmann::json& cfg);

/// Accessors for optional scalar entries of a section ("run", "infer", ...).
std::optional<double> find_number(const nlohmann::json& cfg, const std::string& section,
                                  const std::string& key);
double require_number(const nlohmann::json& cfg, const std::string& section,
                      const std::string& key);
/// Impulse given as <key>_si or <key>_kevc.
std::optional<double> find_impulse(const nlohmann::json& cfg, const std::string& section,
                                   const std::string& key);
std::optional<std::string> find_string(const nlohmann::json& cfg, const std::string& section,
                                       const std::string& key);

} // namespace cgauge::config
