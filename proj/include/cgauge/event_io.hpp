#pragma once

#include "cgauge/detection.hpp"
#include "cgauge/montecarlo.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

// Event lists as CSV (t_si,dp_si,kind,species[,snr]) with a JSON sidecar that
// carries the stream duration and provenance.
namespace cgauge::events {

struct EventFile {
  double duration = 0.0;
  std::vector<montecarlo::CollisionEvent> events;
  std::vector<std::string> species_names;
  std::vector<double> snr; ///< empty unless the file holds detections
  nlohmann::json sidecar = nlohmann::json::object();
};

void write_stream(const montecarlo::EventStream& stream, const std::filesystem::path& csv_path,
                  nlohmann::json extra = nlohmann::json::object());

/// Detections have no known kind or species; both are written as "unknown".
void write_detections(std::span<const detection::DetectedEvent> events, double duration,
                      const std::filesystem::path& csv_path,
                      nlohmann::json extra = nlohmann::json::object());

EventFile read_events(const std::filesystem::path& csv_path);

} // namespace cgauge::events
