#include "cgauge/event_io.hpp"

#include "cgauge/errors.hpp"
#include "cgauge/io_util.hpp"
#include "cgauge/spectrum.hpp"

#include <algorithm>
#include <string>

namespace cgauge::events {

using nlohmann::json;

namespace {

constexpr const char* kHeader = "t_si,dp_si,kind,species";

json sidecar_base(double duration, json extra) {
  json j = extra.is_object() ? std::move(extra) : json::object();
  j["duration_s"] = duration;
  j["code_version"] = CGAUGE_VERSION;
  return j;
}

} // namespace

void write_stream(const montecarlo::EventStream& stream, const std::filesystem::path& csv_path,
                  json extra) {
  auto out = io::open_output(csv_path);
  out << kHeader << '\n';
  for (const auto& e : stream.events) {
    const std::string& name = e.species < stream.species_names.size()
                                  ? stream.species_names[e.species]
                                  : std::string("unknown");
    out << io::format_double(e.time) << ',' << io::format_double(e.impulse) << ','
        << kinetics::to_string(e.kind) << ',' << name << '\n';
  }
  if (!out) throw IoError("failed writing " + csv_path.string());

  json side = sidecar_base(stream.duration, std::move(extra));
  side["seed"] = stream.seed;
  side["species_names"] = stream.species_names;
  side["parameters"] = stream.parameters;
  side["columns"] = {"t_si", "dp_si", "kind", "species"};
  side["event_count"] = stream.events.size();
  io::write_json(sidecar_path(csv_path), side);
}

void write_detections(std::span<const detection::DetectedEvent> events, double duration,
                      const std::filesystem::path& csv_path, json extra) {
  auto out = io::open_output(csv_path);
  out << kHeader << ",snr\n";
  for (const auto& e : events)
    out << io::format_double(e.time) << ',' << io::format_double(e.impulse)
        << ",unknown,unknown," << io::format_double(e.snr) << '\n';
  if (!out) throw IoError("failed writing " + csv_path.string());

  json side = sidecar_base(duration, std::move(extra));
  side["columns"] = {"t_si", "dp_si", "kind", "species", "snr"};
  side["event_count"] = events.size();
  io::write_json(sidecar_path(csv_path), side);
}

EventFile read_events(const std::filesystem::path& csv_path) {
  EventFile f;
  const auto side = sidecar_path(csv_path);
  if (!std::filesystem::exists(side)) throw IoError("missing sidecar " + side.string());
  f.sidecar = io::read_json(side);
  if (!f.sidecar.contains("duration_s") || !f.sidecar["duration_s"].is_number())
    throw IoError(side.string() + ": missing duration_s");
  f.duration = f.sidecar["duration_s"].get<double>();
  if (f.sidecar.contains("species_names"))
    f.species_names = f.sidecar["species_names"].get<std::vector<std::string>>();

  auto in = io::open_input(csv_path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(csv_path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool with_snr = false;
  if (line == std::string(kHeader) + ",snr")
    with_snr = true;
  else if (line != kHeader)
    throw IoError(csv_path.string() + ": unexpected header '" + line + "'");

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = io::split_csv(line);
    if (cols.size() != (with_snr ? 5u : 4u))
      throw IoError(csv_path.string() + ":" + std::to_string(lineno) + ": wrong column count");
    montecarlo::CollisionEvent e;
    try {
      e.time = io::parse_double(cols[0]);
      e.impulse = io::parse_double(cols[1]);
      if (with_snr) f.snr.push_back(io::parse_double(cols[4]));
    } catch (const IoError& err) {
      throw IoError(csv_path.string() + ":" + std::to_string(lineno) + ": " + err.what());
    }
    e.kind = cols[2] == "diffuse" ? kinetics::Scatter::diffuse : kinetics::Scatter::specular;
    const std::string name(cols[3]);
    auto it = std::find(f.species_names.begin(), f.species_names.end(), name);
    if (it == f.species_names.end()) {
      f.species_names.push_back(name);
      it = f.species_names.end() - 1;
    }
    e.species = static_cast<std::uint32_t>(it - f.species_names.begin());
    f.events.push_back(e);
  }
  return f;
}

} // namespace cgauge::events
