#include "cgauge/config.hpp"

#include "cgauge/constants.hpp"
#include "cgauge/errors.hpp"
#include "cgauge/io_util.hpp"

#include <cmath>
#include <cstdio>

namespace cgauge::config {

using nlohmann::json;

namespace {

const json& section(const json& cfg, const std::string& name) {
  if (!cfg.contains(name)) throw ConfigError("missing required section '" + name + "'", name);
  const json& s = cfg.at(name);
  if (!s.is_object()) throw ConfigError("section '" + name + "' must be an object", name);
  return s;
}

double number_at(const json& obj, const std::string& key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError("'" + path + "' must be a number", path);
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError("'" + path + "' must be finite", path);
  return d;
}

// First present key among `alternatives`, each with a unit scale.
std::optional<double> pick(const json& obj, const std::string& prefix,
                           std::initializer_list<std::pair<const char*, double>> alternatives) {
  for (auto [key, scale] : alternatives)
    if (obj.contains(key)) return number_at(obj, key, prefix + "." + key) * scale;
  return std::nullopt;
}

std::string alternatives_text(std::initializer_list<const char*> keys, const std::string& prefix) {
  std::string s;
  for (const char* k : keys) {
    if (!s.empty()) s += " or ";
    s += "'" + prefix + "." + k + "'";
  }
  return s;
}

template <class F>
auto validated(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw ConfigError(std::string(e.what()), path);
  }
}

} // namespace

json load(const std::filesystem::path& path) {
  auto j = io::read_json(path);
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  return j;
}

std::string config_hash(const json& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(io::fnv1a(cfg.dump())));
  return buf;
}

std::vector<kinetics::GasSpecies> parse_species(const json& cfg) {
  if (!cfg.contains("species")) throw ConfigError("missing required key 'species'", "species");
  const json& arr = cfg.at("species");
  if (!arr.is_array()) throw ConfigError("'species' must be an array", "species");
  std::vector<kinetics::GasSpecies> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = "species[" + std::to_string(i) + "]";
    const json& s = arr[i];
    if (!s.is_object()) throw ConfigError("'" + p + "' must be an object", p);
    kinetics::GasSpecies g;
    g.name = s.value("name", "species" + std::to_string(i));
    const auto mass = pick(s, p, {{"mass_kg", 1.0}, {"mass_u", constants::atomic_mass}});
    if (!mass)
      throw ConfigError("missing " + alternatives_text({"mass_kg", "mass_u"}, p), p + ".mass_kg");
    g.mass = *mass;
    if (!s.contains("temperature_k"))
      throw ConfigError("missing '" + p + ".temperature_k'", p + ".temperature_k");
    g.temperature = number_at(s, "temperature_k", p + ".temperature_k");
    if (!(g.temperature > 0.0))
      throw ConfigError("'" + p + ".temperature_k' must be > 0", p + ".temperature_k");
    if (s.contains("density_m3")) {
      g.density = number_at(s, "density_m3", p + ".density_m3");
    } else if (s.contains("pressure_pa")) {
      g.density = number_at(s, "pressure_pa", p + ".pressure_pa") /
                  (constants::boltzmann * g.temperature);
    } else {
      g.density = 0.0; // templates for inference need no density
    }
    if (s.contains("accommodation"))
      g.accommodation = number_at(s, "accommodation", p + ".accommodation");
    validated(p, [&] {
      g.validate();
      return 0;
    });
    out.push_back(std::move(g));
  }
  return out;
}

kinetics::SensorGeometry parse_sensor(const json& cfg) {
  const json& s = section(cfg, "sensor");
  kinetics::SensorGeometry g;
  const std::string shape = s.value("shape", "sphere");
  if (shape == "sphere") {
    const auto r = pick(s, "sensor", {{"radius_m", 1.0}});
    if (!r) throw ConfigError("missing 'sensor.radius_m'", "sensor.radius_m");
    g.shape = kinetics::Sphere{*r};
  } else if (shape == "plate") {
    const auto a = pick(s, "sensor", {{"area_m2", 1.0}});
    if (!a) throw ConfigError("missing 'sensor.area_m2'", "sensor.area_m2");
    g.shape = kinetics::Plate{*a};
  } else {
    throw ConfigError("'sensor.shape' must be 'sphere' or 'plate'", "sensor.shape");
  }
  if (s.contains("accommodation")) g.accommodation = number_at(s, "accommodation", "sensor.accommodation");
  const std::string readout = s.value("readout", "full_3d");
  if (readout == "full_3d")
    g.readout = kinetics::Readout::full_3d;
  else if (readout == "projected_axis")
    g.readout = kinetics::Readout::projected_axis;
  else
    throw ConfigError("'sensor.readout' must be 'full_3d' or 'projected_axis'", "sensor.readout");
  if (s.contains("surface_temperature_k"))
    g.surface_temperature = number_at(s, "surface_temperature_k", "sensor.surface_temperature_k");
  if (s.contains("thermal_accommodation"))
    g.thermal_accommodation = number_at(s, "thermal_accommodation", "sensor.thermal_accommodation");
  const std::string proj = s.value("projection", "normal_only");
  if (proj == "normal_only")
    g.projection = kinetics::Projection::normal_only;
  else if (proj == "full_vector")
    g.projection = kinetics::Projection::full_vector;
  else
    throw ConfigError("'sensor.projection' must be 'normal_only' or 'full_vector'",
                      "sensor.projection");
  try {
    g.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what(), "sensor");
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), "sensor");
  }
  return g;
}

noise::MechanicalMode parse_mode(const json& cfg) {
  const json& m = section(cfg, "mode");
  noise::MechanicalMode mode;
  if (const auto mass = pick(m, "mode", {{"mass_kg", 1.0}})) {
    mode.mass = *mass;
  } else if (m.contains("density_kg_m3")) {
    const double rho = number_at(m, "density_kg_m3", "mode.density_kg_m3");
    const auto sensor = parse_sensor(cfg);
    if (!sensor.is_sphere())
      throw ConfigError("'mode.density_kg_m3' needs a sphere sensor", "mode.density_kg_m3");
    const double r = sensor.radius();
    mode.mass = 4.0 / 3.0 * constants::pi * r * r * r * rho;
  } else {
    throw ConfigError("missing " + alternatives_text({"mass_kg", "density_kg_m3"}, "mode"),
                      "mode.mass_kg");
  }
  const auto omega = pick(m, "mode", {{"omega_rad_s", 1.0}, {"omega_hz", 2.0 * constants::pi}});
  if (!omega)
    throw ConfigError("missing " + alternatives_text({"omega_rad_s", "omega_hz"}, "mode"),
                      "mode.omega_rad_s");
  mode.omega = *omega;
  const auto gamma = pick(m, "mode", {{"gamma_rad_s", 1.0}, {"gamma_hz", 2.0 * constants::pi}});
  if (!gamma)
    throw ConfigError("missing " + alternatives_text({"gamma_rad_s", "gamma_hz"}, "mode"),
                      "mode.gamma_rad_s");
  mode.gamma = *gamma;
  mode.bath_temperature = m.contains("bath_temperature_k")
                              ? number_at(m, "bath_temperature_k", "mode.bath_temperature_k")
                              : 0.0;
  validated("mode", [&] {
    mode.validate();
    return 0;
  });
  return mode;
}

std::vector<noise::ReadoutConfig> parse_readouts(const json& cfg,
                                                 const noise::MechanicalMode& mode) {
  const json& r = section(cfg, "readout");
  std::vector<double> freqs;
  const double two_pi = 2.0 * constants::pi;
  if (const auto f = pick(r, "readout", {{"balance_frequency_rad_s", 1.0},
                                          {"balance_frequency_hz", two_pi},
                                          {"balance_ratio", mode.omega}}))
    freqs.push_back(*f);
  auto list = [&](const char* key, double scale) {
    if (!r.contains(key)) return;
    const json& a = r.at(key);
    const std::string p = std::string("readout.") + key;
    if (!a.is_array() || a.empty()) throw ConfigError("'" + p + "' must be a nonempty array", p);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a[i].is_number()) throw ConfigError("'" + p + "' entries must be numbers", p);
      freqs.push_back(a[i].get<double>() * scale);
    }
  };
  list("balance_frequencies_rad_s", 1.0);
  list("balance_frequencies_hz", two_pi);
  list("balance_ratios", mode.omega);
  if (freqs.empty())
    throw ConfigError("missing 'readout.balance_frequency_rad_s' (or _hz, balance_ratio, "
                      "or a list form)",
                      "readout.balance_frequency_rad_s");

  std::optional<noise::TechnicalNoise> tech;
  if (r.contains("technical")) {
    const json& t = r.at("technical");
    if (!t.is_object()) throw ConfigError("'readout.technical' must be an object", "readout.technical");
    noise::TechnicalNoise tn;
    const auto g = pick(t, "readout.technical", {{"gamma_rad_s", 1.0}, {"gamma_hz", two_pi}});
    tn.gamma = g.value_or(mode.gamma);
    tn.bath_temperature = t.contains("bath_temperature_k")
                              ? number_at(t, "bath_temperature_k",
                                          "readout.technical.bath_temperature_k")
                              : mode.bath_temperature;
    tech = tn;
  }
  std::vector<noise::ReadoutConfig> out;
  for (double f : freqs) {
    noise::ReadoutConfig rc{f, tech};
    validated("readout", [&] {
      rc.validate();
      return 0;
    });
    out.push_back(rc);
  }
  return out;
}

kinetics::GridSpec parse_grid(const json& cfg, const std::string& name) {
  const json& g = section(cfg, name);
  kinetics::GridSpec spec;
  const auto lo = pick(g, name, {{"min_si", 1.0}, {"min_kevc", constants::kev_per_c}});
  const auto hi = pick(g, name, {{"max_si", 1.0}, {"max_kevc", constants::kev_per_c}});
  if (!lo) throw ConfigError("missing '" + name + ".min_si' (or min_kevc)", name + ".min_si");
  spec.min = *lo;
  spec.max = hi.value_or(*lo);
  if (!g.contains("count")) throw ConfigError("missing '" + name + ".count'", name + ".count");
  const json& c = g.at("count");
  if (!c.is_number_integer() || c.get<long long>() < 1)
    throw ConfigError("'" + name + ".count' must be a positive integer", name + ".count");
  spec.count = c.get<std::size_t>();
  const std::string spacing = g.value("spacing", "linear");
  if (spacing == "linear")
    spec.spacing = kinetics::Spacing::linear;
  else if (spacing == "logarithmic" || spacing == "log")
    spec.spacing = kinetics::Spacing::logarithmic;
  else
    throw ConfigError("'" + name + ".spacing' must be 'linear' or 'logarithmic'",
                      name + ".spacing");
  try {
    (void)spec.points();
  } catch (const ConfigError& e) {
    std::string key = e.key();
    if (key.rfind("grid.", 0) == 0) key = name + key.substr(4);
    throw ConfigError(e.what(), key);
  }
  return spec;
}

std::vector<kinetics::Scatter> parse_scatter_list(const json& cfg) {
  std::vector<kinetics::Scatter> out;
  if (!cfg.contains("run") || !cfg.at("run").contains("scatter")) return out;
  const json& s = cfg.at("run").at("scatter");
  auto one = [&](const json& v) {
    if (!v.is_string()) throw ConfigError("'run.scatter' entries must be strings", "run.scatter");
    const auto name = v.get<std::string>();
    if (name == "specular")
      out.push_back(kinetics::Scatter::specular);
    else if (name == "diffuse")
      out.push_back(kinetics::Scatter::diffuse);
    else
      throw ConfigError("'run.scatter' must be 'specular' or 'diffuse'", "run.scatter");
  };
  if (s.is_array())
    for (const auto& v : s) one(v);
  else
    one(s);
  return out;
}

std::optional<double> find_number(const json& cfg, const std::string& sec, const std::string& key) {
  if (!cfg.contains(sec)) return std::nullopt;
  const json& s = cfg.at(sec);
  if (!s.is_object() || !s.contains(key)) return std::nullopt;
  return number_at(s, key, sec + "." + key);
}

double require_number(const json& cfg, const std::string& sec, const std::string& key) {
  const auto v = find_number(cfg, sec, key);
  if (!v) throw ConfigError("missing '" + sec + "." + key + "'", sec + "." + key);
  return *v;
}

std::optional<double> find_impulse(const json& cfg, const std::string& sec, const std::string& key) {
  if (auto v = find_number(cfg, sec, key + "_si")) return v;
  if (auto v = find_number(cfg, sec, key + "_kevc")) return *v * constants::kev_per_c;
  return std::nullopt;
}

std::optional<std::string> find_string(const json& cfg, const std::string& sec,
                                       const std::string& key) {
  if (!cfg.contains(sec) || !cfg.at(sec).is_object() || !cfg.at(sec).contains(key))
    return std::nullopt;
  const json& v = cfg.at(sec).at(key);
  if (!v.is_string()) throw ConfigError("'" + sec + "." + key + "' must be a string", sec + "." + key);
  return v.get<std::string>();
}

} // namespace cgauge::config
