#include "cgauge/commands.hpp"

#include "cgauge/config.hpp"
#include "cgauge/constants.hpp"
#include "cgauge/detection.hpp"
#include "cgauge/errors.hpp"
#include "cgauge/event_io.hpp"
#include "cgauge/inference.hpp"
#include "cgauge/io_util.hpp"
#include "cgauge/kinetics.hpp"
#include "cgauge/montecarlo.hpp"
#include "cgauge/noise.hpp"
#include "cgauge/random.hpp"
#include "cgauge/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace cgauge::commands {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json provenance(const Context& ctx, const std::string& command,
                std::optional<std::uint64_t> seed) {
  json j;
  j["command"] = command;
  j["config_hash"] = ctx.config_hash;
  j["seed"] = seed ? json(*seed) : json(nullptr);
  j["code_version"] = CGAUGE_VERSION;
  return j;
}

std::optional<std::uint64_t> resolve_seed(const json& cfg, const Context& ctx) {
  if (ctx.seed) return ctx.seed;
  if (cfg.contains("run") && cfg["run"].contains("seed")) {
    const json& s = cfg["run"]["seed"];
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      throw ConfigError("'run.seed' must be a nonnegative integer", "run.seed");
    return s.get<std::uint64_t>();
  }
  return std::nullopt;
}

// Numeric table with a provenance sidecar.
void write_table(const fs::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& columns, json sidecar) {
  auto out = io::open_output(path);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c)
      out << (c ? "," : "") << io::format_double(columns[c][r]);
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
  sidecar["columns"] = header;
  io::write_json(sidecar_path(path), sidecar);
}

double snr_threshold(const json& cfg) {
  const double t = config::find_number(cfg, "run", "snr_threshold").value_or(5.0);
  if (!(t > 0.0)) throw ConfigError("'run.snr_threshold' must be > 0", "run.snr_threshold");
  return t;
}

std::size_t positive_count(const json& cfg, const std::string& sec, const std::string& key,
                           std::size_t fallback) {
  if (!cfg.contains(sec) || !cfg[sec].contains(key)) return fallback;
  const json& v = cfg[sec][key];
  if (!v.is_number_integer() || v.get<long long>() < 1)
    throw ConfigError("'" + sec + "." + key + "' must be a positive integer", sec + "." + key);
  return v.get<std::size_t>();
}

json mode_json(const noise::MechanicalMode& m) {
  return {{"mass_kg", m.mass},
          {"omega_rad_s", m.omega},
          {"gamma_rad_s", m.gamma},
          {"bath_temperature_k", m.bath_temperature}};
}

json readout_json(const noise::ReadoutConfig& r) {
  json j{{"balance_frequency_rad_s", r.balance_frequency}};
  if (r.technical)
    j["technical"] = {{"gamma_rad_s", r.technical->gamma},
                      {"bath_temperature_k", r.technical->bath_temperature}};
  return j;
}

} // namespace

json spectrum(const json& cfg, const Context& ctx) {
  const auto species = config::parse_species(cfg);
  const auto sensor = config::parse_sensor(cfg);
  const auto grid = config::parse_grid(cfg);
  const auto scatters = config::parse_scatter_list(cfg);
  const auto prov = provenance(ctx, "spectrum", resolve_seed(cfg, ctx));

  json markers = json::array();
  if (cfg.contains("mode") && cfg.contains("readout")) {
    const auto mode = config::parse_mode(cfg);
    const double thr = snr_threshold(cfg);
    for (const auto& r : config::parse_readouts(cfg, mode)) {
      const double dp = noise::min_detectable_impulse(noise::NoiseSpectrum::quantum(mode, r), thr);
      markers.push_back({{"balance_frequency_rad_s", r.balance_frequency},
                         {"snr_threshold", thr},
                         {"dp_min_si", dp},
                         {"dp_min_kevc", constants::to_kevc(dp)}});
    }
  }

  struct Variant {
    std::string suffix;
    std::vector<kinetics::GasSpecies> species;
    kinetics::SensorGeometry sensor;
  };
  std::vector<Variant> variants;
  if (scatters.empty()) {
    variants.push_back({"", species, sensor});
  } else {
    for (auto s : scatters) {
      Variant v{"_" + kinetics::to_string(s), species, sensor};
      v.sensor.accommodation = s == kinetics::Scatter::diffuse ? 1.0 : 0.0;
      for (auto& g : v.species) g.accommodation.reset();
      variants.push_back(std::move(v));
    }
  }

  json report{{"provenance", prov}, {"files", json::array()}};
  for (const auto& v : variants) {
    auto spec = kinetics::tabulate_spectrum(grid, v.species, v.sensor);
    spec.metadata["provenance"] = prov;
    if (!markers.empty()) spec.metadata["threshold_markers"] = markers;
    const fs::path path = ctx.out_dir / ("spectrum" + v.suffix + ".csv");
    write_spectrum(spec, path);
    json entry{{"path", path.string()}, {"points", spec.size()}};
    if (!v.suffix.empty()) entry["scatter_model"] = v.suffix.substr(1);
    json rates = json::array();
    for (const auto& m : markers) {
      double total = 0.0;
      for (const auto& g : v.species)
        total += kinetics::detectable_rate(m["dp_min_si"].get<double>(), g, v.sensor);
      rates.push_back(total);
    }
    if (!markers.empty()) entry["detectable_rate_s"] = rates;
    report["files"].push_back(entry);
  }
  if (!markers.empty()) report["threshold_markers"] = markers;
  io::write_json(ctx.out_dir / "spectrum_report.json", report);
  return report;
}

json snr(const json& cfg, const Context& ctx) {
  const auto mode = config::parse_mode(cfg);
  const auto readouts = config::parse_readouts(cfg, mode);
  const auto dp = config::find_impulse(cfg, "run", "dp");
  if (!dp) throw ConfigError("missing 'run.dp_si' (or run.dp_kevc)", "run.dp_si");
  if (!(*dp > 0.0)) throw ConfigError("'run.dp_si' must be > 0", "run.dp_si");
  const double thr = snr_threshold(cfg);
  const std::size_t points = positive_count(cfg, "run", "nu_points", 2001);
  const auto prov = provenance(ctx, "snr", resolve_seed(cfg, ctx));

  double lo = mode.omega, hi = mode.omega;
  for (const auto& r : readouts) {
    lo = std::min(lo, r.balance_frequency);
    hi = std::max(hi, r.balance_frequency);
  }
  const auto nu = kinetics::GridSpec{lo * 1e-3, hi * 1e3, std::max<std::size_t>(points, 2),
                                     kinetics::Spacing::logarithmic}
                      .points();

  json rows = json::array();
  std::vector<double> col_w0, col_ratio, col_snr, col_dpmin;
  for (std::size_t k = 0; k < readouts.size(); ++k) {
    const auto& r = readouts[k];
    const auto noise = noise::NoiseSpectrum::quantum(mode, r);
    std::vector<double> s_total, shot, back, tech, integrand;
    for (double v : nu) {
      const auto c = noise.components(v);
      s_total.push_back(c.total());
      shot.push_back(c.shot);
      back.push_back(c.backaction);
      tech.push_back(c.technical);
      integrand.push_back(*dp * *dp / c.total());
    }
    json side{{"provenance", prov}, {"mode", mode_json(mode)}, {"readout", readout_json(r)},
              {"tuning_index", k}};
    const std::string tag = std::to_string(k);
    write_table(ctx.out_dir / ("noise_" + tag + ".csv"),
                {"nu_si", "s_ff_si", "shot_si", "backaction_si", "technical_si"},
                {nu, s_total, shot, back, tech}, side);
    side["dp_si"] = *dp;
    write_table(ctx.out_dir / ("snr_integrand_" + tag + ".csv"), {"nu_si", "integrand_si"},
                {nu, integrand}, side);

    const double value = noise::impulse_snr(*dp, noise);
    const double dp_min = noise::min_detectable_impulse(noise, thr);
    col_w0.push_back(r.balance_frequency);
    col_ratio.push_back(r.balance_frequency / mode.omega);
    col_snr.push_back(value);
    col_dpmin.push_back(dp_min);
    rows.push_back({{"balance_frequency_rad_s", r.balance_frequency},
                    {"balance_ratio", r.balance_frequency / mode.omega},
                    {"snr", value},
                    {"dp_min_si", dp_min},
                    {"dp_min_kevc", constants::to_kevc(dp_min)}});
  }
  write_table(ctx.out_dir / "snr_summary.csv",
              {"balance_frequency_si", "balance_ratio", "snr", "dp_min_si"},
              {col_w0, col_ratio, col_snr, col_dpmin},
              {{"provenance", prov}, {"mode", mode_json(mode)}, {"dp_si", *dp},
               {"snr_threshold", thr}});

  json report{{"provenance", prov},   {"dp_si", *dp},        {"dp_kevc", constants::to_kevc(*dp)},
              {"mode", mode_json(mode)}, {"snr_threshold", thr}, {"tunings", rows}};
  io::write_json(ctx.out_dir / "snr_report.json", report);
  return report;
}

json simulate_detect(const json& cfg, const Context& ctx) {
  const auto seed = resolve_seed(cfg, ctx);
  if (!seed) throw ConfigError("simulate-detect requires a seed (--seed or run.seed)", "run.seed");
  const auto species = config::parse_species(cfg);
  const auto sensor = config::parse_sensor(cfg);
  const auto mode = config::parse_mode(cfg);
  const auto readout = config::parse_readouts(cfg, mode).front();
  const double duration = config::require_number(cfg, "run", "duration_s");
  if (!(duration > 0.0)) throw ConfigError("'run.duration_s' must be > 0", "run.duration_s");
  const double fs = config::require_number(cfg, "run", "sample_rate_hz");
  if (!(fs > 0.0)) throw ConfigError("'run.sample_rate_hz' must be > 0", "run.sample_rate_hz");
  const double thr = snr_threshold(cfg);
  const auto dead_cfg = config::find_number(cfg, "run", "dead_time_s");
  const std::size_t seg = positive_count(cfg, "run", "segment_samples", std::size_t{1} << 18);
  if (seg % 2 != 0)
    throw ConfigError("'run.segment_samples' must be even", "run.segment_samples");
  const auto prov = provenance(ctx, "simulate-detect", seed);

  const auto noise = noise::NoiseSpectrum::quantum(mode, readout);
  const auto stream = montecarlo::sample_event_stream(duration, species, sensor,
                                                      derive_seed(*seed, 1, 0));
  const auto kernel = detection::matched_filter_kernel(noise, fs, seg);
  const double dead = dead_cfg.value_or(3.0 * kernel.response_width());
  const double dead_samples = dead * fs;
  const auto guard = static_cast<std::size_t>(
      std::ceil(4.0 * static_cast<double>(kernel.half_width_samples()) + 2.0 * dead_samples)) + 8;
  if (seg <= 4 * guard)
    throw ConfigError("'run.segment_samples' too short for the filter and dead time",
                      "run.segment_samples");
  const std::size_t stride = seg - 2 * guard;
  const auto total = static_cast<std::size_t>(std::ceil(duration * fs));
  const std::size_t segments = (total + stride - 1) / stride;

  // Segments overlap by the guard on each side; each keeps only peaks in its
  // own stride so every sample is searched exactly once.
  std::vector<detection::DetectedEvent> candidates;
  double sigma_sum = 0.0;
  const auto& evs = stream.events;
  for (std::size_t k = 0; k < segments; ++k) {
    const double first = static_cast<double>(k * stride) - static_cast<double>(guard);
    const double start = first / fs;
    const double end = start + static_cast<double>(seg) / fs;
    auto lo = std::lower_bound(evs.begin(), evs.end(), start,
                               [](const auto& e, double t) { return e.time < t; });
    auto hi = std::lower_bound(lo, evs.end(), end,
                               [](const auto& e, double t) { return e.time < t; });
    detection::TraceOptions topt;
    topt.start_time = start;
    const auto trace = detection::synthesize_trace(
        std::span<const montecarlo::CollisionEvent>(&*lo, static_cast<std::size_t>(hi - lo)),
        noise, fs, static_cast<double>(seg) / fs, derive_seed(*seed, 2, k), topt);
    detection::DetectOptions dopt;
    dopt.dead_time = dead;
    dopt.guard = guard;
    const auto det = detection::detect_impulses(trace, kernel, thr, dopt);
    sigma_sum += det.noise_sigma;
    const double own_lo = static_cast<double>(k * stride) / fs;
    const double own_hi = static_cast<double>((k + 1) * stride) / fs;
    for (const auto& d : det.events)
      if (d.time >= own_lo && d.time < own_hi && d.time < duration) candidates.push_back(d);
  }
  const double sigma = sigma_sum / static_cast<double>(segments);

  // Dead-time suppression across segment boundaries.
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return candidates[a].impulse > candidates[b].impulse;
  });
  std::vector<bool> keep(candidates.size(), false);
  for (std::size_t i : order) {
    bool clear = true;
    for (std::size_t j = i; j-- > 0 && candidates[i].time - candidates[j].time < dead;)
      if (keep[j]) clear = false;
    for (std::size_t j = i + 1; j < candidates.size() && candidates[j].time - candidates[i].time < dead; ++j)
      if (keep[j]) clear = false;
    keep[i] = clear;
  }
  std::vector<detection::DetectedEvent> detected;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (keep[i]) detected.push_back(candidates[i]);

  // Truth matching: nearest unmatched truth event within the tolerance.
  const double dp_min = thr * sigma;
  const double tol = static_cast<double>(std::max<std::size_t>(kernel.half_width_samples(), 2)) / fs;
  std::vector<bool> truth_used(evs.size(), false);
  std::size_t matched = 0, matched_above = 0;
  double bias_sum = 0.0;
  std::size_t bias_n = 0;
  for (const auto& d : detected) {
    auto it = std::lower_bound(evs.begin(), evs.end(), d.time - tol,
                               [](const auto& e, double t) { return e.time < t; });
    std::size_t best = evs.size();
    double best_dt = tol;
    for (; it != evs.end() && it->time <= d.time + tol; ++it) {
      const auto idx = static_cast<std::size_t>(it - evs.begin());
      const double dt = std::abs(it->time - d.time);
      if (!truth_used[idx] && dt <= best_dt) {
        best = idx;
        best_dt = dt;
      }
    }
    if (best == evs.size()) continue;
    truth_used[best] = true;
    ++matched;
    const double truth = std::abs(evs[best].impulse);
    if (truth >= dp_min) {
      ++matched_above;
      bias_sum += d.impulse / truth - 1.0;
      ++bias_n;
    }
  }
  std::size_t truth_above = 0;
  for (const auto& e : evs)
    if (std::abs(e.impulse) >= dp_min) ++truth_above;
  const std::size_t fakes = detected.size() - matched;

  json noise_cfg{{"mode", mode_json(mode)},
                 {"readout", readout_json(readout)},
                 {"predicted_sigma_si", kernel.predicted_sigma()},
                 {"filter_length", kernel.length()},
                 {"response_width_s", kernel.response_width()}};
  events::write_stream(stream, ctx.out_dir / "truth_events.csv", {{"provenance", prov}});
  events::write_detections(detected, duration, ctx.out_dir / "detected_events.csv",
                           {{"provenance", prov},
                            {"dp_min_si", dp_min},
                            {"snr_threshold", thr},
                            {"noise_sigma_si", sigma},
                            {"dead_time_s", dead},
                            {"sample_rate_hz", fs},
                            {"filter", noise_cfg}});

  json truth_p = json::array();
  for (const auto& g : species)
    truth_p.push_back({{"name", g.name}, {"pressure_pa", g.pressure()}});
  const auto frac = [](std::size_t a, std::size_t b) {
    return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0;
  };
  json report{
      {"provenance", prov},
      {"duration_s", duration},
      {"species", truth_p},
      {"trace",
       {{"sample_rate_hz", fs},
        {"samples", total},
        {"segments", segments},
        {"segment_samples", seg},
        {"guard_samples", guard},
        {"noise_sigma_si", sigma},
        {"predicted_sigma_si", kernel.predicted_sigma()},
        {"sigma_ratio", sigma / kernel.predicted_sigma()}}},
      {"detection",
       {{"snr_threshold", thr}, {"dp_min_si", dp_min}, {"dead_time_s", dead}}},
      {"matching",
       {{"truth_events", evs.size()},
        {"truth_above_threshold", truth_above},
        {"detected_events", detected.size()},
        {"matched", matched},
        {"efficiency", frac(matched, evs.size())},
        {"efficiency_above_threshold", frac(matched_above, truth_above)},
        {"fake_events", fakes},
        {"fake_rate_hz", static_cast<double>(fakes) / duration},
        {"dp_bias", bias_n ? bias_sum / static_cast<double>(bias_n) : 0.0}}}};
  io::write_json(ctx.out_dir / "simulate_detect_report.json", report);
  return report;
}

json infer(const json& cfg, const Context& ctx) {
  const auto species = config::parse_species(cfg);
  const auto sensor = config::parse_sensor(cfg);
  if (species.empty()) throw ConfigError("'species' must not be empty", "species");
  const auto prov = provenance(ctx, "infer", resolve_seed(cfg, ctx));
  const std::string method = config::find_string(cfg, "infer", "method").value_or("pressure");
  if (method != "pressure" && method != "mixture")
    throw ConfigError("'infer.method' must be 'pressure' or 'mixture'", "infer.method");
  const double temperature =
      config::find_number(cfg, "infer", "temperature_k").value_or(species.front().temperature);
  const auto dp_min_cfg = config::find_impulse(cfg, "infer", "dp_min");
  const auto input = config::find_string(cfg, "infer", "input");

  json report{{"provenance", prov}, {"method", method}};
  std::optional<events::EventFile> file;
  if (input) {
    fs::path p(*input);
    if (p.is_relative() && !fs::exists(p) && fs::exists(ctx.out_dir / p)) p = ctx.out_dir / p;
    file = events::read_events(p);
    report["input"] = p.string();
  }
  const auto sidecar_number = [&](const char* key) -> std::optional<double> {
    if (file && file->sidecar.contains(key) && file->sidecar[key].is_number())
      return file->sidecar[key].get<double>();
    return std::nullopt;
  };
  const double dp_min = dp_min_cfg.value_or(sidecar_number("dp_min_si").value_or(0.0));

  if (method == "pressure") {
    double rate = 0.0;
    std::optional<std::size_t> n;
    if (file) {
      std::size_t count = 0;
      for (const auto& e : file->events)
        if (std::abs(e.impulse) >= dp_min) ++count;
      n = count;
      const bool correct = !cfg.contains("infer") ||
                           cfg["infer"].value("dead_time_correction", true);
      const auto dead = sidecar_number("dead_time_s");
      rate = correct && dead
                 ? inference::dead_time_corrected_rate(count, file->duration, *dead)
                 : static_cast<double>(count) / file->duration;
      if (correct && dead) report["dead_time_s"] = *dead;
    } else {
      const auto r = config::find_number(cfg, "infer", "rate_s");
      if (!r) throw ConfigError("infer needs 'infer.input' or 'infer.rate_s'", "infer.rate_s");
      if (!(*r >= 0.0)) throw ConfigError("'infer.rate_s' must be >= 0", "infer.rate_s");
      rate = *r;
      if (const auto c = config::find_number(cfg, "infer", "events")) {
        if (!(*c >= 0.0)) throw ConfigError("'infer.events' must be >= 0", "infer.events");
        n = static_cast<std::size_t>(std::llround(*c));
      }
    }
    const auto est =
        inference::pressure_from_rate(rate, dp_min, species.front(), sensor, temperature, n);
    report["estimate"] = inference::to_json(est);
    report["warnings"] = est.warnings;
  } else {
    if (!file) throw ConfigError("mixture fit needs 'infer.input'", "infer.input");
    kinetics::GridSpec bins;
    try {
      bins = config::parse_grid(cfg.at("infer"), "bins");
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), "infer." + e.key());
    }
    const auto edges = montecarlo::make_edges(bins.min, bins.max, bins.count, bins.spacing);
    auto empirical = montecarlo::empirical_spectrum(file->events, file->duration, edges);
    inference::FitOptions opt;
    opt.dp_min = dp_min;
    const auto fit = inference::fit_mixture(empirical, species, sensor, opt);
    report["fit"] = inference::to_json(fit);
    report["warnings"] = fit.warnings;
  }
  io::write_json(ctx.out_dir / "infer_report.json", report);
  return report;
}

int run(const std::string& command, const fs::path& config_path, const Context& ctx_in,
        std::ostream& out, std::ostream& err) {
  try {
    const auto cfg = config::load(config_path);
    Context ctx = ctx_in;
    ctx.config_hash = config::config_hash(cfg);
    json report;
    if (command == "spectrum")
      report = spectrum(cfg, ctx);
    else if (command == "snr")
      report = snr(cfg, ctx);
    else if (command == "simulate-detect")
      report = simulate_detect(cfg, ctx);
    else if (command == "infer")
      report = infer(cfg, ctx);
    else {
      err << "error: unknown command '" << command << "'\n";
      return usage_error;
    }
    out << report.dump(2) << '\n';
    if (report.contains("warnings"))
      for (const auto& w : report["warnings"]) err << "warning: " << w.get<std::string>() << '\n';
    return ok;
  } catch (const ConfigError& e) {
    err << "config error";
    if (!e.key().empty()) err << " [" << e.key() << "]";
    err << ": " << e.what() << '\n';
    return config_error;
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return io_error;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return numeric_error;
  } catch (const DomainError& e) {
    err << "numeric error: " << e.what() << '\n';
    return numeric_error;
  } catch (const UnsupportedConfiguration& e) {
    err << "numeric error: " << e.what() << '\n';
    return numeric_error;
  }
}

} // namespace cgauge::commands
