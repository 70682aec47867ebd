#include "cgauge/montecarlo.hpp"

#include "cgauge/constants.hpp"
#include "cgauge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace cgauge::montecarlo {

namespace {

// Normal speed of a wall-crossing molecule: density v e^{-v^2/2 vbar^2}.
double flux_weighted_speed(double vbar, Rng& rng) {
  const double u = 1.0 - uniform01(rng); // (0, 1]
  return vbar * std::sqrt(-2.0 * std::log(u));
}

constexpr std::size_t events_per_chunk = 1u << 16;

} // namespace

void EventStream::validate() const {
  if (!(duration > 0.0)) throw DomainError("event stream duration must be > 0");
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].time < 0.0 || events[i].time > duration)
      throw DomainError("event time outside [0, duration]");
    if (i > 0 && !(events[i].time > events[i - 1].time))
      throw DomainError("event times must be strictly increasing");
  }
}

CollisionEvent sample_impulse(const GasSpecies& species, const SensorGeometry& sensor,
                              Rng& rng) {
  const double m = species.mass;
  const double vbar = kinetics::thermal_velocity(species);
  const double alpha = kinetics::accommodation_for(species, sensor);

  CollisionEvent ev;
  ev.kind = uniform01(rng) < alpha ? Scatter::diffuse : Scatter::specular;
  const double v_in = flux_weighted_speed(vbar, rng);

  double vbar_out = vbar;
  if (sensor.surface_temperature) {
    const double t_out = *sensor.surface_temperature * sensor.thermal_accommodation;
    vbar_out = std::sqrt(constants::boltzmann * t_out / m);
  }

  double normal = 0.0;
  if (ev.kind == Scatter::specular) {
    normal = 2.0 * m * v_in;
  } else {
    normal = m * (v_in + flux_weighted_speed(vbar_out, rng));
  }

  if (sensor.readout == kinetics::Readout::full_3d) {
    ev.impulse = normal;
    return ev;
  }

  // Surface element uniform on the sphere: cos(theta) to the readout axis is
  // uniform on [-1, 1]. The molecule pushes the sphere along -n.
  const double cos_t = 2.0 * uniform01(rng) - 1.0;
  double along = -normal * cos_t;
  if (sensor.projection == kinetics::Projection::full_vector &&
      ev.kind == Scatter::diffuse) {
    // In-plane velocity components before and after are independent
    // Maxwellians; only the one along e_theta projects onto the axis.
    std::normal_distribution<double> in_plane(0.0, 1.0);
    const double v_in_t = vbar * in_plane(rng);
    const double v_out_t = vbar_out * in_plane(rng);
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    along += m * (v_in_t - v_out_t) * sin_t;
  }
  ev.impulse = along;
  return ev;
}

double arrival_rate(const GasSpecies& species, const SensorGeometry& sensor) {
  species.validate();
  sensor.validate();
  return species.density * sensor.area() * kinetics::thermal_velocity(species) /
         constants::sqrt_2pi;
}

EventStream sample_event_stream(double duration, std::span<const GasSpecies> species,
                                const SensorGeometry& sensor, std::uint64_t seed,
                                const StreamOptions& options) {
  if (!(duration > 0.0)) throw DomainError("stream duration must be > 0");
  sensor.validate();
  EventStream stream;
  stream.duration = duration;
  stream.seed = seed;
  std::vector<double> rates;
  double expected = 0.0;
  for (const auto& s : species) {
    stream.species_names.push_back(s.name);
    rates.push_back(arrival_rate(s, sensor));
    expected += rates.back() * duration;
  }
  stream.parameters["species"] = nlohmann::json::array();
  for (const auto& s : species) stream.parameters["species"].push_back(kinetics::describe(s));
  stream.parameters["sensor"] = kinetics::describe(sensor);
  stream.parameters["duration_s"] = duration;
  stream.parameters["seed"] = seed;
  if (species.empty()) return stream;

  const std::size_t chunks = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(expected / events_per_chunk)), 1, 1u << 20);
  std::vector<std::vector<CollisionEvent>> parts(chunks);

  auto fill_chunk = [&](std::size_t c) {
    const double t0 = duration * static_cast<double>(c) / static_cast<double>(chunks);
    const double t1 = c + 1 == chunks
                          ? duration
                          : duration * static_cast<double>(c + 1) / static_cast<double>(chunks);
    auto& out = parts[c];
    for (std::size_t i = 0; i < species.size(); ++i) {
      if (rates[i] <= 0.0) continue;
      Rng rng(derive_seed(seed, c, i));
      std::exponential_distribution<double> gap(rates[i]);
      double t = t0;
      while (true) {
        t += gap(rng);
        if (t > t1) break;
        CollisionEvent ev = sample_impulse(species[i], sensor, rng);
        ev.time = t;
        ev.species = static_cast<std::uint32_t>(i);
        out.push_back(ev);
      }
    }
    std::sort(out.begin(), out.end(),
              [](const CollisionEvent& a, const CollisionEvent& b) { return a.time < b.time; });
  };

  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(chunks)));
  if (threads == 1) {
    for (std::size_t c = 0; c < chunks; ++c) fill_chunk(c);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < chunks; c += threads) fill_chunk(c);
      });
  }

  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  stream.events.reserve(total);
  for (auto& p : parts) stream.events.insert(stream.events.end(), p.begin(), p.end());
  // Exact ties are measure-zero but would break strict ordering.
  for (std::size_t i = 1; i < stream.events.size(); ++i)
    if (!(stream.events[i].time > stream.events[i - 1].time))
      stream.events[i].time = std::nextafter(stream.events[i - 1].time, duration * 2.0);
  return stream;
}

std::vector<double> make_edges(double lo, double hi, std::size_t count,
                               kinetics::Spacing spacing) {
  kinetics::GridSpec g{lo, hi, count + 1, spacing};
  if (count == 0) throw ConfigError("histogram needs at least one bin", "bins.count");
  return g.points();
}

MomentumSpectrum empirical_spectrum(std::span<const CollisionEvent> events, double duration,
                                    std::span<const double> edges,
                                    std::optional<std::uint32_t> species_index) {
  if (!(duration > 0.0)) throw DomainError("empirical spectrum needs duration > 0");
  if (edges.size() < 2) throw ConfigError("histogram needs at least one bin", "bins");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1])) throw ConfigError("bin edges must increase", "bins");

  const std::size_t nbins = edges.size() - 1;
  std::vector<double> counts(nbins, 0.0);
  for (const auto& ev : events) {
    if (species_index && ev.species != *species_index) continue;
    const double p = std::abs(ev.impulse);
    if (p < edges.front() || p >= edges.back()) continue;
    const auto it = std::upper_bound(edges.begin(), edges.end(), p);
    counts[static_cast<std::size_t>(it - edges.begin()) - 1] += 1.0;
  }

  MomentumSpectrum s;
  s.edges.assign(edges.begin(), edges.end());
  for (std::size_t b = 0; b < nbins; ++b) {
    const double w = edges[b + 1] - edges[b];
    s.grid.push_back(0.5 * (edges[b] + edges[b + 1]));
    s.values.push_back(counts[b] / (duration * w));
    s.sigma.push_back(std::sqrt(counts[b]) / (duration * w));
  }
  s.metadata["source"] = "empirical";
  s.metadata["duration_s"] = duration;
  s.metadata["counts"] = counts;
  return s;
}

MomentumSpectrum empirical_spectrum(const EventStream& stream, std::span<const double> edges,
                                    std::optional<std::uint32_t> species_index) {
  auto s = empirical_spectrum(stream.events, stream.duration, edges, species_index);
  s.metadata["species"] = stream.parameters.value("species", nlohmann::json::array());
  s.metadata["sensor"] = stream.parameters.value("sensor", nlohmann::json::object());
  s.metadata["seed"] = stream.seed;
  return s;
}

} // namespace cgauge::montecarlo
