#pragma once

#include "cgauge/kinetics.hpp"
#include "cgauge/random.hpp"
#include "cgauge/spectrum.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

// Brute-force collision sampler: draws individual gas-sensor collisions from
// the flux-weighted Maxwellian kernel and assembles Poisson event streams.
namespace cgauge::montecarlo {

using kinetics::GasSpecies;
using kinetics::Scatter;
using kinetics::SensorGeometry;

struct CollisionEvent {
  double time = 0.0;    ///< s
  double impulse = 0.0; ///< kg m/s; signed for projected readout
  Scatter kind = Scatter::specular;
  std::uint32_t species = 0; ///< index into EventStream::species_names
};

struct EventStream {
  double duration = 0.0;
  std::vector<CollisionEvent> events;
  std::vector<std::string> species_names;
  std::uint64_t seed = 0;
  nlohmann::json parameters = nlohmann::json::object();

  void validate() const;
};

/// One collision (time left at zero). For a 3D readout the impulse is the
/// surface-normal transfer; for a projected readout it is the signed
/// component along the readout axis.
CollisionEvent sample_impulse(const GasSpecies& species, const SensorGeometry& sensor,
                              Rng& rng);

/// Arrival rate n A vbar / sqrt(2 pi) of all collisions of one species.
double arrival_rate(const GasSpecies& species, const SensorGeometry& sensor);

struct StreamOptions {
  /// 0 selects std::thread::hardware_concurrency(). Output does not depend on it.
  unsigned threads = 0;
};

/// Poisson stream over [0, duration]. The timeline is cut into chunks whose
/// boundaries depend only on the parameters; each (chunk, species) pair draws
/// from its own derived seed, so the result is identical for any thread count.
EventStream sample_event_stream(double duration, std::span<const GasSpecies> species,
                                const SensorGeometry& sensor, std::uint64_t seed,
                                const StreamOptions& options = {});

/// Histogram estimate of dGamma/d|dp| with Poisson errors. `edges` must be
/// strictly increasing. Only events of `species_index` are counted if given.
MomentumSpectrum empirical_spectrum(std::span<const CollisionEvent> events, double duration,
                                    std::span<const double> edges,
                                    std::optional<std::uint32_t> species_index = {});

MomentumSpectrum empirical_spectrum(const EventStream& stream, std::span<const double> edges,
                                    std::optional<std::uint32_t> species_index = {});

/// `count` equal bins on [lo, hi] (logarithmic needs lo > 0).
std::vector<double> make_edges(double lo, double hi, std::size_t count,
                               kinetics::Spacing spacing = kinetics::Spacing::linear);

} // namespace cgauge::montecarlo
