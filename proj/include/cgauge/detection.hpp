#pragma once

#include "cgauge/montecarlo.hpp"
#include "cgauge/noise.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

// Force-referred trace synthesis and matched-filter impulse detection.
namespace cgauge::detection {

using montecarlo::CollisionEvent;
using noise::NoiseSpectrum;

struct ForceTrace {
  double sample_rate = 0.0; ///< f_s [Hz]
  double start_time = 0.0;  ///< time of sample 0 [s]
  std::vector<double> samples; ///< force [N]
  std::vector<CollisionEvent> injected;

  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

struct TraceOptions {
  double start_time = 0.0;
  bool include_noise = true;
};

/// Impulses as discrete deltas (area |dp|, nearest sample) on top of
/// stationary Gaussian noise with PSD `noise`, drawn by shaping white noise in
/// the frequency domain. The noise is periodic over the trace length.
/// Requires f_s >= 20 omega_0 / 2pi.
ForceTrace synthesize_trace(std::span<const CollisionEvent> events, const NoiseSpectrum& noise,
                            double sample_rate, double duration, std::uint64_t seed,
                            const TraceOptions& options = {});

/// Zero-phase matched filter with frequency weights proportional to 1/S_FF,
/// normalized so a clean impulse dp produces a peak output of dp.
class FilterKernel {
public:
  FilterKernel(std::vector<double> response, double sample_rate, double predicted_sigma);

  double sample_rate() const { return sample_rate_; }
  std::size_t length() const { return response_.size(); }
  /// Circular impulse response; index 0 is zero lag.
  const std::vector<double>& response() const { return response_; }
  /// Output standard deviation for the design noise [kg m/s].
  double predicted_sigma() const { return predicted_sigma_; }
  /// Full width holding 99% of the response energy [s].
  double response_width() const;
  std::size_t half_width_samples() const { return half_width_; }

  /// Filters a trace. A trace of exactly length() samples is treated as
  /// periodic (circular convolution); longer traces are zero padded.
  std::vector<double> apply(std::span<const double> samples) const;

private:
  std::vector<double> response_;
  double sample_rate_;
  double predicted_sigma_;
  std::size_t half_width_ = 0;
};

FilterKernel matched_filter_kernel(const NoiseSpectrum& noise, double sample_rate,
                                   std::size_t length);

struct DetectedEvent {
  double time = 0.0;    ///< s
  double impulse = 0.0; ///< kg m/s
  double snr = 0.0;
};

struct DetectOptions {
  /// Minimum separation of detections; defaults to 3x the response width.
  std::optional<double> dead_time;
  /// Samples at each end excluded from peak search (wrap-around region).
  std::size_t guard = 0;
  /// Use this noise sigma instead of the MAD estimate.
  std::optional<double> sigma;
};

struct DetectionResult {
  std::vector<DetectedEvent> events;
  double noise_sigma = 0.0; ///< robust (MAD) sigma of the filtered output
  double dead_time = 0.0;
};

/// Local maxima of the filtered trace above snr_threshold * sigma, kept in
/// decreasing amplitude while at least dead_time from every kept peak.
DetectionResult detect_impulses(const ForceTrace& trace, const FilterKernel& kernel,
                                double snr_threshold, const DetectOptions& options = {});

/// 1.4826 * median absolute deviation.
double robust_sigma(std::span<const double> values);

struct EfficiencyOptions {
  double snr_threshold = 5.0;
  std::size_t trace_length = 4096;
  std::optional<double> dead_time;
  unsigned threads = 0;
};

struct EfficiencyPoint {
  double impulse = 0.0;
  double efficiency = 0.0;
  std::size_t detected = 0;
  std::size_t trials = 0;
  double mean_estimate = 0.0; ///< mean dp-hat over detected trials
};

/// Injection-recovery scan: one impulse at the centre of each synthetic trace,
/// detected if a peak lands within the response half-width of it.
std::vector<EfficiencyPoint> detection_efficiency(std::span<const double> dp_grid,
                                                  const NoiseSpectrum& noise,
                                                  double sample_rate, std::size_t trials,
                                                  std::uint64_t seed,
                                                  const EfficiencyOptions& options = {});

} // namespace cgauge::detection
