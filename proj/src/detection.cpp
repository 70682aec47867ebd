#include "cgauge/detection.hpp"

#include "cgauge/constants.hpp"
#include "cgauge/errors.hpp"
#include "cgauge/fft.hpp"
#include "cgauge/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <thread>

namespace cgauge::detection {

using constants::pi;

namespace {

// Two-sided PSD over ordinary frequency from the angular one-sided convention.
double two_sided_psd(const NoiseSpectrum& noise, double f) {
  return noise(2.0 * pi * std::abs(f)) / pi;
}

} // namespace

ForceTrace synthesize_trace(std::span<const CollisionEvent> events, const NoiseSpectrum& noise,
                            double sample_rate, double duration, std::uint64_t seed,
                            const TraceOptions& options) {
  if (!(sample_rate > 0.0)) throw ConfigError("sample rate must be > 0", "run.sample_rate_hz");
  if (!(duration > 0.0)) throw ConfigError("trace duration must be > 0", "run.duration_s");
  const double w0 = noise.characteristic_frequency();
  if (options.include_noise && sample_rate < 20.0 * w0 / (2.0 * pi) * (1.0 - 1e-12))
    throw ConfigError("sample rate must be >= 20 omega_0 / 2pi to resolve the noise",
                      "run.sample_rate_hz");
  const auto n = static_cast<std::size_t>(std::llround(duration * sample_rate));
  if (n < 2) throw ConfigError("trace must contain at least two samples", "run.duration_s");

  ForceTrace trace;
  trace.sample_rate = sample_rate;
  trace.start_time = options.start_time;
  trace.samples.assign(n, 0.0);

  if (options.include_noise) {
    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::complex<double>> spec(n / 2 + 1);
    const double nd = static_cast<double>(n);
    for (std::size_t k = 0; k < spec.size(); ++k) {
      const double f = static_cast<double>(k) * sample_rate / nd;
      const double var = nd * sample_rate * two_sided_psd(noise, f);
      const bool real_bin = k == 0 || (n % 2 == 0 && k == n / 2);
      if (real_bin) {
        spec[k] = std::sqrt(var) * gauss(rng);
      } else {
        const double s = std::sqrt(0.5 * var);
        const double re = gauss(rng);
        const double im = gauss(rng);
        spec[k] = {s * re, s * im};
      }
    }
    trace.samples = fft::inverse(spec, n);
  }

  for (const auto& ev : events) {
    const double rel = ev.time - options.start_time;
    if (rel < 0.0) continue;
    const auto idx = static_cast<std::size_t>(std::llround(rel * sample_rate));
    if (idx >= n) continue;
    trace.samples[idx] += std::abs(ev.impulse) * sample_rate;
    trace.injected.push_back(ev);
  }
  return trace;
}

FilterKernel::FilterKernel(std::vector<double> response, double sample_rate,
                           double predicted_sigma)
    : response_(std::move(response)), sample_rate_(sample_rate),
      predicted_sigma_(predicted_sigma) {
  const std::size_t n = response_.size();
  double total = 0.0;
  for (double h : response_) total += h * h;
  double acc = response_[0] * response_[0];
  std::size_t w = 0;
  while (acc < 0.99 * total && w < n / 2) {
    ++w;
    acc += response_[w] * response_[w];
    if (n - w != w) acc += response_[n - w] * response_[n - w];
  }
  half_width_ = w;
}

double FilterKernel::response_width() const {
  return static_cast<double>(2 * half_width_ + 1) / sample_rate_;
}

std::vector<double> FilterKernel::apply(std::span<const double> samples) const {
  const std::size_t l = response_.size();
  const std::size_t n = samples.size();
  if (n < l) throw ConfigError("trace is shorter than the filter");
  if (n == l) {
    auto x = fft::forward(samples);
    const auto h = fft::forward(response_);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] *= h[k];
    return fft::inverse(x, n);
  }
  const std::size_t m = fft::good_size(n + l);
  std::vector<double> xp(m, 0.0), hp(m, 0.0);
  std::copy(samples.begin(), samples.end(), xp.begin());
  // Lags [0, l/2) go to the front, negative lags wrap to the back.
  for (std::size_t i = 0; i < l; ++i) {
    if (i < l / 2)
      hp[i] = response_[i];
    else
      hp[m - (l - i)] = response_[i];
  }
  auto x = fft::forward(xp);
  const auto h = fft::forward(hp);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] *= h[k];
  auto y = fft::inverse(x, m);
  y.resize(n);
  return y;
}

FilterKernel matched_filter_kernel(const NoiseSpectrum& noise, double sample_rate,
                                   std::size_t length) {
  if (length < 2 || length % 2 != 0)
    throw ConfigError("filter length must be even and >= 2", "run.filter_length");
  if (!(sample_rate > 0.0)) throw ConfigError("sample rate must be > 0", "run.sample_rate_hz");
  const double ld = static_cast<double>(length);
  const double df = sample_rate / ld;
  std::vector<std::complex<double>> w(length / 2 + 1);
  // Sum of 1/S2 over the full (two-sided) DFT grid.
  double inv_sum = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double inv = 1.0 / two_sided_psd(noise, static_cast<double>(k) * df);
    w[k] = inv;
    const bool self_conjugate = k == 0 || k == length / 2;
    inv_sum += self_conjugate ? inv : 2.0 * inv;
  }
  const double norm = 1.0 / (df * inv_sum);
  for (auto& v : w) v *= norm;
  // Unit-gain convention: h[0] = (1/L) sum W = 1/f_s, so a delta of area dp
  // (sample value dp f_s) maps to dp.
  auto h = fft::inverse(w, length);
  const double sigma = std::sqrt(1.0 / (df * inv_sum));
  return FilterKernel(std::move(h), sample_rate, sigma);
}

double robust_sigma(std::span<const double> values) {
  if (values.empty()) throw DomainError("robust sigma of empty data");
  std::vector<double> v(values.begin(), values.end());
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  const double median = *mid;
  for (double& x : v) x = std::abs(x - median);
  std::nth_element(v.begin(), mid, v.end());
  return 1.482602218505602 * *mid;
}

DetectionResult detect_impulses(const ForceTrace& trace, const FilterKernel& kernel,
                                double snr_threshold, const DetectOptions& options) {
  if (!(snr_threshold > 0.0)) throw ConfigError("snr threshold must be > 0", "run.snr_threshold");
  if (std::abs(trace.sample_rate - kernel.sample_rate()) > 1e-9 * trace.sample_rate)
    throw ConfigError("trace and filter sample rates differ");
  DetectionResult result;
  result.dead_time = options.dead_time.value_or(3.0 * kernel.response_width());
  if (result.dead_time < kernel.response_width() * (1.0 - 1e-12))
    throw ConfigError("dead time must be at least the filter response width",
                      "run.dead_time_s");

  const auto y = kernel.apply(trace.samples);
  const std::size_t n = y.size();
  result.noise_sigma = options.sigma.value_or(robust_sigma(y));
  if (!(result.noise_sigma > 0.0)) return result;
  const double level = snr_threshold * result.noise_sigma;

  const std::size_t lo = std::min(options.guard, n);
  const std::size_t hi = n > options.guard ? n - options.guard : 0;
  std::vector<std::size_t> peaks;
  for (std::size_t i = lo; i < hi; ++i) {
    if (y[i] <= level) continue;
    const bool left = i == 0 || y[i] >= y[i - 1];
    const bool right = i + 1 == n || y[i] > y[i + 1];
    if (left && right) peaks.push_back(i);
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [&y](std::size_t a, std::size_t b) { return y[a] > y[b]; });

  const double dead_samples = result.dead_time * trace.sample_rate;
  std::set<std::size_t> kept;
  for (std::size_t p : peaks) {
    auto next = kept.lower_bound(p);
    if (next != kept.end() && static_cast<double>(*next - p) < dead_samples) continue;
    if (next != kept.begin()) {
      auto prev = std::prev(next);
      if (static_cast<double>(p - *prev) < dead_samples) continue;
    }
    kept.insert(p);
  }
  for (std::size_t p : kept) {
    result.events.push_back({trace.start_time + static_cast<double>(p) / trace.sample_rate,
                             y[p], y[p] / result.noise_sigma});
  }
  return result;
}

std::vector<EfficiencyPoint> detection_efficiency(std::span<const double> dp_grid,
                                                  const NoiseSpectrum& noise,
                                                  double sample_rate, std::size_t trials,
                                                  std::uint64_t seed,
                                                  const EfficiencyOptions& options) {
  if (trials < 100) throw ConfigError("efficiency scan needs >= 100 trials per point");
  const std::size_t len = options.trace_length;
  const auto kernel = matched_filter_kernel(noise, sample_rate, len);
  const double duration = static_cast<double>(len) / sample_rate;
  const std::size_t centre = len / 2;
  const double t_centre = static_cast<double>(centre) / sample_rate;
  const auto window = static_cast<double>(std::max<std::size_t>(1, kernel.half_width_samples()));

  struct Outcome {
    bool hit = false;
    double estimate = 0.0;
  };
  const std::size_t total = dp_grid.size() * trials;
  std::vector<Outcome> outcomes(total);

  auto run = [&](std::size_t job) {
    const std::size_t g = job / trials, t = job % trials;
    CollisionEvent ev;
    ev.time = t_centre;
    ev.impulse = dp_grid[g];
    std::vector<CollisionEvent> evs;
    if (dp_grid[g] > 0.0) evs.push_back(ev);
    const auto trace = synthesize_trace(evs, noise, sample_rate, duration,
                                        derive_seed(seed, g, t));
    DetectOptions opts;
    opts.dead_time = options.dead_time;
    const auto det = detect_impulses(trace, kernel, options.snr_threshold, opts);
    for (const auto& d : det.events) {
      if (std::abs(d.time - t_centre) * sample_rate <= window) {
        outcomes[job] = {true, d.impulse};
        break;
      }
    }
  };

  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(total)));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t j = w; j < total; j += threads) run(j);
      });
  }

  std::vector<EfficiencyPoint> curve;
  for (std::size_t g = 0; g < dp_grid.size(); ++g) {
    EfficiencyPoint pt;
    pt.impulse = dp_grid[g];
    pt.trials = trials;
    double sum = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      const auto& o = outcomes[g * trials + t];
      if (o.hit) {
        ++pt.detected;
        sum += o.estimate;
      }
    }
    pt.efficiency = static_cast<double>(pt.detected) / static_cast<double>(trials);
    pt.mean_estimate = pt.detected ? sum / static_cast<double>(pt.detected) : 0.0;
    curve.push_back(pt);
  }
  return curve;
}

} // namespace cgauge::detection
