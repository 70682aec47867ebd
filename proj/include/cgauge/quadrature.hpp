#pragma once

#include "cgauge/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

namespace cgauge::quadrature {

struct Result {
  double value = 0.0;
  double error = 0.0;
};

namespace detail {

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

// One 31-point Gauss-Kronrod panel. The rule is applied on [-1, 1] with the
// Jacobian folded into the integrand, so the reported error needs no
// rescaling.
template <class G>
Panel panel(G& g, double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  auto h = [&](double t) { return g(mid + half * t) * half; };
  double err = 0.0;
  const double v = gauss_kronrod<double, 31>::integrate(h, -1.0, 1.0, 0, 0.0, &err);
  return {a, b, v, err};
}

} // namespace detail

/// Adaptive 31-point Gauss-Kronrod on [a, b] (b may be +infinity), refining
/// the panel with the largest error until the summed error is at most
/// max(rel_tol * |value|, abs_tol). Throws NumericError otherwise.
template <class F>
Result integrate(F&& f, double a, double b, double rel_tol = 1e-9,
                 double abs_tol = 0.0, unsigned max_panels = 2000) {
  const bool infinite = std::isinf(b);
  if (std::isinf(a) || !(b >= a))
    throw DomainError("quadrature: need finite a <= b");
  if (a == b) return {};

  // [a, inf) maps to [0, 1) through x = a + t / (1 - t).
  auto g = [&](double t) -> double {
    if (!infinite) return f(t);
    if (t >= 1.0) return 0.0;
    const double s = 1.0 - t;
    return f(a + t / s) / (s * s);
  };
  const double lo = infinite ? 0.0 : a;
  const double hi = infinite ? 1.0 : b;

  std::priority_queue<detail::Panel> heap;
  auto first = detail::panel(g, lo, hi);
  double value = first.value, error = first.error;
  heap.push(first);
  while (true) {
    const double allowed = std::max(rel_tol * std::abs(value), abs_tol);
    if (error <= allowed) break;
    if (heap.size() >= max_panels || !std::isfinite(value)) {
      std::ostringstream msg;
      msg << "quadrature did not converge on [" << a << ", " << b << "]: value " << value
          << ", error estimate " << error << " (requested relative " << rel_tol << ")";
      const double achieved = value != 0.0 ? error / std::abs(value)
                                           : std::numeric_limits<double>::infinity();
      throw NumericError(msg.str(), achieved);
    }
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const auto left = detail::panel(g, worst.a, mid);
    const auto right = detail::panel(g, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed the drift of the running updates.
  Result r;
  while (!heap.empty()) {
    r.value += heap.top().value;
    r.error += heap.top().error;
    heap.pop();
  }
  return r;
}

} // namespace cgauge::quadrature
