#pragma once

// Exact draws from a univariate normal restricted to an interval.
//
// The standardized interval [a, b] picks one of three accept/reject kernels:
//   - plain normal rejection when the interval holds a sizeable share of
//     the central mass;
//   - uniform proposals on [a, b] for narrow intervals;
//   - translated-exponential proposals (rate (a + sqrt(a^2 + 4)) / 2) for
//     one-sided tails away from the mean.
// Intervals lying entirely below the mean are reflected onto the positive
// half-line first. Every regime has acceptance probability bounded away
// from zero.

#include "betarestrict/errors.hpp"
#include "betarestrict/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace betarestrict {

template <typename Scalar>
struct BasicInterval {
  Scalar lower = -std::numeric_limits<Scalar>::infinity();
  Scalar upper = std::numeric_limits<Scalar>::infinity();

  static BasicInterval unbounded() { return {}; }
  bool contains(Scalar v) const { return v >= lower && v <= upper; }
  bool bounded_below() const { return std::isfinite(lower); }
  bool bounded_above() const { return std::isfinite(upper); }
};

using Interval = BasicInterval<double>;

namespace detail {

// Below this left endpoint a normal proposal beats the exponential one.
inline constexpr double kNormalVsExponential = 0.2570;

// Right endpoint up to which uniform proposals beat exponential ones for a
// positive left endpoint a.
inline double uniform_cutoff(double a) {
  const double root = std::sqrt(a * a + 4.0);
  return a + 2.0 * std::sqrt(std::numbers::e) / (a + root) * std::exp((a * a - a * root) / 4.0);
}

inline double normal_rejection(double a, double b, RngStream& rng) {
  for (;;) {
    const double z = rng.normal();
    if (z >= a && z <= b) return z;
  }
}

// Uniform proposal on [a, b], accepted with phi(z) / max_[a,b] phi.
inline double uniform_rejection(double a, double b, RngStream& rng) {
  const double peak = (a <= 0.0 && b >= 0.0) ? 0.0 : (a > 0.0 ? a * a : b * b);
  for (;;) {
    const double z = a + (b - a) * rng.uniform();
    if (std::log(rng.uniform()) <= 0.5 * (peak - z * z)) return z;
  }
}

inline double exponential_rejection(double a, double b, RngStream& rng) {
  const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a + rng.exponential() / rate;
    if (z > b) continue;
    const double d = z - rate;
    if (std::log(rng.uniform()) <= -0.5 * d * d) return z;
  }
}

// Standard normal restricted to [a, b] with 0 <= a < b (b may be +inf).
inline double sample_right_of_mean(double a, double b, RngStream& rng) {
  if (std::isfinite(b) && b <= uniform_cutoff(a)) return uniform_rejection(a, b, rng);
  if (a < kNormalVsExponential) return normal_rejection(a, b, rng);
  return exponential_rejection(a, b, rng);
}

inline double sample_standard(double a, double b, RngStream& rng) {
  if (a <= 0.0 && b >= 0.0) {
    // Interval straddles the mean: uniform when narrower than sqrt(2 pi),
    // otherwise plain rejection keeps at least ~half the draws.
    const double width = b - a;
    if (width < std::sqrt(2.0 * std::numbers::pi)) return uniform_rejection(a, b, rng);
    return normal_rejection(a, b, rng);
  }
  if (a > 0.0) return sample_right_of_mean(a, b, rng);
  return -sample_right_of_mean(-b, -a, rng);
}

}  // namespace detail

/// One draw from N(mu, sigma^2) restricted to `bounds`.
template <typename Scalar>
Scalar sample_truncated_normal(Scalar mu, Scalar sigma, const BasicInterval<Scalar>& bounds,
                               RngStream& rng) {
  if (!(sigma > Scalar(0)) || !std::isfinite(sigma)) {
    throw DomainError("sample_truncated_normal: sigma must be positive, got " +
                      std::to_string(static_cast<double>(sigma)));
  }
  if (!(bounds.lower < bounds.upper)) {
    throw EmptyIntervalError("sample_truncated_normal: empty interval [" +
                             std::to_string(static_cast<double>(bounds.lower)) + ", " +
                             std::to_string(static_cast<double>(bounds.upper)) + "]");
  }
  if (!bounds.bounded_below() && !bounds.bounded_above()) {
    return mu + sigma * Scalar(rng.normal());
  }
  const double a = static_cast<double>((bounds.lower - mu) / sigma);
  const double b = static_cast<double>((bounds.upper - mu) / sigma);
  const Scalar draw = mu + sigma * Scalar(detail::sample_standard(a, b, rng));
  // Rescaling can round a boundary draw a hair outside the interval.
  return std::min(std::max(draw, bounds.lower), bounds.upper);
}

}  // namespace betarestrict
