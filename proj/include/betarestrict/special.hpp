#pragma once

// Log-gamma, digamma and trigamma for positive real arguments.
//
// All three shift the argument upward with the usual recurrences until it
// reaches kAsymptoticStart, then evaluate the Stirling-type asymptotic
// series. With the start at 10 the first omitted term is below 1e-16.

#include "betarestrict/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <type_traits>

namespace betarestrict {

namespace detail {

inline constexpr double kAsymptoticStart = 10.0;

template <typename Scalar>
void require_positive(Scalar x, const char* fn) {
  if (!(x > Scalar(0)) || !std::isfinite(x)) {
    throw DomainError(std::string(fn) + ": argument must be positive and finite, got " +
                      std::to_string(static_cast<double>(x)));
  }
}

}  // namespace detail

/// ln Gamma(x) for x > 0.
template <typename Scalar>
Scalar log_gamma(Scalar x) {
  static_assert(std::is_floating_point_v<Scalar>);
  detail::require_positive(x, "log_gamma");
  using std::log;

  // Gamma(x) = Gamma(x + k) / (x (x+1) ... (x+k-1))
  Scalar shift_product(1);
  while (x < Scalar(detail::kAsymptoticStart)) {
    shift_product *= x;
    x += Scalar(1);
  }

  const Scalar inv = Scalar(1) / x;
  const Scalar inv2 = inv * inv;
  // B_2k / (2k (2k-1)) for k = 1..8
  const Scalar series =
      inv * (Scalar(1.0 / 12) +
             inv2 * (Scalar(-1.0 / 360) +
                     inv2 * (Scalar(1.0 / 1260) +
                             inv2 * (Scalar(-1.0 / 1680) +
                                     inv2 * (Scalar(1.0 / 1188) +
                                             inv2 * (Scalar(-691.0 / 360360) +
                                                     inv2 * (Scalar(1.0 / 156) +
                                                             inv2 * Scalar(-3617.0 / 122400))))))));
  const Scalar half_log_two_pi = Scalar(0.91893853320467274178032973640562);
  return (x - Scalar(0.5)) * log(x) - x + half_log_two_pi + series - log(shift_product);
}

/// Psi(x) = d/dx ln Gamma(x) for x > 0.
template <typename Scalar>
Scalar digamma(Scalar x) {
  static_assert(std::is_floating_point_v<Scalar>);
  detail::require_positive(x, "digamma");

  Scalar result(0);
  while (x < Scalar(detail::kAsymptoticStart)) {
    result -= Scalar(1) / x;
    x += Scalar(1);
  }
  const Scalar inv2 = Scalar(1) / (x * x);
  const Scalar series =
      inv2 * (Scalar(1.0 / 12) -
              inv2 * (Scalar(1.0 / 120) -
                      inv2 * (Scalar(1.0 / 252) -
                              inv2 * (Scalar(1.0 / 240) -
                                      inv2 * (Scalar(1.0 / 132) -
                                              inv2 * (Scalar(691.0 / 32760) -
                                                      inv2 * Scalar(1.0 / 12)))))));
  return result + std::log(x) - Scalar(0.5) / x - series;
}

/// Psi'(x) for x > 0.
template <typename Scalar>
Scalar trigamma(Scalar x) {
  static_assert(std::is_floating_point_v<Scalar>);
  detail::require_positive(x, "trigamma");

  Scalar result(0);
  while (x < Scalar(detail::kAsymptoticStart)) {
    result += Scalar(1) / (x * x);
    x += Scalar(1);
  }
  const Scalar inv = Scalar(1) / x;
  const Scalar inv2 = inv * inv;
  // sum_k B_2k / x^(2k+1), k = 1..8
  const Scalar series =
      inv * inv2 *
      (Scalar(1.0 / 6) +
       inv2 * (Scalar(-1.0 / 30) +
               inv2 * (Scalar(1.0 / 42) +
                       inv2 * (Scalar(-1.0 / 30) +
                               inv2 * (Scalar(5.0 / 66) +
                                       inv2 * (Scalar(-691.0 / 2730) +
                                               inv2 * (Scalar(7.0 / 6) +
                                                       inv2 * Scalar(-3617.0 / 510))))))));
  return result + inv + Scalar(0.5) * inv2 + series;
}

}  // namespace betarestrict
