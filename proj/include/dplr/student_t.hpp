//
// Copyright 2026 The dplr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPLR_STUDENT_T_HPP_
#define DPLR_STUDENT_T_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dplr/errors.hpp"

namespace dplr {
namespace internal {

// Continued fraction for I_x(a, b), modified Lentz evaluation. `y` is 1 - x
// supplied separately so callers can avoid cancellation near x = 1.
inline double BetaContinuedFraction(double a, double b, double x) {
  constexpr int kMaxIter = 200000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace internal

// Regularized incomplete beta I_x(a, b), with y = 1 - x passed explicitly.
inline double RegularizedIncompleteBeta(double a, double b, double x, double y) {
  internal::Require(a > 0.0 && b > 0.0, "beta parameters must be > 0");
  internal::Require(x >= 0.0 && x <= 1.0, "x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (y == 0.0) return 1.0;
  const double log_front = a * std::log(x) + b * std::log(y) +
                           std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * internal::BetaContinuedFraction(a, b, x) / a;
  }
  return 1.0 - front * internal::BetaContinuedFraction(b, a, y) / b;
}

inline double RegularizedIncompleteBeta(double a, double b, double x) {
  return RegularizedIncompleteBeta(a, b, x, 1.0 - x);
}

inline double StudentTDensity(double q, double df) {
  const double log_c = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                       0.5 * std::log(df * std::numbers::pi);
  return std::exp(log_c - 0.5 * (df + 1.0) * std::log1p(q * q / df));
}

// P[T_df > q].
inline double StudentTUpperTail(double q, double df) {
  internal::Require(df > 0.0, "degrees of freedom must be > 0");
  if (std::isinf(q)) return q > 0 ? 0.0 : 1.0;
  const double q2 = q * q;
  const double x = df / (df + q2);
  const double y = q2 / (df + q2);
  const double half = 0.5 * RegularizedIncompleteBeta(0.5 * df, 0.5, x, y);
  return q >= 0.0 ? half : 1.0 - half;
}

// q with P[T_df > q] = alpha. Brackets the root by doubling, then runs
// Newton steps on the tail probability, falling back to bisection whenever
// a step leaves the bracket.
inline double TQuantile(double alpha, double df) {
  internal::Require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  internal::Require(df >= 1.0 && std::isfinite(df), "df must be >= 1");
  if (alpha == 0.5) return 0.0;
  if (alpha > 0.5) return -TQuantile(1.0 - alpha, df);

  double lo = 0.0;
  double hi = 1.0;
  while (StudentTUpperTail(hi, df) > alpha) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) return std::numeric_limits<double>::infinity();
  }
  double q = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = StudentTUpperTail(q, df) - alpha;
    if (f > 0.0) {
      lo = q;
    } else {
      hi = q;
    }
    if (f == 0.0) break;
    const double slope = -StudentTDensity(q, df);
    double next = q - f / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - q) <= 1e-15 * std::max(1.0, std::abs(q))) {
      q = next;
      break;
    }
    q = next;
  }
  return q;
}

}  // namespace dplr

#endif  // DPLR_STUDENT_T_HPP_
