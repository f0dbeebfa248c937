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

// zCDP accounting for full-batch clipped gradient descent.
//
// Adjacency is replace-one on a fixed sample size n: swapping one example
// moves the mean of n clipped gradients by at most 2 * gamma / n.

#ifndef DPLR_PRIVACY_HPP_
#define DPLR_PRIVACY_HPP_

#include <cmath>
#include <cstdint>

#include "dplr/errors.hpp"

namespace dplr {

// A rho-zCDP guarantee. Composition adds rho.
class PrivacyBudget {
 public:
  constexpr PrivacyBudget() = default;
  explicit PrivacyBudget(double rho) : rho_(rho) {
    internal::Require(std::isfinite(rho) && rho >= 0.0,
                      "rho must be finite and >= 0");
  }

  double rho() const { return rho_; }

  friend PrivacyBudget Compose(const PrivacyBudget& a, const PrivacyBudget& b) {
    return PrivacyBudget(a.rho_ + b.rho_);
  }

 private:
  double rho_ = 0.0;
};

struct MechanismSpec {
  double clip_threshold = 1.0;  // gamma
  std::int64_t n = 1;
  std::int64_t steps = 1;       // T
  double noise_scale = 1.0;     // lambda
};

inline double GradientSensitivity(double gamma, std::int64_t n) {
  internal::Require(gamma > 0.0 && std::isfinite(gamma),
                    "gamma must be positive and finite");
  internal::Require(n >= 1, "n must be >= 1");
  return 2.0 * gamma / static_cast<double>(n);
}

// Gaussian mechanism with L2 sensitivity delta and noise N(0, lambda^2 I).
inline PrivacyBudget StepCost(double delta, double lambda) {
  internal::Require(lambda > 0.0, "noise scale lambda must be > 0");
  internal::Require(delta >= 0.0, "sensitivity must be >= 0");
  return PrivacyBudget(delta * delta / (2.0 * lambda * lambda));
}

inline PrivacyBudget ComposeSteps(const PrivacyBudget& step, std::int64_t steps) {
  internal::Require(steps >= 0, "step count must be >= 0");
  PrivacyBudget total;
  for (std::int64_t t = 0; t < steps; ++t) total = Compose(total, step);
  return total;
}

// Total spend of `steps` noisy clipped-gradient steps.
inline PrivacyBudget MechanismCost(const MechanismSpec& m) {
  return ComposeSteps(StepCost(GradientSensitivity(m.clip_threshold, m.n),
                               m.noise_scale),
                      m.steps);
}

// Smallest lambda with lambda^2 >= 2 T gamma^2 / (rho n^2).
inline double CalibrateNoise(double rho, double gamma, std::int64_t n,
                             std::int64_t steps) {
  if (rho == 0.0) throw InfiniteNoise("rho = 0 requires infinite noise");
  internal::Require(rho > 0.0 && std::isfinite(rho), "rho must be positive");
  internal::Require(gamma > 0.0 && std::isfinite(gamma),
                    "gamma must be positive and finite");
  internal::Require(n >= 1 && steps >= 1, "n and steps must be >= 1");
  return gamma * std::sqrt(2.0 * static_cast<double>(steps) / rho) /
         static_cast<double>(n);
}

inline double ZcdpToDp(double rho, double delta) {
  internal::Require(rho >= 0.0, "rho must be >= 0");
  internal::Require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  return rho + 2.0 * std::sqrt(rho * std::log(1.0 / delta));
}

struct ZcdpConversion {
  double rho = 0.0;
  bool infeasible = false;  // no rho > 0 meets (epsilon, delta)
};

// Largest rho with rho + 2 sqrt(rho ln(1/delta)) <= epsilon. With
// s = sqrt(rho) and L = ln(1/delta) this is the positive root of
// s^2 + 2 sqrt(L) s - epsilon = 0.
inline ZcdpConversion DpToZcdp(double epsilon, double delta) {
  internal::Require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  internal::Require(std::isfinite(epsilon), "epsilon must be finite");
  if (!(epsilon > 0.0)) return {0.0, true};
  const double root_l = std::sqrt(std::log(1.0 / delta));
  // epsilon / (sqrt(L + eps) + sqrt(L)) avoids cancellation for small eps.
  const double s = epsilon / (std::sqrt(root_l * root_l + epsilon) + root_l);
  return {s * s, false};
}

}  // namespace dplr

#endif  // DPLR_PRIVACY_HPP_
