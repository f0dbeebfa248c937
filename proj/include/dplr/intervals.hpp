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

// Per-coordinate Student-t confidence intervals for the empirical
// minimizer, built from m estimates harvested from noisy gradient descent
// by independent runs, checkpoints of one run, or batched means of one run.

#ifndef DPLR_INTERVALS_HPP_
#define DPLR_INTERVALS_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dplr/dataset.hpp"
#include "dplr/dpgd.hpp"
#include "dplr/errors.hpp"
#include "dplr/privacy.hpp"
#include "dplr/student_t.hpp"

namespace dplr {

enum class CiMethod { kIndependentRuns, kCheckpoints, kBatchedMeans };

inline const char* CiMethodName(CiMethod m) {
  switch (m) {
    case CiMethod::kIndependentRuns: return "runs";
    case CiMethod::kCheckpoints: return "checkpoints";
    case CiMethod::kBatchedMeans: return "batched";
  }
  return "?";
}

inline CiMethod ParseCiMethod(std::string_view name) {
  if (name == "runs") return CiMethod::kIndependentRuns;
  if (name == "checkpoints") return CiMethod::kCheckpoints;
  if (name == "batched") return CiMethod::kBatchedMeans;
  throw ValidationError("unknown CI method: " + std::string(name));
}

struct CiConfig {
  CiMethod method = CiMethod::kCheckpoints;
  std::int64_t m = 10;
  std::int64_t spacing = 100;  // T, steps per run / checkpoint gap / batch
  std::int64_t burn_in = 20;
  double alpha = 0.05;
  std::int64_t tail_window = 1;  // independent runs only

  void Validate() const {
    internal::Require(m >= 2, "m must be >= 2");
    internal::Require(spacing >= 1, "spacing T must be >= 1");
    internal::Require(burn_in >= 0, "burn-in must be >= 0");
    internal::Require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    internal::Require(tail_window >= 1, "tail window must be >= 1");
    if (method == CiMethod::kIndependentRuns) {
      internal::Require(tail_window <= burn_in + spacing,
                        "tail window exceeds the run length");
    }
  }

  // Gradient steps the whole procedure executes.
  std::int64_t TotalSteps() const {
    return method == CiMethod::kIndependentRuns ? m * (burn_in + spacing)
                                                : burn_in + m * spacing;
  }
};

// Largest spacing T whose schedule fits in `total_steps`; nullopt if none.
inline std::optional<std::int64_t> SpacingForBudget(CiMethod method,
                                                    std::int64_t m,
                                                    std::int64_t burn_in,
                                                    std::int64_t total_steps) {
  const std::int64_t t = method == CiMethod::kIndependentRuns
                             ? total_steps / m - burn_in
                             : (total_steps - burn_in) / m;
  if (t < 1) return std::nullopt;
  return t;
}

// lambda meeting rho over every step of the schedule.
inline double CalibrateForSchedule(double rho, double gamma, std::int64_t n,
                                   const CiConfig& ci) {
  ci.Validate();
  return CalibrateNoise(rho, gamma, n, ci.TotalSteps());
}

struct IntervalSet {
  VectorXd center;
  VectorXd half_width;
  std::vector<VectorXd> estimates;
  double privacy_spend = 0.0;

  VectorXd Lo() const { return center - half_width; }
  VectorXd Hi() const { return center + half_width; }
  // Per-coordinate indicator that target_j lies in the closed interval.
  Eigen::ArrayXi Covers(const VectorXd& target) const {
    return ((target - center).cwiseAbs().array() <= half_width.array()).cast<int>();
  }
};

// theta_bar_j +- t_{alpha/2, m-1} * s_j / sqrt(m), with s_j^2 the 1/(m-1)
// sample variance.
inline IntervalSet BuildInterval(const std::vector<VectorXd>& estimates,
                                 double alpha) {
  internal::Require(estimates.size() >= 2, "need at least two estimates");
  internal::Require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  const Index p = estimates.front().size();
  const double m = static_cast<double>(estimates.size());
  VectorXd center = VectorXd::Zero(p);
  for (const auto& e : estimates) {
    internal::Require(e.size() == p, "estimates must share one dimension");
    center += e;
  }
  center /= m;
  VectorXd ss = VectorXd::Zero(p);
  for (const auto& e : estimates) ss += (e - center).cwiseAbs2();
  const VectorXd sd = (ss / (m - 1.0)).cwiseSqrt();
  const double q = TQuantile(alpha / 2.0, m - 1.0);
  IntervalSet out;
  out.center = std::move(center);
  out.half_width = sd * (q / std::sqrt(m));
  out.estimates = estimates;
  return out;
}

struct EstimateSet {
  std::vector<VectorXd> estimates;
  double rho_spent = 0.0;  // +inf when the run is not private
  double clip_fraction = 0.0;
  std::int64_t total_steps = 0;
};

// Runs the schedule for ci.method with gd's (gamma, lambda, eta, theta0).
// gd.steps is ignored. Independent run l uses run_streams[l] when given,
// otherwise gd.stream.Child(l).
inline EstimateSet CollectEstimates(const Dataset& data, const GdConfig& gd,
                                    const CiConfig& ci,
                                    const std::vector<RngStream>& run_streams = {}) {
  ci.Validate();
  EstimateSet out;
  out.total_steps = ci.TotalSteps();
  std::int64_t clips = 0;

  GdConfig cfg = gd;
  cfg.keep_noise = false;
  const auto m = static_cast<std::size_t>(ci.m);
  if (ci.method == CiMethod::kIndependentRuns) {
    internal::Require(run_streams.empty() || run_streams.size() == m,
                      "need one stream per independent run");
    cfg.steps = ci.burn_in + ci.spacing;
    for (std::size_t l = 0; l < m; ++l) {
      cfg.stream = run_streams.empty() ? gd.stream.Child(l) : run_streams[l];
      const Trajectory traj = Run(data, cfg);
      clips += traj.TotalClips();
      out.estimates.push_back(TailAverage(traj, ci.tail_window));
    }
  } else {
    cfg.steps = ci.burn_in + ci.m * ci.spacing;
    const Trajectory traj = Run(data, cfg);
    clips = traj.TotalClips();
    for (std::int64_t l = 0; l < ci.m; ++l) {
      const Index end = ci.burn_in + (l + 1) * ci.spacing;  // exclusive
      if (ci.method == CiMethod::kCheckpoints) {
        out.estimates.push_back(traj.iterates.col(end - 1));
      } else {
        out.estimates.push_back(
            traj.iterates.middleCols(end - ci.spacing, ci.spacing).rowwise().mean());
      }
    }
  }

  out.clip_fraction = static_cast<double>(clips) /
                      (static_cast<double>(data.n()) * static_cast<double>(out.total_steps));
  if (std::isfinite(gd.gamma) && gd.lambda > 0.0) {
    out.rho_spent = MechanismCost({gd.gamma, data.n(), out.total_steps, gd.lambda}).rho();
  } else {
    out.rho_spent = std::numeric_limits<double>::infinity();
  }
  return out;
}

inline IntervalSet ConfidenceInterval(const Dataset& data, const GdConfig& gd,
                                      const CiConfig& ci) {
  EstimateSet est = CollectEstimates(data, gd, ci);
  IntervalSet out = BuildInterval(est.estimates, ci.alpha);
  out.privacy_spend = est.rho_spent;
  return out;
}

}  // namespace dplr

#endif  // DPLR_INTERVALS_HPP_
