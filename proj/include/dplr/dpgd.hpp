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

// Full-batch gradient descent on the squared loss with per-example clipping
// and Gaussian noise, together with the exact Gaussian law of its iterates
// when nothing is clipped.

#ifndef DPLR_DPGD_HPP_
#define DPLR_DPGD_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dplr/dataset.hpp"
#include "dplr/errors.hpp"
#include "dplr/rng.hpp"

namespace dplr {

// Clip threshold meaning "never clip".
inline constexpr double kNoClip = std::numeric_limits<double>::infinity();

struct GdConfig {
  double gamma = kNoClip;
  double lambda = 0.0;
  double eta = 0.25;
  std::int64_t steps = 1;
  VectorXd theta0;  // empty means the zero vector
  RngStream stream;
  bool keep_noise = true;

  void Validate(Index p) const {
    internal::Require(gamma > 0.0, "gamma must be > 0 (or kNoClip)");
    internal::Require(std::isfinite(lambda) && lambda >= 0.0,
                      "lambda must be finite and >= 0");
    internal::Require(std::isfinite(eta) && eta > 0.0, "eta must be > 0");
    internal::Require(steps >= 1, "steps must be >= 1");
    internal::Require(theta0.size() == 0 || theta0.size() == p,
                      "theta0 length must equal p");
  }

  VectorXd Start(Index p) const {
    return theta0.size() == 0 ? VectorXd::Zero(p) : theta0;
  }
};

struct Trajectory {
  MatrixXd iterates;                       // p x T, column t-1 holds theta_t
  std::vector<std::int64_t> clip_counts;   // per step
  MatrixXd noise;                          // p x T, or empty if dropped
  GdConfig config;

  Index steps() const { return iterates.cols(); }
  VectorXd Final() const { return iterates.col(iterates.cols() - 1); }
  std::int64_t TotalClips() const {
    std::int64_t total = 0;
    for (auto c : clip_counts) total += c;
    return total;
  }
};

// v * min(1, gamma / ||v||). The zero vector maps to itself.
inline VectorXd Clip(const VectorXd& v, double gamma) {
  internal::Require(gamma > 0.0, "gamma must be > 0");
  const double norm = v.norm();
  if (norm <= gamma) return v;
  return v * (gamma / norm);
}

struct ClippedGradient {
  VectorXd gradient;
  std::int64_t clipped = 0;
};

// (1/n) sum_i CLIP_gamma(-x_i (y_i - x_i^T theta)).
//
// Each per-example gradient is -x_i r_i with norm ||x_i|| |r_i|, so clipping
// reduces to a per-row weight. With no clipping every weight is exactly 1,
// which keeps clipped and unclipped runs bit-identical on clip-free steps.
inline ClippedGradient MeanClippedGradient(const Dataset& data,
                                           const VectorXd& theta,
                                           double gamma) {
  VectorXd r = data.y() - data.x() * theta;
  const VectorXd& norms = data.row_norms();
  std::int64_t clipped = 0;
  for (Index i = 0; i < r.size(); ++i) {
    const double g = norms[i] * std::abs(r[i]);
    if (g > gamma) {
      r[i] *= gamma / g;
      ++clipped;
    }
  }
  VectorXd grad = data.x().transpose() * r;
  grad *= -1.0 / static_cast<double>(data.n());
  return {std::move(grad), clipped};
}

// theta_t = theta_{t-1} - eta * g_t + eta * z_t, z_t ~ N(0, lambda^2 I).
// Noise for step t is drawn after the gradient at theta_{t-1} and before
// step t+1, one vector per step with coordinates in index order.
inline Trajectory Run(const Dataset& data, const GdConfig& config) {
  const Index p = data.p();
  config.Validate(p);
  Rng rng(config.stream);

  Trajectory out;
  out.config = config;
  out.iterates.resize(p, config.steps);
  out.clip_counts.reserve(static_cast<std::size_t>(config.steps));
  if (config.keep_noise) out.noise.resize(p, config.steps);

  VectorXd theta = config.Start(p);
  for (std::int64_t t = 0; t < config.steps; ++t) {
    ClippedGradient g = MeanClippedGradient(data, theta, config.gamma);
    const VectorXd z = rng.NormalVector(p, config.lambda);
    theta -= config.eta * g.gradient;
    theta += config.eta * z;
    out.iterates.col(t) = theta;
    out.clip_counts.push_back(g.clipped);
    if (config.keep_noise) out.noise.col(t) = z;
  }
  return out;
}

struct CoupledTrajectories {
  Trajectory clipped;
  Trajectory unclipped;
};

// Runs the clipped algorithm and its gamma = +inf twin on one noise stream.
inline CoupledTrajectories CoupledRun(const Dataset& data,
                                      const GdConfig& config) {
  internal::Require(std::isfinite(config.gamma),
                    "coupled runs need a finite clip threshold");
  GdConfig free = config;
  free.gamma = kNoClip;
  return {Run(data, config), Run(data, free)};
}

inline VectorXd TailAverage(const Trajectory& traj, Index window) {
  internal::Require(window >= 1 && window <= traj.steps(),
                    "tail window must lie in [1, T]");
  return traj.iterates.rightCols(window).rowwise().mean();
}

// Exact law of theta_t without clipping:
//   mean       = theta_hat + (I - eta Sigma)^t (theta0 - theta_hat)
//   covariance = eta^2 lambda^2 A(t),  A(t) = (I - D)^{-1} (I - D^t),
//   D = (I - eta Sigma)^2.
struct IterateLaw {
  std::int64_t t = 0;
  VectorXd mean;
  MatrixXd covariance;
  MatrixXd a;  // A(t)
};

// Spectral data shared by the law and its cross-checks.
struct StepGeometry {
  VectorXd theta_hat;
  VectorXd sigma_eigenvalues;
  MatrixXd sigma_eigenvectors;
  VectorXd contraction;  // eigenvalues of I - eta Sigma
};

inline StepGeometry ComputeStepGeometry(const Dataset& data, double eta) {
  const CovarianceSummary cov = EmpiricalCovariance(data);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov.sigma_hat);
  StepGeometry g;
  g.theta_hat = OlsSolve(data);
  g.sigma_eigenvalues = eig.eigenvalues();
  g.sigma_eigenvectors = eig.eigenvectors();
  g.contraction = (1.0 - eta * g.sigma_eigenvalues.array()).matrix();
  return g;
}

// Q diag(f(mu_k)) Q^T for the eigenpairs of Sigma.
template <typename F>
MatrixXd SpectralFunction(const StepGeometry& g, F&& f) {
  VectorXd d(g.sigma_eigenvalues.size());
  for (Index k = 0; k < d.size(); ++k) d[k] = f(k);
  const MatrixXd& q = g.sigma_eigenvectors;
  MatrixXd out = q * d.asDiagonal() * q.transpose();
  return 0.5 * (out + out.transpose());
}

inline IterateLaw ComputeIterateLaw(const Dataset& data, const GdConfig& config,
                                    std::int64_t t) {
  config.Validate(data.p());
  internal::Require(t >= 1, "step index must be >= 1");
  const StepGeometry g = ComputeStepGeometry(data, config.eta);

  constexpr double kSingularTol = 1e-13;
  for (Index k = 0; k < g.contraction.size(); ++k) {
    const double d = g.contraction[k] * g.contraction[k];
    if (std::abs(1.0 - d) < kSingularTol) {
      throw SingularGeometry("I - D is singular: (1 - eta*mu)^2 == 1");
    }
  }

  const double td = static_cast<double>(t);
  const MatrixXd power = SpectralFunction(
      g, [&](Index k) { return std::pow(g.contraction[k], td); });
  MatrixXd a = SpectralFunction(g, [&](Index k) {
    const double d = g.contraction[k] * g.contraction[k];
    return (1.0 - std::pow(d, td)) / (1.0 - d);
  });

  IterateLaw law;
  law.t = t;
  const VectorXd start = config.Start(data.p());
  law.mean = g.theta_hat + power * (start - g.theta_hat);
  const double scale = config.eta * config.eta * config.lambda * config.lambda;
  law.covariance = scale * a;
  law.a = std::move(a);
  return law;
}

// sum_{i=1}^{t} D^{i-1} by explicit accumulation.
inline MatrixXd GeometricPartialSum(const MatrixXd& d, std::int64_t t) {
  MatrixXd sum = MatrixXd::Zero(d.rows(), d.cols());
  MatrixXd power = MatrixXd::Identity(d.rows(), d.cols());
  for (std::int64_t i = 0; i < t; ++i) {
    sum += power;
    power = power * d;
  }
  return sum;
}

// D = (I - eta Sigma)^2 formed directly from Sigma.
inline MatrixXd StepMatrixD(const Dataset& data, double eta) {
  const CovarianceSummary cov = EmpiricalCovariance(data);
  const MatrixXd m =
      MatrixXd::Identity(data.p(), data.p()) - eta * cov.sigma_hat;
  return m * m;
}

// The per-datum Huber loss equivalent to clipping: B_i = gamma / ||x_i||,
//   l_B(r) = r^2 / 2          if |r| <= B
//          = B (|r| - B / 2)  otherwise.
// A zero row has B_i = +inf (plain squared loss).
struct HuberValue {
  double loss = 0.0;
  VectorXd grad;
};

inline HuberValue HuberObjective(const Dataset& data, const VectorXd& theta,
                                 double gamma) {
  internal::Require(gamma > 0.0, "gamma must be > 0");
  internal::Require(theta.size() == data.p(), "theta length must equal p");
  const VectorXd r = data.y() - data.x() * theta;
  const VectorXd& norms = data.row_norms();
  double loss = 0.0;
  for (Index i = 0; i < r.size(); ++i) {
    const double b = norms[i] > 0.0 ? gamma / norms[i] : kNoClip;
    const double a = std::abs(r[i]);
    loss += a <= b ? 0.5 * r[i] * r[i] : b * (a - 0.5 * b);
  }
  HuberValue out;
  out.loss = loss / static_cast<double>(data.n());
  out.grad = MeanClippedGradient(data, theta, gamma).gradient;
  return out;
}

}  // namespace dplr

#endif  // DPLR_DPGD_HPP_
