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

// Comparison estimators: least squares with textbook Wald intervals, and
// AdaSSP (sufficient-statistics perturbation with an adaptive ridge).

#ifndef DPLR_BASELINES_HPP_
#define DPLR_BASELINES_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "dplr/dataset.hpp"
#include "dplr/errors.hpp"
#include "dplr/privacy.hpp"
#include "dplr/rng.hpp"
#include "dplr/student_t.hpp"

namespace dplr {

enum class BaselineMethod { kOls, kAdassp };

inline const char* BaselineMethodName(BaselineMethod m) {
  return m == BaselineMethod::kOls ? "ols" : "adassp";
}

struct BaselineResult {
  VectorXd estimate;
  BaselineMethod method = BaselineMethod::kOls;
  std::optional<VectorXd> lo;  // OLS only
  std::optional<VectorXd> hi;
  double privacy_spend = 0.0;
};

// theta_hat_j +- t_{alpha/2, n-p} s sqrt([(X^T X)^{-1}]_jj),
// s^2 = ||y - X theta_hat||^2 / (n - p).
inline BaselineResult OlsWithCi(const Dataset& data, double alpha) {
  internal::Require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  if (data.n() <= data.p()) {
    throw DegenerateInference("OLS intervals need n > p");
  }
  BaselineResult out;
  out.method = BaselineMethod::kOls;
  out.estimate = OlsSolve(data);
  const double dof = static_cast<double>(data.n() - data.p());
  const double s2 = (data.y() - data.x() * out.estimate).squaredNorm() / dof;
  const MatrixXd gram = data.x().transpose() * data.x();
  const MatrixXd inv = gram.llt().solve(MatrixXd::Identity(data.p(), data.p()));
  const VectorXd se = (s2 * inv.diagonal().array()).sqrt().matrix();
  const double q = TQuantile(alpha / 2.0, dof);
  out.lo = out.estimate - q * se;
  out.hi = out.estimate + q * se;
  out.privacy_spend = 0.0;
  return out;
}

struct AdasspOptions {
  // Failure probability for the private eigenvalue lower bound and for the
  // spectral bound on the Gram-matrix noise that sets the ridge.
  double zeta = 0.05;
};

// Replace-one adjacency throughout, with rows clipped to ||x|| <= x_bound
// and labels to |y| <= y_bound:
//   lambda_min(X^T X)  sensitivity x_bound^2
//   X^T X (Frobenius)  sensitivity sqrt(2) x_bound^2
//   X^T y              sensitivity 2 x_bound y_bound
// Each release gets rho / 3. Noise is drawn in a fixed order (eigenvalue
// scalar, upper triangle of the Gram noise column by column, then the X^T y
// vector) independent of the row order of the data.
inline BaselineResult AdasspFit(const Dataset& data, double rho, double x_bound,
                                double y_bound, const RngStream& stream,
                                const AdasspOptions& options = {}) {
  internal::Require(rho > 0.0, "rho must be > 0");
  internal::Require(x_bound > 0.0 && y_bound > 0.0, "bounds must be > 0");
  internal::Require(options.zeta > 0.0 && options.zeta < 1.0, "zeta must lie in (0, 1)");
  const Index p = data.p();
  const double dp = static_cast<double>(p);

  MatrixXd x = data.x();
  for (Index i = 0; i < x.rows(); ++i) {
    const double norm = data.row_norms()[i];
    if (norm > x_bound) x.row(i) *= x_bound / norm;
  }
  const VectorXd y = data.y().cwiseMax(-y_bound).cwiseMin(y_bound);

  const double rho_part = rho / 3.0;
  const double bx2 = x_bound * x_bound;
  const double sens_eig = bx2;
  const double sens_gram = std::sqrt(2.0) * bx2;
  const double sens_xy = 2.0 * x_bound * y_bound;
  const double sd_eig = sens_eig / std::sqrt(2.0 * rho_part);
  const double sd_gram = sens_gram / std::sqrt(2.0 * rho_part);
  const double sd_xy = sens_xy / std::sqrt(2.0 * rho_part);

  MatrixXd gram = x.transpose() * x;
  gram = 0.5 * (gram + gram.transpose());
  const VectorXd xty = x.transpose() * y;

  Rng rng(stream);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmin_private =
      std::max(lmin + sd_eig * rng.Normal() -
                   sd_eig * std::sqrt(2.0 * std::log(1.0 / options.zeta)),
               0.0);
  const double ridge = std::max(
      0.0, sd_gram * std::sqrt(dp * std::log(2.0 * dp * dp / options.zeta)) - lmin_private);

  MatrixXd noisy_gram = gram;
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double z = sd_gram * rng.Normal();
      noisy_gram(i, j) += z;
      if (i != j) noisy_gram(j, i) += z;
    }
  }
  VectorXd noisy_xty = xty;
  for (Index j = 0; j < p; ++j) noisy_xty[j] += sd_xy * rng.Normal();

  noisy_gram.diagonal().array() += ridge;
  BaselineResult out;
  out.method = BaselineMethod::kAdassp;
  out.estimate = noisy_gram.colPivHouseholderQr().solve(noisy_xty);

  PrivacyBudget spend = StepCost(sens_eig, sd_eig);
  spend = Compose(spend, StepCost(sens_gram, sd_gram));
  spend = Compose(spend, StepCost(sens_xy, sd_xy));
  out.privacy_spend = spend.rho();
  return out;
}

}  // namespace dplr

#endif  // DPLR_BASELINES_HPP_
