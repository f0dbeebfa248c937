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

// Evaluates the five-clause no-clipping condition on a concrete dataset
// and the noise-ratio requirement under which clipped gradient descent
// clips nothing with probability at least 1 - beta.

#ifndef DPLR_CONDITIONS_HPP_
#define DPLR_CONDITIONS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dplr/dataset.hpp"
#include "dplr/errors.hpp"

namespace dplr {

enum class Clause : int { kSpectrum = 0, kCovariateNorm, kResidual, kDirection, kCrossTerm };
inline constexpr int kNumClauses = 5;

inline const char* ClauseName(int k) {
  static constexpr std::array<const char*, kNumClauses> kNames = {
      "spectrum", "covariate_norm", "residual", "direction", "cross_term"};
  return kNames.at(static_cast<std::size_t>(k));
}

// Location (example i, step t) attaining a clause's worst margin; -1 when
// the clause has no such index.
struct ClauseWitness {
  std::int64_t i = -1;
  std::int64_t t = -1;
};

struct ConditionReport {
  double c0 = 0.0;
  double sigma = 0.0;
  double eta = 0.0;
  std::int64_t steps = 0;
  VectorXd theta_ref;

  std::array<bool, kNumClauses> clause_pass{};
  // (bound - achieved) / bound; negative when violated.
  std::array<double, kNumClauses> clause_margin{};
  std::array<double, kNumClauses> clause_value{};
  std::array<double, kNumClauses> clause_bound{};
  std::array<ClauseWitness, kNumClauses> worst{};
  std::vector<std::string> errors;

  bool AllPass() const {
    for (bool b : clause_pass)
      if (!b) return false;
    return true;
  }
};

// c0 = 12 ln^{1.5}(5 n T / beta), the value at which Gaussian data meet the
// condition with probability 1 - beta.
inline double HighProbabilityC0(std::int64_t n, std::int64_t steps, double beta) {
  internal::Require(n >= 1 && steps >= 1, "n and T must be >= 1");
  internal::Require(beta > 0.0 && beta < 1.0, "beta must lie in (0, 1)");
  const double l = std::log(5.0 * static_cast<double>(n) *
                            static_cast<double>(steps) / beta);
  return 12.0 * std::pow(l, 1.5);
}

enum class CrossTermRoute { kEigenbasis, kMatrixProduct };

// Statistics |sum_j (y_j - x_j^T theta) x_i^T A_t x_j| for i in [n], with
// A_t = (I - (I - eta Sigma)^t) Sigma^{-1}. Both routes evaluate
// x_i^T A_t u for u = X^T (y - X theta); the eigenbasis route diagonalizes
// Sigma once, the matrix route forms A_t from explicit powers and an LU
// inverse.
class CrossTerm {
 public:
  CrossTerm(const Dataset& data, const VectorXd& theta, double eta,
            CrossTermRoute route = CrossTermRoute::kEigenbasis)
      : data_(data), eta_(eta), route_(route) {
    const double n = static_cast<double>(data.n());
    sigma_ = data.x().transpose() * data.x() / n;
    sigma_ = 0.5 * (sigma_ + sigma_.transpose());
    u_ = data.x().transpose() * (data.y() - data.x() * theta);
    if (route_ == CrossTermRoute::kEigenbasis) {
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sigma_);
      mu_ = eig.eigenvalues();
      if (!(mu_.minCoeff() > 1e-12 * std::max(1.0, mu_.maxCoeff()))) {
        throw SingularCovariance("empirical covariance is singular");
      }
      q_ = eig.eigenvectors();
      qu_ = q_.transpose() * u_;
    } else {
      Eigen::FullPivLU<MatrixXd> lu(sigma_);
      if (!lu.isInvertible()) {
        throw SingularCovariance("empirical covariance is singular");
      }
      sigma_inv_ = lu.inverse();
    }
  }

  VectorXd Values(std::int64_t t) const {
    const Index p = sigma_.rows();
    VectorXd au;
    if (route_ == CrossTermRoute::kEigenbasis) {
      VectorXd w = qu_;
      for (Index k = 0; k < p; ++k) {
        w[k] *= (1.0 - std::pow(1.0 - eta_ * mu_[k], static_cast<double>(t))) / mu_[k];
      }
      au = q_ * w;
    } else {
      const MatrixXd m = MatrixXd::Identity(p, p) - eta_ * sigma_;
      MatrixXd power = MatrixXd::Identity(p, p);
      for (std::int64_t s = 0; s < t; ++s) power = power * m;
      au = (MatrixXd::Identity(p, p) - power) * sigma_inv_ * u_;
    }
    return (data_.x() * au).cwiseAbs();
  }

 private:
  const Dataset& data_;
  double eta_;
  CrossTermRoute route_;
  MatrixXd sigma_;
  VectorXd u_;
  VectorXd mu_;
  MatrixXd q_;
  VectorXd qu_;
  MatrixXd sigma_inv_;
};

namespace internal {

inline double RelativeMargin(double bound, double value) {
  if (bound == 0.0) {
    return value == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
  }
  return (bound - value) / bound;
}

}  // namespace internal

inline ConditionReport CheckConditions(const Dataset& data,
                                       const VectorXd& theta_ref, double sigma,
                                       double eta, std::int64_t steps, double c0) {
  internal::Require(theta_ref.size() == data.p(), "theta length must equal p");
  internal::Require(sigma >= 0.0 && eta >= 0.0 && c0 >= 0.0,
                    "sigma, eta and c0 must be >= 0");
  internal::Require(steps >= 1, "T must be >= 1");

  ConditionReport rep;
  rep.c0 = c0;
  rep.sigma = sigma;
  rep.eta = eta;
  rep.steps = steps;
  rep.theta_ref = theta_ref;

  const Index n = data.n();
  const Index p = data.p();
  const double sqrt_p = std::sqrt(static_cast<double>(p));
  auto set = [&rep](Clause c, double bound, double value, ClauseWitness w) {
    const int k = static_cast<int>(c);
    rep.clause_bound[k] = bound;
    rep.clause_value[k] = value;
    rep.clause_margin[k] = internal::RelativeMargin(bound, value);
    rep.clause_pass[k] = rep.clause_margin[k] >= 0.0;
    rep.worst[k] = w;
  };

  // (i) 1/2 I <= Sigma <= 2 I and ||I - eta Sigma|| <= 7/8. The reported
  // margin is the smallest of the three relative margins.
  const CovarianceSummary cov = EmpiricalCovariance(data);
  {
    const double contraction = std::max(std::abs(1.0 - eta * cov.lambda_min),
                                        std::abs(1.0 - eta * cov.lambda_max));
    const double m_lo = (cov.lambda_min - 0.5) / 0.5;
    const double m_hi = internal::RelativeMargin(2.0, cov.lambda_max);
    const double m_c = internal::RelativeMargin(7.0 / 8.0, contraction);
    const int k = static_cast<int>(Clause::kSpectrum);
    rep.clause_bound[k] = 7.0 / 8.0;
    rep.clause_value[k] = contraction;
    rep.clause_margin[k] = std::min({m_lo, m_hi, m_c});
    rep.clause_pass[k] = rep.clause_margin[k] >= 0.0;
  }

  // (ii) ||x_i|| <= c0 sqrt(p)
  {
    Index worst = 0;
    const double v = data.row_norms().maxCoeff(&worst);
    set(Clause::kCovariateNorm, c0 * sqrt_p, v, {worst, -1});
  }

  // (iii) |y_i - x_i^T theta| <= c0 sigma
  {
    Index worst = 0;
    const double v = (data.y() - data.x() * theta_ref).cwiseAbs().maxCoeff(&worst);
    set(Clause::kResidual, c0 * sigma, v, {worst, -1});
  }

  // (iv) |x_i^T (I - eta Sigma)^t theta| <= c0 for t in [T]
  {
    double v = 0.0;
    ClauseWitness w;
    VectorXd direction = theta_ref;
    for (std::int64_t t = 1; t <= steps; ++t) {
      direction -= eta * (cov.sigma_hat * direction);
      Index i = 0;
      const double m = (data.x() * direction).cwiseAbs().maxCoeff(&i);
      if (t == 1 || m > v) {
        v = m;
        w = {i, t};
      }
    }
    set(Clause::kDirection, c0, v, w);
  }

  // (v) |sum_j (y_j - x_j^T theta) x_i^T A_t x_j| <= c0 sigma sqrt(n p)
  {
    const double bound = c0 * sigma * std::sqrt(static_cast<double>(n) * p);
    try {
      const CrossTerm cross(data, theta_ref, eta);
      double v = 0.0;
      ClauseWitness w;
      for (std::int64_t t = 1; t <= steps; ++t) {
        Index i = 0;
        const double m = cross.Values(t).maxCoeff(&i);
        if (t == 1 || m > v) {
          v = m;
          w = {i, t};
        }
      }
      set(Clause::kCrossTerm, bound, v, w);
    } catch (const SingularCovariance& e) {
      const int k = static_cast<int>(Clause::kCrossTerm);
      rep.clause_bound[k] = bound;
      rep.clause_value[k] = std::numeric_limits<double>::quiet_NaN();
      rep.clause_margin[k] = std::numeric_limits<double>::quiet_NaN();
      rep.clause_pass[k] = false;
      rep.errors.push_back(std::string("clause v: ") + e.what());
    }
  }
  return rep;
}

// True iff gamma >= 4 c0^2 sigma sqrt(p) and
// gamma / (eta lambda) >= 64 c0^2 p sqrt(ln(2 n T / beta)).
inline bool NoiseRatioCertificate(const ConditionReport& report, double gamma,
                                  double eta, double lambda, std::int64_t n,
                                  std::int64_t steps, Index p, double beta) {
  internal::Require(beta > 0.0 && beta < 1.0, "beta must lie in (0, 1)");
  internal::Require(eta > 0.0 && lambda >= 0.0, "eta > 0 and lambda >= 0 required");
  const double c0sq = report.c0 * report.c0;
  const double dp = static_cast<double>(p);
  if (!(gamma >= 4.0 * c0sq * report.sigma * std::sqrt(dp))) return false;
  const double needed =
      64.0 * c0sq * dp *
      std::sqrt(std::log(2.0 * static_cast<double>(n) * static_cast<double>(steps) / beta));
  if (lambda == 0.0) return true;
  return gamma / (eta * lambda) >= needed;
}

// All clauses pass and the certificate holds: no clip with prob >= 1 - beta
// when started from theta0 = 0.
inline bool CertifiesNoClipping(const ConditionReport& report, double gamma,
                                double eta, double lambda, std::int64_t n,
                                std::int64_t steps, Index p, double beta) {
  return report.AllPass() &&
         NoiseRatioCertificate(report, gamma, eta, lambda, n, steps, p, beta);
}

}  // namespace dplr

#endif  // DPLR_CONDITIONS_HPP_
