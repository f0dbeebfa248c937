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

// Regression data model: datasets, synthetic generators for the isotropic
// and anisotropic Gaussian designs, the empirical covariance, and the exact
// least-squares solve.

#ifndef DPLR_DATASET_HPP_
#define DPLR_DATASET_HPP_

#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "dplr/csv.hpp"
#include "dplr/errors.hpp"
#include "dplr/rng.hpp"

namespace dplr {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Design matrix (n x p) and responses (n). Immutable once built; the
// per-row Euclidean norms are cached because every clipped gradient needs
// them.
class Dataset {
 public:
  Dataset(MatrixXd x, VectorXd y) : x_(std::move(x)), y_(std::move(y)) {
    internal::Require(x_.rows() >= 1 && x_.cols() >= 1,
                      "dataset needs n >= 1 and p >= 1");
    internal::Require(y_.size() == x_.rows(),
                      "response length must equal the number of rows of X");
    internal::Require(x_.allFinite() && y_.allFinite(),
                      "dataset entries must be finite");
    row_norms_ = x_.rowwise().norm();
  }

  const MatrixXd& x() const { return x_; }
  const VectorXd& y() const { return y_; }
  const VectorXd& row_norms() const { return row_norms_; }
  Index n() const { return x_.rows(); }
  Index p() const { return x_.cols(); }

 private:
  MatrixXd x_;
  VectorXd y_;
  VectorXd row_norms_;
};

enum class Design { kIsotropic, kAnisotropic };

struct GenerativeSpec {
  Index p = 10;
  Index n = 1000;
  double sigma = 1.0;
  Design design = Design::kIsotropic;
  // Unset means theta* is drawn uniformly from the unit sphere.
  std::optional<VectorXd> theta_star;

  void Validate() const {
    internal::Require(p >= 1, "p must be >= 1");
    internal::Require(n >= 1, "n must be >= 1");
    internal::Require(std::isfinite(sigma) && sigma >= 0.0,
                      "sigma must be finite and >= 0");
    if (theta_star) {
      internal::Require(theta_star->size() == p,
                        "theta_star length must equal p");
      internal::Require(theta_star->allFinite(), "theta_star must be finite");
      internal::Require(theta_star->norm() <= 1.0 + 1e-12,
                        "theta_star must satisfy ||theta_star|| <= 1");
    }
  }
};

struct GeneratedData {
  Dataset data;
  VectorXd theta_star;
  // Population covariance of the rows and its diagonal factor Lambda
  // (identity for the isotropic design).
  MatrixXd population_covariance;
  VectorXd population_eigenvalues;
};

struct CovarianceSummary {
  MatrixXd sigma_hat;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

// Haar-distributed rotation: QR of a standard Gaussian matrix with the
// signs fixed so R has a positive diagonal, then one column flipped if
// needed to land in SO(p).
inline MatrixXd RandomRotation(Index p, Rng& rng) {
  internal::Require(p >= 1, "rotation dimension must be >= 1");
  const MatrixXd g = rng.NormalMatrix(p, p);
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ();
  const MatrixXd& r = qr.matrixQR();
  for (Index j = 0; j < p; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  if (q.determinant() < 0.0) q.col(0) = -q.col(0);
  return q;
}

inline MatrixXd RandomRotation(Index p, const RngStream& stream) {
  Rng rng(stream);
  return RandomRotation(p, rng);
}

inline VectorXd UniformSphere(Index p, Rng& rng) {
  VectorXd v;
  double norm = 0.0;
  do {
    v = rng.NormalVector(p);
    norm = v.norm();
  } while (norm == 0.0);
  return v / norm;
}

// Draw order: theta* (when random), Lambda and U (anisotropic only), the
// rows of X one at a time, then the response noise.
inline GeneratedData GenerateDataset(const GenerativeSpec& spec,
                                     const RngStream& stream) {
  spec.Validate();
  Rng rng(stream);
  const Index p = spec.p;
  const Index n = spec.n;

  VectorXd theta_star =
      spec.theta_star ? *spec.theta_star : UniformSphere(p, rng);

  VectorXd lambda = VectorXd::Ones(p);
  MatrixXd factor = MatrixXd::Identity(p, p);
  MatrixXd population = MatrixXd::Identity(p, p);
  if (spec.design == Design::kAnisotropic) {
    lambda[0] = 2.0;
    if (p >= 2) lambda[1] = 1.0;
    for (Index i = 2; i < p; ++i) lambda[i] = rng.Uniform(1.0, 2.0);
    const MatrixXd u = RandomRotation(p, rng);
    factor = u * lambda.cwiseSqrt().asDiagonal();
    population = u * lambda.asDiagonal() * u.transpose();
  }

  MatrixXd x(n, p);
  for (Index i = 0; i < n; ++i) {
    const VectorXd z = rng.NormalVector(p);
    if (spec.design == Design::kAnisotropic) {
      x.row(i) = (factor * z).transpose();
    } else {
      x.row(i) = z.transpose();
    }
  }
  VectorXd y = x * theta_star;
  for (Index i = 0; i < n; ++i) y[i] += spec.sigma * rng.Normal();

  return {Dataset(std::move(x), std::move(y)), std::move(theta_star),
          std::move(population), std::move(lambda)};
}

inline CovarianceSummary EmpiricalCovariance(const Dataset& data) {
  CovarianceSummary out;
  MatrixXd s = data.x().transpose() * data.x() / static_cast<double>(data.n());
  out.sigma_hat = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(out.sigma_hat,
                                              Eigen::EigenvaluesOnly);
  out.lambda_min = eig.eigenvalues().minCoeff();
  out.lambda_max = eig.eigenvalues().maxCoeff();
  return out;
}

struct OlsOptions {
  double condition_cap = 1e12;
  // Above the cap, return the minimum-norm eigen pseudo-solution instead of
  // throwing SingularDesign.
  bool allow_pseudo_inverse = false;
};

// Least-squares solution of min ||y - X theta||^2 via Cholesky of X^T X
// with one step of iterative refinement.
inline VectorXd OlsSolve(const Dataset& data, const OlsOptions& options = {}) {
  const MatrixXd& x = data.x();
  const MatrixXd gram = x.transpose() * x;
  const VectorXd xty = x.transpose() * data.y();

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  const bool ill = !(lmin > 0.0) || lmax / lmin > options.condition_cap;
  if (ill) {
    if (!options.allow_pseudo_inverse) {
      throw SingularDesign("X^T X is singular or ill-conditioned", lmin);
    }
    const double floor = lmax / options.condition_cap;
    VectorXd inv = VectorXd::Zero(gram.rows());
    for (Index k = 0; k < inv.size(); ++k) {
      const double ev = eig.eigenvalues()[k];
      if (ev > floor) inv[k] = 1.0 / ev;
    }
    const MatrixXd& v = eig.eigenvectors();
    return v * inv.asDiagonal() * (v.transpose() * xty);
  }

  Eigen::LLT<MatrixXd> llt(gram);
  VectorXd theta = llt.solve(xty);
  const VectorXd residual_grad = xty - gram * theta;
  theta += llt.solve(residual_grad);
  return theta;
}

inline void WriteDatasetCsv(const Dataset& data, std::ostream& out) {
  for (Index j = 0; j < data.p(); ++j) out << 'x' << (j + 1) << ',';
  out << "y\n";
  for (Index i = 0; i < data.n(); ++i) {
    for (Index j = 0; j < data.p(); ++j) out << FormatDouble(data.x()(i, j)) << ',';
    out << FormatDouble(data.y()[i]) << '\n';
  }
}

inline void WriteDatasetCsvFile(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  WriteDatasetCsv(data, out);
}

// Expects the header x1,...,xp,y; the last column is the response.
inline Dataset ReadDatasetCsv(std::istream& in) {
  const NumericTable table = ReadNumericCsv(in);
  internal::Require(!table.header.empty(), "dataset csv needs a header row");
  const std::size_t width = table.header.size();
  internal::Require(width >= 2, "dataset csv needs at least one covariate");
  for (std::size_t j = 0; j + 1 < width; ++j) {
    internal::Require(table.header[j] == "x" + std::to_string(j + 1),
                      "dataset csv header must be x1,...,xp,y");
  }
  internal::Require(table.header.back() == "y",
                    "dataset csv header must end with y");
  internal::Require(!table.rows.empty(), "dataset csv has no rows");
  const Index n = static_cast<Index>(table.rows.size());
  const Index p = static_cast<Index>(width - 1);
  MatrixXd x(n, p);
  VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    for (Index j = 0; j < p; ++j) x(i, j) = row[static_cast<std::size_t>(j)];
    y[i] = row.back();
  }
  return Dataset(std::move(x), std::move(y));
}

inline Dataset ReadDatasetCsvFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return ReadDatasetCsv(in);
}

// A single vector stored either as one column or as one row, with an
// optional header.
inline VectorXd ReadVectorCsvFile(const std::string& path) {
  const NumericTable table = ReadNumericCsvFile(path);
  internal::Require(!table.rows.empty(), "vector csv is empty: " + path);
  if (table.rows.size() == 1) {
    const auto& r = table.rows.front();
    return Eigen::Map<const VectorXd>(r.data(), static_cast<Index>(r.size()));
  }
  internal::Require(table.rows.front().size() == 1,
                    "vector csv must be a single row or a single column");
  VectorXd v(static_cast<Index>(table.rows.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i) v[static_cast<Index>(i)] = table.rows[i][0];
  return v;
}

}  // namespace dplr

#endif  // DPLR_DATASET_HPP_
