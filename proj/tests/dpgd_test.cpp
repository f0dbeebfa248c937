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

#include <cmath>

#include <gtest/gtest.h>

#include "dplr/dpgd.hpp"
#include "test_util.hpp"

namespace dplr {
namespace {

using testing::GaussianDataset;
using testing::MaxAbs;
using testing::ScalarDataset;

VectorXd Vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

TEST(ClipTest, Examples) {
  EXPECT_EQ(Clip(Vec({3, 4}), 5.0), Vec({3, 4}));
  const VectorXd c = Clip(Vec({3, 4}), 2.5);
  EXPECT_NEAR(c[0], 1.5, 1e-15);
  EXPECT_NEAR(c[1], 2.0, 1e-15);
  EXPECT_EQ(Clip(VectorXd::Zero(3), 0.1), VectorXd::Zero(3));
  EXPECT_EQ(Clip(Vec({1e300, 1e300}), kNoClip), Vec({1e300, 1e300}));
  EXPECT_THROW(Clip(Vec({1}), 0.0), ValidationError);
}

TEST(ClipTest, Properties) {
  Rng rng(RngStream{4, 4});
  for (int k = 0; k < 500; ++k) {
    const VectorXd v = rng.NormalVector(4, 3.0);
    const double gamma = rng.Uniform(0.01, 10.0);
    const double c = rng.Uniform(0.1, 10.0);
    const VectorXd out = Clip(v, gamma);
    EXPECT_LE(out.norm(), std::min(gamma, v.norm()) * (1 + 1e-15));
    EXPECT_NEAR(out.normalized().dot(v.normalized()), 1.0, 1e-12);
    EXPECT_LT((Clip(c * v, c * gamma) - c * out).norm(), 1e-12 * (1 + c * v.norm()));
    if (v.norm() <= gamma) {
      EXPECT_EQ(out, v);
    }
  }
}

TEST(MeanClippedGradientTest, MatchesPerExampleClipSum) {
  const Dataset d = GaussianDataset(40, 3, 6);
  Rng rng(RngStream{6, 7});
  for (int k = 0; k < 20; ++k) {
    const VectorXd theta = rng.NormalVector(3, 2.0);
    const double gamma = rng.Uniform(0.1, 6.0);
    VectorXd oracle = VectorXd::Zero(3);
    std::int64_t clips = 0;
    for (Index i = 0; i < d.n(); ++i) {
      const VectorXd g = -d.x().row(i).transpose() * (d.y()[i] - d.x().row(i).dot(theta));
      clips += g.norm() > gamma;
      oracle += Clip(g, gamma);
    }
    oracle /= static_cast<double>(d.n());
    const ClippedGradient got = MeanClippedGradient(d, theta, gamma);
    EXPECT_LT((got.gradient - oracle).norm(), 1e-12);
    EXPECT_EQ(got.clipped, clips);
  }
}

TEST(RunTest, ScalarRecurrenceByHand) {
  const Dataset d = ScalarDataset({1, -1, 1, -1}, {2, -2, 2, -2});
  GdConfig cfg;
  cfg.eta = 0.25;
  cfg.steps = 2;
  const Trajectory t = dplr::Run(d, cfg);
  EXPECT_DOUBLE_EQ(t.iterates(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(t.iterates(0, 1), 0.875);
  EXPECT_DOUBLE_EQ(t.Final()[0], 2.0 * (1.0 - 0.75 * 0.75));
}

TEST(RunTest, ShapesAndClipCountsInRange) {
  const Dataset d = GaussianDataset(50, 4, 2);
  GdConfig cfg;
  cfg.gamma = 0.5;
  cfg.lambda = 0.1;
  cfg.steps = 7;
  const Trajectory t = dplr::Run(d, cfg);
  EXPECT_EQ(t.iterates.rows(), 4);
  EXPECT_EQ(t.iterates.cols(), 7);
  EXPECT_EQ(t.noise.cols(), 7);
  ASSERT_EQ(t.clip_counts.size(), 7u);
  for (auto c : t.clip_counts) {
    EXPECT_GE(c, 0);
    EXPECT_LE(c, 50);
  }
  cfg.keep_noise = false;
  EXPECT_EQ(dplr::Run(d, cfg).noise.size(), 0);
  EXPECT_EQ(dplr::Run(d, cfg).iterates, t.iterates);
}

TEST(RunTest, NoiseIsDrawnPerStepInIndexOrder) {
  const Dataset d = GaussianDataset(30, 3, 3);
  GdConfig cfg;
  cfg.lambda = 0.7;
  cfg.steps = 4;
  cfg.stream = RngStream{12, 34};
  const Trajectory t = dplr::Run(d, cfg);
  Rng rng(cfg.stream);
  for (Index s = 0; s < 4; ++s) EXPECT_EQ(t.noise.col(s), rng.NormalVector(3, 0.7));
}

TEST(RunTest, BitDeterministic) {
  const Dataset d = GaussianDataset(100, 5, 8);
  GdConfig cfg;
  cfg.gamma = 2.0;
  cfg.lambda = 0.3;
  cfg.steps = 25;
  cfg.stream = RngStream{1, 2};
  const Trajectory a = dplr::Run(d, cfg);
  const Trajectory b = dplr::Run(d, cfg);
  EXPECT_EQ(a.iterates, b.iterates);
  EXPECT_EQ(a.clip_counts, b.clip_counts);
}

TEST(RunTest, NoiselessContraction) {
  const Dataset d = GaussianDataset(200, 5, 9);
  const StepGeometry g = ComputeStepGeometry(d, 0.25);
  const double rate = g.contraction.cwiseAbs().maxCoeff();
  GdConfig cfg;
  cfg.eta = 0.25;
  cfg.steps = 30;
  cfg.theta0 = VectorXd::Constant(5, 3.0);
  const Trajectory t = dplr::Run(d, cfg);
  const double start = (cfg.theta0 - g.theta_hat).norm();
  for (Index s = 0; s < 30; ++s) {
    EXPECT_LE((t.iterates.col(s) - g.theta_hat).norm(),
              std::pow(rate, static_cast<double>(s + 1)) * start * (1 + 1e-10) + 1e-13);
  }
}

TEST(RunTest, ValidatesConfig) {
  const Dataset d = GaussianDataset(10, 2, 1);
  GdConfig cfg;
  cfg.theta0 = VectorXd::Zero(3);
  EXPECT_THROW(dplr::Run(d, cfg), ValidationError);
  cfg.theta0.resize(0);
  cfg.steps = 0;
  EXPECT_THROW(dplr::Run(d, cfg), ValidationError);
  cfg.steps = 1;
  cfg.gamma = 0.0;
  EXPECT_THROW(dplr::Run(d, cfg), ValidationError);
  cfg.gamma = kNoClip;
  cfg.lambda = -1.0;
  EXPECT_THROW(dplr::Run(d, cfg), ValidationError);
  cfg.lambda = 0.0;
  cfg.eta = 0.0;
  EXPECT_THROW(dplr::Run(d, cfg), ValidationError);
}

TEST(CoupledRunTest, ZeroClipsGiveIdenticalTrajectories) {
  const Dataset d = GaussianDataset(1000, 10, 10);
  GdConfig cfg;
  cfg.gamma = 20.0 * std::sqrt(10.0);
  cfg.lambda = CalibrateNoise(0.015, cfg.gamma, 1000, 10);
  cfg.steps = 10;
  int checked = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    cfg.stream = RngStream{s, 0};
    const CoupledTrajectories c = CoupledRun(d, cfg);
    EXPECT_EQ(c.clipped.noise, c.unclipped.noise);
    if (c.clipped.TotalClips() == 0) {
      EXPECT_EQ(c.clipped.iterates, c.unclipped.iterates);
      ++checked;
    }
  }
  EXPECT_GT(checked, 0);
}

TEST(CoupledRunTest, TinyThresholdClipsEverything) {
  const Dataset d = GaussianDataset(50, 3, 11);
  GdConfig cfg;
  cfg.gamma = 1e-9;
  cfg.lambda = 0.01;
  cfg.steps = 5;
  const CoupledTrajectories c = CoupledRun(d, cfg);
  for (auto k : c.clipped.clip_counts) EXPECT_EQ(k, 50);
  EXPECT_NE(c.clipped.Final(), c.unclipped.Final());
  cfg.gamma = kNoClip;
  EXPECT_THROW(CoupledRun(d, cfg), ValidationError);
}

TEST(TailAverageTest, Examples) {
  Trajectory t;
  t.iterates.resize(2, 3);
  t.iterates << 1, 2, 4, 0, 0, 6;
  EXPECT_EQ(TailAverage(t, 1), t.Final());
  EXPECT_EQ(TailAverage(t, 2), Vec({3, 3}));
  Trajectory flat;
  flat.iterates = MatrixXd::Constant(2, 5, 1.5);
  EXPECT_EQ(TailAverage(flat, 5), Vec({1.5, 1.5}));
  EXPECT_THROW(TailAverage(t, 0), ValidationError);
  EXPECT_THROW(TailAverage(t, 4), ValidationError);
}

TEST(IterateLawTest, ScalarStationaryVariance) {
  const Dataset d = ScalarDataset({1, -1, 1, -1}, {2, -2, 2, -2});
  GdConfig cfg;
  cfg.eta = 0.25;
  cfg.lambda = 0.8;
  const IterateLaw law = ComputeIterateLaw(d, cfg, 400);
  EXPECT_NEAR(law.a(0, 0), 16.0 / 7.0, 1e-14);
  EXPECT_NEAR(law.covariance(0, 0), 0.64 / 7.0, 1e-15);
  const MatrixXd dm = StepMatrixD(d, 0.25);
  EXPECT_NEAR(dm(0, 0), 9.0 / 16.0, 1e-15);
  EXPECT_NEAR(GeometricPartialSum(dm, 400)(0, 0), 16.0 / 7.0, 1e-13);
  const IterateLaw two = ComputeIterateLaw(d, cfg, 2);
  EXPECT_NEAR(two.mean[0], 0.875, 1e-14);
}

TEST(IterateLawTest, FirstStepCovarianceIsSingleDraw) {
  const Dataset d = GaussianDataset(100, 4, 12);
  GdConfig cfg;
  cfg.eta = 0.25;
  cfg.lambda = 0.6;
  const IterateLaw law = ComputeIterateLaw(d, cfg, 1);
  EXPECT_LT(MaxAbs(law.a - MatrixXd::Identity(4, 4)), 1e-14);
  EXPECT_LT(MaxAbs(law.covariance - 0.0225 * MatrixXd::Identity(4, 4)), 1e-15);
}

TEST(IterateLawTest, FixedPointMean) {
  const Dataset d = GaussianDataset(100, 4, 13);
  GdConfig cfg;
  cfg.theta0 = OlsSolve(d);
  for (std::int64_t t : {1, 5, 50}) {
    EXPECT_LT((ComputeIterateLaw(d, cfg, t).mean - cfg.theta0).norm(), 1e-12);
  }
}

TEST(IterateLawTest, SymmetricPsdAndMonotoneToLimit) {
  const Dataset d = GaussianDataset(80, 5, 14);
  GdConfig cfg;
  cfg.lambda = 1.0;
  MatrixXd prev = MatrixXd::Zero(5, 5);
  for (std::int64_t t = 1; t <= 60; ++t) {
    const IterateLaw law = ComputeIterateLaw(d, cfg, t);
    EXPECT_LT(MaxAbs(law.covariance - law.covariance.transpose()), 1e-12);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(law.covariance);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);
    Eigen::SelfAdjointEigenSolver<MatrixXd> step(law.a - prev);
    EXPECT_GE(step.eigenvalues().minCoeff(), -1e-10);
    prev = law.a;
  }
  const MatrixXd limit =
      (MatrixXd::Identity(5, 5) - StepMatrixD(d, cfg.eta)).inverse();
  EXPECT_LT(MaxAbs(ComputeIterateLaw(d, cfg, 2000).a - limit), 1e-9);
  EXPECT_LT((ComputeIterateLaw(d, cfg, 2000).mean - OlsSolve(d)).norm(), 1e-10);
}

TEST(IterateLawTest, GeometricSeriesIdentityOnRandomInstances) {
  Rng rng(RngStream{15, 0});
  int tested = 0;
  for (std::uint64_t k = 0; tested < 100; ++k) {
    const Index p = 2 + static_cast<Index>(rng.Uniform() * 5);
    const Dataset d = GaussianDataset(20 * p, p, 1000 + k);
    const double eta = rng.Uniform(0.05, 0.6);
    const StepGeometry g = ComputeStepGeometry(d, eta);
    if (g.contraction.cwiseAbs().maxCoeff() >= 1.0) continue;
    GdConfig cfg;
    cfg.eta = eta;
    cfg.lambda = 1.0;
    const auto t = static_cast<std::int64_t>(1 + rng.Uniform() * 50);
    const MatrixXd partial = GeometricPartialSum(StepMatrixD(d, eta), t);
    EXPECT_LE((ComputeIterateLaw(d, cfg, t).a - partial).norm(), 1e-10 * static_cast<double>(t));
    ++tested;
  }
}

TEST(IterateLawTest, SingularGeometryThrows) {
  // Sigma = 1 and eta = 2 make (1 - eta Sigma)^2 = 1.
  const Dataset d = ScalarDataset({1, -1}, {1, 1});
  GdConfig cfg;
  cfg.eta = 2.0;
  EXPECT_THROW(ComputeIterateLaw(d, cfg, 3), SingularGeometry);
}

TEST(IterateLawTest, MonteCarloMomentsMatch) {
  const Dataset d = GaussianDataset(200, 3, 16);
  GdConfig cfg;
  cfg.eta = 0.25;
  cfg.lambda = 0.5;
  cfg.steps = 6;
  cfg.keep_noise = false;
  const IterateLaw law = ComputeIterateLaw(d, cfg, cfg.steps);
  const int runs = 4000;
  VectorXd sum = VectorXd::Zero(3);
  MatrixXd outer = MatrixXd::Zero(3, 3);
  for (int r = 0; r < runs; ++r) {
    cfg.stream = RngStream{16, static_cast<std::uint64_t>(r)};
    const VectorXd f = dplr::Run(d, cfg).Final();
    sum += f;
    outer += (f - law.mean) * (f - law.mean).transpose();
  }
  const VectorXd mean = sum / runs;
  const MatrixXd cov = outer / runs;
  for (Index i = 0; i < 3; ++i) {
    EXPECT_LT(std::abs(mean[i] - law.mean[i]), 5.0 * std::sqrt(law.covariance(i, i) / runs));
    for (Index j = 0; j < 3; ++j) {
      const double se = std::sqrt((law.covariance(i, i) * law.covariance(j, j) +
                                   law.covariance(i, j) * law.covariance(i, j)) / runs);
      EXPECT_LT(std::abs(cov(i, j) - law.covariance(i, j)), 5.0 * se);
    }
  }
}

TEST(HuberTest, SingleDatumByHand) {
  MatrixXd x(1, 2);
  x << 1, 0;
  const Dataset d(x, Vec({10}));
  const HuberValue h = HuberObjective(d, VectorXd::Zero(2), 1.0);
  EXPECT_DOUBLE_EQ(h.loss, 9.5);
  EXPECT_EQ(h.grad, Vec({-1, 0}));
}

TEST(HuberTest, NoClipBranchIsHalfMeanSquaredError) {
  const Dataset d = GaussianDataset(30, 3, 17);
  const VectorXd theta = OlsSolve(d);
  const HuberValue h = HuberObjective(d, theta, 1e6);
  EXPECT_NEAR(h.loss, 0.5 * (d.y() - d.x() * theta).squaredNorm() / 30.0, 1e-14);
  EXPECT_EQ(h.grad, MeanClippedGradient(d, theta, kNoClip).gradient);
}

TEST(HuberTest, ZeroRowUsesSquaredLoss) {
  MatrixXd x = MatrixXd::Zero(1, 2);
  const Dataset d(x, Vec({3}));
  const HuberValue h = HuberObjective(d, VectorXd::Zero(2), 0.5);
  EXPECT_DOUBLE_EQ(h.loss, 4.5);
  EXPECT_EQ(h.grad, VectorXd::Zero(2));
}

TEST(HuberTest, GradientMatchesFiniteDifferences) {
  Rng rng(RngStream{18, 0});
  int tested = 0;
  while (tested < 100) {
    const Dataset d = GaussianDataset(20, 3, 2000 + static_cast<std::uint64_t>(tested));
    const VectorXd theta = rng.NormalVector(3);
    const double gamma = rng.Uniform(0.2, 4.0);
    const VectorXd r = d.y() - d.x() * theta;
    const double h = 1e-6;
    const double kink_gap = (d.row_norms().cwiseProduct(r.cwiseAbs()).array() - gamma).abs().minCoeff();
    if (kink_gap < 1e-3) continue;
    const HuberValue v = HuberObjective(d, theta, gamma);
    for (Index j = 0; j < 3; ++j) {
      VectorXd e = VectorXd::Zero(3);
      e[j] = h;
      const double fd =
          (HuberObjective(d, theta + e, gamma).loss - HuberObjective(d, theta - e, gamma).loss) /
          (2 * h);
      EXPECT_NEAR(fd, v.grad[j], 1e-6);
    }
    ++tested;
  }
}

}  // namespace
}  // namespace dplr
