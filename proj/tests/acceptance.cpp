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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails. Experiment criteria run the shipped
// configs under configs/.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dplr/dplr.hpp"

namespace {

using dplr::Dataset;
using dplr::GdConfig;
using dplr::Index;
using dplr::MatrixXd;
using dplr::RngStream;
using dplr::VectorXd;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* fmt, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c, d);
  return buf;
}

dplr::ExperimentConfig LoadConfig(const std::string& dir, const std::string& name) {
  std::ifstream f(dir + "/" + name + ".json");
  if (!f) throw dplr::ValidationError("cannot read config " + name);
  return dplr::ParseExperimentConfig(nlohmann::json::parse(f), name);
}

Dataset Gaussian(Index n, Index p, std::uint64_t seed, double sigma = 1.0) {
  dplr::GenerativeSpec spec;
  spec.n = n;
  spec.p = p;
  spec.sigma = sigma;
  return dplr::GenerateDataset(spec, RngStream{seed, 0}).data;
}

// Least-squares slope of log(y) on log(x).
double LogLogSlope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

Outcome ConversionFootnote() {
  const double eps = dplr::ZcdpToDp(0.015, 1e-6);
  return {std::abs(eps - 0.9255) <= 0.001, Fmt("epsilon = %.6f", eps)};
}

Outcome AccountantRoundTrip() {
  dplr::Rng rng(RngStream{2, 0});
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    const double rho = std::exp(rng.Uniform(std::log(1e-4), std::log(10.0)));
    const double gamma = std::exp(rng.Uniform(std::log(1e-2), std::log(1e3)));
    const auto n = static_cast<std::int64_t>(rng.Uniform(1, 1e6));
    const auto steps = static_cast<std::int64_t>(rng.Uniform(1, 2000));
    const double lambda = dplr::CalibrateNoise(rho, gamma, n, steps);
    const double step = dplr::StepCost(dplr::GradientSensitivity(gamma, n), lambda).rho();
    const double back = dplr::ComposeSteps(dplr::PrivacyBudget(step), steps).rho();
    worst = std::max(worst, std::abs(back - rho) / rho);
  }
  return {worst <= 1e-12, Fmt("max relative error %.3g over 1000 tuples", worst)};
}

Outcome IterateLawOracle() {
  const Dataset d = Gaussian(200, 5, 3);
  GdConfig cfg;
  cfg.eta = 0.25;
  cfg.lambda = 0.5;
  cfg.steps = 10;
  cfg.keep_noise = false;
  const dplr::IterateLaw law = dplr::ComputeIterateLaw(d, cfg, cfg.steps);
  const int runs = 10000;
  VectorXd sum = VectorXd::Zero(5);
  MatrixXd outer = MatrixXd::Zero(5, 5);
  for (int r = 0; r < runs; ++r) {
    cfg.stream = RngStream{3, static_cast<std::uint64_t>(r)};
    const VectorXd f = dplr::Run(d, cfg).Final();
    sum += f;
    outer += (f - law.mean) * (f - law.mean).transpose();
  }
  const VectorXd mean = sum / runs;
  const MatrixXd cov = outer / runs;
  double worst_z = 0;
  for (Index i = 0; i < 5; ++i) {
    worst_z = std::max(worst_z, std::abs(mean[i] - law.mean[i]) /
                                    std::sqrt(law.covariance(i, i) / runs));
    for (Index j = 0; j < 5; ++j) {
      const double se = std::sqrt((law.covariance(i, i) * law.covariance(j, j) +
                                   law.covariance(i, j) * law.covariance(i, j)) / runs);
      worst_z = std::max(worst_z, std::abs(cov(i, j) - law.covariance(i, j)) / se);
    }
  }

  dplr::Rng rng(RngStream{3, 99});
  double worst_ratio = 0;
  int tested = 0;
  for (std::uint64_t k = 0; tested < 100; ++k) {
    const Index p = 2 + static_cast<Index>(rng.Uniform() * 6);
    const Dataset inst = Gaussian(20 * p, p, 5000 + k);
    GdConfig c;
    c.eta = rng.Uniform(0.05, 0.6);
    c.lambda = 1.0;
    const dplr::StepGeometry g = dplr::ComputeStepGeometry(inst, c.eta);
    if (g.contraction.cwiseAbs().maxCoeff() >= 1.0) continue;
    const auto t = static_cast<std::int64_t>(1 + rng.Uniform() * 50);
    const MatrixXd partial = dplr::GeometricPartialSum(dplr::StepMatrixD(inst, c.eta), t);
    const double err = (dplr::ComputeIterateLaw(inst, c, t).a - partial).norm();
    worst_ratio = std::max(worst_ratio, err / (1e-10 * static_cast<double>(t)));
    ++tested;
  }
  return {worst_z <= 5.0 && worst_ratio <= 1.0,
          Fmt("max |z| of mean/cov entries %.2f over 10^4 runs; geometric-series error "
              "at most %.3g of the 1e-10 t allowance",
              worst_z, worst_ratio)};
}

Outcome HuberEquivalence() {
  dplr::Rng rng(RngStream{4, 0});
  int exact = 0, fd_checked = 0, fd_ok = 0;
  double worst_fd = 0;
  for (int k = 0; k < 10000; ++k) {
    const Index n = 5 + static_cast<Index>(rng.Uniform() * 20);
    const Index p = 1 + static_cast<Index>(rng.Uniform() * 4);
    MatrixXd x = rng.NormalMatrix(n, p) * rng.Uniform(0.2, 3.0);
    const VectorXd y = rng.NormalVector(n, rng.Uniform(0.1, 5.0));
    const Dataset d(x, y);
    const VectorXd theta = rng.NormalVector(p, 2.0);
    const double gamma = std::exp(rng.Uniform(std::log(0.05), std::log(20.0)));
    const dplr::HuberValue h = dplr::HuberObjective(d, theta, gamma);
    const VectorXd g = dplr::MeanClippedGradient(d, theta, gamma).gradient;
    exact += (h.grad.array() == g.array()).all();

    const double step = 1e-6;
    const VectorXd r = d.y() - d.x() * theta;
    const double gap =
        (d.row_norms().cwiseProduct(r.cwiseAbs()).array() - gamma).abs().minCoeff();
    if (gap < 1e-3 * gamma) continue;
    ++fd_checked;
    double err = 0;
    for (Index j = 0; j < p; ++j) {
      VectorXd e = VectorXd::Zero(p);
      e[j] = step;
      const double fd = (dplr::HuberObjective(d, theta + e, gamma).loss -
                         dplr::HuberObjective(d, theta - e, gamma).loss) /
                        (2 * step);
      err = std::max(err, std::abs(fd - h.grad[j]));
    }
    worst_fd = std::max(worst_fd, err);
    fd_ok += err <= 1e-6;
  }
  return {exact == 10000 && fd_ok == fd_checked,
          Fmt("%g/10000 gradients bit-identical; finite differences within 1e-6 at %g/%g "
              "smooth points (max error %.2g)",
              exact, fd_ok, fd_checked, worst_fd)};
}

Outcome Coupling() {
  const Index p = 10;
  const std::int64_t n = 1000, steps = 10;
  const double gamma = 5 * std::sqrt(10.0);
  int identical_when_clean = 0, clean = 0, with_clip = 0, differing = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const Dataset d = Gaussian(n, p, 60000 + s);
    GdConfig cfg;
    cfg.gamma = gamma;
    cfg.lambda = dplr::CalibrateNoise(0.015, gamma, n, steps);
    cfg.steps = steps;
    cfg.stream = RngStream{5, s};
    cfg.keep_noise = false;
    const dplr::CoupledTrajectories c = dplr::CoupledRun(d, cfg);
    const bool same = c.clipped.iterates == c.unclipped.iterates;
    differing += !same;
    if (c.clipped.TotalClips() == 0) {
      ++clean;
      identical_when_clean += same;
    } else {
      ++with_clip;
    }
  }
  return {identical_when_clean == clean && differing <= with_clip,
          Fmt("%g/%g clip-free pairs identical; differing fraction %.3f <= clipped-run "
              "fraction %.3f",
              identical_when_clean, clean, differing / 1000.0, with_clip / 1000.0)};
}

Outcome Coverage(const std::string& config_dir, int jobs) {
  dplr::ExperimentConfig cfg = LoadConfig(config_dir, "coverage");
  const std::int64_t largest =
      *std::max_element(cfg.grid.total_iterations.begin(), cfg.grid.total_iterations.end());
  cfg.grid.total_iterations = {largest};
  const dplr::CoverageStudy study = dplr::RunCoverageStudy(cfg, jobs);
  const dplr::ResultTable t = dplr::CoverageTable(cfg, study, true);
  const std::string tot = std::to_string(largest);
  auto cov = [&](const std::string& m) {
    try {
      return t.Find(m + ";total=" + tot, "coverage").mean;
    } catch (const dplr::ValidationError&) {
      return std::nan("");
    }
  };
  const double runs = cov("runs"), cps = cov("checkpoints"), bm = cov("batched");
  const bool pass = runs >= 0.90 && cps >= 0.90 && bm >= 0.85;
  return {pass, Fmt("total %g iterations: runs %.3f, checkpoints %.3f, batched %.3f",
                    static_cast<double>(largest), runs, cps, bm)};
}

Outcome FixedRatio(const std::string& config_dir, int jobs) {
  const dplr::ExperimentConfig cfg = LoadConfig(config_dir, "fixed_ratio");
  const dplr::ResultTable t = dplr::RunFixedRatio(cfg, jobs);
  std::vector<double> dp, ada;
  for (const auto p : cfg.grid.p) {
    const std::string ps = std::to_string(p);
    dp.push_back(t.Find("dpgd;p=" + ps, "l2_error_to_ols").mean);
    ada.push_back(t.Find("adassp;p=" + ps, "l2_error_to_ols").mean);
  }
  const double dp_ratio = *std::max_element(dp.begin(), dp.end()) /
                          *std::min_element(dp.begin(), dp.end());
  const double ada_ratio = ada.back() / ada.front();
  std::string detail = Fmt("DP-GD error to OLS max/min %.3f (need <= 1.5); AdaSSP error to OLS "
                           "p_max/p_min %.3f (need >= 2); AdaSSP errors %.3f .. %.3f",
                           dp_ratio, ada_ratio, ada.front(), ada.back());
  return {dp_ratio <= 1.5 && ada_ratio >= 2.0, detail};
}

Outcome CostOfPrivacy(const std::string& config_dir, int jobs) {
  const dplr::ExperimentConfig cfg = LoadConfig(config_dir, "cost_of_privacy");
  const dplr::ResultTable t = dplr::RunCostOfPrivacy(cfg, jobs);
  std::vector<double> ns, priv, samp;
  for (const auto n : cfg.grid.n) {
    const std::string id = "p=" + std::to_string(cfg.p) + ";n=" + std::to_string(n);
    ns.push_back(static_cast<double>(n));
    priv.push_back(t.Find(id, "privacy_error").mean);
    samp.push_back(t.Find(id, "sampling_error").mean);
  }
  const double sp = LogLogSlope(ns, priv), ss = LogLogSlope(ns, samp);
  const bool pass = std::abs(sp + 1.0) <= 0.2 && std::abs(ss + 0.5) <= 0.15 &&
                    samp.back() > priv.back();
  return {pass, Fmt("privacy slope %.3f, sampling slope %.3f; at largest n sampling %.4f vs "
                    "privacy %.4f",
                    sp, ss, samp.back(), priv.back())};
}

Outcome ClipRegime(const std::string& config_dir, int jobs) {
  dplr::ExperimentConfig cfg = LoadConfig(config_dir, "clip_heatmap");
  cfg.grid.p = {5, 10, 20, 50};
  auto& mults = cfg.grid.gamma_multiplier;
  std::sort(mults.begin(), mults.end());
  const auto at5 = std::find(mults.begin(), mults.end(), 5.0);
  if (at5 == mults.end()) return {false, "config grid lacks multiplier 5"};
  const auto k5 = static_cast<std::size_t>(at5 - mults.begin());
  double worst_at5 = 0;
  int violations = 0;
  for (const auto p : cfg.grid.p) {
    const dplr::ClipGridTrials trials = dplr::RunClipGridTrials(cfg, p, jobs);
    double mean = 0;
    for (const auto& row : trials.clip_fraction) {
      mean += row[k5];
      for (std::size_t g = 1; g < row.size(); ++g) violations += row[g] > row[g - 1];
    }
    worst_at5 = std::max(worst_at5, mean / static_cast<double>(trials.clip_fraction.size()));
  }
  return {worst_at5 < 0.02 && violations == 0,
          Fmt("largest mean clip fraction at 5 sqrt(p): %.5f; per-seed monotonicity "
              "violations: %g",
              worst_at5, violations)};
}

Outcome BiasVariance(const std::string& config_dir, int jobs) {
  const dplr::ExperimentConfig cfg = LoadConfig(config_dir, "bias_variance");
  const dplr::ResultTable t = dplr::RunBiasVariance(cfg, jobs);
  std::vector<double> mults = cfg.grid.gamma_multiplier;
  std::sort(mults.begin(), mults.end());
  std::vector<double> bias, var, total;
  for (double m : mults) {
    const std::string id = "mult=" + dplr::internal::Num(m);
    bias.push_back(t.Find(id, "sq_bias").mean);
    var.push_back(t.Find(id, "variance_trace").mean);
    total.push_back(t.Find(id, "total_error").mean);
  }
  const auto argmax = [](const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  };
  const auto best = static_cast<std::size_t>(std::min_element(total.begin(), total.end()) -
                                             total.begin());
  const bool pass = argmax(bias) == 0 && argmax(var) == var.size() - 1 && best > 0 &&
                    best + 1 < total.size();
  return {pass, Fmt("largest squared bias at multiplier %g, largest variance at %g, minimum "
                    "total error %.4f at %g",
                    mults[argmax(bias)], mults[argmax(var)], total[best], mults[best])};
}

Outcome ConditionChecker() {
  const std::int64_t p = 10, n = 1000, steps = 10;
  const double c0 = dplr::HighProbabilityC0(n, steps, 0.1);
  int pass = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    dplr::GenerativeSpec spec;
    spec.p = p;
    spec.n = n;
    const dplr::GeneratedData g = dplr::GenerateDataset(spec, RngStream{11, s});
    pass += dplr::CheckConditions(g.data, g.theta_star, 1.0, 0.25, steps, c0).AllPass();
  }
  dplr::GenerativeSpec spec;
  spec.p = p;
  spec.n = n;
  const dplr::GeneratedData g = dplr::GenerateDataset(spec, RngStream{11, 1000});
  // Whiten then scale so the empirical covariance is exactly 3 I.
  const MatrixXd sigma = g.data.x().transpose() * g.data.x() / static_cast<double>(n);
  const MatrixXd l_inv = sigma.llt().matrixL().solve(MatrixXd::Identity(p, p));
  const MatrixXd planted = std::sqrt(3.0) * g.data.x() * l_inv.transpose();
  const dplr::ConditionReport bad = dplr::CheckConditions(
      Dataset(planted, g.data.y()), VectorXd::Zero(p), 1.0, 0.25, steps, c0);
  const bool spectrum_fails = !bad.clause_pass[0];
  return {pass >= 95 && spectrum_fails,
          Fmt("%g/100 generated datasets pass all clauses (c0 = %.1f); planted 3I spectrum "
              "margin %.3f",
              pass, c0, bad.clause_margin[0])};
}

double QuadratureUpperTail(double q, double df) {
  const double log_c = std::lgamma(0.5 * (df + 1)) - std::lgamma(0.5 * df) -
                       0.5 * std::log(df * M_PI);
  auto f = [&](double s) { return std::exp(log_c - 0.5 * (df + 1) * std::log1p(s * s / df)); };
  // Composite Gauss-Legendre, 5 nodes on each of 4000 panels over [0, q].
  static const double kX[5] = {0.0, -0.5384693101056831, 0.5384693101056831,
                               -0.9061798459386640, 0.9061798459386640};
  static const double kW[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                               0.2369268850561891, 0.2369268850561891};
  const int panels = 4000;
  const double h = q / panels;
  double sum = 0;
  for (int k = 0; k < panels; ++k) {
    const double mid = (k + 0.5) * h;
    for (int i = 0; i < 5; ++i) sum += kW[i] * f(mid + 0.5 * h * kX[i]);
  }
  return 0.5 - 0.5 * h * sum;
}

Outcome TQuantileAccuracy() {
  double worst = 0;
  std::string values;
  for (double df : {1.0, 2.0, 9.0, 30.0, 1e6}) {
    double lo = 0, hi = 1;
    while (QuadratureUpperTail(hi, df) > 0.025) hi *= 2;
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (lo + hi);
      (QuadratureUpperTail(mid, df) > 0.025 ? lo : hi) = mid;
    }
    const double got = dplr::TQuantile(0.025, df);
    worst = std::max(worst, std::abs(got - 0.5 * (lo + hi)));
    values += Fmt(" df=%g:%.6f", df, got);
  }
  const double t9 = dplr::TQuantile(0.025, 9), tinf = dplr::TQuantile(0.025, 1e6);
  const bool pass = worst <= 1e-5 && std::abs(t9 - 2.262157) <= 1e-6 &&
                    std::abs(tinf - 1.959964) <= 1e-4;
  return {pass, Fmt("max deviation from quadrature %.2g;", worst) + values};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dplr acceptance suite"};
  int jobs = 1;
  std::string config_dir = DPLR_CONFIG_DIR;
  std::vector<int> only;
  app.add_option("--jobs", jobs, "worker threads for experiment criteria");
  app.add_option("--configs", config_dir, "directory holding the shipped configs");
  app.add_option("--only", only, "run only these criterion numbers");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"privacy conversion at rho=0.015, delta=1e-6", ConversionFootnote},
      {"accountant round trip", AccountantRoundTrip},
      {"iterate law matches Monte Carlo and the geometric series", IterateLawOracle},
      {"Huber gradient equals the clipped gradient", HuberEquivalence},
      {"coupled clipped/unclipped runs", Coupling},
      {"confidence interval coverage", [&] { return Coverage(config_dir, jobs); }},
      {"fixed-ratio scaling", [&] { return FixedRatio(config_dir, jobs); }},
      {"cost of privacy", [&] { return CostOfPrivacy(config_dir, jobs); }},
      {"clipping regime", [&] { return ClipRegime(config_dir, jobs); }},
      {"bias-variance trade-off", [&] { return BiasVariance(config_dir, jobs); }},
      {"no-clipping condition checker", ConditionChecker},
      {"t quantile accuracy", TQuantileAccuracy},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), number) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %2d: %s -- %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", number,
                criteria[i].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
