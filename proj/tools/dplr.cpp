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

// Command-line front end: dplr <subcommand> [flags]. Results go to stdout
// as JSON (and CSV where noted); errors go to stderr with exit status 1.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dplr/dplr.hpp"

namespace {

using nlohmann::json;

json VecJson(const dplr::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

// JSON has no infinity; spend of a non-private run is written as a string.
json SpendJson(double rho) {
  if (std::isinf(rho)) return "inf";
  return rho;
}

double ClipFraction(const dplr::Trajectory& t, std::int64_t n) {
  return static_cast<double>(t.TotalClips()) /
         (static_cast<double>(n) * static_cast<double>(t.steps()));
}

struct AccountantArgs {
  std::optional<double> rho, gamma, epsilon;
  std::optional<std::int64_t> n, steps;
  std::vector<double> deltas{1e-5, 1e-6, 1e-8};
};

int Accountant(const AccountantArgs& a) {
  json out;
  if (a.epsilon) {
    const double delta = a.deltas.front();
    const dplr::ZcdpConversion c = dplr::DpToZcdp(*a.epsilon, delta);
    out["epsilon"] = *a.epsilon;
    out["delta"] = delta;
    out["rho"] = c.rho;
    out["infeasible"] = c.infeasible;
  } else {
    if (!a.rho) throw dplr::ValidationError("accountant needs --rho or --epsilon");
    out["rho"] = *a.rho;
    if (a.gamma || a.n || a.steps) {
      if (!(a.gamma && a.n && a.steps))
        throw dplr::ValidationError("--gamma, --n and --steps go together");
      const double lambda = dplr::CalibrateNoise(*a.rho, *a.gamma, *a.n, *a.steps);
      out["gamma"] = *a.gamma;
      out["n"] = *a.n;
      out["steps"] = *a.steps;
      out["lambda"] = lambda;
      out["sensitivity"] = dplr::GradientSensitivity(*a.gamma, *a.n);
    }
    json eps = json::array();
    for (const double d : a.deltas)
      eps.push_back({{"delta", d}, {"epsilon", dplr::ZcdpToDp(*a.rho, d)}});
    out["conversions"] = eps;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct FitArgs {
  std::string data;
  std::optional<double> rho, lambda;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double eta = 0.25;
  std::int64_t steps = 10;
  std::uint64_t seed = 0;
  bool no_clip = false;
  std::int64_t tail_window = 1;
  std::string dump;
};

// Noise scale from --lambda when given, otherwise calibrated from --rho.
double ResolveLambda(std::optional<double> rho, std::optional<double> lambda, double gamma,
                     std::int64_t n, std::int64_t steps) {
  if (lambda) return *lambda;
  if (!rho) return 0.0;
  return dplr::CalibrateNoise(*rho, gamma, n, steps);
}

double ResolveGamma(double gamma, bool no_clip) {
  if (no_clip) return dplr::kNoClip;
  if (std::isnan(gamma)) throw dplr::ValidationError("--gamma is required unless --no-clip");
  return gamma;
}

int Fit(const FitArgs& a) {
  const dplr::Dataset data = dplr::ReadDatasetCsvFile(a.data);
  dplr::GdConfig gd;
  gd.gamma = ResolveGamma(a.gamma, a.no_clip);
  gd.lambda = ResolveLambda(a.rho, a.lambda, gd.gamma, data.n(), a.steps);
  gd.eta = a.eta;
  gd.steps = a.steps;
  gd.stream = dplr::RngStream{a.seed, 0};
  const dplr::Trajectory traj = dplr::Run(data, gd);
  const double rho = (std::isfinite(gd.gamma) && gd.lambda > 0.0)
                         ? dplr::MechanismCost({gd.gamma, data.n(), gd.steps, gd.lambda}).rho()
                         : std::numeric_limits<double>::infinity();

  json out;
  out["estimate"] = VecJson(dplr::TailAverage(traj, a.tail_window));
  out["final_iterate"] = VecJson(traj.Final());
  out["gamma"] = std::isfinite(gd.gamma) ? json(gd.gamma) : json("inf");
  out["lambda"] = gd.lambda;
  out["eta"] = gd.eta;
  out["steps"] = gd.steps;
  out["tail_window"] = a.tail_window;
  out["seed"] = a.seed;
  out["rho_spent"] = SpendJson(rho);
  out["clips_total"] = traj.TotalClips();
  out["clip_fraction"] = ClipFraction(traj, data.n());
  std::int64_t steps_with_clip = 0;
  for (const auto c : traj.clip_counts) steps_with_clip += c > 0 ? 1 : 0;
  out["steps_with_clip"] = steps_with_clip;
  std::cout << out.dump(2) << "\n";

  if (!a.dump.empty()) {
    std::ofstream f(a.dump);
    if (!f) throw dplr::ValidationError("cannot write " + a.dump);
    f << "t";
    for (dplr::Index j = 0; j < data.p(); ++j) f << ",theta_" << (j + 1);
    f << ",clips\n";
    for (dplr::Index t = 0; t < traj.iterates.cols(); ++t) {
      f << (t + 1);
      for (dplr::Index j = 0; j < data.p(); ++j)
        f << "," << dplr::FormatDouble(traj.iterates(j, t));
      f << "," << traj.clip_counts[static_cast<std::size_t>(t)] << "\n";
    }
  }
  return 0;
}

struct CheckArgs {
  std::string data, theta;
  double sigma = 1.0, eta = 0.25;
  std::int64_t steps = 10;
  std::optional<double> c0, beta, gamma, lambda;
};

int CheckConditionsCmd(const CheckArgs& a) {
  const dplr::Dataset data = dplr::ReadDatasetCsvFile(a.data);
  const dplr::VectorXd theta = dplr::ReadVectorCsvFile(a.theta);
  const double beta = a.beta.value_or(0.1);
  const double c0 = a.c0 ? *a.c0 : dplr::HighProbabilityC0(data.n(), a.steps, beta);
  const dplr::ConditionReport r = dplr::CheckConditions(data, theta, a.sigma, a.eta, a.steps, c0);

  json out;
  out["c0"] = r.c0;
  out["sigma"] = r.sigma;
  out["eta"] = r.eta;
  out["steps"] = r.steps;
  out["all_pass"] = r.AllPass();
  json clauses = json::array();
  for (int k = 0; k < dplr::kNumClauses; ++k) {
    clauses.push_back({{"clause", dplr::ClauseName(k)},
                       {"pass", r.clause_pass[k]},
                       {"margin", r.clause_margin[k]},
                       {"value", r.clause_value[k]},
                       {"bound", r.clause_bound[k]},
                       {"worst_i", r.worst[k].i},
                       {"worst_t", r.worst[k].t}});
  }
  out["clauses"] = clauses;
  out["errors"] = r.errors;
  if (a.gamma) {
    const double lambda = a.lambda.value_or(0.0);
    out["noise_ratio_certificate"] = dplr::NoiseRatioCertificate(
        r, *a.gamma, a.eta, lambda, data.n(), a.steps, data.p(), beta);
    out["certifies_no_clipping"] =
        dplr::CertifiesNoClipping(r, *a.gamma, a.eta, lambda, data.n(), a.steps, data.p(), beta);
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct CiArgs {
  std::string data, method = "checkpoints";
  std::int64_t m = 10, spacing = 100, burn_in = 20, tail_window = 1;
  double alpha = 0.05, eta = 0.25;
  std::optional<double> rho, lambda;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  bool no_clip = false;
  std::uint64_t seed = 0;
  std::string summary;
};

int Ci(const CiArgs& a) {
  const dplr::Dataset data = dplr::ReadDatasetCsvFile(a.data);
  dplr::CiConfig ci;
  ci.method = dplr::ParseCiMethod(a.method);
  ci.m = a.m;
  ci.spacing = a.spacing;
  ci.burn_in = a.burn_in;
  ci.alpha = a.alpha;
  ci.tail_window = a.tail_window;
  ci.Validate();
  dplr::GdConfig gd;
  gd.gamma = ResolveGamma(a.gamma, a.no_clip);
  gd.eta = a.eta;
  gd.stream = dplr::RngStream{a.seed, 0};
  if (a.lambda) {
    gd.lambda = *a.lambda;
  } else if (a.rho) {
    gd.lambda = dplr::CalibrateForSchedule(*a.rho, gd.gamma, data.n(), ci);
  }
  const dplr::EstimateSet est = dplr::CollectEstimates(data, gd, ci);
  const dplr::IntervalSet iv = dplr::BuildInterval(est.estimates, ci.alpha);

  std::cout << "coord,center,lo,hi\n";
  for (dplr::Index j = 0; j < data.p(); ++j) {
    std::cout << (j + 1) << "," << dplr::FormatDouble(iv.center(j)) << ","
              << dplr::FormatDouble(iv.Lo()(j)) << "," << dplr::FormatDouble(iv.Hi()(j))
              << "\n";
  }
  json s;
  s["method"] = dplr::CiMethodName(ci.method);
  s["m"] = ci.m;
  s["spacing"] = ci.spacing;
  s["burn_in"] = ci.burn_in;
  s["alpha"] = ci.alpha;
  s["total_steps"] = est.total_steps;
  s["lambda"] = gd.lambda;
  s["rho_spent"] = SpendJson(est.rho_spent);
  s["clip_fraction"] = est.clip_fraction;
  if (a.summary.empty()) {
    std::cerr << s.dump(2) << "\n";
  } else {
    std::ofstream f(a.summary);
    if (!f) throw dplr::ValidationError("cannot write " + a.summary);
    f << s.dump(2) << "\n";
  }
  return 0;
}

struct BaselineArgs {
  std::string data, method = "ols";
  double rho = 0.05, alpha = 0.05;
  std::optional<double> x_bound, y_bound;
  std::uint64_t seed = 0;
};

int Baseline(const BaselineArgs& a) {
  const dplr::Dataset data = dplr::ReadDatasetCsvFile(a.data);
  dplr::BaselineResult r;
  if (a.method == "ols") {
    r = dplr::OlsWithCi(data, a.alpha);
  } else if (a.method == "adassp") {
    const double xb = a.x_bound.value_or(5.0 * std::sqrt(static_cast<double>(data.p())));
    const double yb = a.y_bound.value_or(10.0);
    r = dplr::AdasspFit(data, a.rho, xb, yb, dplr::RngStream{a.seed, 0});
  } else {
    throw dplr::ValidationError("unknown baseline method: " + a.method);
  }
  json out;
  out["method"] = dplr::BaselineMethodName(r.method);
  out["estimate"] = VecJson(r.estimate);
  out["lo"] = r.lo ? VecJson(*r.lo) : json(nullptr);
  out["hi"] = r.hi ? VecJson(*r.hi) : json(nullptr);
  out["privacy_spend"] = r.privacy_spend;
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct GenerateArgs {
  std::int64_t p = 10, n = 1000;
  double sigma = 1.0;
  std::string design = "isotropic", out, theta_out;
  std::uint64_t seed = 0;
};

int Generate(const GenerateArgs& a) {
  dplr::GenerativeSpec spec;
  spec.p = a.p;
  spec.n = a.n;
  spec.sigma = a.sigma;
  if (a.design == "anisotropic") {
    spec.design = dplr::Design::kAnisotropic;
  } else if (a.design != "isotropic") {
    throw dplr::ValidationError("design must be isotropic or anisotropic");
  }
  const dplr::GeneratedData gen = dplr::GenerateDataset(spec, dplr::RngStream{a.seed, 0});
  dplr::WriteDatasetCsvFile(gen.data, a.out);
  if (!a.theta_out.empty()) {
    std::ofstream f(a.theta_out);
    if (!f) throw dplr::ValidationError("cannot write " + a.theta_out);
    for (dplr::Index j = 0; j < gen.theta_star.size(); ++j)
      f << dplr::FormatDouble(gen.theta_star(j)) << "\n";
  }
  return 0;
}

struct ExperimentArgs {
  std::string name, config, out = ".";
  int jobs = 1;
  std::optional<std::uint64_t> master_seed;
};

int Experiment(const ExperimentArgs& a) {
  json j = json::object();
  if (!a.config.empty()) {
    std::ifstream f(a.config);
    if (!f) throw dplr::ValidationError("cannot read " + a.config);
    j = json::parse(f);
  }
  dplr::ExperimentConfig cfg = dplr::ParseExperimentConfig(j, a.name);
  if (a.master_seed) cfg.master_seed = *a.master_seed;
  const dplr::ExperimentOutput out = dplr::RunExperiment(cfg, a.jobs);
  std::filesystem::create_directories(a.out);
  const std::filesystem::path dir(a.out);
  out.table.WriteCsvFile((dir / (a.name + ".csv")).string());
  std::ofstream meta(dir / (a.name + ".meta.json"));
  if (!meta) throw dplr::ValidationError("cannot write meta file in " + a.out);
  meta << out.meta.dump(2) << "\n";
  std::cout << (dir / (a.name + ".csv")).string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private gradient descent for linear regression"};
  app.require_subcommand(1);

  AccountantArgs acc;
  auto* acc_cmd = app.add_subcommand("accountant", "zCDP noise calibration and conversion");
  acc_cmd->add_option("--rho", acc.rho, "zCDP budget");
  acc_cmd->add_option("--gamma", acc.gamma, "clipping threshold");
  acc_cmd->add_option("--n", acc.n, "sample size");
  acc_cmd->add_option("--steps", acc.steps, "iterations");
  acc_cmd->add_option("--epsilon", acc.epsilon, "(epsilon, delta)-DP target to convert");
  acc_cmd->add_option("--delta", acc.deltas, "delta values");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "run DP-GD on a dataset");
  fit_cmd->add_option("--data", fit.data, "dataset CSV (x1..xp,y)")->required();
  fit_cmd->add_option("--rho", fit.rho, "zCDP budget used to calibrate the noise");
  fit_cmd->add_option("--lambda", fit.lambda, "noise scale, overrides --rho");
  fit_cmd->add_option("--gamma", fit.gamma, "clipping threshold");
  fit_cmd->add_option("--eta", fit.eta, "step size");
  fit_cmd->add_option("--steps", fit.steps, "iterations");
  fit_cmd->add_option("--seed", fit.seed, "noise seed");
  fit_cmd->add_flag("--no-clip", fit.no_clip, "disable clipping");
  fit_cmd->add_option("--tail-window", fit.tail_window, "average the last k iterates");
  fit_cmd->add_option("--dump-trajectory", fit.dump, "write every iterate to this CSV");

  CheckArgs chk;
  auto* chk_cmd = app.add_subcommand("check-conditions", "evaluate the no-clipping condition");
  chk_cmd->add_option("--data", chk.data, "dataset CSV")->required();
  chk_cmd->add_option("--theta", chk.theta, "reference parameter CSV")->required();
  chk_cmd->add_option("--sigma", chk.sigma, "noise level");
  chk_cmd->add_option("--eta", chk.eta, "step size");
  chk_cmd->add_option("--steps", chk.steps, "iterations");
  chk_cmd->add_option("--c0", chk.c0, "slack constant (default from --beta)");
  chk_cmd->add_option("--beta", chk.beta, "failure probability (default 0.1)");
  chk_cmd->add_option("--gamma", chk.gamma, "clipping threshold for the noise-ratio check");
  chk_cmd->add_option("--lambda", chk.lambda, "noise scale for the noise-ratio check");

  CiArgs ci;
  auto* ci_cmd = app.add_subcommand("ci", "private confidence intervals");
  ci_cmd->add_option("--data", ci.data, "dataset CSV")->required();
  ci_cmd->add_option("--method", ci.method, "runs | checkpoints | batched")
      ->check(CLI::IsMember({"runs", "checkpoints", "batched"}));
  ci_cmd->add_option("--m", ci.m, "number of estimates");
  ci_cmd->add_option("--spacing", ci.spacing, "iterations per estimate");
  ci_cmd->add_option("--burn-in", ci.burn_in, "iterations discarded first");
  ci_cmd->add_option("--alpha", ci.alpha, "miscoverage level");
  ci_cmd->add_option("--rho", ci.rho, "zCDP budget for the whole schedule");
  ci_cmd->add_option("--lambda", ci.lambda, "noise scale, overrides --rho");
  ci_cmd->add_option("--gamma", ci.gamma, "clipping threshold");
  ci_cmd->add_flag("--no-clip", ci.no_clip, "disable clipping");
  ci_cmd->add_option("--eta", ci.eta, "step size");
  ci_cmd->add_option("--tail-window", ci.tail_window, "tail average for independent runs");
  ci_cmd->add_option("--seed", ci.seed, "noise seed");
  ci_cmd->add_option("--summary", ci.summary, "write the JSON summary here instead of stderr");

  BaselineArgs base;
  auto* base_cmd = app.add_subcommand("baseline", "OLS or AdaSSP fit");
  base_cmd->add_option("--data", base.data, "dataset CSV")->required();
  base_cmd->add_option("--method", base.method, "ols | adassp")
      ->check(CLI::IsMember({"ols", "adassp"}));
  base_cmd->add_option("--rho", base.rho, "zCDP budget (adassp)");
  base_cmd->add_option("--x-bound", base.x_bound, "row norm bound (adassp)");
  base_cmd->add_option("--y-bound", base.y_bound, "label bound (adassp)");
  base_cmd->add_option("--alpha", base.alpha, "miscoverage level (ols)");
  base_cmd->add_option("--seed", base.seed, "noise seed (adassp)");

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "write a synthetic dataset");
  gen_cmd->add_option("--p", gen.p, "dimension");
  gen_cmd->add_option("--n", gen.n, "sample size");
  gen_cmd->add_option("--sigma", gen.sigma, "response noise");
  gen_cmd->add_option("--design", gen.design, "isotropic | anisotropic");
  gen_cmd->add_option("--seed", gen.seed, "seed");
  gen_cmd->add_option("--out", gen.out, "dataset CSV")->required();
  gen_cmd->add_option("--theta-out", gen.theta_out, "write theta* here");

  ExperimentArgs exp;
  auto* exp_cmd = app.add_subcommand("experiment", "run a synthetic experiment grid");
  exp_cmd->add_option("name", exp.name, "experiment name")->required();
  exp_cmd->add_option("--config", exp.config, "JSON config");
  exp_cmd->add_option("--out", exp.out, "output directory");
  exp_cmd->add_option("--jobs", exp.jobs, "worker threads");
  exp_cmd->add_option("--master-seed", exp.master_seed, "overrides master_seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*acc_cmd) return Accountant(acc);
    if (*fit_cmd) return Fit(fit);
    if (*chk_cmd) return CheckConditionsCmd(chk);
    if (*ci_cmd) return Ci(ci);
    if (*base_cmd) return Baseline(base);
    if (*gen_cmd) return Generate(gen);
    if (*exp_cmd) return Experiment(exp);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
