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

// Configuration-driven synthetic experiments. Every trial draws from its
// own RngStream keyed by (master seed, data key, trial index), so a cell
// can be re-run alone and adding trials never changes earlier draws.

#ifndef DPLR_EXPERIMENTS_HPP_
#define DPLR_EXPERIMENTS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dplr/baselines.hpp"
#include "dplr/dataset.hpp"
#include "dplr/dpgd.hpp"
#include "dplr/experiment_config.hpp"
#include "dplr/intervals.hpp"
#include "dplr/privacy.hpp"
#include "dplr/result_table.hpp"
#include "dplr/rng.hpp"

namespace dplr {

struct ExperimentOutput {
  ResultTable table;
  nlohmann::json meta;
};

namespace internal {

// Shortest of %.15g / %.17g that round-trips, so 0.3 prints as 0.3.
inline std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  if (std::strtod(buf, nullptr) == v) return buf;
  return FormatDouble(v);
}

inline std::string Num(std::int64_t v) { return std::to_string(v); }

inline RngStream TrialStream(const ExperimentConfig& cfg, const std::string& key,
                             std::int64_t trial) {
  return RngStream{cfg.master_seed, HashKey(key)}.Child(static_cast<std::uint64_t>(trial));
}

inline GeneratedData TrialData(const ExperimentConfig& cfg, std::int64_t p,
                               std::int64_t n, const RngStream& stream) {
  GenerativeSpec spec;
  spec.p = p;
  spec.n = n;
  spec.sigma = cfg.sigma;
  spec.design = cfg.design;
  return GenerateDataset(spec, stream);
}

inline double ClipFraction(const Trajectory& t, std::int64_t n) {
  return static_cast<double>(t.TotalClips()) /
         (static_cast<double>(n) * static_cast<double>(t.steps()));
}

inline double DpgdSpend(double gamma, std::int64_t n, std::int64_t steps, double lambda) {
  return MechanismCost({gamma, n, steps, lambda}).rho();
}

// Collects per-trial values keyed by metric name; slot per trial so
// threads never share an entry.
class TrialValues {
 public:
  TrialValues(std::vector<std::string> metrics, std::int64_t trials)
      : metrics_(std::move(metrics)),
        values_(metrics_.size(), std::vector<double>(static_cast<std::size_t>(trials))) {}

  void Set(std::int64_t trial, const std::string& metric, double v) {
    values_[Index(metric)][static_cast<std::size_t>(trial)] = v;
  }
  const std::vector<double>& Get(const std::string& metric) const {
    return values_[Index(metric)];
  }

 private:
  std::size_t Index(const std::string& metric) const {
    for (std::size_t i = 0; i < metrics_.size(); ++i)
      if (metrics_[i] == metric) return i;
    throw ValidationError("unknown metric slot: " + metric);
  }
  std::vector<std::string> metrics_;
  std::vector<std::vector<double>> values_;
};

class TableBuilder {
 public:
  explicit TableBuilder(ResultTable& table) : table_(table) {}

  void Add(const std::string& cell_id, const std::vector<std::string>& params,
           const std::string& metric, double mean, double std_error,
           std::int64_t trials, double rho_spent) {
    ResultRow r;
    r.cell_id = cell_id;
    r.params = params;
    r.metric = metric;
    r.mean = mean;
    r.std_error = std_error;
    r.trials = trials;
    r.rho_spent = rho_spent;
    r.seed_lo = 0;
    r.seed_hi = trials - 1;
    table_.rows.push_back(std::move(r));
  }

  void AddSummary(const std::string& cell_id, const std::vector<std::string>& params,
                  const std::string& metric, const std::vector<double>& values,
                  double rho_spent) {
    const SampleSummary s = Summarize(values);
    Add(cell_id, params, metric, s.mean, s.std_error,
        static_cast<std::int64_t>(values.size()), rho_spent);
  }

 private:
  ResultTable& table_;
};

}  // namespace internal

// Error of DP-GD, OLS and AdaSSP as p grows with n = ratio * p.
inline ResultTable RunFixedRatio(const ExperimentConfig& cfg, int jobs = 1) {
  ResultTable table;
  table.param_columns = {"method", "p", "n"};
  internal::TableBuilder add(table);
  for (const std::int64_t p : cfg.grid.p) {
    const std::int64_t n = cfg.SampleSize(p);
    const double gamma = cfg.Gamma(p);
    const double lambda = CalibrateNoise(cfg.rho, gamma, n, cfg.steps);
    const double x_bound = cfg.x_bound_multiplier * std::sqrt(static_cast<double>(p));
    const std::string key = "fixed_ratio/p=" + internal::Num(p);
    internal::TrialValues v({"dpgd_ols", "dpgd_star", "dpgd_clip", "ols_star",
                             "adassp_ols", "adassp_star", "adassp_rho"},
                            cfg.trials);
    ParallelFor(cfg.trials, jobs, [&](std::int64_t trial) {
      const RngStream stream = internal::TrialStream(cfg, key, trial);
      const GeneratedData gen = internal::TrialData(cfg, p, n, stream.Child("data"));
      const VectorXd ols = OlsSolve(gen.data);
      GdConfig gd;
      gd.gamma = gamma;
      gd.lambda = lambda;
      gd.eta = cfg.eta;
      gd.steps = cfg.steps;
      gd.stream = stream.Child("dpgd");
      gd.keep_noise = false;
      const Trajectory traj = Run(gen.data, gd);
      const VectorXd est = traj.Final();
      const BaselineResult ada = AdasspFit(gen.data, cfg.rho, x_bound, cfg.YBound(),
                                           stream.Child("adassp"));
      v.Set(trial, "dpgd_ols", (est - ols).norm());
      v.Set(trial, "dpgd_star", (est - gen.theta_star).norm());
      v.Set(trial, "dpgd_clip", internal::ClipFraction(traj, n));
      v.Set(trial, "ols_star", (ols - gen.theta_star).norm());
      v.Set(trial, "adassp_ols", (ada.estimate - ols).norm());
      v.Set(trial, "adassp_star", (ada.estimate - gen.theta_star).norm());
      v.Set(trial, "adassp_rho", ada.privacy_spend);
    });
    const double dp_rho = internal::DpgdSpend(gamma, n, cfg.steps, lambda);
    const std::string ps = internal::Num(p), ns = internal::Num(n);
    const std::string dp_id = "dpgd;p=" + ps, ols_id = "ols;p=" + ps, ada_id = "adassp;p=" + ps;
    add.AddSummary(dp_id, {"dpgd", ps, ns}, "l2_error_to_ols", v.Get("dpgd_ols"), dp_rho);
    add.AddSummary(dp_id, {"dpgd", ps, ns}, "l2_error_to_theta_star", v.Get("dpgd_star"), dp_rho);
    add.AddSummary(dp_id, {"dpgd", ps, ns}, "clip_fraction", v.Get("dpgd_clip"), dp_rho);
    add.AddSummary(ols_id, {"ols", ps, ns}, "l2_error_to_ols", std::vector<double>(
                   static_cast<std::size_t>(cfg.trials), 0.0), 0.0);
    add.AddSummary(ols_id, {"ols", ps, ns}, "l2_error_to_theta_star", v.Get("ols_star"), 0.0);
    const double ada_rho = v.Get("adassp_rho").front();
    add.AddSummary(ada_id, {"adassp", ps, ns}, "l2_error_to_ols", v.Get("adassp_ols"), ada_rho);
    add.AddSummary(ada_id, {"adassp", ps, ns}, "l2_error_to_theta_star", v.Get("adassp_star"),
                   ada_rho);
  }
  return table;
}

// Privacy error ||theta_T - theta_hat|| against sampling error
// ||theta_hat - theta*|| as n grows at fixed p.
inline ResultTable RunCostOfPrivacy(const ExperimentConfig& cfg, int jobs = 1) {
  ResultTable table;
  table.param_columns = {"p", "n"};
  internal::TableBuilder add(table);
  const std::int64_t p = cfg.p;
  const double gamma = cfg.Gamma(p);
  for (const std::int64_t n : cfg.grid.n) {
    const double lambda = CalibrateNoise(cfg.rho, gamma, n, cfg.steps);
    const std::string key = "cost_of_privacy/p=" + internal::Num(p) + ";n=" + internal::Num(n);
    internal::TrialValues v({"privacy", "sampling", "clip"}, cfg.trials);
    ParallelFor(cfg.trials, jobs, [&](std::int64_t trial) {
      const RngStream stream = internal::TrialStream(cfg, key, trial);
      const GeneratedData gen = internal::TrialData(cfg, p, n, stream.Child("data"));
      const VectorXd ols = OlsSolve(gen.data);
      GdConfig gd;
      gd.gamma = gamma;
      gd.lambda = lambda;
      gd.eta = cfg.eta;
      gd.steps = cfg.steps;
      gd.stream = stream.Child("dpgd");
      gd.keep_noise = false;
      const Trajectory traj = Run(gen.data, gd);
      v.Set(trial, "privacy", (traj.Final() - ols).norm());
      v.Set(trial, "sampling", (ols - gen.theta_star).norm());
      v.Set(trial, "clip", internal::ClipFraction(traj, n));
    });
    const double rho = internal::DpgdSpend(gamma, n, cfg.steps, lambda);
    const std::string id = "p=" + internal::Num(p) + ";n=" + internal::Num(n);
    const std::vector<std::string> params{internal::Num(p), internal::Num(n)};
    add.AddSummary(id, params, "privacy_error", v.Get("privacy"), rho);
    add.AddSummary(id, params, "sampling_error", v.Get("sampling"), rho);
    add.AddSummary(id, params, "clip_fraction", v.Get("clip"), rho);
  }
  return table;
}

// Per-trial clip fractions for one p: entry [trial][k] is the fraction at
// grid.gamma_multiplier[k]. All multipliers share the trial's dataset and
// noise stream.
struct ClipGridTrials {
  std::int64_t p = 0;
  std::int64_t n = 0;
  std::vector<std::vector<double>> clip_fraction;
  std::vector<std::vector<double>> error_to_ols;
};

inline ClipGridTrials RunClipGridTrials(const ExperimentConfig& cfg, std::int64_t p,
                                        int jobs = 1) {
  ClipGridTrials out;
  out.p = p;
  out.n = cfg.SampleSize(p);
  const auto k = cfg.grid.gamma_multiplier.size();
  out.clip_fraction.assign(static_cast<std::size_t>(cfg.trials), std::vector<double>(k));
  out.error_to_ols = out.clip_fraction;
  const std::string key = "clip_heatmap/p=" + internal::Num(p);
  ParallelFor(cfg.trials, jobs, [&](std::int64_t trial) {
    const RngStream stream = internal::TrialStream(cfg, key, trial);
    const GeneratedData gen = internal::TrialData(cfg, p, out.n, stream.Child("data"));
    const VectorXd ols = OlsSolve(gen.data);
    for (std::size_t g = 0; g < k; ++g) {
      const double gamma = cfg.grid.gamma_multiplier[g] * std::sqrt(static_cast<double>(p));
      GdConfig gd;
      gd.gamma = gamma;
      gd.lambda = CalibrateNoise(cfg.rho, gamma, out.n, cfg.steps);
      gd.eta = cfg.eta;
      gd.steps = cfg.steps;
      gd.stream = stream.Child("dpgd");
      gd.keep_noise = false;
      const Trajectory traj = Run(gen.data, gd);
      const auto t = static_cast<std::size_t>(trial);
      out.clip_fraction[t][g] = internal::ClipFraction(traj, out.n);
      out.error_to_ols[t][g] = (traj.Final() - ols).norm();
    }
  });
  return out;
}

inline ResultTable RunClipHeatmap(const ExperimentConfig& cfg, int jobs = 1) {
  ResultTable table;
  table.param_columns = {"p", "gamma_multiplier", "gamma", "n"};
  internal::TableBuilder add(table);
  for (const std::int64_t p : cfg.grid.p) {
    const ClipGridTrials trials = RunClipGridTrials(cfg, p, jobs);
    for (std::size_t g = 0; g < cfg.grid.gamma_multiplier.size(); ++g) {
      const double mult = cfg.grid.gamma_multiplier[g];
      const double gamma = mult * std::sqrt(static_cast<double>(p));
      std::vector<double> clip, err;
      for (std::size_t t = 0; t < trials.clip_fraction.size(); ++t) {
        clip.push_back(trials.clip_fraction[t][g]);
        err.push_back(trials.error_to_ols[t][g]);
      }
      const double rho = internal::DpgdSpend(
          gamma, trials.n, cfg.steps, CalibrateNoise(cfg.rho, gamma, trials.n, cfg.steps));
      const std::string id = "p=" + internal::Num(p) + ";mult=" + internal::Num(mult);
      const std::vector<std::string> params{internal::Num(p), internal::Num(mult),
                                            FormatDouble(gamma), internal::Num(trials.n)};
      add.AddSummary(id, params, "clip_fraction", clip, rho);
      add.AddSummary(id, params, "l2_error_to_ols", err, rho);
    }
  }
  return table;
}

// Squared bias, variance trace and mean squared error of theta_T around
// theta_hat over the algorithm's noise on one fixed dataset, per gamma.
inline ResultTable RunBiasVariance(const ExperimentConfig& cfg, int jobs = 1) {
  ResultTable table;
  table.param_columns = {"gamma_multiplier", "gamma", "p", "n"};
  internal::TableBuilder add(table);
  const std::int64_t p = cfg.p;
  const std::int64_t n = cfg.SampleSize(p);
  const GeneratedData gen = internal::TrialData(
      cfg, p, n, RngStream{cfg.master_seed, HashKey("bias_variance/dataset")});
  const VectorXd ols = OlsSolve(gen.data);
  for (const double mult : cfg.grid.gamma_multiplier) {
    const double gamma = mult * std::sqrt(static_cast<double>(p));
    const double lambda = CalibrateNoise(cfg.rho, gamma, n, cfg.steps);
    std::vector<VectorXd> finals(static_cast<std::size_t>(cfg.trials));
    std::vector<double> clip(static_cast<std::size_t>(cfg.trials));
    ParallelFor(cfg.trials, jobs, [&](std::int64_t trial) {
      GdConfig gd;
      gd.gamma = gamma;
      gd.lambda = lambda;
      gd.eta = cfg.eta;
      gd.steps = cfg.steps;
      gd.stream = internal::TrialStream(cfg, "bias_variance/noise", trial);
      gd.keep_noise = false;
      const Trajectory traj = Run(gen.data, gd);
      finals[static_cast<std::size_t>(trial)] = traj.Final();
      clip[static_cast<std::size_t>(trial)] = internal::ClipFraction(traj, n);
    });
    VectorXd mean = VectorXd::Zero(p);
    for (const auto& f : finals) mean += f;
    mean /= static_cast<double>(cfg.trials);
    std::vector<double> sq_err, spread;
    for (const auto& f : finals) {
      sq_err.push_back((f - ols).squaredNorm());
      spread.push_back((f - mean).squaredNorm());
    }
    const double rho = internal::DpgdSpend(gamma, n, cfg.steps, lambda);
    const std::string id = "mult=" + internal::Num(mult);
    const std::vector<std::string> params{internal::Num(mult), FormatDouble(gamma),
                                          internal::Num(p), internal::Num(n)};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    add.Add(id, params, "sq_bias", (mean - ols).squaredNorm(), nan, cfg.trials, rho);
    add.Add(id, params, "variance_trace", Summarize(spread).mean, nan, cfg.trials, rho);
    add.AddSummary(id, params, "total_error", sq_err, rho);
    add.AddSummary(id, params, "clip_fraction", clip, rho);
  }
  return table;
}

// Coverage of theta_hat and interval length for each CI method and total
// iteration budget. Replication r uses the same dataset in every cell.
struct CoverageCell {
  std::string method;
  std::int64_t total_iterations = 0;
  std::int64_t spacing = 0;
  double lambda = 0.0;
  double rho_spent = 0.0;
  std::vector<VectorXd> covered;  // per replication, 0/1 per coordinate
  std::vector<VectorXd> length;   // per replication, 2 * half-width
  std::vector<double> clip_fraction;
};

struct CoverageStudy {
  std::int64_t p = 0;
  std::int64_t n = 0;
  std::vector<CoverageCell> cells;
  std::vector<double> ols_length;  // per replication, mean over coordinates
  std::vector<std::string> omitted;
};

inline CoverageStudy RunCoverageStudy(const ExperimentConfig& cfg, int jobs = 1) {
  CoverageStudy study;
  study.p = cfg.p;
  study.n = cfg.SampleSize(cfg.p);
  const double gamma = cfg.Gamma(cfg.p);
  const auto reps = static_cast<std::size_t>(cfg.trials);

  for (const std::int64_t total : cfg.grid.total_iterations) {
    for (const auto& mname : cfg.grid.methods) {
      const CiMethod method = ParseCiMethod(mname);
      const auto spacing = SpacingForBudget(method, cfg.m, cfg.burn_in, total);
      if (!spacing) {
        study.omitted.push_back(mname + ";total_iterations=" + internal::Num(total));
        continue;
      }
      CiConfig ci;
      ci.method = method;
      ci.m = cfg.m;
      ci.spacing = *spacing;
      ci.burn_in = cfg.burn_in;
      ci.alpha = cfg.alpha;
      ci.tail_window = std::min<std::int64_t>(cfg.tail_window, ci.burn_in + ci.spacing);
      CoverageCell cell;
      cell.method = mname;
      cell.total_iterations = total;
      cell.spacing = *spacing;
      cell.lambda = CalibrateForSchedule(cfg.rho, gamma, study.n, ci);
      cell.covered.resize(reps);
      cell.length.resize(reps);
      cell.clip_fraction.resize(reps);
      const std::string cell_key =
          "coverage/" + mname + ";total=" + internal::Num(total);
      ParallelFor(cfg.trials, jobs, [&](std::int64_t trial) {
        const GeneratedData gen = internal::TrialData(
            cfg, cfg.p, study.n, internal::TrialStream(cfg, "coverage/data", trial));
        const VectorXd ols = OlsSolve(gen.data);
        GdConfig gd;
        gd.gamma = gamma;
        gd.lambda = cell.lambda;
        gd.eta = cfg.eta;
        gd.stream = internal::TrialStream(cfg, cell_key, trial);
        const EstimateSet est = CollectEstimates(gen.data, gd, ci);
        const IntervalSet iv = BuildInterval(est.estimates, ci.alpha);
        const auto t = static_cast<std::size_t>(trial);
        cell.covered[t] = iv.Covers(ols).cast<double>().matrix();
        cell.length[t] = 2.0 * iv.half_width;
        cell.clip_fraction[t] = est.clip_fraction;
      });
      cell.rho_spent = MechanismCost({gamma, study.n, ci.TotalSteps(), cell.lambda}).rho();
      study.cells.push_back(std::move(cell));
    }
  }

  study.ols_length.resize(reps);
  ParallelFor(cfg.trials, jobs, [&](std::int64_t trial) {
    const GeneratedData gen = internal::TrialData(
        cfg, cfg.p, study.n, internal::TrialStream(cfg, "coverage/data", trial));
    const BaselineResult ols = OlsWithCi(gen.data, cfg.alpha);
    study.ols_length[static_cast<std::size_t>(trial)] = (*ols.hi - *ols.lo).mean();
  });
  return study;
}

inline ResultTable CoverageTable(const ExperimentConfig& cfg, const CoverageStudy& study,
                                 bool coverage_metrics) {
  ResultTable table;
  table.param_columns = {"method", "total_iterations", "spacing", "p", "n"};
  internal::TableBuilder add(table);
  const std::string ps = internal::Num(study.p), ns = internal::Num(study.n);
  for (const auto& cell : study.cells) {
    const std::string id = cell.method + ";total=" + internal::Num(cell.total_iterations);
    const std::vector<std::string> params{cell.method, internal::Num(cell.total_iterations),
                                          internal::Num(cell.spacing), ps, ns};
    const auto& per_rep = coverage_metrics ? cell.covered : cell.length;
    const std::string metric = coverage_metrics ? "coverage" : "ci_length";
    std::vector<double> rep_means;
    VectorXd coord_means = VectorXd::Zero(study.p);
    for (const auto& v : per_rep) {
      rep_means.push_back(v.mean());
      coord_means += v;
    }
    coord_means /= static_cast<double>(per_rep.size());
    const std::vector<double> coords(coord_means.data(), coord_means.data() + coord_means.size());
    const auto trials = static_cast<std::int64_t>(per_rep.size());
    add.AddSummary(id, params, metric, rep_means, cell.rho_spent);
    add.Add(id, params, metric + "_lo", Percentile(coords, 0.025), 0.0, trials, cell.rho_spent);
    add.Add(id, params, metric + "_hi", Percentile(coords, 0.975), 0.0, trials, cell.rho_spent);
    add.AddSummary(id, params, "clip_fraction", cell.clip_fraction, cell.rho_spent);
  }
  if (!coverage_metrics) {
    for (const std::int64_t total : cfg.grid.total_iterations) {
      const std::string id = "ols_reference;total=" + internal::Num(total);
      add.AddSummary(id, {"ols_reference", internal::Num(total), "0", ps, ns}, "ci_length",
                     study.ols_length, 0.0);
    }
  }
  return table;
}

// l2 error against the fraction of gradients clipped, over gamma and the
// number of iterations.
inline ResultTable RunErrorVsClip(const ExperimentConfig& cfg, int jobs = 1) {
  ResultTable table;
  table.param_columns = {"steps", "gamma_multiplier", "gamma", "p", "n"};
  internal::TableBuilder add(table);
  const std::int64_t p = cfg.p;
  const std::int64_t n = cfg.SampleSize(p);
  for (const std::int64_t steps : cfg.grid.total_iterations) {
    for (const double mult : cfg.grid.gamma_multiplier) {
      const double gamma = mult * std::sqrt(static_cast<double>(p));
      const double lambda = CalibrateNoise(cfg.rho, gamma, n, steps);
      internal::TrialValues v({"err", "clip"}, cfg.trials);
      ParallelFor(cfg.trials, jobs, [&](std::int64_t trial) {
        const RngStream stream = internal::TrialStream(cfg, "error_vs_clip", trial);
        const GeneratedData gen = internal::TrialData(cfg, p, n, stream.Child("data"));
        GdConfig gd;
        gd.gamma = gamma;
        gd.lambda = lambda;
        gd.eta = cfg.eta;
        gd.steps = steps;
        gd.stream = stream.Child("dpgd");
        gd.keep_noise = false;
        const Trajectory traj = Run(gen.data, gd);
        v.Set(trial, "err", (traj.Final() - OlsSolve(gen.data)).norm());
        v.Set(trial, "clip", internal::ClipFraction(traj, n));
      });
      const double rho = internal::DpgdSpend(gamma, n, steps, lambda);
      const std::string id = "steps=" + internal::Num(steps) + ";mult=" + internal::Num(mult);
      const std::vector<std::string> params{internal::Num(steps), internal::Num(mult),
                                            FormatDouble(gamma), internal::Num(p),
                                            internal::Num(n)};
      add.AddSummary(id, params, "l2_error_to_ols", v.Get("err"), rho);
      add.AddSummary(id, params, "clip_fraction", v.Get("clip"), rho);
    }
  }
  return table;
}

inline ExperimentOutput RunExperiment(const ExperimentConfig& cfg, int jobs = 1) {
  const ExperimentName which = ParseExperimentName(cfg.name);
  ExperimentOutput out;
  nlohmann::json omitted = nlohmann::json::array();
  switch (which.kind) {
    case ExperimentKind::kFixedRatio: out.table = RunFixedRatio(cfg, jobs); break;
    case ExperimentKind::kCostOfPrivacy: out.table = RunCostOfPrivacy(cfg, jobs); break;
    case ExperimentKind::kClipHeatmap: out.table = RunClipHeatmap(cfg, jobs); break;
    case ExperimentKind::kBiasVariance: out.table = RunBiasVariance(cfg, jobs); break;
    case ExperimentKind::kErrorVsClip: out.table = RunErrorVsClip(cfg, jobs); break;
    case ExperimentKind::kCoverage:
    case ExperimentKind::kCiLength: {
      const CoverageStudy study = RunCoverageStudy(cfg, jobs);
      out.table = CoverageTable(cfg, study, which.kind == ExperimentKind::kCoverage);
      for (const auto& o : study.omitted) omitted.push_back(o);
      break;
    }
  }
  std::stable_sort(out.table.rows.begin(), out.table.rows.end(),
                   [](const ResultRow& a, const ResultRow& b) { return a.cell_id < b.cell_id; });
  out.meta["experiment"] = cfg.name;
  out.meta["config"] = ToJson(cfg);
  out.meta["columns"] = out.table.Header();
  out.meta["omitted_cells"] = omitted;
  out.meta["stream_scheme"] =
      "trial l of a cell draws from RngStream{master_seed, HashKey(cell key)}.Child(l); "
      "seed_lo..seed_hi is the trial index range";
  return out;
}

// The anisotropic mirrors of the fixed-ratio, coverage and interval-length
// experiments.
inline std::map<std::string, ExperimentOutput> RunAnisotropicSuite(
    const ExperimentConfig& fixed_ratio, const ExperimentConfig& coverage, int jobs = 1) {
  std::map<std::string, ExperimentOutput> out;
  auto mirror = [](ExperimentConfig c, const std::string& name) {
    c.name = name;
    c.design = Design::kAnisotropic;
    return c;
  };
  out["anisotropic_fixed_ratio"] =
      RunExperiment(mirror(fixed_ratio, "anisotropic_fixed_ratio"), jobs);
  out["anisotropic_coverage"] = RunExperiment(mirror(coverage, "anisotropic_coverage"), jobs);
  out["anisotropic_ci_length"] =
      RunExperiment(mirror(coverage, "anisotropic_ci_length"), jobs);
  return out;
}

}  // namespace dplr

#endif  // DPLR_EXPERIMENTS_HPP_
