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

#ifndef DPLR_EXPERIMENT_CONFIG_HPP_
#define DPLR_EXPERIMENT_CONFIG_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <type_traits>
#include <vector>

#include "json.hpp"

#include "dplr/dataset.hpp"
#include "dplr/errors.hpp"

namespace dplr {

enum class ExperimentKind {
  kFixedRatio,
  kCostOfPrivacy,
  kClipHeatmap,
  kBiasVariance,
  kCoverage,
  kCiLength,
  kErrorVsClip,
};

struct ExperimentName {
  ExperimentKind kind;
  bool anisotropic = false;
};

inline const std::vector<std::string>& ExperimentNames() {
  static const std::vector<std::string> kNames = {
      "fixed_ratio",  "cost_of_privacy", "clip_heatmap", "bias_variance",
      "coverage",     "ci_length",       "error_vs_clip"};
  return kNames;
}

// Accepts every base name and its "anisotropic_" mirror.
inline ExperimentName ParseExperimentName(const std::string& name) {
  std::string base = name;
  bool aniso = false;
  const std::string prefix = "anisotropic_";
  if (base.rfind(prefix, 0) == 0) {
    aniso = true;
    base = base.substr(prefix.size());
  }
  const auto& names = ExperimentNames();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == base) return {static_cast<ExperimentKind>(i), aniso};
  }
  throw ValidationError("unknown experiment: " + name);
}

struct ExperimentGrid {
  std::vector<std::int64_t> p;
  std::vector<std::int64_t> n;
  std::vector<double> gamma_multiplier;
  std::vector<std::int64_t> total_iterations;
  std::vector<std::string> methods;
};

// Shared defaults follow the standard synthetic setting: p = 10,
// gamma = 5 sqrt(p), rho = 0.015, sigma = 1, eta = 1/4.
struct ExperimentConfig {
  std::string name;
  Design design = Design::kIsotropic;
  std::int64_t trials = 100;
  double rho = 0.015;
  double sigma = 1.0;
  double eta = 0.25;
  double gamma_multiplier = 5.0;  // gamma = multiplier * sqrt(p)
  std::int64_t p = 10;
  std::optional<std::int64_t> n;  // unset: n = ratio * p
  std::int64_t ratio = 100;
  std::int64_t steps = 10;
  std::int64_t m = 10;
  std::int64_t burn_in = 20;
  double alpha = 0.05;
  std::int64_t tail_window = 1;
  double x_bound_multiplier = 5.0;  // AdaSSP x_bound = multiplier * sqrt(p)
  std::optional<double> y_bound;    // unset: 5 (1 + sigma)
  std::uint64_t master_seed = 0;
  std::string notes;
  ExperimentGrid grid;

  std::int64_t SampleSize(std::int64_t dim) const { return n ? *n : ratio * dim; }
  double Gamma(std::int64_t dim) const {
    return gamma_multiplier * std::sqrt(static_cast<double>(dim));
  }
  double YBound() const { return y_bound ? *y_bound : 5.0 * (1.0 + sigma); }
};

namespace internal {

struct GridRule {
  std::set<std::string> required;
  std::set<std::string> optional;
};

inline GridRule GridRuleFor(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kFixedRatio: return {{"p"}, {}};
    case ExperimentKind::kCostOfPrivacy: return {{"n"}, {}};
    case ExperimentKind::kClipHeatmap: return {{"p", "gamma_multiplier"}, {}};
    case ExperimentKind::kBiasVariance: return {{"gamma_multiplier"}, {}};
    case ExperimentKind::kCoverage:
    case ExperimentKind::kCiLength: return {{"total_iterations"}, {"methods"}};
    case ExperimentKind::kErrorVsClip:
      return {{"gamma_multiplier", "total_iterations"}, {}};
  }
  return {};
}

template <typename T>
std::vector<T> NonEmptyList(const nlohmann::json& j, const std::string& key) {
  if (!j.is_array() || j.empty())
    throw ValidationError("grid." + key + " must be a nonempty array");
  return j.get<std::vector<T>>();
}

}  // namespace internal

// Parses an experiment definition for `experiment`. Unknown keys at either
// level are errors, as are grid keys the experiment does not use.
inline ExperimentConfig ParseExperimentConfig(const nlohmann::json& j,
                                              const std::string& experiment) {
  const ExperimentName which = ParseExperimentName(experiment);
  if (!j.is_object()) throw ValidationError("experiment config must be a JSON object");
  static const std::set<std::string> kKeys = {
      "name",  "design", "trials",   "rho",         "sigma",
      "eta",   "gamma_multiplier",   "p",           "n",
      "ratio", "steps",  "m",        "burn_in",     "alpha",
      "tail_window",     "x_bound_multiplier",      "y_bound",
      "master_seed",     "notes",    "grid"};
  for (const auto& [key, _] : j.items()) {
    if (!kKeys.count(key)) throw ValidationError("unknown config key: " + key);
  }

  ExperimentConfig c;
  c.name = experiment;
  try {
    if (j.contains("name") && j["name"].get<std::string>() != experiment) {
      throw ValidationError("config name '" + j["name"].get<std::string>() +
                            "' does not match experiment '" + experiment + "'");
    }
    if (j.contains("design")) {
      const auto d = j["design"].get<std::string>();
      if (d == "isotropic") c.design = Design::kIsotropic;
      else if (d == "anisotropic") c.design = Design::kAnisotropic;
      else throw ValidationError("design must be isotropic or anisotropic");
    }
    if (which.anisotropic) {
      if (j.contains("design") && c.design != Design::kAnisotropic)
        throw ValidationError(experiment + " requires the anisotropic design");
      c.design = Design::kAnisotropic;
    }
    auto get = [&j](const char* key, auto& field) {
      if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
    };
    get("trials", c.trials);
    get("rho", c.rho);
    get("sigma", c.sigma);
    get("eta", c.eta);
    get("gamma_multiplier", c.gamma_multiplier);
    get("p", c.p);
    if (j.contains("n") && !j["n"].is_null()) c.n = j["n"].get<std::int64_t>();
    get("ratio", c.ratio);
    get("steps", c.steps);
    get("m", c.m);
    get("burn_in", c.burn_in);
    get("alpha", c.alpha);
    get("tail_window", c.tail_window);
    get("x_bound_multiplier", c.x_bound_multiplier);
    if (j.contains("y_bound") && !j["y_bound"].is_null())
      c.y_bound = j["y_bound"].get<double>();
    get("master_seed", c.master_seed);
    get("notes", c.notes);

    const internal::GridRule rule = internal::GridRuleFor(which.kind);
    const nlohmann::json grid = j.contains("grid") ? j["grid"] : nlohmann::json::object();
    if (!grid.is_object()) throw ValidationError("grid must be a JSON object");
    for (const auto& [key, _] : grid.items()) {
      if (!rule.required.count(key) && !rule.optional.count(key))
        throw ValidationError("grid key '" + key + "' is not used by " + experiment);
    }
    for (const auto& key : rule.required) {
      if (!grid.contains(key))
        throw ValidationError(experiment + " requires grid." + key);
    }
    if (grid.contains("p")) c.grid.p = internal::NonEmptyList<std::int64_t>(grid["p"], "p");
    if (grid.contains("n")) c.grid.n = internal::NonEmptyList<std::int64_t>(grid["n"], "n");
    if (grid.contains("gamma_multiplier"))
      c.grid.gamma_multiplier =
          internal::NonEmptyList<double>(grid["gamma_multiplier"], "gamma_multiplier");
    if (grid.contains("total_iterations"))
      c.grid.total_iterations =
          internal::NonEmptyList<std::int64_t>(grid["total_iterations"], "total_iterations");
    if (grid.contains("methods"))
      c.grid.methods = internal::NonEmptyList<std::string>(grid["methods"], "methods");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad config value: ") + e.what());
  }
  if (c.grid.methods.empty()) c.grid.methods = {"runs", "checkpoints", "batched"};

  internal::Require(c.trials >= 1, "trials must be >= 1");
  internal::Require(c.rho > 0.0, "rho must be > 0");
  internal::Require(c.sigma >= 0.0, "sigma must be >= 0");
  internal::Require(c.eta > 0.0, "eta must be > 0");
  internal::Require(c.gamma_multiplier > 0.0, "gamma_multiplier must be > 0");
  internal::Require(c.p >= 1 && c.ratio >= 1 && c.steps >= 1, "p, ratio, steps must be >= 1");
  internal::Require(!c.n || *c.n >= 1, "n must be >= 1");
  internal::Require(c.m >= 2, "m must be >= 2");
  internal::Require(c.burn_in >= 0, "burn_in must be >= 0");
  internal::Require(c.alpha > 0.0 && c.alpha < 1.0, "alpha must lie in (0, 1)");
  internal::Require(c.tail_window >= 1, "tail_window must be >= 1");
  internal::Require(c.x_bound_multiplier > 0.0, "x_bound_multiplier must be > 0");
  internal::Require(!c.y_bound || *c.y_bound > 0.0, "y_bound must be > 0");
  for (auto v : c.grid.p) internal::Require(v >= 1, "grid.p entries must be >= 1");
  for (auto v : c.grid.n) internal::Require(v >= 1, "grid.n entries must be >= 1");
  for (auto v : c.grid.gamma_multiplier)
    internal::Require(v > 0.0, "grid.gamma_multiplier entries must be > 0");
  for (auto v : c.grid.total_iterations)
    internal::Require(v >= 1, "grid.total_iterations entries must be >= 1");
  for (const auto& mname : c.grid.methods)
    internal::Require(mname == "runs" || mname == "checkpoints" || mname == "batched",
                      "unknown CI method: " + mname);
  return c;
}

// The resolved configuration, every default filled in.
inline nlohmann::json ToJson(const ExperimentConfig& c) {
  nlohmann::json j;
  j["name"] = c.name;
  j["design"] = c.design == Design::kIsotropic ? "isotropic" : "anisotropic";
  j["trials"] = c.trials;
  j["rho"] = c.rho;
  j["sigma"] = c.sigma;
  j["eta"] = c.eta;
  j["gamma_multiplier"] = c.gamma_multiplier;
  j["p"] = c.p;
  j["n"] = c.n ? nlohmann::json(*c.n) : nlohmann::json(nullptr);
  j["ratio"] = c.ratio;
  j["steps"] = c.steps;
  j["m"] = c.m;
  j["burn_in"] = c.burn_in;
  j["alpha"] = c.alpha;
  j["tail_window"] = c.tail_window;
  j["x_bound_multiplier"] = c.x_bound_multiplier;
  j["y_bound"] = c.YBound();
  j["master_seed"] = c.master_seed;
  j["notes"] = c.notes;
  nlohmann::json g = nlohmann::json::object();
  if (!c.grid.p.empty()) g["p"] = c.grid.p;
  if (!c.grid.n.empty()) g["n"] = c.grid.n;
  if (!c.grid.gamma_multiplier.empty()) g["gamma_multiplier"] = c.grid.gamma_multiplier;
  if (!c.grid.total_iterations.empty()) g["total_iterations"] = c.grid.total_iterations;
  const ExperimentName which = ParseExperimentName(c.name);
  if (which.kind == ExperimentKind::kCoverage || which.kind == ExperimentKind::kCiLength)
    g["methods"] = c.grid.methods;
  j["grid"] = g;
  return j;
}

}  // namespace dplr

#endif  // DPLR_EXPERIMENT_CONFIG_HPP_
