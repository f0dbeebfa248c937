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

#ifndef DPLR_RESULT_TABLE_HPP_
#define DPLR_RESULT_TABLE_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "dplr/csv.hpp"
#include "dplr/errors.hpp"

namespace dplr {

// Long-format experiment output. One row per (cell, metric); the columns
// are cell_id, the experiment's parameter columns, then
// metric,mean,stderr,trials,rho_spent,seed_lo,seed_hi.
struct ResultRow {
  std::string cell_id;
  std::vector<std::string> params;  // aligned with ResultTable::param_columns
  std::string metric;
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t trials = 0;
  double rho_spent = 0.0;
  std::int64_t seed_lo = 0;
  std::int64_t seed_hi = 0;
};

struct ResultTable {
  std::vector<std::string> param_columns;
  std::vector<ResultRow> rows;

  std::vector<std::string> Header() const {
    std::vector<std::string> h{"cell_id"};
    h.insert(h.end(), param_columns.begin(), param_columns.end());
    for (const char* c : {"metric", "mean", "stderr", "trials", "rho_spent",
                          "seed_lo", "seed_hi"})
      h.emplace_back(c);
    return h;
  }

  // First row matching (cell_id, metric); throws if absent.
  const ResultRow& Find(const std::string& cell_id, const std::string& metric) const {
    for (const auto& r : rows)
      if (r.cell_id == cell_id && r.metric == metric) return r;
    throw ValidationError("no row for cell " + cell_id + " metric " + metric);
  }

  void WriteCsv(std::ostream& out) const {
    const auto header = Header();
    for (std::size_t i = 0; i < header.size(); ++i)
      out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& r : rows) {
      out << r.cell_id;
      for (const auto& v : r.params) out << ',' << v;
      out << ',' << r.metric << ',' << FormatDouble(r.mean) << ','
          << FormatDouble(r.std_error) << ',' << r.trials << ','
          << FormatDouble(r.rho_spent) << ',' << r.seed_lo << ',' << r.seed_hi << '\n';
    }
  }

  void WriteCsvFile(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    WriteCsv(out);
  }
};

struct SampleSummary {
  double mean = 0.0;
  double std_error = 0.0;  // sample sd / sqrt(count); 0 for a single value
};

inline SampleSummary Summarize(const std::vector<double>& values) {
  SampleSummary s;
  if (values.empty()) {
    s.mean = s.std_error = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  const double k = static_cast<double>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= k;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std_error = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
  }
  return s;
}

// Linear-interpolation percentile, q in [0, 1].
inline double Percentile(std::vector<double> values, double q) {
  internal::Require(!values.empty(), "percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

// Calls fn(i) for i in [0, count) on up to `jobs` threads. Work items write
// to disjoint preallocated slots, so results do not depend on scheduling.
// The first exception thrown by any item is rethrown.
inline void ParallelFor(std::int64_t count, int jobs,
                        const std::function<void(std::int64_t)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    while (true) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> threads;
  const auto n = static_cast<std::int64_t>(jobs) < count ? jobs : static_cast<int>(count);
  threads.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace dplr

#endif  // DPLR_RESULT_TABLE_HPP_
