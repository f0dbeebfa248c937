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

#ifndef DPLR_RNG_HPP_
#define DPLR_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Dense>

namespace dplr {

// SplitMix64 finalizer, used to derive child stream ids.
constexpr std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t HashCombine(std::uint64_t a, std::uint64_t b) {
  return Mix64(a ^ Mix64(b + 0x632be59bd9b4e019ULL));
}

// FNV-1a over the bytes of a key, then mixed.
constexpr std::uint64_t HashKey(std::string_view key) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : key) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return Mix64(h);
}

// Identifies one reproducible sample sequence. Two generators built from
// equal (seed, stream_id) pairs produce bit-identical draws.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  RngStream Child(std::uint64_t index) const {
    return {seed, HashCombine(stream_id, index)};
  }
  RngStream Child(std::string_view key) const {
    return {seed, HashCombine(stream_id, HashKey(key))};
  }

  friend bool operator==(const RngStream&, const RngStream&) = default;
};

// Sampler over one RngStream. Uniforms use the top 53 bits of the engine
// output and normals use the Marsaglia polar method, so the sequence does
// not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(const RngStream& stream) : engine_(MakeSeed(stream)) {}

  // Uniform on [0, 1).
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  double Normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * Uniform() - 1.0;
      v = 2.0 * Uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

  // Coordinates are drawn in index order.
  Eigen::VectorXd NormalVector(Eigen::Index size, double stddev = 1.0) {
    Eigen::VectorXd out(size);
    for (Eigen::Index i = 0; i < size; ++i) out[i] = stddev * Normal();
    return out;
  }

  // Column-major fill.
  Eigen::MatrixXd NormalMatrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = Normal();
    return out;
  }

 private:
  static std::mt19937_64 MakeSeed(const RngStream& s) {
    std::seed_seq seq{static_cast<std::uint32_t>(s.seed),
                      static_cast<std::uint32_t>(s.seed >> 32),
                      static_cast<std::uint32_t>(s.stream_id),
                      static_cast<std::uint32_t>(s.stream_id >> 32)};
    return std::mt19937_64(seq);
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dplr

#endif  // DPLR_RNG_HPP_
