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

#ifndef DPLR_ERRORS_HPP_
#define DPLR_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace dplr {

// Raised when an argument or a configuration violates a documented
// precondition.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what)
      : std::invalid_argument(what) {}
};

// X^T X is singular or its condition number exceeds the configured cap.
class SingularDesign : public std::runtime_error {
 public:
  SingularDesign(const std::string& what, double smallest_eigenvalue)
      : std::runtime_error(what), smallest_eigenvalue_(smallest_eigenvalue) {}

  double smallest_eigenvalue() const { return smallest_eigenvalue_; }

 private:
  double smallest_eigenvalue_;
};

// A zero privacy budget cannot be met by any finite noise scale.
class InfiniteNoise : public std::domain_error {
 public:
  explicit InfiniteNoise(const std::string& what) : std::domain_error(what) {}
};

// I - D is singular, so the geometric-series closed form does not exist.
class SingularGeometry : public std::runtime_error {
 public:
  explicit SingularGeometry(const std::string& what)
      : std::runtime_error(what) {}
};

class SingularCovariance : public std::runtime_error {
 public:
  explicit SingularCovariance(const std::string& what)
      : std::runtime_error(what) {}
};

// Classical inference needs n > p residual degrees of freedom.
class DegenerateInference : public std::runtime_error {
 public:
  explicit DegenerateInference(const std::string& what)
      : std::runtime_error(what) {}
};

namespace internal {

inline void Require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace internal
}  // namespace dplr

#endif  // DPLR_ERRORS_HPP_
