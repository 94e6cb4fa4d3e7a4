// Copyright 2026 The rareis Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RAREIS_ERRORS_HPP
#define RAREIS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rareis {

struct DimensionMismatch : std::invalid_argument {
  explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

struct DegenerateCovariance : std::runtime_error {
  explicit DegenerateCovariance(const std::string& what) : std::runtime_error(what) {}
};

struct AllWeightsZero : std::runtime_error {
  explicit AllWeightsZero(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidLsfValue : std::runtime_error {
  explicit InvalidLsfValue(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidSmoothing : std::invalid_argument {
  explicit InvalidSmoothing(const std::string& what) : std::invalid_argument(what) {}
};

struct EigenFailure : std::runtime_error {
  explicit EigenFailure(const std::string& what) : std::runtime_error(what) {}
};

struct MissingGradient : std::logic_error {
  explicit MissingGradient(const std::string& what) : std::logic_error(what) {}
};

struct SolveFailure : std::runtime_error {
  explicit SolveFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rareis

#endif  // RAREIS_ERRORS_HPP
