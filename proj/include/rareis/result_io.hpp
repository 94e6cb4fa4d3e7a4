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

#ifndef RAREIS_RESULT_IO_HPP
#define RAREIS_RESULT_IO_HPP

#include <memory>
#include <string>
#include <vector>

#include "rareis/estimators.hpp"
#include "rareis/problems.hpp"
#include "rareis/randfield.hpp"

namespace rareis {

struct ProblemConfig {
  std::string name;  // "linear" | "quadratic" | "bar"
  LinearLsfSpec linear;
  QuadraticLsfSpec quadratic;
  BarConfig bar;
};

struct RunConfig {
  ProblemConfig problem;
  std::string method = "icered";  // "mc" | "ce" | "ice" | "icered"
  SolverConfig solver;
  int runs = 1;
  std::string output;
};

/// Parses one JSON run configuration. Unknown problem/method names and
/// malformed documents raise std::runtime_error with a diagnostic message.
RunConfig parse_run_config(const std::string& json_text);

RunConfig load_run_config(const std::string& path);

/// Problem factory; a bar problem keeps its KL expansion alive inside the
/// returned closure.
LimitStateProblem build_problem(const ProblemConfig& config,
                                std::shared_ptr<BarProblem>* bar_out = nullptr);

/// Deterministic serialization: fixed key order, %.17g doubles, non-finite
/// values as null. Same result -> byte-identical text.
std::string result_to_json(const EstimationResult& result);

struct StudyRow {
  int run = 0;
  std::uint64_t seed = 0;
  EstimationResult result;
};

std::string study_csv(const std::vector<StudyRow>& rows);

/// Per-level eigenvalue table: level,index,eigenvalue,rank,eps.
std::string spectrum_csv(const EstimationResult& result, double eps);

/// Final-level leading eigenvectors: index,mode1,mode2.
std::string modes_csv(const EstimationResult& result);

/// KL spectrum table: index,eigenvalue,captured_variance_ratio.
std::string kl_spectrum_csv(const KLExpansion& kl);

void write_text_file(const std::string& path, const std::string& content);

/// %.17g with null for non-finite values (shared by all writers).
std::string format_double(double v);

}  // namespace rareis

#endif  // RAREIS_RESULT_IO_HPP
