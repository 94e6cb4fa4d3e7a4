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

#include "rareis/result_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rareis {

namespace {

using nlohmann::json;

std::string csv_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

SmoothIndicatorKind parse_kind(const std::string& name) {
  if (name == "logistic") return SmoothIndicatorKind::Logistic;
  if (name == "gaussian_cdf") return SmoothIndicatorKind::GaussianCdf;
  throw std::runtime_error("config: unknown smooth indicator kind '" + name +
                           "' (expected logistic | gaussian_cdf)");
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

RunConfig parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("config parse error: ") + e.what());
  }
  RunConfig config;
  try {
    if (!doc.contains("problem") || !doc.at("problem").contains("name"))
      throw std::runtime_error("config: missing problem.name");
    const json& p = doc.at("problem");
    config.problem.name = p.at("name").get<std::string>();
    if (config.problem.name == "linear") {
      read_field(p, "d", config.problem.linear.dim);
      read_field(p, "beta", config.problem.linear.beta);
    } else if (config.problem.name == "quadratic") {
      read_field(p, "d", config.problem.quadratic.dim);
      read_field(p, "beta", config.problem.quadratic.beta);
      read_field(p, "kappa", config.problem.quadratic.kappa);
    } else if (config.problem.name == "bar") {
      read_field(p, "n_elem", config.problem.bar.n_elem);
      read_field(p, "K", config.problem.bar.n_kl_terms);
      read_field(p, "ell", config.problem.bar.ell);
      read_field(p, "u_max", config.problem.bar.u_max);
      read_field(p, "n_gp", config.problem.bar.n_gp);
      read_field(p, "load_mean", config.problem.bar.load_mean);
      read_field(p, "load_std", config.problem.bar.load_std);
    } else {
      throw std::runtime_error("config: unknown problem '" + config.problem.name +
                               "' (expected linear | quadratic | bar)");
    }
    read_field(doc, "method", config.method);
    if (config.method != "mc" && config.method != "ce" && config.method != "ice" &&
        config.method != "icered")
      throw std::runtime_error("config: unknown method '" + config.method +
                               "' (expected mc | ce | ice | icered)");
    if (doc.contains("solver")) {
      const json& s = doc.at("solver");
      read_field(s, "n_per_level", config.solver.n_per_level);
      read_field(s, "delta", config.solver.delta);
      read_field(s, "eps", config.solver.eps);
      read_field(s, "delta_bar", config.solver.delta_bar);
      read_field(s, "m_check", config.solver.m_check);
      read_field(s, "m_increment", config.solver.m_increment);
      read_field(s, "t_max", config.solver.t_max);
      read_field(s, "rho", config.solver.rho);
      read_field(s, "seed", config.solver.seed);
      read_field(s, "refine", config.solver.refine);
      read_field(s, "n_grad", config.solver.n_grad);
      if (s.contains("kind")) config.solver.kind = parse_kind(s.at("kind").get<std::string>());
    }
    read_field(doc, "runs", config.runs);
    read_field(doc, "output", config.output);
    config.solver.validate();
    if (config.runs < 1) throw std::runtime_error("config: runs must be >= 1");
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config field error: ") + e.what());
  }
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

LimitStateProblem build_problem(const ProblemConfig& config,
                                std::shared_ptr<BarProblem>* bar_out) {
  if (config.name == "linear") return make_linear_problem(config.linear);
  if (config.name == "quadratic") return make_quadratic_problem(config.quadratic);
  if (config.name == "bar") {
    auto bar = build_bar_problem(config.bar);
    if (bar_out) *bar_out = bar;
    return make_bar_limit_state(bar);
  }
  throw std::runtime_error("build_problem: unknown problem '" + config.name + "'");
}

std::string result_to_json(const EstimationResult& result) {
  std::ostringstream out;
  out << "{\n";
  out << "  \"p_hat\": " << format_double(result.p_hat) << ",\n";
  out << "  \"cv_hat\": " << format_double(result.cv_hat) << ",\n";
  out << "  \"n_levels\": " << result.n_levels << ",\n";
  out << "  \"lsf_calls\": " << result.lsf_calls << ",\n";
  out << "  \"grad_calls\": " << result.grad_calls << ",\n";
  out << "  \"converged\": " << (result.converged ? "true" : "false") << ",\n";
  out << "  \"per_level\": [";
  for (std::size_t i = 0; i < result.per_level.size(); ++i) {
    const LevelDiag& diag = result.per_level[i];
    out << (i == 0 ? "\n" : ",\n");
    out << "    {\"level\": " << diag.level << ", \"s\": " << format_double(diag.s_check)
        << ", \"s_next\": " << format_double(diag.s_next)
        << ", \"gamma\": " << format_double(diag.gamma) << ", \"rank\": " << diag.rank
        << ", \"weights_cv\": " << format_double(diag.weights_cv)
        << ", \"cv_stop\": " << format_double(diag.cv_stop) << "}";
  }
  out << (result.per_level.empty() ? "]" : "\n  ]") << "\n";
  out << "}\n";
  return out.str();
}

std::string study_csv(const std::vector<StudyRow>& rows) {
  std::ostringstream out;
  out << "run,seed,p_hat,cv_hat,n_levels,lsf_calls,grad_calls,converged\n";
  double p_sum = 0.0, p_sq_sum = 0.0, lsf_sum = 0.0, grad_sum = 0.0, level_sum = 0.0;
  int converged_count = 0;
  for (const StudyRow& row : rows) {
    const EstimationResult& r = row.result;
    out << row.run << ',' << row.seed << ',' << csv_double(r.p_hat) << ','
        << csv_double(r.cv_hat) << ',' << r.n_levels << ',' << r.lsf_calls << ','
        << r.grad_calls << ',' << (r.converged ? 1 : 0) << "\n";
    p_sum += r.p_hat;
    p_sq_sum += r.p_hat * r.p_hat;
    lsf_sum += static_cast<double>(r.lsf_calls);
    grad_sum += static_cast<double>(r.grad_calls);
    level_sum += r.n_levels;
    converged_count += r.converged ? 1 : 0;
  }
  const auto n = static_cast<double>(rows.size());
  const double p_mean = p_sum / n;
  // Empirical cv of p_hat across runs (population normalization).
  double cv_runs = std::numeric_limits<double>::infinity();
  if (p_mean > 0.0) {
    const double var = std::max(0.0, p_sq_sum / n - p_mean * p_mean);
    cv_runs = std::sqrt(var) / p_mean;
  }
  out << "summary," << rows.size() << ',' << csv_double(p_mean) << ',' << csv_double(cv_runs)
      << ',' << csv_double(level_sum / n) << ',' << csv_double(lsf_sum / n) << ','
      << csv_double(grad_sum / n) << ',' << converged_count << "\n";
  return out.str();
}

std::string spectrum_csv(const EstimationResult& result, double eps) {
  std::ostringstream out;
  out << "level,index,eigenvalue,rank,eps\n";
  for (const LevelDiag& diag : result.per_level) {
    for (Eigen::Index i = 0; i < diag.spectrum.size(); ++i)
      out << diag.level << ',' << i + 1 << ',' << csv_double(diag.spectrum(i)) << ','
          << diag.rank << ',' << csv_double(eps) << "\n";
  }
  return out.str();
}

std::string modes_csv(const EstimationResult& result) {
  std::ostringstream out;
  out << "index,mode1,mode2\n";
  const Eigen::MatrixXd& modes = result.final_modes;
  for (Eigen::Index i = 0; i < modes.rows(); ++i) {
    out << i + 1 << ',' << csv_double(modes(i, 0)) << ','
        << csv_double(modes.cols() > 1 ? modes(i, 1) : 0.0) << "\n";
  }
  return out.str();
}

std::string kl_spectrum_csv(const KLExpansion& kl) {
  std::ostringstream out;
  out << "index,eigenvalue,captured_variance_ratio\n";
  const double trace = kl.sigma_gauss * kl.sigma_gauss * kl.domain_length;
  double cum = 0.0;
  for (int i = 0; i < kl.n_terms(); ++i) {
    cum += kl.eigvals(i);
    out << i + 1 << ',' << csv_double(kl.eigvals(i)) << ',' << csv_double(cum / trace) << "\n";
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("failed writing output file '" + path + "'");
}

}  // namespace rareis
