// Copyright 2026 The Labelopt Authors
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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include "labelopt/error.hpp"
#include "labelopt/milp.hpp"

namespace labelopt {

void OptimizationInstance::AddRow(std::span<const double> theta, bool z, bool b) {
  Require(static_cast<int>(theta.size()) == num_classifiers_, ErrorCode::kDimensionMismatch,
          "theta has " + std::to_string(theta.size()) + " entries, expected " +
              std::to_string(num_classifiers_));
  theta_.insert(theta_.end(), theta.begin(), theta.end());
  z_.push_back(z ? 1 : 0);
  b_.push_back(b ? 1 : 0);
}

double OptimizationInstance::max_theta() const {
  double best = 0.0;
  for (double t : theta_) best = std::max(best, t);
  return best;
}

void OptimizationInstance::Validate() const {
  Require(num_classifiers_ >= 1, ErrorCode::kInvalidArgument, "instance needs n >= 1");
  Require(num_rows() >= 1, ErrorCode::kInvalidArgument, "instance needs at least one row");
  for (int i = 0; i < num_rows(); ++i) {
    Require(b_[i] <= z_[i], ErrorCode::kInvalidArgument,
            "row " + std::to_string(i) + " has b > z");
    for (double t : theta(i)) {
      Require(t > 0.0 && t <= 1.0, ErrorCode::kInvalidArgument,
              "row " + std::to_string(i) + " has confidence outside (0,1]");
    }
  }
}

int64_t MilpConfig::ErrorBudget(int num_rows) const {
  return static_cast<int64_t>(std::floor(num_rows * (1.0 - alpha) + 1e-9));
}

void MilpConfig::Validate(const OptimizationInstance& instance) const {
  Require(alpha > 0.0 && alpha <= 1.0, ErrorCode::kConfig, "alpha must lie in (0,1]");
  Require(big_m > 0.0, ErrorCode::kConfig, "big-M must be positive");
  Require(epsilon > 0.0 && epsilon < 1.0, ErrorCode::kConfig, "epsilon must lie in (0,1)");
  const int n = instance.num_classifiers();
  const double upper = OmegaUpper(n);
  Require(omega_lower <= 0.0 && upper >= 0.0, ErrorCode::kConfig,
          "omega bounds must contain 0 so the all-manual solution stays feasible");
  const double max_theta = instance.max_theta();
  // |sum_j w_j theta_j - 1| must stay within M for both linking rows.
  Require(upper * n * max_theta - 1.0 <= big_m, ErrorCode::kConfig,
          "omega upper bound violates big-M validity");
  Require(omega_lower * n * max_theta - 1.0 >= -big_m + epsilon, ErrorCode::kConfig,
          "omega lower bound violates big-M validity");
  if (node_limit) Require(*node_limit > 0, ErrorCode::kConfig, "node limit must be positive");
  if (time_limit_seconds) {
    Require(*time_limit_seconds > 0, ErrorCode::kConfig, "time limit must be positive");
  }
}

std::string_view MilpStatusName(MilpStatus status) {
  switch (status) {
    case MilpStatus::kOptimal: return "Optimal";
    case MilpStatus::kIncumbent: return "Incumbent";
    case MilpStatus::kTrivialFallback: return "TrivialFallback";
  }
  return "Unknown";
}

MilpStatus ParseMilpStatus(std::string_view name) {
  if (name == "Optimal") return MilpStatus::kOptimal;
  if (name == "Incumbent") return MilpStatus::kIncumbent;
  if (name == "TrivialFallback") return MilpStatus::kTrivialFallback;
  Fail(ErrorCode::kParse, "unknown MILP status '" + std::string(name) + "'");
}

MilpModel Formulate(const OptimizationInstance& instance, const MilpConfig& config) {
  instance.Validate();
  config.Validate(instance);
  const int n = instance.num_classifiers();
  const int m = instance.num_rows();
  MilpModel model;
  model.num_classifiers = n;
  model.num_rows = m;
  model.source = instance;
  model.config = config;
  for (int j = 0; j < n; ++j) {
    model.variables.push_back(
        {"W_" + std::to_string(j + 1), config.omega_lower, config.OmegaUpper(n), false});
  }
  for (int i = 0; i < m; ++i) {
    model.variables.push_back({"X_" + std::to_string(i + 1), 0.0, 1.0, true});
  }
  model.objective.assign(n + m, 0.0);
  model.objective_constant = m;
  for (int i = 0; i < m; ++i) {
    if (instance.z(i)) model.objective[n + i] = -1.0;
  }

  MilpConstraint acc{"ACC", {}, ConstraintSense::kGreaterEqual, -m * (1.0 - config.alpha)};
  for (int i = 0; i < m; ++i) {
    const int coef = static_cast<int>(instance.b(i)) - static_cast<int>(instance.z(i));
    if (coef != 0) acc.terms.emplace_back(n + i, coef);
  }
  model.constraints.push_back(std::move(acc));

  const double big_m = config.big_m;
  for (int i = 0; i < m; ++i) {
    std::vector<std::pair<int, double>> terms;
    const auto theta = instance.theta(i);
    for (int j = 0; j < n; ++j) terms.emplace_back(j, theta[j]);
    terms.emplace_back(n + i, -big_m);
    const std::string idx = std::to_string(i + 1);
    model.constraints.push_back({"LNK_LE_" + idx, terms, ConstraintSense::kLessEqual, 1.0});
    model.constraints.push_back(
        {"LNK_GE_" + idx, terms, ConstraintSense::kGreaterEqual, 1.0 + config.epsilon - big_m});
  }
  return model;
}

MilpSolution FallbackSolution(const OptimizationInstance& instance) {
  MilpSolution s;
  s.omega.assign(instance.num_classifiers(), 0.0);
  s.x.assign(instance.num_rows(), 0);
  s.manual_count = instance.num_rows();
  s.lower_bound = 0.0;
  s.gap = static_cast<double>(instance.num_rows());
  s.status = MilpStatus::kTrivialFallback;
  return s;
}

VerifyReport Verify(const MilpSolution& solution, const OptimizationInstance& instance,
                    const MilpConfig& config) {
  VerifyReport report;
  const int n = instance.num_classifiers();
  const int m = instance.num_rows();
  auto fail = [&](const std::string& msg) {
    report.ok = false;
    report.failures.push_back(msg);
  };
  if (static_cast<int>(solution.omega.size()) != n || static_cast<int>(solution.x.size()) != m) {
    fail("dimension mismatch between solution and instance");
    return report;
  }
  const double upper = config.OmegaUpper(n);
  for (int j = 0; j < n; ++j) {
    const double w = solution.omega[j];
    if (!std::isfinite(w) || w < config.omega_lower - 1e-9 || w > upper + 1e-9) {
      fail("omega[" + std::to_string(j) + "] outside its bounds");
    }
  }
  int64_t auto_count = 0;
  int64_t wrong_auto = 0;
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    const auto theta = instance.theta(i);
    for (int j = 0; j < n; ++j) s += solution.omega[j] * theta[j];
    const bool x = solution.x[i] != 0;
    // Inside the epsilon band either indicator value is accepted.
    if (std::abs(s - 1.0) > config.epsilon && x != (s > 1.0)) {
      report.ok = false;
      report.bad_rows.push_back(i);
      std::ostringstream msg;
      msg.precision(17);
      msg << "row " << i << ": weighted sum " << s << " implies x=" << (s > 1.0)
          << " but solution has x=" << x;
      report.failures.push_back(msg.str());
    }
    if (x && instance.z(i)) {
      ++auto_count;
      if (!instance.b(i)) ++wrong_auto;
    }
  }
  if (static_cast<double>(-wrong_auto) + m * (1.0 - config.alpha) < -1e-9) {
    fail("accuracy constraint violated: " + std::to_string(wrong_auto) +
         " agreed-but-wrong rows selected");
  }
  if (solution.manual_count != m - auto_count) {
    fail("manual count " + std::to_string(solution.manual_count) + " but x implies " +
         std::to_string(m - auto_count));
  }
  return report;
}

namespace {

std::string FormatNumber(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string Pad(std::string_view s, size_t width) {
  std::string out(s);
  if (out.size() < width) out.append(width - out.size(), ' ');
  return out;
}

char SenseCode(ConstraintSense sense) {
  switch (sense) {
    case ConstraintSense::kLessEqual: return 'L';
    case ConstraintSense::kGreaterEqual: return 'G';
    case ConstraintSense::kEqual: return 'E';
  }
  return 'E';
}

}  // namespace

// Section and field order follow fixed-format MPS; names longer than eight
// characters simply widen the fields, which free-format readers accept.
std::string ExportMps(const MilpModel& model) {
  std::ostringstream out;
  out << "NAME          LABELOPT\n";
  out << "ROWS\n";
  out << " N  COST\n";
  for (const auto& c : model.constraints) {
    out << ' ' << SenseCode(c.sense) << "  " << c.name << '\n';
  }
  // Column-major view of the constraint matrix.
  std::vector<std::vector<std::pair<int, double>>> by_column(model.variables.size());
  for (size_t r = 0; r < model.constraints.size(); ++r) {
    for (const auto& [col, v] : model.constraints[r].terms) {
      by_column[col].emplace_back(static_cast<int>(r), v);
    }
  }
  out << "COLUMNS\n";
  bool in_integer_block = false;
  for (size_t col = 0; col < model.variables.size(); ++col) {
    const auto& var = model.variables[col];
    if (var.integer != in_integer_block) {
      out << "    MARKER                 'MARKER'                 "
          << (var.integer ? "'INTORG'" : "'INTEND'") << '\n';
      in_integer_block = var.integer;
    }
    const double obj = col < model.objective.size() ? model.objective[col] : 0.0;
    if (obj != 0.0) {
      out << "    " << Pad(var.name, 10) << Pad("COST", 12) << FormatNumber(obj) << '\n';
    }
    for (const auto& [row, v] : by_column[col]) {
      out << "    " << Pad(var.name, 10) << Pad(model.constraints[row].name, 12)
          << FormatNumber(v) << '\n';
    }
  }
  if (in_integer_block) out << "    MARKER                 'MARKER'                 'INTEND'\n";
  out << "RHS\n";
  if (model.objective_constant != 0.0) {
    out << "    RHS       " << Pad("COST", 12) << FormatNumber(-model.objective_constant) << '\n';
  }
  for (const auto& c : model.constraints) {
    if (c.rhs != 0.0) out << "    RHS       " << Pad(c.name, 12) << FormatNumber(c.rhs) << '\n';
  }
  out << "BOUNDS\n";
  for (const auto& var : model.variables) {
    if (var.lower != 0.0) {
      out << " LO BND       " << Pad(var.name, 12) << FormatNumber(var.lower) << '\n';
    }
    out << " UP BND       " << Pad(var.name, 12) << FormatNumber(var.upper) << '\n';
  }
  out << "ENDATA\n";
  return out.str();
}

MilpModel ParseMps(std::string_view text) {
  MilpModel model;
  std::map<std::string, int> row_index;
  std::map<std::string, int> col_index;
  std::string objective_row;
  std::string section;
  bool integer_block = false;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  auto parse_error = [&](const std::string& what) {
    Fail(ErrorCode::kParse, "MPS line " + std::to_string(line_no) + ": " + what);
  };
  auto to_double = [&](const std::string& s) -> double {
    double v = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) parse_error("bad number '" + s + "'");
    return v;
  };
  auto column_of = [&](const std::string& name) {
    auto it = col_index.find(name);
    if (it != col_index.end()) return it->second;
    const int idx = static_cast<int>(model.variables.size());
    col_index[name] = idx;
    model.variables.push_back(
        {name, 0.0, integer_block ? 1.0 : std::numeric_limits<double>::infinity(), integer_block});
    model.objective.push_back(0.0);
    return idx;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '*') continue;
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (line[0] != ' ' && line[0] != '\t') {
      section = tok[0];
      if (section == "ENDATA") break;
      if (section != "NAME" && section != "ROWS" && section != "COLUMNS" && section != "RHS" &&
          section != "BOUNDS") {
        parse_error("unsupported section " + section);
      }
      continue;
    }
    if (section == "ROWS") {
      if (tok.size() != 2) parse_error("ROWS entry needs 2 fields");
      if (tok[0] == "N") {
        if (objective_row.empty()) objective_row = tok[1];
        continue;
      }
      ConstraintSense sense;
      if (tok[0] == "L") sense = ConstraintSense::kLessEqual;
      else if (tok[0] == "G") sense = ConstraintSense::kGreaterEqual;
      else if (tok[0] == "E") sense = ConstraintSense::kEqual;
      else parse_error("unknown row type " + tok[0]);
      row_index[tok[1]] = static_cast<int>(model.constraints.size());
      model.constraints.push_back({tok[1], {}, sense, 0.0});
    } else if (section == "COLUMNS") {
      if (tok.size() >= 3 && tok[1] == "'MARKER'") {
        if (tok[2] == "'INTORG'") integer_block = true;
        else if (tok[2] == "'INTEND'") integer_block = false;
        else parse_error("unknown marker " + tok[2]);
        continue;
      }
      if (tok.size() != 3 && tok.size() != 5) parse_error("COLUMNS entry needs 3 or 5 fields");
      const int col = column_of(tok[0]);
      for (size_t k = 1; k + 1 < tok.size(); k += 2) {
        const double v = to_double(tok[k + 1]);
        if (tok[k] == objective_row) {
          model.objective[col] = v;
        } else {
          auto it = row_index.find(tok[k]);
          if (it == row_index.end()) parse_error("unknown row " + tok[k]);
          model.constraints[it->second].terms.emplace_back(col, v);
        }
      }
    } else if (section == "RHS") {
      if (tok.size() != 3 && tok.size() != 5) parse_error("RHS entry needs 3 or 5 fields");
      for (size_t k = 1; k + 1 < tok.size(); k += 2) {
        const double v = to_double(tok[k + 1]);
        if (tok[k] == objective_row) {
          model.objective_constant = -v;
        } else {
          auto it = row_index.find(tok[k]);
          if (it == row_index.end()) parse_error("unknown row " + tok[k]);
          model.constraints[it->second].rhs = v;
        }
      }
    } else if (section == "BOUNDS") {
      if (tok.size() < 3) parse_error("BOUNDS entry too short");
      auto it = col_index.find(tok[2]);
      if (it == col_index.end()) parse_error("unknown column " + tok[2]);
      auto& var = model.variables[it->second];
      const std::string& kind = tok[0];
      const double inf = std::numeric_limits<double>::infinity();
      if (kind == "FR") {
        var.lower = -inf;
        var.upper = inf;
      } else if (kind == "MI") {
        var.lower = -inf;
      } else if (kind == "PL") {
        var.upper = inf;
      } else if (kind == "BV") {
        var.lower = 0.0;
        var.upper = 1.0;
        var.integer = true;
      } else {
        if (tok.size() != 4) parse_error("bound needs a value");
        const double v = to_double(tok[3]);
        if (kind == "LO") var.lower = v;
        else if (kind == "UP") var.upper = v;
        else if (kind == "FX") var.lower = var.upper = v;
        else parse_error("unknown bound type " + kind);
      }
    }
  }
  // Recover the problem dimensions from the naming convention when present.
  for (const auto& var : model.variables) {
    if (var.name.rfind("W_", 0) == 0) ++model.num_classifiers;
    if (var.name.rfind("X_", 0) == 0) ++model.num_rows;
  }
  return model;
}

}  // namespace labelopt
