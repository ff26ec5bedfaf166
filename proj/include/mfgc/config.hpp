// Copyright 2026 The mfgc Authors
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

#ifndef MFGC_CONFIG_HPP_
#define MFGC_CONFIG_HPP_

// Run configuration: a sectioned key = value text format.
//
//   # comment            (also after values)
//   [section]
//   key = value
//
// Sections: model, grid, population, solver, output. Unknown sections and
// keys are errors. Numeric lists use commas or spaces; point lists separate
// points with ';'. See README.md for every key and its default.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mfgc/equilibrium.hpp"
#include "mfgc/error.hpp"
#include "mfgc/model.hpp"

namespace mfgc {

// Malformed text; names the source and line.
class ParseError : public Error {
 public:
  ParseError(const std::string& origin, int line, const std::string& what)
      : Error("parse_config", origin + ":" + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Well-formed but invalid value; names the field as "section.key".
class ValidationError : public Error {
 public:
  ValidationError(const std::string& field, const std::string& what)
      : Error("parse_config", field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ModelConfig {
  std::string name = "gas";
  // gas storage
  GasStorageParams gas;
  // linear-quadratic fixture
  double control_weight = 1.0;
  double terminal_slope = 0.0;
  // shared hooks
  double congestion = 0.0;     // f(x, m) = congestion <x, mean(m)>
  double terminal_mean = 0.0;  // g0(x, m) += terminal_mean <x, mean(m)>
  std::string price = "saturating";  // saturating | constant
  double price_gain = 1.0;
  std::vector<double> price_level;   // constant price value
  std::vector<double> terminal_target;  // g1(x) = x - target (empty: none)
  std::vector<double> terminal_cap;     // g2(x) = x - cap (empty: none)
};

struct OutputConfig {
  std::string directory = "out";
  bool price = true;
  bool trajectories = true;
  bool marginals = true;
  bool convergence = true;
  bool report = true;
};

struct RunConfig {
  ModelConfig model;
  SolveConfig solve;
  int threads = 0;  // 0: leave the OpenMP default
  OutputConfig output;

  // Canonical text of the fully defaulted configuration; parses back to an
  // equal configuration.
  std::string echo() const;
  // Flattened "section.key" -> value pairs for reports.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

const std::vector<std::string>& available_models();

RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");

// Default configuration of the gas storage demonstration.
RunConfig gas_demo_config();

// Builds the model named in the configuration with its hooks applied.
ModelSpec build_model(const RunConfig& config);

}  // namespace mfgc

#endif  // MFGC_CONFIG_HPP_
