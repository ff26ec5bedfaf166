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

#include "mfgc/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "mfgc/io.hpp"

namespace mfgc {

namespace {

struct RawValue {
  std::string text;
  int line = 0;
  bool used = false;
};

using Section = std::map<std::string, RawValue>;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

const std::vector<std::string>& section_names() {
  static const std::vector<std::string> names = {"model", "grid", "population", "solver",
                                                 "output"};
  return names;
}

std::map<std::string, Section> tokenize(const std::string& text, const std::string& origin) {
  std::map<std::string, Section> sections;
  std::istringstream in(text);
  std::string raw;
  std::string current;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (content.empty()) continue;
    if (content.front() == '[') {
      if (content.back() != ']') throw ParseError(origin, line, "unterminated section header");
      current = trim(content.substr(1, content.size() - 2));
      const auto& names = section_names();
      if (std::find(names.begin(), names.end(), current) == names.end()) {
        throw ParseError(origin, line, "unknown section [" + current + "]");
      }
      if (sections.count(current)) {
        throw ParseError(origin, line, "section [" + current + "] appears twice");
      }
      sections[current];
      continue;
    }
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ParseError(origin, line, "expected 'key = value'");
    if (current.empty()) throw ParseError(origin, line, "key outside of any section");
    const std::string key = trim(content.substr(0, eq));
    if (key.empty()) throw ParseError(origin, line, "empty key");
    if (key.find_first_of(" \t") != std::string::npos) {
      throw ParseError(origin, line, "key contains whitespace");
    }
    Section& sec = sections[current];
    if (sec.count(key)) throw ParseError(origin, line, "duplicate key '" + key + "'");
    sec[key] = {trim(content.substr(eq + 1)), line, false};
  }
  return sections;
}

double to_double(const std::string& field, const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw ValidationError(field, "expected a number, got '" + text + "'");
  }
  return value;
}

long long to_integer(const std::string& field, const std::string& text) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ValidationError(field, "expected an integer, got '" + text + "'");
  }
  return value;
}

bool to_bool(const std::string& field, const std::string& text) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw ValidationError(field, "expected true or false, got '" + text + "'");
}

std::vector<double> to_list(const std::string& field, const std::string& text) {
  std::vector<double> out;
  std::string token;
  for (char ch : text + ",") {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!token.empty()) out.push_back(to_double(field, token));
      token.clear();
    } else {
      token.push_back(ch);
    }
  }
  return out;
}

class Reader {
 public:
  Reader(std::map<std::string, Section>& sections) : sections_(sections) {}

  const RawValue* find(const std::string& section, const std::string& key) {
    auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    k->second.used = true;
    return &k->second;
  }

  void get(const std::string& section, const std::string& key, double& out) {
    if (const RawValue* v = find(section, key)) out = to_double(section + "." + key, v->text);
  }
  void get(const std::string& section, const std::string& key, int& out) {
    if (const RawValue* v = find(section, key)) {
      const long long x = to_integer(section + "." + key, v->text);
      if (x < -2147483647LL || x > 2147483647LL) {
        throw ValidationError(section + "." + key, "integer out of range");
      }
      out = static_cast<int>(x);
    }
  }
  void get(const std::string& section, const std::string& key, std::uint64_t& out) {
    if (const RawValue* v = find(section, key)) {
      const long long x = to_integer(section + "." + key, v->text);
      if (x < 0) throw ValidationError(section + "." + key, "must be >= 0");
      out = static_cast<std::uint64_t>(x);
    }
  }
  void get(const std::string& section, const std::string& key, bool& out) {
    if (const RawValue* v = find(section, key)) out = to_bool(section + "." + key, v->text);
  }
  void get(const std::string& section, const std::string& key, std::string& out) {
    if (const RawValue* v = find(section, key)) out = v->text;
  }
  void get(const std::string& section, const std::string& key, std::vector<double>& out) {
    if (const RawValue* v = find(section, key)) out = to_list(section + "." + key, v->text);
  }

  // Rejects every key that was not consumed.
  void finish() {
    for (const auto& [name, sec] : sections_) {
      for (const auto& [key, value] : sec) {
        if (!value.used) {
          throw ValidationError(name + "." + key,
                                "unknown key (line " + std::to_string(value.line) + ")");
        }
      }
    }
  }

 private:
  std::map<std::string, Section>& sections_;
};

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += format_double(xs[i]);
  }
  return out;
}

std::vector<double> to_std(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vec to_vec(const std::vector<double>& xs) {
  return Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

std::string points_text(const std::vector<Vec>& points) {
  std::string out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i) out += "; ";
    out += join(to_std(points[i]));
  }
  return out;
}

std::vector<Vec> parse_points(const std::string& field, const std::string& text) {
  std::vector<Vec> points;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ';')) {
    const std::vector<double> coords = to_list(field, item);
    if (coords.empty()) throw ValidationError(field, "empty point");
    points.push_back(to_vec(coords));
  }
  return points;
}

int model_state_dim(const std::string&) { return 1; }

void validate(const RunConfig& c) {
  const auto& models = available_models();
  if (std::find(models.begin(), models.end(), c.model.name) == models.end()) {
    std::string list;
    for (const auto& m : models) list += (list.empty() ? "" : ", ") + m;
    throw ValidationError("model.name", "unknown model '" + c.model.name + "'; available: " + list);
  }
  if (c.model.price != "saturating" && c.model.price != "constant") {
    throw ValidationError("model.price", "must be 'saturating' or 'constant'");
  }
  if (!(c.model.price_gain > 0.0)) throw ValidationError("model.price_gain", "must be > 0");
  const std::size_t n = static_cast<std::size_t>(model_state_dim(c.model.name));
  if (c.model.price == "constant" && c.model.price_level.size() != 1) {
    throw ValidationError("model.price_level", "needs one value per control component");
  }
  if (!c.model.terminal_target.empty() && c.model.terminal_target.size() != n) {
    throw ValidationError("model.terminal_target", "needs one value per state component");
  }
  if (!c.model.terminal_cap.empty() && c.model.terminal_cap.size() != n) {
    throw ValidationError("model.terminal_cap", "needs one value per state component");
  }
  if (c.model.name == "lq" && !(c.model.control_weight > 0.0)) {
    throw ValidationError("model.control_weight", "must be > 0");
  }
  const SolveConfig& s = c.solve;
  if (!(s.horizon > 0.0)) throw ValidationError("grid.horizon", "must be > 0");
  if (s.nt < 1) throw ValidationError("grid.nt", "must be >= 1");
  const InitialDistribution& m0 = s.m0;
  if (static_cast<std::size_t>(m0.lower.size()) != n ||
      static_cast<std::size_t>(m0.upper.size()) != n) {
    throw ValidationError("population.lower", "needs one value per state component");
  }
  for (Eigen::Index i = 0; i < m0.lower.size(); ++i) {
    if (!(m0.lower(i) <= m0.upper(i))) {
      throw ValidationError("population.upper", "must be >= population.lower");
    }
  }
  if (m0.kind == InitialDistribution::Kind::kUniformBox) {
    if (m0.count < 1) throw ValidationError("population.count", "must be >= 1");
  } else {
    if (m0.points.empty()) throw ValidationError("population.points", "must list at least one point");
    for (const Vec& p : m0.points) {
      if (static_cast<std::size_t>(p.size()) != n) {
        throw ValidationError("population.points", "point dimension differs from the state");
      }
      for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p(i) < m0.lower(i) || p(i) > m0.upper(i)) {
          throw ValidationError("population.points", "point outside [lower, upper]");
        }
      }
    }
    if (!m0.weights.empty() && m0.weights.size() != m0.points.size()) {
      throw ValidationError("population.weights", "needs one weight per point");
    }
    double total = 0.0;
    for (double w : m0.weights) {
      if (!(w >= 0.0)) throw ValidationError("population.weights", "must be >= 0");
      total += w;
    }
    if (!m0.weights.empty() && !(total > 0.0)) {
      throw ValidationError("population.weights", "must not all be zero");
    }
  }
  if (!(s.omega > 0.0 && s.omega <= 1.0)) throw ValidationError("solver.omega", "must lie in (0, 1]");
  if (s.support_cap < 1) throw ValidationError("solver.support_cap", "must be >= 1");
  if (!(s.price_tol > 0.0)) throw ValidationError("solver.price_tol", "must be > 0");
  if (!(s.agent_tol > 0.0)) throw ValidationError("solver.agent_tol", "must be > 0");
  if (!(s.exploitability_tol > 0.0)) {
    throw ValidationError("solver.exploitability_tol", "must be > 0");
  }
  if (s.max_iter < 1) throw ValidationError("solver.max_iter", "must be >= 1");
  if (c.threads < 0) throw ValidationError("solver.threads", "must be >= 0");
  if (c.output.directory.empty()) throw ValidationError("output.directory", "must not be empty");
}

RunConfig default_config() {
  RunConfig c;
  c.solve.m0.kind = InitialDistribution::Kind::kUniformBox;
  c.solve.m0.lower = Vec::Constant(1, 0.2);
  c.solve.m0.upper = Vec::Constant(1, 0.8);
  c.solve.m0.count = 64;
  c.solve.m0.seed = 12345;
  return c;
}

}  // namespace

const std::vector<std::string>& available_models() {
  static const std::vector<std::string> names = {"gas", "lq"};
  return names;
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  auto sections = tokenize(text, origin);
  Reader r(sections);
  RunConfig c = default_config();

  ModelConfig& m = c.model;
  r.get("model", "name", m.name);
  if (m.name == "gas") {
    r.get("model", "epsilon", m.gas.epsilon);
    r.get("model", "v_min", m.gas.v_min);
    r.get("model", "v_max", m.gas.v_max);
    r.get("model", "c1", m.gas.c1);
    r.get("model", "c2", m.gas.c2);
  } else if (m.name == "lq") {
    r.get("model", "control_weight", m.control_weight);
    r.get("model", "terminal_slope", m.terminal_slope);
  }
  r.get("model", "congestion", m.congestion);
  r.get("model", "terminal_mean", m.terminal_mean);
  r.get("model", "price", m.price);
  r.get("model", "price_gain", m.price_gain);
  r.get("model", "price_level", m.price_level);
  r.get("model", "terminal_target", m.terminal_target);
  r.get("model", "terminal_cap", m.terminal_cap);

  SolveConfig& s = c.solve;
  r.get("grid", "horizon", s.horizon);
  r.get("grid", "nt", s.nt);

  InitialDistribution& m0 = s.m0;
  std::string kind = "uniform";
  r.get("population", "kind", kind);
  if (kind == "uniform") {
    m0.kind = InitialDistribution::Kind::kUniformBox;
  } else if (kind == "points") {
    m0.kind = InitialDistribution::Kind::kPoints;
  } else {
    throw ValidationError("population.kind", "must be 'uniform' or 'points'");
  }
  std::vector<double> lower = to_std(m0.lower), upper = to_std(m0.upper);
  r.get("population", "lower", lower);
  r.get("population", "upper", upper);
  m0.lower = to_vec(lower);
  m0.upper = to_vec(upper);
  r.get("population", "count", m0.count);
  r.get("population", "seed", m0.seed);
  if (const RawValue* v = r.find("population", "points")) {
    m0.points = parse_points("population.points", v->text);
  }
  r.get("population", "weights", m0.weights);

  std::string schedule = "harmonic";
  r.get("solver", "schedule", schedule);
  if (schedule == "harmonic") {
    s.schedule = DampingSchedule::kHarmonic;
  } else if (schedule == "constant") {
    s.schedule = DampingSchedule::kConstant;
  } else {
    throw ValidationError("solver.schedule", "must be 'harmonic' or 'constant'");
  }
  r.get("solver", "omega", s.omega);
  r.get("solver", "support_cap", s.support_cap);
  r.get("solver", "price_tol", s.price_tol);
  r.get("solver", "agent_tol", s.agent_tol);
  r.get("solver", "exploitability_tol", s.exploitability_tol);
  r.get("solver", "max_iter", s.max_iter);
  r.get("solver", "seed", s.seed);
  r.get("solver", "threads", c.threads);

  OutputConfig& o = c.output;
  r.get("output", "directory", o.directory);
  r.get("output", "price", o.price);
  r.get("output", "trajectories", o.trajectories);
  r.get("output", "marginals", o.marginals);
  r.get("output", "convergence", o.convergence);
  r.get("output", "report", o.report);

  r.finish();
  validate(c);
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> e;
  auto num = [](double x) { return format_double(x); };
  e.emplace_back("model.name", model.name);
  if (model.name == "gas") {
    e.emplace_back("model.epsilon", num(model.gas.epsilon));
    e.emplace_back("model.v_min", num(model.gas.v_min));
    e.emplace_back("model.v_max", num(model.gas.v_max));
    e.emplace_back("model.c1", num(model.gas.c1));
    e.emplace_back("model.c2", num(model.gas.c2));
  } else if (model.name == "lq") {
    e.emplace_back("model.control_weight", num(model.control_weight));
    e.emplace_back("model.terminal_slope", num(model.terminal_slope));
  }
  e.emplace_back("model.congestion", num(model.congestion));
  e.emplace_back("model.terminal_mean", num(model.terminal_mean));
  e.emplace_back("model.price", model.price);
  e.emplace_back("model.price_gain", num(model.price_gain));
  if (!model.price_level.empty()) e.emplace_back("model.price_level", join(model.price_level));
  if (!model.terminal_target.empty()) {
    e.emplace_back("model.terminal_target", join(model.terminal_target));
  }
  if (!model.terminal_cap.empty()) e.emplace_back("model.terminal_cap", join(model.terminal_cap));
  e.emplace_back("grid.horizon", num(solve.horizon));
  e.emplace_back("grid.nt", std::to_string(solve.nt));
  const InitialDistribution& m0 = solve.m0;
  const bool uniform = m0.kind == InitialDistribution::Kind::kUniformBox;
  e.emplace_back("population.kind", uniform ? "uniform" : "points");
  e.emplace_back("population.lower", join(to_std(m0.lower)));
  e.emplace_back("population.upper", join(to_std(m0.upper)));
  if (uniform) {
    e.emplace_back("population.count", std::to_string(m0.count));
    e.emplace_back("population.seed", std::to_string(m0.seed));
  } else {
    e.emplace_back("population.points", points_text(m0.points));
    if (!m0.weights.empty()) e.emplace_back("population.weights", join(m0.weights));
  }
  e.emplace_back("solver.schedule",
                 solve.schedule == DampingSchedule::kHarmonic ? "harmonic" : "constant");
  e.emplace_back("solver.omega", num(solve.omega));
  e.emplace_back("solver.support_cap", std::to_string(solve.support_cap));
  e.emplace_back("solver.price_tol", num(solve.price_tol));
  e.emplace_back("solver.agent_tol", num(solve.agent_tol));
  e.emplace_back("solver.exploitability_tol", num(solve.exploitability_tol));
  e.emplace_back("solver.max_iter", std::to_string(solve.max_iter));
  e.emplace_back("solver.seed", std::to_string(solve.seed));
  e.emplace_back("solver.threads", std::to_string(threads));
  e.emplace_back("output.directory", output.directory);
  e.emplace_back("output.price", output.price ? "true" : "false");
  e.emplace_back("output.trajectories", output.trajectories ? "true" : "false");
  e.emplace_back("output.marginals", output.marginals ? "true" : "false");
  e.emplace_back("output.convergence", output.convergence ? "true" : "false");
  e.emplace_back("output.report", output.report ? "true" : "false");
  return e;
}

std::string RunConfig::echo() const {
  std::ostringstream out;
  std::string current;
  for (const auto& [field, value] : entries()) {
    const auto dot = field.find('.');
    const std::string section = field.substr(0, dot);
    if (section != current) {
      if (!current.empty()) out << '\n';
      out << '[' << section << "]\n";
      current = section;
    }
    out << field.substr(dot + 1) << " = " << value << '\n';
  }
  return out.str();
}

RunConfig gas_demo_config() {
  RunConfig c = default_config();
  c.model.name = "gas";
  c.model.congestion = 0.5;
  c.solve.schedule = DampingSchedule::kConstant;
  c.solve.omega = 0.5;
  c.output.directory = "gas_demo";
  return c;
}

ModelSpec build_model(const RunConfig& config) {
  const ModelConfig& m = config.model;
  ModelSpec model;
  if (m.name == "gas") {
    model = build_gas_storage(m.gas);
  } else if (m.name == "lq") {
    LqParams p;
    p.control_weight = m.control_weight;
    p.terminal_slope = m.terminal_slope;
    p.horizon = config.solve.horizon;
    model = build_lq_model(p);
  } else {
    throw ValidationError("model.name", "unknown model '" + m.name + "'");
  }
  model.dims.horizon = config.solve.horizon;
  if (m.congestion != 0.0) set_mean_congestion(model, m.congestion);
  if (m.terminal_mean != 0.0) {
    const double slope = m.name == "lq" ? m.terminal_slope : 0.0;
    const double coef = m.terminal_mean;
    model.terminal_cost = [slope, coef](const Vec& x, const DiscreteMeasure& mu) {
      const Vec mean = mu.empty() ? Vec::Zero(x.size()) : mu.mean();
      return slope * x.sum() + coef * x.dot(mean);
    };
    model.terminal_cost_dx = [slope, coef](const Vec& x, const DiscreteMeasure& mu) -> Vec {
      const Vec mean = mu.empty() ? Vec::Zero(x.size()) : mu.mean();
      return Vec::Constant(x.size(), slope) + coef * mean;
    };
  }
  if (m.price == "constant") {
    set_constant_price(model, to_vec(m.price_level));
  } else {
    set_saturating_price(model, m.price_gain);
  }
  if (!m.terminal_target.empty()) set_terminal_target(model, to_vec(m.terminal_target));
  if (!m.terminal_cap.empty()) set_terminal_cap(model, to_vec(m.terminal_cap));
  return model;
}

}  // namespace mfgc
