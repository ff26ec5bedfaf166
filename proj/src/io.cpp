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

#include "mfgc/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "mfgc/config.hpp"
#include "mfgc/error.hpp"

namespace mfgc {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), x);
  return std::string(buffer, result.ptr);
}

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write", "cannot open '" + path + "' for writing");
  return out;
}

void close_output(std::ofstream& out, const std::string& path) {
  out.close();
  if (!out) throw Error("write", "failed writing '" + path + "'");
}

void append_components(std::string& header, const char* name, int count) {
  for (int i = 0; i < count; ++i) header += "," + std::string(name) + "_" + std::to_string(i);
}

void append_values(std::string& line, const Vec* v, int count) {
  for (int i = 0; i < count; ++i) {
    line += ',';
    if (v) line += format_double((*v)(i));
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  fields.push_back(field);
  return fields;
}

double parse_number(const std::string& path, int line, const std::string& text) {
  if (text == "nan") return std::nan("");
  if (text == "inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(path, line, "expected a number, got '" + text + "'");
  }
  return value;
}

// Reads the header and groups column indices by prefix ("gamma" -> {2, 3}).
struct Header {
  std::vector<std::string> names;
  std::map<std::string, std::vector<int>> groups;
};

Header read_header(std::istream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path, 1, "missing header");
  Header h;
  h.names = split_csv(line);
  for (int i = 0; i < static_cast<int>(h.names.size()); ++i) {
    const std::string& name = h.names[i];
    const auto us = name.rfind('_');
    if (us != std::string::npos &&
        name.find_first_not_of("0123456789", us + 1) == std::string::npos && us + 1 < name.size()) {
      const std::string prefix = name.substr(0, us);
      const int index = std::stoi(name.substr(us + 1));
      auto& group = h.groups[prefix];
      if (index != static_cast<int>(group.size())) {
        throw ParseError(path, 1, "column '" + name + "' out of order");
      }
      group.push_back(i);
    } else {
      h.groups[name].push_back(i);
    }
  }
  return h;
}

const std::vector<int>& require_column(const Header& h, const std::string& name,
                                       const std::string& path) {
  auto it = h.groups.find(name);
  if (it == h.groups.end()) throw ParseError(path, 1, "missing column '" + name + "'");
  return it->second;
}

Vec gather(const std::vector<std::string>& fields, const std::vector<int>& cols,
           const std::string& path, int line) {
  Vec v(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = parse_number(path, line, fields[cols[i]]);
  }
  return v;
}

}  // namespace

void write_price_csv(const std::string& path, const TimeGrid& grid,
                     const CouplingSignals& coupling) {
  std::ofstream out = open_output(path);
  const int m = coupling.price.empty() ? 0 : static_cast<int>(coupling.price.front().size());
  std::string header = "node,t";
  append_components(header, "P", m);
  out << header << '\n';
  for (std::size_t k = 0; k < coupling.price.size(); ++k) {
    std::string line = std::to_string(k) + "," + format_double(grid.t(static_cast<int>(k)));
    append_values(line, &coupling.price[k], m);
    out << line << '\n';
  }
  close_output(out, path);
}

void write_trajectories_csv(
    const std::string& path, const TimeGrid& grid,
    const std::vector<std::shared_ptr<const AgentTrajectory>>& agents, int n_control,
    int n_constraints) {
  std::ofstream out = open_output(path);
  int n = 0;
  for (const auto& a : agents) {
    if (a) {
      n = static_cast<int>(a->gamma.front().size());
      break;
    }
  }
  std::string header = "agent_id,node,t";
  append_components(header, "gamma", n);
  append_components(header, "v", n_control);
  append_components(header, "p", n);
  append_components(header, "nu", n_constraints);
  out << header << '\n';
  for (std::size_t id = 0; id < agents.size(); ++id) {
    if (!agents[id]) continue;
    const AgentTrajectory& a = *agents[id];
    for (int k = 0; k <= grid.nt; ++k) {
      std::string line =
          std::to_string(id) + "," + std::to_string(k) + "," + format_double(grid.t(k));
      const bool control = k < grid.nt;
      append_values(line, &a.gamma[k], n);
      append_values(line, control ? &a.v[k] : nullptr, n_control);
      append_values(line, &a.p[k], n);
      append_values(line, control && n_constraints > 0 ? &a.nu[k] : nullptr, n_constraints);
      out << line << '\n';
    }
  }
  close_output(out, path);
}

void write_marginals_csv(const std::string& path, const TimeGrid& grid,
                         const std::vector<DiscreteMeasure>& marginals) {
  std::ofstream out = open_output(path);
  const int n = marginals.empty() ? 0 : marginals.front().dim();
  std::string header = "node,t,particle,weight";
  append_components(header, "x", n);
  out << header << '\n';
  for (std::size_t k = 0; k < marginals.size(); ++k) {
    const DiscreteMeasure& m = marginals[k];
    for (std::size_t i = 0; i < m.size(); ++i) {
      std::string line = std::to_string(k) + "," + format_double(grid.t(static_cast<int>(k))) +
                         "," + std::to_string(i) + "," + format_double(m.weights()[i]);
      append_values(line, &m.points()[i], n);
      out << line << '\n';
    }
  }
  close_output(out, path);
}

void write_convergence_csv(const std::string& path, const ConvergenceTrace& trace) {
  std::ofstream out = open_output(path);
  out << "iteration,price_change,marginal_d1_change,exploitability,mean_cost\n";
  for (const IterationRecord& r : trace) {
    out << r.iteration << ',' << format_double(r.price_change) << ','
        << format_double(r.marginal_d1_change) << ',' << format_double(r.exploitability) << ','
        << format_double(r.mean_cost) << '\n';
  }
  close_output(out, path);
}

void write_report(const std::string& path, const ReportEntries& entries) {
  std::ofstream out = open_output(path);
  for (const auto& [key, value] : entries) out << key << '=' << value << '\n';
  close_output(out, path);
}

PriceTable read_price_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  const Header h = read_header(in, path);
  const auto& node_col = require_column(h, "node", path);
  const auto& t_col = require_column(h, "t", path);
  const auto& p_cols = require_column(h, "P", path);
  PriceTable table;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != h.names.size()) throw ParseError(path, line_no, "wrong field count");
    const double node = parse_number(path, line_no, fields[node_col.front()]);
    if (node != static_cast<double>(table.price.size())) {
      throw ParseError(path, line_no, "nodes must be listed in order from 0");
    }
    table.t.push_back(parse_number(path, line_no, fields[t_col.front()]));
    table.price.push_back(gather(fields, p_cols, path, line_no));
  }
  if (table.price.empty()) throw ParseError(path, line_no, "no rows");
  return table;
}

std::vector<DiscreteMeasure> read_marginals_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  const Header h = read_header(in, path);
  const auto& node_col = require_column(h, "node", path);
  const auto& w_col = require_column(h, "weight", path);
  const auto& x_cols = require_column(h, "x", path);
  std::vector<std::vector<Vec>> points;
  std::vector<std::vector<double>> weights;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != h.names.size()) throw ParseError(path, line_no, "wrong field count");
    const double node = parse_number(path, line_no, fields[node_col.front()]);
    if (node == static_cast<double>(points.size())) {
      points.emplace_back();
      weights.emplace_back();
    } else if (node != static_cast<double>(points.size()) - 1.0) {
      throw ParseError(path, line_no, "nodes must be listed in order from 0");
    }
    points.back().push_back(gather(fields, x_cols, path, line_no));
    weights.back().push_back(parse_number(path, line_no, fields[w_col.front()]));
  }
  std::vector<DiscreteMeasure> out;
  for (std::size_t k = 0; k < points.size(); ++k) {
    out.emplace_back(std::move(points[k]), std::move(weights[k]));
  }
  return out;
}

TrajectoryTable read_trajectories_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  const Header h = read_header(in, path);
  const auto& id_col = require_column(h, "agent_id", path);
  const auto& node_col = require_column(h, "node", path);
  const auto& t_col = require_column(h, "t", path);
  const auto& gamma_cols = require_column(h, "gamma", path);
  const auto& v_cols = require_column(h, "v", path);
  const auto& p_cols = require_column(h, "p", path);
  const auto nu_it = h.groups.find("nu");
  const std::vector<int> nu_cols = nu_it == h.groups.end() ? std::vector<int>{} : nu_it->second;
  TrajectoryTable table;
  std::string line;
  int line_no = 1;
  int current = -1;
  bool closed = true;  // the current agent reached a row with empty controls
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != h.names.size()) throw ParseError(path, line_no, "wrong field count");
    const int id = static_cast<int>(parse_number(path, line_no, fields[id_col.front()]));
    const int node = static_cast<int>(parse_number(path, line_no, fields[node_col.front()]));
    if (id != current) {
      if (!closed) throw ParseError(path, line_no, "previous agent has no final node");
      current = id;
      table.agent_ids.push_back(id);
      table.agents.emplace_back();
      closed = false;
    }
    AgentTrajectory& a = table.agents.back();
    if (closed || node != static_cast<int>(a.gamma.size())) {
      throw ParseError(path, line_no, "nodes of an agent must be consecutive from 0");
    }
    const double t = parse_number(path, line_no, fields[t_col.front()]);
    if (table.agents.size() == 1) table.t.push_back(t);
    a.gamma.push_back(gather(fields, gamma_cols, path, line_no));
    a.p.push_back(gather(fields, p_cols, path, line_no));
    const bool has_control = !fields[v_cols.front()].empty();
    if (has_control) {
      a.v.push_back(gather(fields, v_cols, path, line_no));
      a.nu.push_back(gather(fields, nu_cols, path, line_no));
    } else {
      closed = true;
    }
  }
  if (!closed) throw ParseError(path, line_no, "last agent has no final node");
  for (AgentTrajectory& a : table.agents) {
    a.x0 = a.gamma.front();
    if (a.gamma.size() != table.t.size()) {
      throw ParseError(path, line_no, "agents have different node counts");
    }
  }
  return table;
}

}  // namespace mfgc
