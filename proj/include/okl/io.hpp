#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "okl/error.hpp"
#include "okl/measure.hpp"
#include "okl/toric.hpp"
#include "okl/weights.hpp"

namespace okl::io {

using nlohmann::json;

/// Thrown for malformed user input; maps to the usage exit code.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected a JSON object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw InputError(where + ": unknown field '" + k + "'");
}

// --- weights -------------------------------------------------------------------------------

inline YoungWeight weight_from_json(const json& j) {
  reject_unknown(j, {"kind", "p", "base", "k"}, "weight");
  if (!j.contains("kind") || !j["kind"].is_string()) throw InputError("weight: missing string field 'kind'");
  const std::string kind = j["kind"];
  if (kind == "power") {
    if (!j.contains("p") || !j["p"].is_number()) throw InputError("weight: power weight needs numeric 'p'");
    if (j.contains("base") || j.contains("k")) throw InputError("weight: power weight takes only 'p'");
    try {
      return make_power_weight(j["p"].get<double>());
    } catch (const DomainError& e) {
      throw InputError(std::string("weight: ") + e.what());
    }
  }
  if (kind == "mollified") {
    if (!j.contains("base") || !j.contains("k") || !j["k"].is_number_integer())
      throw InputError("weight: mollified weight needs 'base' and integer 'k'");
    if (j.contains("p")) throw InputError("weight: mollified weight takes 'base' and 'k'");
    const int k = j["k"].get<int>();
    if (k < 1) throw InputError("weight: k must be a positive integer");
    return mollify(weight_from_json(j["base"]), k);
  }
  throw InputError("weight: unknown kind '" + kind + "'");
}

inline json weight_to_json(const YoungWeight& w) {
  if (const auto* p = w.as_power()) return {{"kind", "power"}, {"p", p->p()}};
  const auto* m = w.as_mollified();
  return {{"kind", "mollified"}, {"base", weight_to_json(m->base())}, {"k", m->k()}};
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(where + ": malformed JSON: " + e.what());
  }
}

/// Inline JSON if the argument starts with '{', otherwise a file path.
inline json json_arg(const std::string& arg, const std::string& where) {
  const auto first = arg.find_first_not_of(" \t\n");
  if (first != std::string::npos && arg[first] == '{') return parse_json(arg, where);
  return parse_json(read_file(arg), where);
}

// --- CSV -----------------------------------------------------------------------------------

inline std::string fmt(double x) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(16) << x;
  return os.str();
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw InputError("csv: missing column '" + name + "'");
  }
  std::vector<double> values(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
  }
};

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto a = cell.find_first_not_of(" \t\r");
    const auto b = cell.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
  }
  return out;
}

/// A header line followed by numeric rows.
inline Table read_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size())
      throw InputError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) + " columns");
    std::vector<double> row;
    for (const auto& c : cells) {
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(c, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != c.size() || c.empty()) throw InputError(path + ":" + std::to_string(lineno) + ": bad number '" + c + "'");
      row.push_back(x);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw InputError(path + ": empty file");
  return t;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw InputError("cannot write '" + path + "'");
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }
  void row(std::initializer_list<double> xs) {
    bool first = true;
    for (double x : xs) {
      out_ << (first ? "" : ",") << fmt(x);
      first = false;
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

// --- domain files --------------------------------------------------------------------------

/// Columns node,weight; the weights must sum to one.
inline DiscreteMeasure read_measure(const std::string& path) {
  const auto t = read_csv(path);
  try {
    return DiscreteMeasure(t.values("node"), t.values("weight"), true);
  } catch (const DomainError& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline void write_measure(const std::string& path, const DiscreteMeasure& mu) {
  CsvWriter w(path, {"node", "weight"});
  for (std::size_t i = 0; i < mu.size(); ++i) w.row({mu.nodes()[i], mu.weights()[i]});
}

/// A single column named value.
inline std::vector<double> read_function(const std::string& path) { return read_csv(path).values("value"); }

/// Columns y,dual_value on the half-cell grid y_i = (i + 1/2)/n; dual_value is the full
/// symplectic potential u*(y), which must be convex.
inline SymplecticPotential read_potential(const std::string& path) {
  const auto t = read_csv(path);
  const auto y = t.values("y");
  const auto U = t.values("dual_value");
  const std::size_t n = y.size();
  if (n < 64) throw InputError(path + ": potential grid needs at least 64 nodes");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(y[i] - grid_node(i, n)) > 1e-12)
      throw InputError(path + ": y must be the grid (i + 1/2)/n, row " + std::to_string(i));
    v[i] = U[i] - g_ref(y[i]);
  }
  try {
    SymplecticPotential u(std::move(v));
    if (!u.valid()) throw InputError(path + ": dual_value is not convex");
    return u;
  } catch (const DomainError& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline void write_potential(const std::string& path, const SymplecticPotential& u) {
  CsvWriter w(path, {"y", "dual_value"});
  for (std::size_t i = 0; i < u.size(); ++i) w.row({u.y(i), u.dual(i)});
}

}  // namespace okl::io
