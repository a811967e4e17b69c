#pragma once

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "okl/epsgeodesic.hpp"
#include "okl/error.hpp"
#include "okl/flow.hpp"
#include "okl/io.hpp"
#include "okl/metrics.hpp"
#include "okl/random.hpp"
#include "okl/verify.hpp"

namespace okl::cli {

using nlohmann::json;
using io::InputError;

enum ExitCode : int { ok = 0, property_failure = 1, usage_error = 2, numerical_failure = 3 };

inline constexpr int kSchemaVersion = 1;

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"norm", "dist", "energy", "envelope", "geodesic", "epsgeo", "flow", "verify"};
  return c;
}

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string command;
  json weight = {{"kind", "power"}, {"p", 2.0}};
  std::size_t grid = SymplecticPotential::kDefaultGrid;
  std::uint64_t seed = 7;
  long trials = 200;
  std::string suite = "all";
  std::map<std::string, std::string> inputs;  // function, measure, u, u0, u1
  std::string out;
  json params = json::object();
};

inline const std::map<std::string, std::set<std::string>>& allowed_params() {
  static const std::map<std::string, std::set<std::string>> m{
      {"norm", {}},
      {"dist", {}},
      {"energy", {}},
      {"envelope", {"kind"}},
      {"geodesic", {"steps"}},
      {"epsgeo", {"eps", "time_nodes"}},
      {"flow", {"dt", "t_end", "normalization", "reference_ke", "initial", "assert"}},
      {"verify", {}},
  };
  return m;
}

inline void validate(const ExperimentConfig& c) {
  if (c.schema_version != kSchemaVersion)
    throw InputError("config: unsupported schema_version " + std::to_string(c.schema_version));
  if (!allowed_params().count(c.command)) throw InputError("config: unknown command '" + c.command + "'");
  if (c.grid < 64) throw InputError("config: grid must be >= 64");
  if (c.trials < 1) throw InputError("config: trials must be >= 1");
  io::reject_unknown(c.params, allowed_params().at(c.command), "params");
  static const std::set<std::string> inputs{"function", "measure", "u", "u0", "u1"};
  for (const auto& [k, v] : c.inputs)
    if (!inputs.count(k)) throw InputError("inputs: unknown field '" + k + "'");
}

inline ExperimentConfig config_from_json(const json& j) {
  io::reject_unknown(j, {"schema_version", "command", "weight", "grid", "seed", "trials", "suite", "inputs", "out", "params"},
                     "config");
  ExperimentConfig c;
  try {
    if (!j.contains("schema_version")) throw InputError("config: missing schema_version");
    c.schema_version = j.at("schema_version").get<int>();
    if (j.contains("command")) c.command = j.at("command").get<std::string>();
    if (j.contains("weight")) c.weight = j.at("weight");
    if (j.contains("grid")) c.grid = j.at("grid").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("trials")) c.trials = j.at("trials").get<long>();
    if (j.contains("suite")) c.suite = j.at("suite").get<std::string>();
    if (j.contains("inputs")) c.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
    if (j.contains("params")) c.params = j.at("params");
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return c;
}

inline json config_to_json(const ExperimentConfig& c) {
  return {{"schema_version", c.schema_version}, {"command", c.command}, {"weight", c.weight}, {"grid", c.grid},
          {"seed", c.seed},   {"trials", c.trials},  {"suite", c.suite},   {"inputs", c.inputs},
          {"out", c.out},     {"params", c.params}};
}

namespace detail {

template <class T>
T param(const ExperimentConfig& c, const char* key, T fallback) {
  if (!c.params.contains(key)) return fallback;
  try {
    return c.params.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("params.") + key + ": " + e.what());
  }
}

/// A potential file, or "random:<seed>" for a generated one on the config grid.
inline SymplecticPotential potential(const ExperimentConfig& c, const std::string& key) {
  const auto it = c.inputs.find(key);
  if (it == c.inputs.end()) throw InputError("missing input '" + key + "'");
  const std::string& spec = it->second;
  if (spec.rfind("random:", 0) == 0) {
    std::uint64_t s = 0;
    try {
      s = std::stoull(spec.substr(7));
    } catch (const std::exception&) {
      throw InputError("input '" + key + "': bad seed in '" + spec + "'");
    }
    return random_potential(s, {}, c.grid);
  }
  if (spec == "zero") return SymplecticPotential::zero(c.grid);
  return io::read_potential(spec);
}

inline std::string path(const ExperimentConfig& c, const std::string& suffix) {
  if (c.out.empty()) throw InputError("command '" + c.command + "' needs --out");
  return c.out + suffix;
}

inline void emit(const ExperimentConfig& c, const json& j, std::ostream& os) {
  os << j.dump(2) << '\n';
  if (!c.out.empty()) io::write_text(c.out + ".json", j.dump(2) + "\n");
}

inline json norm_json(const NormReport& r) {
  return {{"norm", r.norm},   {"integral", r.integral}, {"bracket_lower", r.lower}, {"bracket_upper", r.upper},
          {"iterations", r.iterations}, {"sandwich_excess", r.sandwich_excess}};
}

}  // namespace detail

inline int cmd_norm(const ExperimentConfig& c, std::ostream& os) {
  const auto w = io::weight_from_json(c.weight);
  if (!c.inputs.count("function")) throw InputError("norm: missing --function");
  const auto f = io::read_function(c.inputs.at("function"));
  const auto mu = c.inputs.count("measure") ? io::read_measure(c.inputs.at("measure"))
                                             : DiscreteMeasure::uniform_midpoint(f.size());
  if (mu.size() != f.size()) throw InputError("norm: function and measure lengths differ");
  const auto r = gauge_norm_report(f, w, mu);
  json j = detail::norm_json(r);
  j["weight"] = io::weight_to_json(w);
  detail::emit(c, j, os);
  return r.sandwich_excess > 1e-9 ? property_failure : ok;
}

inline int cmd_dist(const ExperimentConfig& c, std::ostream& os) {
  const auto w = io::weight_from_json(c.weight);
  const auto u0 = detail::potential(c, "u0"), u1 = detail::potential(c, "u1");
  require_same_grid(u0, u1);
  const auto mu = DiscreteMeasure::uniform_midpoint(u0.size());
  const auto tangent = gauge_norm_report(geodesic_tangent(u0, u1), w, mu);
  const auto n0 = gauge_norm_report(difference_in_moment_coords(u0, u1), w, mu);
  const auto n1 = gauge_norm_report(difference_in_moment_coords(u1, u0), w, mu);
  json j{{"d_chi", tangent.norm},
         {"i_chi", n0.norm + n1.norm},
         {"norm_at_u0", detail::norm_json(n0)},
         {"norm_at_u1", detail::norm_json(n1)},
         {"tangent", detail::norm_json(tangent)},
         {"weight", io::weight_to_json(w)},
         {"grid", u0.size()}};
  detail::emit(c, j, os);
  const double worst = std::max({tangent.sandwich_excess, n0.sandwich_excess, n1.sandwich_excess});
  return worst > 1e-9 ? property_failure : ok;
}

inline int cmd_energy(const ExperimentConfig& c, std::ostream& os) {
  const auto w = io::weight_from_json(c.weight);
  const auto u = detail::potential(c, "u");
  const auto h = ricci_potential(u.size());
  const auto fj = ding_and_j(renormalize(u), h);
  const double am = am_energy(u), am_dual = am_energy_dual(u);
  json j{{"am", am},
         {"am_dual", am_dual},
         {"am_crosscheck_gap", std::abs(am - am_dual)},
         {"e_chi_tilde", e_chi_energy(u, w)},
         {"ding_F", fj.F},
         {"J", fj.J},
         {"normalization", "F and J are evaluated at u - AM(u)"},
         {"weight", io::weight_to_json(w)},
         {"grid", u.size()}};
  detail::emit(c, j, os);
  return std::abs(am - am_dual) > 1e-6 ? property_failure : ok;
}

inline int cmd_envelope(const ExperimentConfig& c, std::ostream&) {
  const auto u0 = detail::potential(c, "u0"), u1 = detail::potential(c, "u1");
  const auto kind = detail::param<std::string>(c, "kind", "rooftop");
  SymplecticPotential e = kind == "rooftop" ? rooftop(u0, u1)
                          : kind == "max"   ? max_potential(u0, u1)
                                            : throw InputError("envelope: kind must be 'rooftop' or 'max'");
  io::write_potential(detail::path(c, ".csv"), e);
  io::CsvWriter p(detail::path(c, "_primal.csv"), {"s", "u0", "u1", "envelope"});
  for (double s : fiber_nodes(u0.size())) p.row({s, u0.kahler_at(s), u1.kahler_at(s), e.kahler_at(s)});
  return ok;
}

inline int cmd_geodesic(const ExperimentConfig& c, std::ostream&) {
  const auto g = weak_geodesic(detail::potential(c, "u0"), detail::potential(c, "u1"));
  const int steps = detail::param<int>(c, "steps", 11);
  if (steps < 2) throw InputError("geodesic: steps must be >= 2");
  io::CsvWriter d(detail::path(c, "_dual.csv"), {"t", "y", "dual_value"});
  io::CsvWriter p(detail::path(c, "_primal.csv"), {"t", "s", "u"});
  const auto s = fiber_nodes(g.start().size());
  for (int k = 0; k < steps; ++k) {
    const double t = k + 1 == steps ? 1.0 : static_cast<double>(k) / (steps - 1);
    const auto u = g(t);
    for (std::size_t i = 0; i < u.size(); ++i) d.row({t, u.y(i), u.dual(i)});
    for (double x : s) p.row({t, x, u.kahler_at(x)});
  }
  return ok;
}

inline int cmd_epsgeo(const ExperimentConfig& c, std::ostream& os) {
  const auto w = io::weight_from_json(c.weight);
  const auto u0 = detail::potential(c, "u0"), u1 = detail::potential(c, "u1");
  const auto eps = detail::param<std::vector<double>>(c, "eps", {1e-1, 1e-2, 1e-3});
  EpsGeodesicOptions opt;
  opt.time_nodes = detail::param<std::size_t>(c, "time_nodes", 64);
  const auto g = weak_geodesic(u0, u1);
  const double d = d_chi(u0, u1, w);
  json runs = json::array();
  for (std::size_t k = 0; k < eps.size(); ++k) {
    const auto f = solve_eps_geodesic(u0, u1, eps[k], opt);
    io::CsvWriter out(detail::path(c, "_eps" + std::to_string(k) + ".csv"), {"t", "y", "dual_value"});
    for (std::size_t m = 0; m < f.t.size(); ++m)
      for (std::size_t i = 0; i < f.space(); ++i) out.row({f.t[m], grid_node(i, f.space()), g_ref(grid_node(i, f.space())) + f.v[m][i]});
    const double L = chi_length(f, w);
    runs.push_back({{"eps", eps[k]},
                    {"length", L},
                    {"relative_gap", d > 0.0 ? std::abs(L - d) / d : std::abs(L)},
                    {"sup_distance_to_geodesic", sup_distance(f, g)},
                    {"laplacian_probe", laplacian_bound_probe(f)},
                    {"residual", f.residual},
                    {"newton_iterations", f.residual_history.size() - 1}});
  }
  json j{{"d_chi", d}, {"runs", runs}, {"weight", io::weight_to_json(w)}, {"time_nodes", opt.time_nodes}};
  io::write_text(detail::path(c, "_report.json"), j.dump(2) + "\n");
  os << j.dump(2) << '\n';
  return ok;
}

inline int cmd_flow(const ExperimentConfig& c, std::ostream& os) {
  FlowConfig fc;
  fc.dt = detail::param<double>(c, "dt", 0.05);
  fc.t_end = detail::param<double>(c, "t_end", 20.0);
  const auto norm = detail::param<std::string>(c, "normalization", "am_zero");
  if (norm == "am_zero") fc.normalization = Normalization::am_zero;
  else if (norm == "mass_one") fc.normalization = Normalization::mass_one;
  else throw InputError("flow: normalization must be 'am_zero' or 'mass_one'");
  if (!(fc.dt > 0.0) || !(fc.t_end >= 0.0)) throw InputError("flow: need dt > 0 and t_end >= 0");

  if (c.inputs.count("u")) {
    fc.initial = renormalize(detail::potential(c, "u"));
  } else {
    const json init = c.params.value("initial", json::object());
    io::reject_unknown(init, {"seed", "amplitude", "even"}, "params.initial");
    RoughnessParams rp;
    rp.amplitude = init.value("amplitude", 0.3);
    rp.min_width = 0.1;
    rp.even = init.value("even", true);
    Rng rng(init.value("seed", c.seed));
    fc.initial = renormalize(random_bumps(rng, rp).sample(c.grid));
  }
  fc.ricci = ricci_potential(fc.initial.size());
  if (detail::param<bool>(c, "reference_ke", true)) fc.reference_ke = SymplecticPotential::zero(fc.initial.size());

  const json as = c.params.value("assert", json::object());
  io::reject_unknown(as, {"decay", "d1_below", "am_drift", "mass"}, "params.assert");

  const auto run = run_flow(fc);
  io::CsvWriter csv(detail::path(c, "_steps.csv"), {"t", "sup_rdot", "AM", "F", "J", "d1_to_ref"});
  for (const auto& s : run.trajectory)
    csv.row({s.time, s.diagnostics.sup_rdot, s.diagnostics.am, s.diagnostics.ding_F, s.diagnostics.j,
             s.diagnostics.d1_to_ref.value_or(std::nan(""))});

  const auto& sm = run.summary;
  const auto stab = stability_probe(run.trajectory, make_power_weight(1.0));
  json checks = json::object();
  bool pass = true;
  if (as.value("decay", true)) {
    const bool v = sm.decay.points >= 3 && sm.decay.rate < 0.0;
    checks["decay_negative"] = v;
    pass = pass && v;
  }
  if (as.contains("d1_below") && sm.final_d1) {
    const bool v = *sm.final_d1 <= as["d1_below"].get<double>();
    checks["d1_below"] = v;
    pass = pass && v;
  }
  if (as.contains("am_drift") && fc.normalization == Normalization::am_zero) {
    const bool v = sm.max_am_drift <= as["am_drift"].get<double>();
    checks["am_drift"] = v;
    pass = pass && v;
  }
  if (as.contains("mass") && fc.normalization == Normalization::mass_one) {
    const bool v = sm.max_mass_defect <= as["mass"].get<double>();
    checks["mass"] = v;
    pass = pass && v;
  }
  json j{{"decay_rate", sm.decay.rate},
         {"decay_r_squared", sm.decay.r_squared},
         {"decay_points", sm.decay.points},
         {"ding_monotone", sm.ding_monotone},
         {"max_am_drift", sm.max_am_drift},
         {"max_mass_defect", sm.max_mass_defect},
         {"final_d1_to_ref", sm.final_d1 ? json(*sm.final_d1) : json(nullptr)},
         {"stability", stab.message},
         {"stability_tail_d1", stab.tail_max},
         {"steps", run.trajectory.size() - 1},
         {"checks", checks}};
  io::write_text(detail::path(c, "_summary.json"), j.dump(2) + "\n");
  os << j.dump(2) << '\n';
  return pass ? ok : property_failure;
}

inline int cmd_verify(const ExperimentConfig& c, std::ostream& os) {
  VerifyConfig vc;
  vc.suite = c.suite;
  vc.trials = c.trials;
  vc.seed = c.seed;
  vc.grid = c.grid;
  const auto rows = run_verify(vc);
  const auto csv = verify_csv(rows);
  if (!c.out.empty()) io::write_text(c.out + ".csv", csv);
  os << csv;
  for (const auto& r : rows)
    if (!r.pass()) return property_failure;
  return ok;
}

/// Runs one experiment; errors are mapped to exit codes and reported on err.
inline int run(const ExperimentConfig& c, std::ostream& os = std::cout, std::ostream& err = std::cerr) {
  try {
    validate(c);
    if (c.command == "norm") return cmd_norm(c, os);
    if (c.command == "dist") return cmd_dist(c, os);
    if (c.command == "energy") return cmd_energy(c, os);
    if (c.command == "envelope") return cmd_envelope(c, os);
    if (c.command == "geodesic") return cmd_geodesic(c, os);
    if (c.command == "epsgeo") return cmd_epsgeo(c, os);
    if (c.command == "flow") return cmd_flow(c, os);
    return cmd_verify(c, os);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const PropertyFailure& e) {
    err << "property failure: " << e.what() << '\n';
    return property_failure;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return numerical_failure;
  }
}

}  // namespace okl::cli
