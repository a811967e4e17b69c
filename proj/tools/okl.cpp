// okl: command-line front end for the Orlicz–Kähler laboratory.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "okl/cli.hpp"

namespace {

using okl::cli::ExperimentConfig;

struct Flags {
  std::string config;
  std::string weight;
  std::optional<std::size_t> grid;
  std::optional<std::uint64_t> seed;
  std::optional<long> trials;
  std::string suite;
  std::string function, measure, u, u0, u1;
  std::string out;
  std::string kind;
  std::optional<int> steps;
  std::vector<double> eps;
  std::optional<std::size_t> time_nodes;
  std::optional<double> dt, t_end;
  std::string normalization;
};

void add_config(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "Experiment config (JSON file or inline JSON); flags override its fields");
}
void add_weight(CLI::App* sub, Flags& f) {
  sub->add_option("--weight", f.weight,
                  R"(Young weight as JSON or a JSON file, e.g. {"kind":"power","p":2} or {"kind":"mollified","base":{"kind":"power","p":1.5},"k":8})");
}
void add_grid(CLI::App* sub, Flags& f) {
  sub->add_option("--grid", f.grid, "Moment-grid size for generated potentials (>= 64, default 2048)");
}
void add_out(CLI::App* sub, Flags& f, bool required) {
  auto* o = sub->add_option("--out", f.out, "Output prefix; every file written starts with it");
  if (required) o->required();
}
void add_pair(CLI::App* sub, Flags& f) {
  const char* help = "Potential CSV (y,dual_value), 'zero', or 'random:<seed>'";
  sub->add_option("--u0", f.u0, help)->required();
  sub->add_option("--u1", f.u1, help)->required();
}

ExperimentConfig build(const std::string& command, const Flags& f) {
  ExperimentConfig c;
  if (!f.config.empty()) c = okl::cli::config_from_json(okl::io::json_arg(f.config, "config"));
  if (!c.command.empty() && c.command != command)
    throw okl::io::InputError("config command '" + c.command + "' does not match subcommand '" + command + "'");
  c.command = command;
  if (!f.weight.empty()) c.weight = okl::io::json_arg(f.weight, "weight");
  if (f.grid) c.grid = *f.grid;
  if (f.seed) c.seed = *f.seed;
  if (f.trials) c.trials = *f.trials;
  if (!f.suite.empty()) c.suite = f.suite;
  auto input = [&](const char* k, const std::string& v) {
    if (!v.empty()) c.inputs[k] = v;
  };
  input("function", f.function);
  input("measure", f.measure);
  input("u", f.u);
  input("u0", f.u0);
  input("u1", f.u1);
  if (!f.out.empty()) c.out = f.out;
  if (!f.kind.empty()) c.params["kind"] = f.kind;
  if (f.steps) c.params["steps"] = *f.steps;
  if (!f.eps.empty()) c.params["eps"] = f.eps;
  if (f.time_nodes) c.params["time_nodes"] = *f.time_nodes;
  if (f.dt) c.params["dt"] = *f.dt;
  if (f.t_end) c.params["t_end"] = *f.t_end;
  if (!f.normalization.empty()) c.params["normalization"] = f.normalization;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Orlicz-Finsler geometry on S^1-invariant potentials of CP^1"};
  app.require_subcommand(1);
  Flags f;

  auto* norm = app.add_subcommand("norm", "Gauge norm of sampled function against a measure (JSON)");
  add_config(norm, f);
  add_weight(norm, f);
  norm->add_option("--function", f.function, "CSV with a 'value' column")->required();
  norm->add_option("--measure", f.measure, "CSV node,weight with unit mass (default: uniform midpoint)");
  add_out(norm, f, false);

  auto* dist = app.add_subcommand("dist", "d_chi and I_chi between two potentials (JSON)");
  add_config(dist, f);
  add_weight(dist, f);
  add_grid(dist, f);
  add_pair(dist, f);
  add_out(dist, f, false);

  auto* energy = app.add_subcommand("energy", "AM, E_chi~, Ding F and J of a potential (JSON)");
  add_config(energy, f);
  add_weight(energy, f);
  add_grid(energy, f);
  energy->add_option("--u", f.u, "Potential CSV (y,dual_value), 'zero', or 'random:<seed>'")->required();
  add_out(energy, f, false);

  auto* envelope = app.add_subcommand("envelope", "Rooftop P(u0,u1) or max(u0,u1) as CSV");
  add_config(envelope, f);
  add_grid(envelope, f);
  add_pair(envelope, f);
  envelope->add_option("--kind", f.kind, "rooftop (default) or max")->check(CLI::IsMember({"rooftop", "max"}));
  add_out(envelope, f, true);

  auto* geodesic = app.add_subcommand("geodesic", "Weak geodesic samples, t-indexed CSV (dual and primal)");
  add_config(geodesic, f);
  add_grid(geodesic, f);
  add_pair(geodesic, f);
  geodesic->add_option("--steps", f.steps, "Number of t samples including both ends (default 11)");
  add_out(geodesic, f, true);

  auto* epsgeo = app.add_subcommand("epsgeo", "eps-geodesics: space-time CSV per eps and a JSON convergence report");
  add_config(epsgeo, f);
  add_weight(epsgeo, f);
  add_grid(epsgeo, f);
  add_pair(epsgeo, f);
  epsgeo->add_option("--eps", f.eps, "One or more eps values (default 0.1 0.01 0.001)");
  epsgeo->add_option("--time-nodes", f.time_nodes, "Time grid size including ends (default 64)");
  add_out(epsgeo, f, true);

  auto* flow = app.add_subcommand("flow", "Kahler-Ricci flow: per-step CSV and JSON summary");
  add_config(flow, f);
  add_grid(flow, f);
  flow->add_option("--u", f.u, "Initial potential (default: even random start from params.initial or --seed)");
  flow->add_option("--seed", f.seed, "Seed of the random initial potential");
  flow->add_option("--dt", f.dt, "Time step (default 0.05)");
  flow->add_option("--t-end", f.t_end, "Final time (default 20)");
  flow->add_option("--normalization", f.normalization, "am_zero (default) or mass_one")
      ->check(CLI::IsMember({"am_zero", "mass_one"}));
  add_out(flow, f, true);

  auto* verify = app.add_subcommand("verify", "Property battery; CSV of per-property results, exit 0 iff all pass");
  add_config(verify, f);
  add_grid(verify, f);
  verify->add_option("--suite", f.suite, "weights, orlicz, metrics, geodesic, ding or all (default)");
  verify->add_option("--trials", f.trials, "Random trials per property (default 200)");
  verify->add_option("--seed", f.seed, "64-bit seed (default 7)");
  add_out(verify, f, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return okl::cli::usage_error;
  }

  ExperimentConfig cfg;
  try {
    cfg = build(app.get_subcommands().front()->get_name(), f);
  } catch (const okl::io::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return okl::cli::usage_error;
  }
  return okl::cli::run(cfg);
}
