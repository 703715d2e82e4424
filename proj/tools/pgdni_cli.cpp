// Command-line runner for the resistor-network and obstacle studies.
#include "pgdni/pgdni.h"

#include <CLI11.hpp>

#include <cstdio>
#include <map>
#include <string>
#include <vector>

namespace {

struct Common {
  int max_rank = 0;
  std::vector<std::string> algorithms{"all"};
  double bfgs_tol = 1e-10;
  int memory = 20;
  std::string format = "csv";
  std::string out = "-";
  unsigned seed = 0;
  bool parallel = false;
};

void add_common(CLI::App& cmd, Common& c, int default_rank) {
  c.max_rank = default_rank;
  cmd.add_option("--max-rank", c.max_rank, "Largest rank computed")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--algo", c.algorithms,
                 "Algorithms to run: basic, improved, galerkin, svd or all")
      ->delimiter(',')
      ->check(CLI::IsMember({"basic", "improved", "galerkin", "svd", "all"}))
      ->capture_default_str();
  cmd.add_option("--bfgs-tol", c.bfgs_tol, "Relative tolerance of the BFGS solves")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--memory", c.memory, "BFGS memory (stored updates)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd.add_option("--out", c.out, "Output file, - for standard output")
      ->capture_default_str();
  cmd.add_option("--seed", c.seed,
                 "Reserved; every computation is deterministic and ignores it");
  cmd.add_flag("--parallel", c.parallel, "Run independent cells concurrently");
}

unsigned algorithm_mask(const std::vector<std::string>& names, unsigned all) {
  static const std::map<std::string, unsigned> bits{
      {"basic", PGDNI_ALGO_BASIC},
      {"improved", PGDNI_ALGO_IMPROVED},
      {"galerkin", PGDNI_ALGO_GALERKIN},
      {"svd", PGDNI_ALGO_SVD}};
  unsigned mask = 0;
  for (const auto& name : names) {
    mask |= name == "all" ? all : bits.at(name);
  }
  return mask;
}

// Writes the table and maps the outcome to the process exit code.
int finish(pgdni_status status, pgdni_results* results, const Common& c) {
  if (status != PGDNI_OK) {
    std::fprintf(stderr, "pgdni: %s: %s\n", pgdni_status_string(status),
                 pgdni_last_error());
    return 2;
  }
  const pgdni_format format = c.format == "json" ? PGDNI_FORMAT_JSON : PGDNI_FORMAT_CSV;
  const pgdni_status written = pgdni_results_write(results, c.out.c_str(), format);
  int code = 0;
  if (written != PGDNI_OK) {
    std::fprintf(stderr, "pgdni: %s\n", pgdni_last_error());
    code = 2;
  } else if (!pgdni_results_all_converged(results)) {
    const size_t n = pgdni_results_count(results);
    for (size_t i = 0; i < n; ++i) {
      pgdni_record r;
      if (pgdni_results_get(results, i, &r) == PGDNI_OK && !r.converged) {
        std::fprintf(stderr, "pgdni: %s d=%d rank=%d failed: %s\n", r.algorithm, r.d,
                     r.rank, r.message);
      }
    }
    code = 1;
  }
  pgdni_results_free(results);
  return code;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-intrusive low-rank Galerkin (PGD) benchmark runner"};
  app.set_config("--config", "", "Read options from a TOML/INI file");
  app.set_version_flag("--version", std::string(pgdni_version()));
  app.require_subcommand(1);

  Common net_common;
  std::vector<int> degrees{2, 3, 4, 5};
  double resistance = 100.0;
  int error_points = 20;
  auto* net = app.add_subcommand("network", "Resistor network with cubic nonlinearity");
  add_common(*net, net_common, 5);
  net->add_option("--degree", degrees, "Total degrees of the Legendre basis")
      ->delimiter(',')
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  net->add_option("--resistance", resistance, "R in B = M / R")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  net->add_option("--error-points", error_points,
                  "Gauss points per dimension of the error rule")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  Common obs_common;
  pgdni_obstacle_options obs;
  pgdni_obstacle_options_init(&obs);
  std::string param_rule = "gauss";
  std::string form = "as-stated";
  auto* ob = app.add_subcommand("obstacle", "Penalized rope and obstacle");
  add_common(*ob, obs_common, obs.max_rank);
  ob->add_option("--param-elements", obs.param_elements, "Cells of the parameter mesh")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ob->add_option("--param-rule", param_rule, "Parameter quadrature")
      ->check(CLI::IsMember({"gauss", "nodal"}))
      ->capture_default_str();
  ob->add_option("--param-points", obs.param_points, "Gauss points per parameter cell")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ob->add_option("--form", form, "Sign conventions of the obstacle energy")
      ->check(CLI::IsMember({"as-stated", "draped"}))
      ->capture_default_str();
  ob->add_option("--elements", obs.n_elements, "Spatial P1 elements")
      ->check(CLI::Range(2, 100000))
      ->capture_default_str();
  ob->add_option("--penalty", obs.penalty, "Penalty coefficient")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  ob->add_option("--anchor", obs.anchor, "Parameter point of the preconditioner")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (net->parsed()) {
    pgdni_network_options opts;
    pgdni_network_options_init(&opts);
    opts.degrees = degrees.data();
    opts.n_degrees = degrees.size();
    opts.max_rank = net_common.max_rank;
    opts.algorithms = algorithm_mask(
        net_common.algorithms,
        PGDNI_ALGO_GALERKIN | PGDNI_ALGO_BASIC | PGDNI_ALGO_IMPROVED);
    if (opts.algorithms & PGDNI_ALGO_SVD) {
      std::fprintf(stderr, "pgdni: svd is only available for the obstacle study\n");
      return 2;
    }
    opts.resistance = resistance;
    opts.bfgs_tol = net_common.bfgs_tol;
    opts.memory = net_common.memory;
    opts.error_points = error_points;
    opts.parallel = net_common.parallel ? 1 : 0;
    pgdni_results* results = nullptr;
    const pgdni_status status = pgdni_run_network(&opts, &results);
    return finish(status, results, net_common);
  }

  obs.max_rank = obs_common.max_rank;
  obs.algorithms = algorithm_mask(
      obs_common.algorithms, PGDNI_ALGO_SVD | PGDNI_ALGO_BASIC | PGDNI_ALGO_IMPROVED);
  if (obs.algorithms & PGDNI_ALGO_GALERKIN) {
    std::fprintf(stderr, "pgdni: galerkin is only available for the network study\n");
    return 2;
  }
  obs.param_rule = param_rule == "nodal" ? PGDNI_PARAM_RULE_NODAL : PGDNI_PARAM_RULE_GAUSS;
  obs.form = form == "draped" ? PGDNI_OBSTACLE_DRAPED : PGDNI_OBSTACLE_AS_STATED;
  obs.bfgs_tol = obs_common.bfgs_tol;
  obs.memory = obs_common.memory;
  obs.parallel = obs_common.parallel ? 1 : 0;
  pgdni_results* results = nullptr;
  const pgdni_status status = pgdni_run_obstacle(&obs, &results);
  return finish(status, results, obs_common);
}
