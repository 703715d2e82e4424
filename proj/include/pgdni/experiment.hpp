#pragma once

#include "pgdni/problems_builtin.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pgdni {

enum class Algorithm { Basic, Improved, Galerkin, Svd };

const char* algorithm_name(Algorithm algorithm);
/// Accepts "basic", "improved", "galerkin" and "svd"; throws
/// std::invalid_argument otherwise.
Algorithm parse_algorithm(std::string_view name);

/// One cell of a results table. Obstacle records leave d at 0.
struct ExperimentRecord {
  Algorithm algorithm = Algorithm::Basic;
  int d = 0;
  int rank = 0;
  double rel_error = 0.0;
  std::uint64_t residual_calls = 0;
  bool converged = true;
  std::string message; // failure description when !converged
};

/// Resistor-network study: Legendre total-degree bases on [-1, 1]^2 with a
/// (d+1)^2 Gauss rule, errors against per-point solves on an
/// error_points^2 Gauss rule.
struct NetworkExperiment {
  std::vector<int> degrees{2, 3, 4, 5};
  int max_rank = 5;
  std::vector<Algorithm> algorithms{Algorithm::Galerkin, Algorithm::Basic,
                                    Algorithm::Improved};
  double resistance = 100.0;
  double bfgs_tol = 1e-10;
  int memory = 20;
  int error_points = 20;
  bool parallel = false;
};

enum class ParamRule {
  Gauss, // param_points Gauss points per cell of the parameter mesh
  Nodal, // trapezoid rule on the mesh vertices
};

/// Obstacle study: hat basis on a uniform mesh of (0, 1), errors measured
/// against the L2 projection of per-point solves in the exact L2(P) norm.
struct ObstacleExperiment {
  int max_rank = 10;
  std::vector<Algorithm> algorithms{Algorithm::Svd, Algorithm::Basic,
                                    Algorithm::Improved};
  int param_elements = 100;
  ParamRule param_rule = ParamRule::Gauss;
  int param_points = 2;
  ObstacleProblem::Options problem;
  double anchor = 0.0;
  double bfgs_tol = 1e-10;
  int memory = 20;
  bool parallel = false;
};

/// Records follow the listed algorithm order, each sorted by degree and rank.
/// Solver failures are reported in the records and never abort the run;
/// invalid options throw std::invalid_argument.
std::vector<ExperimentRecord> run_network(const NetworkExperiment& options);
std::vector<ExperimentRecord> run_obstacle(const ObstacleExperiment& options);

bool all_converged(const std::vector<ExperimentRecord>& records);

enum class TableKind { Network, Obstacle };
enum class OutputFormat { Csv, Json };

/// CSV header algorithm,d,rank,rel_error,residual_calls (network) or
/// algorithm,rank,rel_error,residual_calls (obstacle); JSON array of objects
/// with the same fields. Reals are printed with 17 significant digits.
void write_records(std::ostream& out, const std::vector<ExperimentRecord>& records,
                   TableKind kind, OutputFormat format);
/// Throws std::runtime_error when the file cannot be written.
void write_records(const std::string& path,
                   const std::vector<ExperimentRecord>& records, TableKind kind,
                   OutputFormat format);

} // namespace pgdni
