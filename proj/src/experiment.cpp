#include "pgdni/experiment.hpp"

#include "pgdni/basis.hpp"
#include "pgdni/pgd.hpp"
#include "pgdni/quadrature.hpp"
#include "pgdni/reference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace pgdni {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Cell = std::function<std::vector<ExperimentRecord>()>;

// Runs every cell and concatenates their records in cell order.
std::vector<ExperimentRecord> run_cells(const std::vector<Cell>& cells,
                                        bool parallel) {
  std::vector<std::vector<ExperimentRecord>> parts(cells.size());
  if (parallel) {
    std::vector<std::future<std::vector<ExperimentRecord>>> futures;
    futures.reserve(cells.size());
    for (const auto& cell : cells) {
      futures.push_back(std::async(std::launch::async, cell));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      parts[i] = futures[i].get();
    }
  } else {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      parts[i] = cells[i]();
    }
  }
  std::vector<ExperimentRecord> out;
  for (auto& part : parts) {
    out.insert(out.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  return out;
}

ExperimentRecord failure(Algorithm algorithm, int d, std::uint64_t calls,
                         const std::string& what) {
  ExperimentRecord rec;
  rec.algorithm = algorithm;
  rec.d = d;
  rec.rank = 0;
  rec.rel_error = kNaN;
  rec.residual_calls = calls;
  rec.converged = false;
  rec.message = what;
  return rec;
}

PgdConfig pgd_config(int max_rank, double bfgs_tol, int memory) {
  PgdConfig config;
  config.max_rank = max_rank;
  config.outer_tol = 0.0;
  config.bfgs.tol = bfgs_tol;
  config.bfgs.memory = memory;
  return config;
}

// Records of a PGD run, one per rank; a rank counts as converged when every
// inner BFGS solve up to it met its tolerance.
std::vector<ExperimentRecord>
pgd_records(Algorithm algorithm, int d, const std::vector<RankResult>& ranks,
            const std::function<double(const LowRankTensor&)>& error) {
  std::vector<ExperimentRecord> out;
  bool ok = true;
  for (const auto& rr : ranks) {
    for (const auto& rec : rr.records) {
      ok = ok && rec.bfgs_converged;
    }
    ExperimentRecord rec;
    rec.algorithm = algorithm;
    rec.d = d;
    rec.rank = rr.rank;
    rec.rel_error = error(rr.u);
    rec.residual_calls = rr.residual_calls;
    rec.converged = ok;
    if (!ok) {
      rec.message = "inner BFGS solve hit its iteration limit";
    }
    out.push_back(std::move(rec));
  }
  return out;
}

void check_algorithms(const std::vector<Algorithm>& algorithms) {
  if (algorithms.empty()) {
    throw std::invalid_argument("experiment: no algorithm selected");
  }
}

} // namespace

const char* algorithm_name(Algorithm algorithm) {
  switch (algorithm) {
  case Algorithm::Basic:
    return "basic";
  case Algorithm::Improved:
    return "improved";
  case Algorithm::Galerkin:
    return "galerkin";
  case Algorithm::Svd:
    return "svd";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::Basic, Algorithm::Improved, Algorithm::Galerkin,
                      Algorithm::Svd}) {
    if (name == algorithm_name(a)) {
      return a;
    }
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

std::vector<ExperimentRecord> run_network(const NetworkExperiment& options) {
  check_algorithms(options.algorithms);
  if (options.degrees.empty()) {
    throw std::invalid_argument("network experiment: no degree given");
  }
  for (int d : options.degrees) {
    if (d < 0) {
      throw std::invalid_argument("network experiment: negative degree");
    }
  }
  if (options.max_rank < 1 || options.error_points < 1 || options.memory < 1 ||
      !(options.bfgs_tol > 0.0)) {
    throw std::invalid_argument("network experiment: invalid solver options");
  }
  for (Algorithm a : options.algorithms) {
    if (a == Algorithm::Svd) {
      throw std::invalid_argument("network experiment: svd is an obstacle-study baseline");
    }
  }

  const ElectronicNetwork network(options.resistance);
  const QuadratureRule g_err = gauss_legendre_1d(options.error_points);
  const std::vector<QuadratureRule> err_factors{g_err, g_err};
  const QuadratureRule error_rule = tensorize(err_factors);
  const Index n = network.state_dim();

  // Per-point reference solutions, outside any residual count.
  Eigen::MatrixXd reference(n, error_rule.size());
  for (Index z = 0; z < error_rule.size(); ++z) {
    reference.col(z) = deterministic_solve(network, error_rule.point(z),
                                           Eigen::VectorXd::Zero(n), 1e-13, 5000);
  }

  std::vector<Cell> cells;
  for (Algorithm algorithm : options.algorithms) {
    for (int d : options.degrees) {
      cells.push_back([&, algorithm, d]() -> std::vector<ExperimentRecord> {
        const BasisPtr basis = legendre_total_degree(2, d);
        const QuadratureRule g = gauss_legendre_1d(d + 1);
        const std::vector<QuadratureRule> factors{g, g};
        const QuadratureRule rule = tensorize(factors);
        const Eigen::MatrixXd psi_err = eval_matrix(*basis, error_rule);
        ResidualCounter counter;
        const CountedProblem problem(network, counter);
        auto error_of = [&](const Eigen::MatrixXd& coefficients) {
          const Eigen::MatrixXd approx =
              coefficients.transpose() * psi_err.transpose();
          return relative_error(approx, reference, error_rule.weights);
        };
        try {
          if (algorithm == Algorithm::Galerkin) {
            lbfgs::SolveOptions solve;
            solve.tol = options.bfgs_tol;
            solve.memory = options.memory;
            solve.max_iter = 2000;
            const GalerkinResult gal = full_galerkin(problem, rule, *basis, solve);
            ExperimentRecord rec;
            rec.algorithm = algorithm;
            rec.d = d;
            rec.rank = static_cast<int>(std::min<Index>(basis->size(), n));
            rec.rel_error = error_of(gal.coefficients);
            rec.residual_calls = counter.count();
            rec.converged = gal.converged;
            if (!gal.converged) {
              rec.message = "Galerkin solve hit its iteration limit";
            }
            return {rec};
          }
          const PgdConfig config =
              pgd_config(options.max_rank, options.bfgs_tol, options.memory);
          const auto ranks = algorithm == Algorithm::Basic
                                 ? basic_pgd(problem, rule, *basis, config)
                                 : improved_pgd(problem, rule, *basis, config);
          return pgd_records(algorithm, d, ranks, [&](const LowRankTensor& u) {
            return error_of(full_matrix(u));
          });
        } catch (const std::exception& e) {
          return {failure(algorithm, d, counter.count(), e.what())};
        }
      });
    }
  }
  return run_cells(cells, options.parallel);
}

std::vector<ExperimentRecord> run_obstacle(const ObstacleExperiment& options) {
  check_algorithms(options.algorithms);
  if (options.max_rank < 1 || options.param_elements < 1 ||
      options.param_points < 1 || options.memory < 1 ||
      !(options.bfgs_tol > 0.0)) {
    throw std::invalid_argument("obstacle experiment: invalid options");
  }
  for (Algorithm a : options.algorithms) {
    if (a == Algorithm::Galerkin) {
      throw std::invalid_argument(
          "obstacle experiment: galerkin is a network-study baseline");
    }
  }

  const ObstacleProblem obstacle(options.problem);
  const BasisPtr basis = piecewise_linear_basis(options.param_elements, 0.0, 1.0);
  const QuadratureRule rule =
      options.param_rule == ParamRule::Nodal
          ? piecewise_trapezoid_1d(options.param_elements, 0.0, 1.0)
          : piecewise_gauss_1d(options.param_elements, options.param_points, 0.0, 1.0);
  // Two Gauss points per cell integrate products of hats exactly.
  const Eigen::MatrixXd mass =
      gram(*basis, piecewise_gauss_1d(options.param_elements, 2, 0.0, 1.0));

  ResidualCounter projection_counter;
  ProjectionResult projection;
  try {
    projection =
        l2_projection(CountedProblem(obstacle, projection_counter), rule, *basis);
  } catch (const std::exception& e) {
    std::vector<ExperimentRecord> out;
    for (Algorithm a : options.algorithms) {
      out.push_back(failure(a, 0, 0, std::string("reference projection: ") + e.what()));
    }
    return out;
  }
  const Eigen::MatrixXd& ref = projection.coefficients;
  const double ref_norm = std::sqrt((ref.transpose() * mass * ref).trace());
  auto error_of = [&](const Eigen::MatrixXd& coefficients) {
    const Eigen::MatrixXd diff = coefficients - ref;
    return std::sqrt((diff.transpose() * mass * diff).trace()) / ref_norm;
  };

  std::vector<Cell> cells;
  for (Algorithm algorithm : options.algorithms) {
    cells.push_back([&, algorithm]() -> std::vector<ExperimentRecord> {
      if (algorithm == Algorithm::Svd) {
        const int top = static_cast<int>(
            std::min<Index>(options.max_rank, std::min(ref.rows(), ref.cols())));
        std::vector<int> ranks;
        for (int r = 1; r <= top; ++r) {
          ranks.push_back(r);
        }
        const auto truncations = svd_baseline(ref, ranks, mass);
        std::vector<ExperimentRecord> out;
        for (std::size_t i = 0; i < truncations.size(); ++i) {
          ExperimentRecord rec;
          rec.algorithm = algorithm;
          rec.rank = ranks[i];
          rec.rel_error = error_of(full_matrix(truncations[i]));
          rec.residual_calls = projection_counter.count();
          out.push_back(std::move(rec));
        }
        return out;
      }
      ResidualCounter counter;
      const CountedProblem problem(obstacle, counter);
      PgdConfig config = pgd_config(options.max_rank, options.bfgs_tol, options.memory);
      config.anchor = Eigen::VectorXd::Constant(1, options.anchor);
      try {
        const auto ranks = algorithm == Algorithm::Basic
                               ? basic_pgd(problem, rule, *basis, config)
                               : improved_pgd(problem, rule, *basis, config);
        return pgd_records(algorithm, 0, ranks, [&](const LowRankTensor& u) {
          return error_of(full_matrix(u));
        });
      } catch (const std::exception& e) {
        return {failure(algorithm, 0, counter.count(), e.what())};
      }
    });
  }
  return run_cells(cells, options.parallel);
}

bool all_converged(const std::vector<ExperimentRecord>& records) {
  return std::all_of(records.begin(), records.end(),
                     [](const ExperimentRecord& r) { return r.converged; });
}

namespace {

std::string format_real(double x) {
  if (std::isnan(x)) {
    return "nan";
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

} // namespace

void write_records(std::ostream& out, const std::vector<ExperimentRecord>& records,
                   TableKind kind, OutputFormat format) {
  const bool network = kind == TableKind::Network;
  if (format == OutputFormat::Csv) {
    out << (network ? "algorithm,d,rank,rel_error,residual_calls\n"
                    : "algorithm,rank,rel_error,residual_calls\n");
    for (const auto& r : records) {
      out << algorithm_name(r.algorithm) << ',';
      if (network) {
        out << r.d << ',';
      }
      out << r.rank << ',' << format_real(r.rel_error) << ',' << r.residual_calls
          << '\n';
    }
    return;
  }
  out << '[';
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    out << (i == 0 ? "\n  " : ",\n  ") << "{\"algorithm\": \""
        << algorithm_name(r.algorithm) << '"';
    if (network) {
      out << ", \"d\": " << r.d;
    }
    const std::string err = format_real(r.rel_error);
    out << ", \"rank\": " << r.rank
        << ", \"rel_error\": " << (err == "nan" ? "null" : err)
        << ", \"residual_calls\": " << r.residual_calls << '}';
  }
  out << (records.empty() ? "]\n" : "\n]\n");
}

void write_records(const std::string& path,
                   const std::vector<ExperimentRecord>& records, TableKind kind,
                   OutputFormat format) {
  std::ofstream file(path);
  if (!file) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  write_records(file, records, kind, format);
  file.flush();
  if (!file) {
    throw std::runtime_error("failed writing '" + path + "'");
  }
}

} // namespace pgdni
