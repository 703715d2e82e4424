#include "pgdni/pgdni.h"

#include "pgdni/basis.hpp"
#include "pgdni/experiment.hpp"
#include "pgdni/lbfgs.hpp"
#include "pgdni/pgd.hpp"
#include "pgdni/quadrature.hpp"
#include "pgdni/reference.hpp"

#include <atomic>
#include <iostream>
#include <limits>
#include <new>
#include <string>
#include <vector>

struct pgdni_results {
  std::vector<pgdni::ExperimentRecord> records;
  pgdni::TableKind kind = pgdni::TableKind::Network;
};

struct pgdni_lowrank {
  pgdni::LowRankTensor u;
  pgdni::BasisPtr basis;
  std::uint64_t residual_calls = 0;
};

namespace {

thread_local std::string last_error;

pgdni_status fail(pgdni_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

class CallbackError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Maps the exception in flight to a status code.
pgdni_status translate_exception() {
  try {
    throw;
  } catch (const CallbackError& e) {
    return fail(PGDNI_CALLBACK_ERROR, e.what());
  } catch (const pgdni::NonConvergenceError& e) {
    return fail(PGDNI_NOT_CONVERGED, e.what());
  } catch (const pgdni::DegenerateRuleError& e) {
    return fail(PGDNI_NUMERICAL_ERROR, e.what());
  } catch (const pgdni::PgdError& e) {
    return fail(PGDNI_NUMERICAL_ERROR, e.what());
  } catch (const pgdni::DegeneratePreconditionerError& e) {
    return fail(PGDNI_NUMERICAL_ERROR, e.what());
  } catch (const pgdni::lbfgs::NonFiniteResidualError& e) {
    return fail(PGDNI_NUMERICAL_ERROR, e.what());
  } catch (const std::out_of_range& e) {
    return fail(PGDNI_OUT_OF_RANGE, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(PGDNI_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PGDNI_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(PGDNI_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(PGDNI_INTERNAL_ERROR, "unknown error");
  }
}

std::vector<pgdni::Algorithm> algorithms_from_mask(unsigned mask) {
  std::vector<pgdni::Algorithm> out;
  if (mask & PGDNI_ALGO_GALERKIN) {
    out.push_back(pgdni::Algorithm::Galerkin);
  }
  if (mask & PGDNI_ALGO_SVD) {
    out.push_back(pgdni::Algorithm::Svd);
  }
  if (mask & PGDNI_ALGO_BASIC) {
    out.push_back(pgdni::Algorithm::Basic);
  }
  if (mask & PGDNI_ALGO_IMPROVED) {
    out.push_back(pgdni::Algorithm::Improved);
  }
  return out;
}

// ParametricProblem forwarding to user callbacks. A failing callback marks
// the adapter so the error survives the exception wrapping of the drivers.
class CallbackProblem final : public pgdni::ParametricProblem {
 public:
  explicit CallbackProblem(const pgdni_problem_desc& desc) : desc_(desc) {}

  pgdni::Index state_dim() const override {
    return static_cast<pgdni::Index>(desc_.state_dim);
  }
  pgdni::Index param_dim() const override {
    return static_cast<pgdni::Index>(desc_.param_dim);
  }
  Eigen::VectorXd residual(const Eigen::VectorXd& u,
                           const Eigen::VectorXd& p) const override {
    Eigen::VectorXd out(state_dim());
    check(desc_.residual(desc_.user, u.data(), p.data(), out.data()), "residual");
    return out;
  }
  Eigen::VectorXd precond_apply(const Eigen::VectorXd& vec, const Eigen::VectorXd& p,
                                const Eigen::VectorXd& u_state) const override {
    if (desc_.precond_inverse == nullptr) {
      return vec;
    }
    Eigen::VectorXd out(state_dim());
    check(desc_.precond_inverse(desc_.user, vec.data(), p.data(), u_state.data(),
                                out.data()),
          "preconditioner");
    return out;
  }
  bool has_precond_forward() const override {
    return desc_.precond_inverse == nullptr || desc_.precond_forward != nullptr;
  }
  Eigen::VectorXd precond_forward(const Eigen::VectorXd& vec, const Eigen::VectorXd& p,
                                  const Eigen::VectorXd& u_state) const override {
    if (desc_.precond_inverse == nullptr) {
      return vec;
    }
    Eigen::VectorXd out(state_dim());
    check(desc_.precond_forward(desc_.user, vec.data(), p.data(), u_state.data(),
                                out.data()),
          "forward preconditioner");
    return out;
  }

  bool failed() const { return failed_.load(); }
  const std::string& failure() const { return failure_; }

 private:
  void check(int code, const char* what) const {
    if (code != 0) {
      if (!failed_.exchange(true)) {
        failure_ = std::string(what) + " callback returned " + std::to_string(code);
      }
      throw CallbackError(failure_);
    }
  }

  pgdni_problem_desc desc_;
  mutable std::atomic<bool> failed_{false};
  mutable std::string failure_;
};

} // namespace

extern "C" {

void pgdni_network_options_init(pgdni_network_options* options) {
  if (options == nullptr) {
    return;
  }
  const pgdni::NetworkExperiment d;
  options->degrees = nullptr;
  options->n_degrees = 0;
  options->max_rank = d.max_rank;
  options->algorithms = PGDNI_ALGO_GALERKIN | PGDNI_ALGO_BASIC | PGDNI_ALGO_IMPROVED;
  options->resistance = d.resistance;
  options->bfgs_tol = d.bfgs_tol;
  options->memory = d.memory;
  options->error_points = d.error_points;
  options->parallel = 0;
}

void pgdni_obstacle_options_init(pgdni_obstacle_options* options) {
  if (options == nullptr) {
    return;
  }
  const pgdni::ObstacleExperiment d;
  options->max_rank = d.max_rank;
  options->algorithms = PGDNI_ALGO_SVD | PGDNI_ALGO_BASIC | PGDNI_ALGO_IMPROVED;
  options->param_elements = d.param_elements;
  options->param_rule = PGDNI_PARAM_RULE_GAUSS;
  options->param_points = d.param_points;
  options->form = PGDNI_OBSTACLE_AS_STATED;
  options->n_elements = d.problem.n_elements;
  options->penalty = d.problem.penalty;
  options->element_quadrature = d.problem.element_quadrature;
  options->anchor = d.anchor;
  options->bfgs_tol = d.bfgs_tol;
  options->memory = d.memory;
  options->parallel = 0;
}

pgdni_status pgdni_run_network(const pgdni_network_options* options,
                               pgdni_results** out) {
  if (options == nullptr || out == nullptr) {
    return fail(PGDNI_INVALID_ARGUMENT, "null argument");
  }
  *out = nullptr;
  try {
    pgdni::NetworkExperiment e;
    if (options->degrees != nullptr) {
      e.degrees.assign(options->degrees, options->degrees + options->n_degrees);
    }
    e.max_rank = options->max_rank;
    e.algorithms = algorithms_from_mask(options->algorithms);
    e.resistance = options->resistance;
    e.bfgs_tol = options->bfgs_tol;
    e.memory = options->memory;
    e.error_points = options->error_points;
    e.parallel = options->parallel != 0;
    auto* results = new pgdni_results;
    results->kind = pgdni::TableKind::Network;
    try {
      results->records = pgdni::run_network(e);
    } catch (...) {
      delete results;
      throw;
    }
    *out = results;
    return PGDNI_OK;
  } catch (...) {
    return translate_exception();
  }
}

pgdni_status pgdni_run_obstacle(const pgdni_obstacle_options* options,
                                pgdni_results** out) {
  if (options == nullptr || out == nullptr) {
    return fail(PGDNI_INVALID_ARGUMENT, "null argument");
  }
  *out = nullptr;
  try {
    pgdni::ObstacleExperiment e;
    e.max_rank = options->max_rank;
    e.algorithms = algorithms_from_mask(options->algorithms);
    e.param_elements = options->param_elements;
    e.param_rule = options->param_rule == PGDNI_PARAM_RULE_NODAL
                       ? pgdni::ParamRule::Nodal
                       : pgdni::ParamRule::Gauss;
    e.param_points = options->param_points;
    e.problem.form = options->form == PGDNI_OBSTACLE_DRAPED
                         ? pgdni::ObstacleForm::Draped
                         : pgdni::ObstacleForm::AsStated;
    e.problem.n_elements = options->n_elements;
    e.problem.penalty = options->penalty;
    e.problem.element_quadrature = options->element_quadrature;
    e.anchor = options->anchor;
    e.bfgs_tol = options->bfgs_tol;
    e.memory = options->memory;
    e.parallel = options->parallel != 0;
    auto* results = new pgdni_results;
    results->kind = pgdni::TableKind::Obstacle;
    try {
      results->records = pgdni::run_obstacle(e);
    } catch (...) {
      delete results;
      throw;
    }
    *out = results;
    return PGDNI_OK;
  } catch (...) {
    return translate_exception();
  }
}

size_t pgdni_results_count(const pgdni_results* results) {
  return results == nullptr ? 0 : results->records.size();
}

pgdni_status pgdni_results_get(const pgdni_results* results, size_t index,
                               pgdni_record* out) {
  if (results == nullptr || out == nullptr) {
    return fail(PGDNI_INVALID_ARGUMENT, "null argument");
  }
  if (index >= results->records.size()) {
    return fail(PGDNI_OUT_OF_RANGE, "record index out of range");
  }
  const auto& r = results->records[index];
  out->algorithm = pgdni::algorithm_name(r.algorithm);
  out->d = r.d;
  out->rank = r.rank;
  out->rel_error = r.rel_error;
  out->residual_calls = r.residual_calls;
  out->converged = r.converged ? 1 : 0;
  out->message = r.message.c_str();
  return PGDNI_OK;
}

int pgdni_results_all_converged(const pgdni_results* results) {
  return results != nullptr && pgdni::all_converged(results->records) ? 1 : 0;
}

pgdni_status pgdni_results_write(const pgdni_results* results, const char* path,
                                 pgdni_format format) {
  if (results == nullptr) {
    return fail(PGDNI_INVALID_ARGUMENT, "null results");
  }
  if (format != PGDNI_FORMAT_CSV && format != PGDNI_FORMAT_JSON) {
    return fail(PGDNI_INVALID_ARGUMENT, "unknown output format");
  }
  const auto fmt = format == PGDNI_FORMAT_JSON ? pgdni::OutputFormat::Json
                                               : pgdni::OutputFormat::Csv;
  try {
    if (path == nullptr || std::string(path) == "-") {
      pgdni::write_records(std::cout, results->records, results->kind, fmt);
      std::cout.flush();
      if (!std::cout) {
        return fail(PGDNI_IO_ERROR, "failed writing to standard output");
      }
    } else {
      pgdni::write_records(std::string(path), results->records, results->kind, fmt);
    }
    return PGDNI_OK;
  } catch (const std::runtime_error& e) {
    return fail(PGDNI_IO_ERROR, e.what());
  } catch (...) {
    return translate_exception();
  }
}

void pgdni_results_free(pgdni_results* results) { delete results; }

void pgdni_pgd_options_init(pgdni_pgd_options* options) {
  if (options == nullptr) {
    return;
  }
  const pgdni::PgdConfig d;
  options->improved = 1;
  options->max_rank = d.max_rank;
  options->degree = 3;
  options->bfgs_tol = d.bfgs.tol;
  options->memory = d.bfgs.memory;
  options->outer_tol = d.outer_tol;
}

pgdni_status pgdni_solve_pgd(const pgdni_problem_desc* problem,
                             const pgdni_pgd_options* options, pgdni_lowrank** out) {
  if (problem == nullptr || options == nullptr || out == nullptr) {
    return fail(PGDNI_INVALID_ARGUMENT, "null argument");
  }
  *out = nullptr;
  if (problem->residual == nullptr || problem->state_dim == 0 ||
      problem->param_dim == 0) {
    return fail(PGDNI_INVALID_ARGUMENT, "problem needs a residual and nonzero sizes");
  }
  if (options->degree < 0 || options->max_rank < 1 || !(options->bfgs_tol > 0.0) ||
      options->memory < 1 || options->outer_tol < 0.0) {
    return fail(PGDNI_INVALID_ARGUMENT, "invalid PGD options");
  }
  CallbackProblem adapter(*problem);
  try {
    const int dim = static_cast<int>(problem->param_dim);
    auto basis = pgdni::legendre_total_degree(dim, options->degree);
    const std::vector<pgdni::QuadratureRule> factors(
        problem->param_dim, pgdni::gauss_legendre_1d(options->degree + 1));
    const pgdni::QuadratureRule rule = pgdni::tensorize(factors);
    pgdni::PgdConfig config;
    config.max_rank = options->max_rank;
    config.outer_tol = options->outer_tol;
    config.bfgs.tol = options->bfgs_tol;
    config.bfgs.memory = options->memory;
    pgdni::ResidualCounter counter;
    const pgdni::CountedProblem counted(adapter, counter);
    const auto ranks = options->improved != 0
                           ? pgdni::improved_pgd(counted, rule, *basis, config)
                           : pgdni::basic_pgd(counted, rule, *basis, config);
    auto* result = new pgdni_lowrank{ranks.back().u, basis, counter.count()};
    *out = result;
    return PGDNI_OK;
  } catch (...) {
    if (adapter.failed()) {
      return fail(PGDNI_CALLBACK_ERROR, adapter.failure());
    }
    return translate_exception();
  }
}

size_t pgdni_lowrank_rank(const pgdni_lowrank* u) {
  return u == nullptr ? 0 : static_cast<size_t>(u->u.rank());
}

size_t pgdni_lowrank_basis_size(const pgdni_lowrank* u) {
  return u == nullptr ? 0 : static_cast<size_t>(u->u.lambda.rows());
}

size_t pgdni_lowrank_state_dim(const pgdni_lowrank* u) {
  return u == nullptr ? 0 : static_cast<size_t>(u->u.v.rows());
}

uint64_t pgdni_lowrank_residual_calls(const pgdni_lowrank* u) {
  return u == nullptr ? 0 : u->residual_calls;
}

pgdni_status pgdni_lowrank_factors(const pgdni_lowrank* u, double* lambda, double* v) {
  if (u == nullptr) {
    return fail(PGDNI_INVALID_ARGUMENT, "null handle");
  }
  if (lambda != nullptr) {
    Eigen::Map<Eigen::MatrixXd>(lambda, u->u.lambda.rows(), u->u.lambda.cols()) =
        u->u.lambda;
  }
  if (v != nullptr) {
    Eigen::Map<Eigen::MatrixXd>(v, u->u.v.rows(), u->u.v.cols()) = u->u.v;
  }
  return PGDNI_OK;
}

pgdni_status pgdni_lowrank_evaluate(const pgdni_lowrank* u, const double* p,
                                    double* out) {
  if (u == nullptr || p == nullptr || out == nullptr) {
    return fail(PGDNI_INVALID_ARGUMENT, "null argument");
  }
  try {
    const Eigen::Map<const Eigen::VectorXd> point(p, u->basis->dim());
    Eigen::Map<Eigen::VectorXd>(out, u->u.v.rows()) =
        pgdni::evaluate_at(u->u, u->basis->evaluate(point));
    return PGDNI_OK;
  } catch (...) {
    return translate_exception();
  }
}

void pgdni_lowrank_free(pgdni_lowrank* u) { delete u; }

const char* pgdni_last_error(void) { return last_error.c_str(); }

const char* pgdni_status_string(pgdni_status status) {
  switch (status) {
  case PGDNI_OK:
    return "ok";
  case PGDNI_INVALID_ARGUMENT:
    return "invalid argument";
  case PGDNI_NOT_CONVERGED:
    return "not converged";
  case PGDNI_IO_ERROR:
    return "i/o error";
  case PGDNI_NUMERICAL_ERROR:
    return "numerical error";
  case PGDNI_OUT_OF_RANGE:
    return "out of range";
  case PGDNI_CALLBACK_ERROR:
    return "callback error";
  case PGDNI_INTERNAL_ERROR:
    return "internal error";
  }
  return "unknown status";
}

const char* pgdni_version(void) { return PGDNI_VERSION_STRING; }

} // extern "C"
