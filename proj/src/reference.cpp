#include "pgdni/reference.hpp"

#include <cmath>
#include <sstream>

namespace pgdni {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd deterministic_solve(const ParametricProblem& problem, const VectorXd& p,
                             const VectorXd& x0, double tol, int max_iter) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument("deterministic_solve: tolerance must be positive");
  }
  lbfgs::SolveOptions opts;
  opts.tol = tol;
  opts.relative = false;
  opts.max_iter = max_iter;
  auto residual = [&](const VectorXd& x) { return problem.residual(x, p); };
  auto c0 = [&](const VectorXd& x) { return problem.precond_apply(x, p, x0); };
  const auto res = lbfgs::solve(residual, x0, c0, opts);
  if (!res.converged) {
    std::ostringstream msg;
    msg << "deterministic_solve: no convergence after " << res.iterations
        << " iterations, residual norm " << res.residual_norm;
    throw NonConvergenceError(msg.str(), res.residual_norm);
  }
  return res.x;
}

ProjectionResult l2_projection(const ParametricProblem& problem,
                               const QuadratureRule& rule,
                               const StochasticBasis& basis, double tol,
                               int max_iter) {
  const MatrixXd psi = eval_matrix(basis, rule);
  const MatrixXd g = gram(psi, rule.weights);
  ProjectionResult out;
  out.samples.resize(problem.state_dim(), rule.size());
  const VectorXd x0 = VectorXd::Zero(problem.state_dim());
  for (Index z = 0; z < rule.size(); ++z) {
    try {
      out.samples.col(z) = deterministic_solve(problem, rule.point(z), x0, tol, max_iter);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "l2_projection: solve failed at quadrature point " << z << ": "
          << e.what();
      throw NonConvergenceError(msg.str(), std::nan(""));
    }
  }
  const MatrixXd rhs = psi.transpose() * rule.weights.asDiagonal() *
                       out.samples.transpose();
  out.coefficients = g.llt().solve(rhs);
  return out;
}

GalerkinResult full_galerkin(const ParametricProblem& problem,
                             const QuadratureRule& rule,
                             const StochasticBasis& basis,
                             const lbfgs::SolveOptions& options,
                             std::optional<VectorXd> anchor) {
  const MatrixXd psi = eval_matrix(basis, rule);
  const MatrixXd g = gram(psi, rule.weights);
  const Eigen::LLT<MatrixXd> g_llt(g);
  const Index m = psi.cols();
  const Index n = problem.state_dim();
  const VectorXd pa = anchor ? *anchor : basis.midpoint();
  const VectorXd ua = VectorXd::Zero(n);

  auto residual = [&](const VectorXd& x) {
    const Eigen::Map<const MatrixXd> u(x.data(), m, n);
    const MatrixXd states = u.transpose() * psi.transpose(); // n x Z
    MatrixXd samples(n, rule.size());
    for (Index z = 0; z < rule.size(); ++z) {
      samples.col(z) = problem.residual(states.col(z), rule.point(z));
    }
    const MatrixXd r = psi.transpose() * rule.weights.asDiagonal() *
                       samples.transpose();
    return VectorXd(Eigen::Map<const VectorXd>(r.data(), r.size()));
  };
  auto c0 = [&](const VectorXd& x) {
    const Eigen::Map<const MatrixXd> block(x.data(), m, n);
    MatrixXd out = g_llt.solve(MatrixXd(block));
    for (Index i = 0; i < m; ++i) {
      out.row(i) = problem.precond_apply(out.row(i).transpose(), pa, ua).transpose();
    }
    return VectorXd(Eigen::Map<const VectorXd>(out.data(), out.size()));
  };
  const auto res = lbfgs::solve(residual, VectorXd::Zero(m * n), c0, options);
  GalerkinResult out;
  out.coefficients = Eigen::Map<const MatrixXd>(res.x.data(), m, n);
  out.iterations = res.iterations;
  out.converged = res.converged;
  out.residual_norm = res.residual_norm;
  return out;
}

double relative_error(const StateMap& approx, const StateMap& ref,
                      const QuadratureRule& error_rule) {
  if (error_rule.size() < 1) {
    throw std::invalid_argument("relative_error: empty rule");
  }
  double num = 0.0;
  double den = 0.0;
  for (Index z = 0; z < error_rule.size(); ++z) {
    const VectorXd p = error_rule.point(z);
    const VectorXd r = ref(p);
    num += error_rule.weights(z) * (approx(p) - r).squaredNorm();
    den += error_rule.weights(z) * r.squaredNorm();
  }
  if (!(den > 0.0)) {
    throw std::invalid_argument("relative_error: reference has zero norm");
  }
  return std::sqrt(num / den);
}

double relative_error(const MatrixXd& approx, const MatrixXd& ref,
                      const VectorXd& weights) {
  if (approx.rows() != ref.rows() || approx.cols() != ref.cols() ||
      ref.cols() != weights.size() || weights.size() < 1) {
    throw std::invalid_argument("relative_error: inconsistent sample shapes");
  }
  const double num = (approx - ref).colwise().squaredNorm().dot(weights);
  const double den = ref.colwise().squaredNorm().dot(weights);
  if (!(den > 0.0)) {
    throw std::invalid_argument("relative_error: reference has zero norm");
  }
  return std::sqrt(num / den);
}

StateMap coefficient_map(const MatrixXd& coefficients, BasisPtr basis) {
  return [coefficients, basis](const VectorXd& p) {
    return VectorXd(coefficients.transpose() * basis->evaluate(p));
  };
}

StateMap lowrank_map(const LowRankTensor& u, BasisPtr basis) {
  return [u, basis](const VectorXd& p) { return evaluate_at(u, basis->evaluate(p)); };
}

std::vector<LowRankTensor> svd_baseline(const MatrixXd& coefficients,
                                        const std::vector<int>& ranks,
                                        const std::optional<MatrixXd>& gram) {
  const Index full = std::min(coefficients.rows(), coefficients.cols());
  for (int r : ranks) {
    if (r < 0 || r > full) {
      throw std::invalid_argument("svd_baseline: rank exceeds min(m, n)");
    }
  }
  std::vector<LowRankTensor> out;
  out.reserve(ranks.size());
  if (!gram) {
    for (int r : ranks) {
      out.push_back(truncated_svd(coefficients, r));
    }
    return out;
  }
  const Eigen::LLT<MatrixXd> llt(*gram);
  const MatrixXd lt = llt.matrixU();
  const MatrixXd scaled = lt * coefficients;
  for (int r : ranks) {
    LowRankTensor t = truncated_svd(scaled, r);
    t.lambda = llt.matrixU().solve(t.lambda);
    out.push_back(std::move(t));
  }
  return out;
}

} // namespace pgdni
