#pragma once

#include "pgdni/basis.hpp"
#include "pgdni/lbfgs.hpp"
#include "pgdni/lowrank.hpp"
#include "pgdni/problem.hpp"
#include "pgdni/quadrature.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace pgdni {

class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, double residual_norm)
      : std::runtime_error(what), residual_norm_(residual_norm) {}
  double residual_norm() const { return residual_norm_; }

 private:
  double residual_norm_;
};

/// Solution u(p) of R(u; p) = 0 by preconditioned quasi-Newton iteration
/// started from x0 with C_0 = P^{-1}(x0; p); stops when ||R|| <= tol.
Eigen::VectorXd deterministic_solve(const ParametricProblem& problem,
                                    const Eigen::VectorXd& p,
                                    const Eigen::VectorXd& x0, double tol = 1e-12,
                                    int max_iter = 1000);

struct ProjectionResult {
  Eigen::MatrixXd coefficients; // m x n
  Eigen::MatrixXd samples;      // n x Z, u(p_z)
};

/// L2 projection G^{-1} sum_z w_z psi_z u(p_z)^T of per-point solutions.
ProjectionResult l2_projection(const ParametricProblem& problem,
                               const QuadratureRule& rule,
                               const StochasticBasis& basis, double tol = 1e-12,
                               int max_iter = 1000);

struct GalerkinResult {
  Eigen::MatrixXd coefficients; // m x n
  int iterations = 0;
  bool converged = false;
  double residual_norm = 0.0;
};

/// Full-rank Galerkin approximation on span(basis) (x) R^n: BFGS on the
/// coefficient matrix with residual sum_z w_z psi_z R(U^T psi_z; p_z)^T and
/// C_0 = G^{-1} (.) P^{-1}(u(p_a); p_a).
GalerkinResult full_galerkin(const ParametricProblem& problem,
                             const QuadratureRule& rule,
                             const StochasticBasis& basis,
                             const lbfgs::SolveOptions& options = {},
                             std::optional<Eigen::VectorXd> anchor = std::nullopt);

using StateMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// sqrt(sum w ||approx - ref||^2 / sum w ||ref||^2) on error_rule.
double relative_error(const StateMap& approx, const StateMap& ref,
                      const QuadratureRule& error_rule);

/// Same measure from precomputed state samples (n x Z each).
double relative_error(const Eigen::MatrixXd& approx, const Eigen::MatrixXd& ref,
                      const Eigen::VectorXd& weights);

/// State map p -> C^T psi(p) of a coefficient matrix.
StateMap coefficient_map(const Eigen::MatrixXd& coefficients, BasisPtr basis);
/// State map p -> V Lambda^T psi(p).
StateMap lowrank_map(const LowRankTensor& u, BasisPtr basis);

/// Truncated SVD of a coefficient matrix for every requested rank. When a
/// Gram matrix is given the truncation is done on L^T C (G = L L^T), which is
/// optimal in the L2(P) (x) R^n norm, and mapped back.
std::vector<LowRankTensor> svd_baseline(const Eigen::MatrixXd& coefficients,
                                        const std::vector<int>& ranks,
                                        const std::optional<Eigen::MatrixXd>& gram =
                                            std::nullopt);

} // namespace pgdni
