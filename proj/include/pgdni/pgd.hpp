#pragma once

#include "pgdni/basis.hpp"
#include "pgdni/lbfgs.hpp"
#include "pgdni/lowrank.hpp"
#include "pgdni/problem.hpp"
#include "pgdni/quadrature.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pgdni {

class PgdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegeneratePreconditionerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Non-intrusive assembly of projected residuals.

/// Residuals R(u_r(p_z); p_z) at every quadrature point, as the columns of an
/// n x Z matrix, where u_r(p_z) = V Lambda^T psi_z. Exactly Z residual calls.
Eigen::MatrixXd sample_residuals(const ParametricProblem& problem,
                                 const QuadratureRule& rule,
                                 const Eigen::MatrixXd& psi,
                                 const Eigen::MatrixXd& lambda,
                                 const Eigen::MatrixXd& v);

/// (sum_z w_z R_z psi_z^T) Lambda, n x r.
Eigen::MatrixXd assemble_Rlambda(const Eigen::MatrixXd& samples,
                                 const Eigen::VectorXd& weights,
                                 const Eigen::MatrixXd& psi,
                                 const Eigen::MatrixXd& lambda);
Eigen::MatrixXd assemble_Rlambda(const ParametricProblem& problem,
                                 const QuadratureRule& rule,
                                 const Eigen::MatrixXd& psi,
                                 const Eigen::MatrixXd& lambda,
                                 const Eigen::MatrixXd& v);

/// (sum_z w_z psi_z R_z^T) V, m x r.
Eigen::MatrixXd assemble_Rv(const Eigen::MatrixXd& samples,
                            const Eigen::VectorXd& weights,
                            const Eigen::MatrixXd& psi,
                            const Eigen::MatrixXd& v);
Eigen::MatrixXd assemble_Rv(const ParametricProblem& problem,
                            const QuadratureRule& rule,
                            const Eigen::MatrixXd& psi,
                            const Eigen::MatrixXd& lambda,
                            const Eigen::MatrixXd& v);

/// Residual samples cached per iterate, so both block residuals at the same
/// (Lambda, V) cost Z calls in total.
class ResidualSampler {
 public:
  ResidualSampler(const ParametricProblem& problem, const QuadratureRule& rule,
                  const Eigen::MatrixXd& psi)
      : problem_(problem), rule_(rule), psi_(psi) {}

  const Eigen::MatrixXd& samples(const Eigen::MatrixXd& lambda,
                                 const Eigen::MatrixXd& v);
  std::uint64_t evaluations() const { return evaluations_; }
  void invalidate() { valid_ = false; }

 private:
  const ParametricProblem& problem_;
  const QuadratureRule& rule_;
  const Eigen::MatrixXd& psi_;
  bool valid_ = false;
  Eigen::MatrixXd lambda_;
  Eigen::MatrixXd v_;
  Eigen::MatrixXd samples_;
  std::uint64_t evaluations_ = 0;
};

// ---------------------------------------------------------------------------
// Preconditioners C_0 for the two blocks.

enum class VPrecondMode {
  Anchor,  // P^{-1}(u_r(p_a); p_a) on every column
  Sampled, // column i: sum_z w_z lambda_i(p_z)^2 P^{-1}(u_r(p_z); p_z)
};

enum class LambdaPrecondMode {
  Identity, // Riesz map G^{-1} only
  Anchor,   // column i scaled by 1 / alpha_i, alpha_i = <P(u_r(p_a)) v_i, v_i>
};

/// Block operator on vec(X), X in R^{n x r}, r = lambda.cols(). `state` is
/// the full current iterate (its states at p_a or at every p_z enter P) and
/// `lambda` holds the parameter functions weighting the sampled variant.
lbfgs::LinearMap build_v_preconditioner(const ParametricProblem& problem,
                                        const QuadratureRule& rule,
                                        const Eigen::MatrixXd& psi,
                                        const Eigen::VectorXd& anchor,
                                        const Eigen::VectorXd& psi_anchor,
                                        const LowRankTensor& state,
                                        const Eigen::MatrixXd& lambda,
                                        VPrecondMode mode);

/// alpha_i = <P(state_a; p_a) v_i, v_i> / <v_i, v_i>. Problems without a
/// forward preconditioner use 1 / <P^{-1} v_i, v_i> instead. Throws
/// DegeneratePreconditionerError when an alpha_i is not positive.
Eigen::VectorXd lambda_scalings(const ParametricProblem& problem,
                                const Eigen::VectorXd& anchor,
                                const Eigen::VectorXd& state_at_anchor,
                                const Eigen::MatrixXd& v);

/// Block operator on vec(X), X in R^{m x r}: column i -> G^{-1} x_i / alpha_i
/// (alpha_i = 1 in Identity mode).
lbfgs::LinearMap build_lambda_preconditioner(const ParametricProblem& problem,
                                             const Eigen::VectorXd& anchor,
                                             const Eigen::VectorXd& state_at_anchor,
                                             const Eigen::MatrixXd& v,
                                             const Eigen::LLT<Eigen::MatrixXd>& gram,
                                             LambdaPrecondMode mode);

// ---------------------------------------------------------------------------
// Drivers.

struct PgdConfig {
  int max_rank = 5;
  double basic_stagnation_tol = 1e-2;
  int basic_max_alt_iters = 10;
  int improved_max_alt_iters = 20;
  double improved_stagnation_floor = 1e-8;
  /// Stop adding ranks once ||u_r - u_{r-1}|| / ||u_r|| <= outer_tol.
  double outer_tol = 1e-8;
  double lambda_init = 1.0;
  double v_init = 1e-8;
  /// Preconditioner sampling point; the basis midpoint when unset.
  std::optional<Eigen::VectorXd> anchor;
  VPrecondMode v_precond = VPrecondMode::Anchor;
  LambdaPrecondMode lambda_precond = LambdaPrecondMode::Anchor;
  /// Rescale the other factor after orth so F_r is unchanged.
  bool compensate_orth = false;
  lbfgs::SolveOptions bfgs;
  /// Called after every alternating sweep with the current iterate.
  std::function<void(const LowRankTensor&, int rank, int sweep)> on_sweep;

  /// max(10^{-(r+1)}, floor).
  double improved_stagnation(int rank) const;
  void validate() const;
};

struct SweepRecord {
  int rank = 0;
  int sweep = 0;
  char block = 'v'; // 'v' or 'l'
  int bfgs_iterations = 0;
  int residual_evaluations = 0; // assembled evaluations, Z calls each
  std::uint64_t residual_calls = 0;
  bool bfgs_converged = false;
  double stagnation = 0.0; // set on the 'l' record closing a sweep
};

struct RankResult {
  LowRankTensor u;
  int rank = 0;
  int sweeps = 0;
  bool stagnated = false;            // alternating loop met its tolerance
  std::uint64_t residual_calls = 0;  // cumulative over all ranks so far
  double correction = 0.0;           // ||u_r - u_{r-1}|| / ||u_r||
  std::vector<SweepRecord> records;
};

/// Greedy rank-one PGD with alternating BFGS solves. Stops before max_rank
/// when a new rank-one correction vanishes.
std::vector<RankResult> basic_pgd(const ParametricProblem& problem,
                                  const QuadratureRule& rule,
                                  const StochasticBasis& basis,
                                  const PgdConfig& config);

/// Rank-adaptive block alternating minimization with orthogonalization.
std::vector<RankResult> improved_pgd(const ParametricProblem& problem,
                                     const QuadratureRule& rule,
                                     const StochasticBasis& basis,
                                     const PgdConfig& config);

/// Q-orthonormalization: returns Lambda' with Lambda'^T G Lambda' = I whose
/// span contains span(Lambda), plus the mixing with Lambda = Lambda' M.
OrthResult orth_gram(const Eigen::MatrixXd& lambda,
                     const Eigen::LLT<Eigen::MatrixXd>& gram);

} // namespace pgdni
