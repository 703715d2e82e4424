#pragma once

#include "pgdni/problem.hpp"

namespace pgdni {

/// Resistor network with a cubic nonlinearity:
///   B u + (p1 + 2)(u^T u) u = (p2 + 25) f,   p in [-1, 1]^2,
/// B = M / R for the fixed 5x5 integer matrix M, f = e_1. The preconditioner
/// is the linear part B, independent of state and parameter.
class ElectronicNetwork final : public ParametricProblem {
 public:
  explicit ElectronicNetwork(double resistance = 100.0);

  Index state_dim() const override { return 5; }
  Index param_dim() const override { return 2; }
  Eigen::VectorXd residual(const Eigen::VectorXd& u,
                           const Eigen::VectorXd& p) const override;
  Eigen::VectorXd precond_apply(const Eigen::VectorXd& vec,
                                const Eigen::VectorXd& p,
                                const Eigen::VectorXd& u_state) const override;
  bool has_precond_forward() const override { return true; }
  Eigen::VectorXd precond_forward(const Eigen::VectorXd& vec,
                                  const Eigen::VectorXd& p,
                                  const Eigen::VectorXd& u_state) const override;
  bool reentrant() const override { return true; }

  /// J(v; p) = 1/2 v^T B v + 1/4 (p1 + 2)(v^T v)^2 - (p2 + 25) v^T f.
  double energy(const Eigen::VectorXd& v, const Eigen::VectorXd& p) const;

  const Eigen::MatrixXd& B() const { return b_; }
  const Eigen::VectorXd& f() const { return f_; }

 private:
  Eigen::MatrixXd b_;
  Eigen::VectorXd f_;
  Eigen::LLT<Eigen::MatrixXd> b_llt_;
};

/// Sign conventions of the obstacle model.
///
/// AsStated: J(v; p) = int 1/2 v'^2 - v + rho/2 [v - g]_+^2 dx with
///   g = p [sin 3 pi x]_+ + (p - 1) [sin 3 pi x]_- and [y]_- = max(-y, 0).
/// Draped: a rope pulled down onto the obstacle and kept above it,
///   J(v; p) = int 1/2 v'^2 + v + rho/2 [g - v]_+^2 dx with
///   g = p [sin 3 pi x]_+ + (p - 1) [sin 3 pi x]_- and [y]_- = min(y, 0),
///   so the middle lobe has height 1 - p.
enum class ObstacleForm { AsStated, Draped };

/// Obstacle g(p; x) = p [sin 3 pi x]_+ + (p - 1) [sin 3 pi x]_- under the
/// negative-part convention of the given form.
double obstacle_g(double p, double x, ObstacleForm form = ObstacleForm::AsStated);

/// Clamped rope and obstacle on (0, 1) with P1 elements and a quadratic
/// penalty; see ObstacleForm for the energy. The penalty integral uses a fixed
/// Gauss rule per element; residual and energy use the same rule so the
/// residual is the exact negative gradient of the discrete energy.
class ObstacleProblem final : public ParametricProblem {
 public:
  struct Options {
    int n_elements = 40;
    double penalty = 1e3;
    int element_quadrature = 4;
    ObstacleForm form = ObstacleForm::AsStated;
  };

  ObstacleProblem() : ObstacleProblem(Options{}) {}
  explicit ObstacleProblem(const Options& options);

  Index state_dim() const override { return options_.n_elements - 1; }
  Index param_dim() const override { return 1; }
  Eigen::VectorXd residual(const Eigen::VectorXd& u,
                           const Eigen::VectorXd& p) const override;
  /// (K + rho D(u_state, p))^{-1} vec with D the penalty tangent.
  Eigen::VectorXd precond_apply(const Eigen::VectorXd& vec,
                                const Eigen::VectorXd& p,
                                const Eigen::VectorXd& u_state) const override;
  bool has_precond_forward() const override { return true; }
  Eigen::VectorXd precond_forward(const Eigen::VectorXd& vec,
                                  const Eigen::VectorXd& p,
                                  const Eigen::VectorXd& u_state) const override;
  bool reentrant() const override { return true; }

  double energy(const Eigen::VectorXd& v, const Eigen::VectorXd& p) const;

  /// Tangent K + rho D as (sub, diag, super) tridiagonal bands.
  struct Tridiagonal {
    Eigen::VectorXd lower;
    Eigen::VectorXd diag;
    Eigen::VectorXd upper;
  };
  Tridiagonal tangent(const Eigen::VectorXd& u_state,
                      const Eigen::VectorXd& p) const;

  const Options& options() const { return options_; }
  double h() const { return 1.0 / options_.n_elements; }
  /// Largest penalized gap over the element points: max [u_h - g]_+ for
  /// AsStated, max [g - u_h]_+ for Draped.
  double max_violation(const Eigen::VectorXd& u, double p) const;

 private:
  // Signed gap whose positive part is penalized.
  double gap(double u_h, double p, double x) const;

  Options options_;
  Eigen::VectorXd ref_points_;  // on [0, 1]
  Eigen::VectorXd ref_weights_; // sum to 1
};

} // namespace pgdni
