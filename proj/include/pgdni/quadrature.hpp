#pragma once

#include <Eigen/Dense>

#include <functional>
#include <span>

namespace pgdni {

using Index = Eigen::Index;

/// Quadrature rule {w_z, p_z} on the parameter set.
///
/// Points are stored row-wise (one parameter vector per row). Weights are
/// strictly positive; for probability-normalized rules they sum to one.
struct QuadratureRule {
  Eigen::MatrixXd points;  // Z x dim
  Eigen::VectorXd weights; // Z

  Index size() const { return weights.size(); }
  Index dim() const { return points.cols(); }
  Eigen::VectorXd point(Index z) const { return points.row(z).transpose(); }
  double mass() const { return weights.sum(); }
};

/// Gauss-Legendre rule with q nodes on [a, b]. Nodes are the roots of P_q
/// found by Newton iteration on the three-term recurrence. With
/// `probability` set the weights sum to one, otherwise to b - a.
QuadratureRule gauss_legendre_1d(int q, double a = -1.0, double b = 1.0,
                                 bool probability = true);

/// Full tensor grid of the given rules. The last rule varies fastest.
QuadratureRule tensorize(std::span<const QuadratureRule> rules);

/// Composite Gauss-Legendre rule on n_elements equal cells of [a, b].
QuadratureRule piecewise_gauss_1d(int n_elements, int q_per_element, double a,
                                  double b, bool probability = true);

/// Composite trapezoid rule on n_elements equal cells of [a, b]; the points
/// are the n_elements + 1 cell vertices.
QuadratureRule piecewise_trapezoid_1d(int n_elements, double a, double b,
                                      bool probability = true);

/// Sum_z w_z f(p_z).
double integrate(const QuadratureRule& rule,
                 const std::function<double(const Eigen::VectorXd&)>& f);

} // namespace pgdni
