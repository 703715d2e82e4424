#include "pgdni/problems_builtin.hpp"

#include "pgdni/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pgdni {

ElectronicNetwork::ElectronicNetwork(double resistance) {
  if (!(resistance > 0.0)) {
    throw std::invalid_argument("network: resistance must be positive");
  }
  b_.resize(5, 5);
  // clang-format off
  b_ <<  3, -1, -1,  0, -1,
        -1,  3, -1, -1,  0,
        -1, -1,  4, -1, -1,
         0, -1, -1,  3, -1,
        -1,  0, -1, -1,  4;
  // clang-format on
  b_ /= resistance;
  f_ = Eigen::VectorXd::Unit(5, 0);
  b_llt_.compute(b_);
}

Eigen::VectorXd ElectronicNetwork::residual(const Eigen::VectorXd& u,
                                            const Eigen::VectorXd& p) const {
  return (p(1) + 25.0) * f_ - (b_ * u + (p(0) + 2.0) * u.squaredNorm() * u);
}

Eigen::VectorXd ElectronicNetwork::precond_apply(const Eigen::VectorXd& vec,
                                                 const Eigen::VectorXd&,
                                                 const Eigen::VectorXd&) const {
  return b_llt_.solve(vec);
}

Eigen::VectorXd ElectronicNetwork::precond_forward(const Eigen::VectorXd& vec,
                                                   const Eigen::VectorXd&,
                                                   const Eigen::VectorXd&) const {
  return b_ * vec;
}

double ElectronicNetwork::energy(const Eigen::VectorXd& v,
                                 const Eigen::VectorXd& p) const {
  const double vv = v.squaredNorm();
  return 0.5 * v.dot(b_ * v) + 0.25 * (p(0) + 2.0) * vv * vv -
         (p(1) + 25.0) * v.dot(f_);
}

double obstacle_g(double p, double x, ObstacleForm form) {
  const double s = std::sin(3.0 * std::numbers::pi * x);
  const double negative =
      form == ObstacleForm::AsStated ? std::max(-s, 0.0) : std::min(s, 0.0);
  return p * std::max(s, 0.0) + (p - 1.0) * negative;
}

ObstacleProblem::ObstacleProblem(const Options& options) : options_(options) {
  if (options_.n_elements < 2) {
    throw std::invalid_argument("obstacle: need at least two elements");
  }
  if (!(options_.penalty >= 0.0)) {
    throw std::invalid_argument("obstacle: negative penalty");
  }
  const auto rule =
      gauss_legendre_1d(options_.element_quadrature, 0.0, 1.0, true);
  ref_points_ = rule.points.col(0);
  ref_weights_ = rule.weights;
}

namespace {

// Node value with homogeneous boundary values (node 0 and node N are clamped).
inline double node_value(const Eigen::VectorXd& u, int node, int n_elements) {
  return (node <= 0 || node >= n_elements) ? 0.0 : u(node - 1);
}

inline double penalty_sign(ObstacleForm form) {
  return form == ObstacleForm::AsStated ? 1.0 : -1.0;
}

inline double load(ObstacleForm form) {
  return form == ObstacleForm::AsStated ? 1.0 : -1.0;
}

} // namespace

Eigen::VectorXd ObstacleProblem::residual(const Eigen::VectorXd& u,
                                          const Eigen::VectorXd& p) const {
  const int ne = options_.n_elements;
  const int n = ne - 1;
  const double h = 1.0 / ne;
  Eigen::VectorXd r(n);
  // F - K u with F_j = f h and K = tridiag(-1, 2, -1) / h.
  const double fh = load(options_.form) * h;
  for (int j = 0; j < n; ++j) {
    const double left = j > 0 ? u(j - 1) : 0.0;
    const double right = j < n - 1 ? u(j + 1) : 0.0;
    r(j) = fh - (2.0 * u(j) - left - right) / h;
  }
  const double rho = penalty_sign(options_.form) * options_.penalty;
  for (int e = 0; e < ne; ++e) {
    const double ul = node_value(u, e, ne);
    const double ur = node_value(u, e + 1, ne);
    double wl = 0.0;
    double wr = 0.0;
    for (Index q = 0; q < ref_points_.size(); ++q) {
      const double t = ref_points_(q);
      const double x = (e + t) * h;
      const double g = gap((1.0 - t) * ul + t * ur, p(0), x);
      if (g > 0.0) {
        const double c = ref_weights_(q) * h * g;
        wl += c * (1.0 - t);
        wr += c * t;
      }
    }
    if (e >= 1) {
      r(e - 1) -= rho * wl;
    }
    if (e + 1 <= n) {
      r(e) -= rho * wr;
    }
  }
  return r;
}

double ObstacleProblem::energy(const Eigen::VectorXd& v,
                               const Eigen::VectorXd& p) const {
  const int ne = options_.n_elements;
  const double h = 1.0 / ne;
  double j = 0.0;
  for (int e = 0; e < ne; ++e) {
    const double vl = node_value(v, e, ne);
    const double vr = node_value(v, e + 1, ne);
    const double slope = (vr - vl) / h;
    j += 0.5 * slope * slope * h;
    j -= 0.5 * load(options_.form) * h * (vl + vr);
    for (Index q = 0; q < ref_points_.size(); ++q) {
      const double t = ref_points_(q);
      const double g = gap((1.0 - t) * vl + t * vr, p(0), (e + t) * h);
      if (g > 0.0) {
        j += 0.5 * options_.penalty * ref_weights_(q) * h * g * g;
      }
    }
  }
  return j;
}

double ObstacleProblem::gap(double u_h, double p, double x) const {
  return penalty_sign(options_.form) * (u_h - obstacle_g(p, x, options_.form));
}

ObstacleProblem::Tridiagonal
ObstacleProblem::tangent(const Eigen::VectorXd& u_state,
                         const Eigen::VectorXd& p) const {
  const int ne = options_.n_elements;
  const int n = ne - 1;
  const double h = 1.0 / ne;
  Tridiagonal t;
  t.diag = Eigen::VectorXd::Constant(n, 2.0 / h);
  t.lower = Eigen::VectorXd::Constant(n - 1, -1.0 / h);
  t.upper = Eigen::VectorXd::Constant(n - 1, -1.0 / h);
  const double rho = options_.penalty;
  for (int e = 0; e < ne; ++e) {
    const double ul = node_value(u_state, e, ne);
    const double ur = node_value(u_state, e + 1, ne);
    double dll = 0.0;
    double dlr = 0.0;
    double drr = 0.0;
    for (Index q = 0; q < ref_points_.size(); ++q) {
      const double s = ref_points_(q);
      if (gap((1.0 - s) * ul + s * ur, p(0), (e + s) * h) > 0.0) {
        const double c = rho * ref_weights_(q) * h;
        dll += c * (1.0 - s) * (1.0 - s);
        dlr += c * (1.0 - s) * s;
        drr += c * s * s;
      }
    }
    // Element nodes e (left) and e + 1 (right); unknown index = node - 1.
    if (e >= 1) {
      t.diag(e - 1) += dll;
    }
    if (e + 1 <= n) {
      t.diag(e) += drr;
    }
    if (e >= 1 && e + 1 <= n) {
      t.upper(e - 1) += dlr;
      t.lower(e - 1) += dlr;
    }
  }
  return t;
}

Eigen::VectorXd ObstacleProblem::precond_apply(const Eigen::VectorXd& vec,
                                               const Eigen::VectorXd& p,
                                               const Eigen::VectorXd& u_state) const {
  const Tridiagonal t = tangent(u_state, p);
  const Index n = vec.size();
  // Thomas algorithm; the matrix is SPD so no pivoting is needed.
  Eigen::VectorXd c(n);
  Eigen::VectorXd d(n);
  c(0) = n > 1 ? t.upper(0) / t.diag(0) : 0.0;
  d(0) = vec(0) / t.diag(0);
  for (Index i = 1; i < n; ++i) {
    const double denom = t.diag(i) - t.lower(i - 1) * c(i - 1);
    c(i) = i < n - 1 ? t.upper(i) / denom : 0.0;
    d(i) = (vec(i) - t.lower(i - 1) * d(i - 1)) / denom;
  }
  Eigen::VectorXd x(n);
  x(n - 1) = d(n - 1);
  for (Index i = n - 2; i >= 0; --i) {
    x(i) = d(i) - c(i) * x(i + 1);
  }
  return x;
}

Eigen::VectorXd ObstacleProblem::precond_forward(const Eigen::VectorXd& vec,
                                                 const Eigen::VectorXd& p,
                                                 const Eigen::VectorXd& u_state) const {
  const Tridiagonal t = tangent(u_state, p);
  const Index n = vec.size();
  Eigen::VectorXd out = t.diag.cwiseProduct(vec);
  for (Index i = 0; i + 1 < n; ++i) {
    out(i) += t.upper(i) * vec(i + 1);
    out(i + 1) += t.lower(i) * vec(i);
  }
  return out;
}

double ObstacleProblem::max_violation(const Eigen::VectorXd& u, double p) const {
  const int ne = options_.n_elements;
  const double h = 1.0 / ne;
  double worst = 0.0;
  for (int e = 0; e < ne; ++e) {
    const double ul = node_value(u, e, ne);
    const double ur = node_value(u, e + 1, ne);
    for (Index q = 0; q < ref_points_.size(); ++q) {
      const double s = ref_points_(q);
      worst = std::max(worst, gap((1.0 - s) * ul + s * ur, p, (e + s) * h));
    }
  }
  return worst;
}

} // namespace pgdni
