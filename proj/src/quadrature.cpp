#include "pgdni/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pgdni {

namespace {

// Nodes and weights of the q-point rule on [-1, 1] (weights sum to 2).
void legendre_nodes(int q, Eigen::VectorXd& x, Eigen::VectorXd& w) {
  x.resize(q);
  w.resize(q);
  const int half = (q + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess for the i-th largest root.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= q; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = q * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) <= 1e-15) {
        break;
      }
    }
    // One more derivative evaluation at the converged root.
    double p0 = 1.0;
    double p1 = z;
    for (int k = 2; k <= q; ++k) {
      const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = q * (z * p1 - p0) / (z * z - 1.0);
    const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
    x(i) = -z;
    x(q - 1 - i) = z;
    w(i) = wi;
    w(q - 1 - i) = wi;
  }
  if (q % 2 == 1) {
    x(q / 2) = 0.0;
  }
}

void check_interval(double a, double b) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("quadrature: invalid interval, need a < b");
  }
}

} // namespace

QuadratureRule gauss_legendre_1d(int q, double a, double b, bool probability) {
  if (q < 1) {
    throw std::invalid_argument("quadrature: need at least one node");
  }
  check_interval(a, b);
  if (q == 1) {
    QuadratureRule rule;
    rule.points.resize(1, 1);
    rule.points(0, 0) = 0.5 * (a + b);
    rule.weights.resize(1);
    rule.weights(0) = probability ? 1.0 : b - a;
    return rule;
  }
  Eigen::VectorXd x;
  Eigen::VectorXd w;
  legendre_nodes(q, x, w);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  QuadratureRule rule;
  rule.points.resize(q, 1);
  rule.weights.resize(q);
  for (int i = 0; i < q; ++i) {
    rule.points(i, 0) = mid + half * x(i);
    rule.weights(i) = probability ? 0.5 * w(i) : half * w(i);
  }
  return rule;
}

QuadratureRule tensorize(std::span<const QuadratureRule> rules) {
  if (rules.empty()) {
    throw std::invalid_argument("tensorize: empty list of rules");
  }
  Index total = 1;
  Index dim = 0;
  for (const auto& r : rules) {
    if (r.size() < 1) {
      throw std::invalid_argument("tensorize: empty factor rule");
    }
    total *= r.size();
    dim += r.dim();
  }
  QuadratureRule out;
  out.points.resize(total, dim);
  out.weights.resize(total);
  for (Index z = 0; z < total; ++z) {
    Index rem = z;
    double weight = 1.0;
    Index col = dim;
    for (auto it = rules.rbegin(); it != rules.rend(); ++it) {
      const Index k = rem % it->size();
      rem /= it->size();
      col -= it->dim();
      out.points.block(z, col, 1, it->dim()) = it->points.row(k);
      weight *= it->weights(k);
    }
    out.weights(z) = weight;
  }
  return out;
}

QuadratureRule piecewise_gauss_1d(int n_elements, int q_per_element, double a,
                                  double b, bool probability) {
  if (n_elements < 1) {
    throw std::invalid_argument("piecewise_gauss_1d: need at least one cell");
  }
  check_interval(a, b);
  const QuadratureRule ref = gauss_legendre_1d(q_per_element, -1.0, 1.0, true);
  const double h = (b - a) / n_elements;
  const double total = probability ? 1.0 : b - a;
  QuadratureRule out;
  out.points.resize(static_cast<Index>(n_elements) * q_per_element, 1);
  out.weights.resize(out.points.rows());
  Index z = 0;
  for (int e = 0; e < n_elements; ++e) {
    const double lo = a + e * h;
    for (Index k = 0; k < ref.size(); ++k, ++z) {
      out.points(z, 0) = lo + 0.5 * h * (ref.points(k, 0) + 1.0);
      out.weights(z) = ref.weights(k) * total / n_elements;
    }
  }
  return out;
}

QuadratureRule piecewise_trapezoid_1d(int n_elements, double a, double b,
                                      bool probability) {
  if (n_elements < 1) {
    throw std::invalid_argument("piecewise_trapezoid_1d: need at least one cell");
  }
  check_interval(a, b);
  const double h = (b - a) / n_elements;
  const double cell = (probability ? 1.0 : b - a) / n_elements;
  QuadratureRule out;
  out.points.resize(n_elements + 1, 1);
  out.weights.resize(n_elements + 1);
  for (int k = 0; k <= n_elements; ++k) {
    out.points(k, 0) = k == n_elements ? b : a + k * h;
    out.weights(k) = (k == 0 || k == n_elements) ? 0.5 * cell : cell;
  }
  return out;
}

double integrate(const QuadratureRule& rule,
                 const std::function<double(const Eigen::VectorXd&)>& f) {
  double sum = 0.0;
  for (Index z = 0; z < rule.size(); ++z) {
    sum += rule.weights(z) * f(rule.point(z));
  }
  return sum;
}

} // namespace pgdni
