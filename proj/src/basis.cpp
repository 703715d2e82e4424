#include "pgdni/basis.hpp"

#include <cmath>

namespace pgdni {

namespace {

// All multi-indices of length `dim` with entries summing to `total`, first
// component descending.
void collect(int dim, int total, std::vector<int>& current,
             std::vector<std::vector<int>>& out) {
  if (static_cast<int>(current.size()) == dim - 1) {
    current.push_back(total);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (int k = total; k >= 0; --k) {
    current.push_back(k);
    collect(dim, total - k, current, out);
    current.pop_back();
  }
}

} // namespace

LegendreBasis::LegendreBasis(int dim, int degree) : dim_(dim), degree_(degree) {
  if (dim < 1) {
    throw std::invalid_argument("legendre basis: dim must be >= 1");
  }
  if (degree < 0) {
    throw std::invalid_argument("legendre basis: negative degree");
  }
  std::vector<int> current;
  for (int t = 0; t <= degree; ++t) {
    collect(dim, t, current, indices_);
  }
}

void LegendreBasis::evaluate(const Eigen::VectorXd& p,
                             Eigen::Ref<Eigen::VectorXd> out) const {
  // Normalized 1-D values sqrt(2n+1) P_n(p_k) for every coordinate.
  Eigen::MatrixXd table(degree_ + 1, dim_);
  for (int k = 0; k < dim_; ++k) {
    const double x = p(k);
    double p0 = 1.0;
    double p1 = x;
    table(0, k) = 1.0;
    if (degree_ >= 1) {
      table(1, k) = std::sqrt(3.0) * x;
    }
    for (int n = 2; n <= degree_; ++n) {
      const double pn = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
      p0 = p1;
      p1 = pn;
      table(n, k) = std::sqrt(2.0 * n + 1.0) * pn;
    }
  }
  for (std::size_t j = 0; j < indices_.size(); ++j) {
    double v = 1.0;
    for (int k = 0; k < dim_; ++k) {
      v *= table(indices_[j][k], k);
    }
    out(static_cast<Index>(j)) = v;
  }
}

HatBasis::HatBasis(int n_elements, double a, double b)
    : n_elements_(n_elements), a_(a), b_(b) {
  if (n_elements < 1) {
    throw std::invalid_argument("hat basis: need at least one element");
  }
  if (!(a < b)) {
    throw std::invalid_argument("hat basis: invalid interval");
  }
}

void HatBasis::evaluate(const Eigen::VectorXd& p,
                        Eigen::Ref<Eigen::VectorXd> out) const {
  out.setZero();
  const double h = (b_ - a_) / n_elements_;
  const double s = (p(0) - a_) / h;
  int e = static_cast<int>(std::floor(s));
  if (e < 0) {
    e = 0;
  }
  if (e > n_elements_ - 1) {
    e = n_elements_ - 1;
  }
  const double t = s - e;
  out(e) = 1.0 - t;
  out(e + 1) = t;
}

BasisPtr legendre_total_degree(int dim, int degree) {
  return std::make_shared<LegendreBasis>(dim, degree);
}

BasisPtr piecewise_linear_basis(int n_elements, double a, double b) {
  return std::make_shared<HatBasis>(n_elements, a, b);
}

Eigen::MatrixXd eval_matrix(const StochasticBasis& basis,
                            const QuadratureRule& rule) {
  if (rule.dim() != basis.dim()) {
    throw std::invalid_argument("eval_matrix: rule and basis dimension differ");
  }
  Eigen::MatrixXd psi(rule.size(), basis.size());
  Eigen::VectorXd row(basis.size());
  for (Index z = 0; z < rule.size(); ++z) {
    basis.evaluate(rule.point(z), row);
    psi.row(z) = row.transpose();
  }
  return psi;
}

Eigen::MatrixXd gram(const Eigen::MatrixXd& psi,
                     const Eigen::VectorXd& weights) {
  Eigen::MatrixXd g = psi.transpose() * weights.asDiagonal() * psi;
  g = 0.5 * (g + g.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g, Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues().maxCoeff();
  const double bottom = eig.eigenvalues().minCoeff();
  if (!(top > 0.0) || bottom <= 1e-12 * top) {
    throw DegenerateRuleError("gram: quadrature rule does not resolve the basis");
  }
  return g;
}

Eigen::MatrixXd gram(const StochasticBasis& basis, const QuadratureRule& rule) {
  return gram(eval_matrix(basis, rule), rule.weights);
}

} // namespace pgdni
