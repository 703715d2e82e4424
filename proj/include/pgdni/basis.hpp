#pragma once

#include "pgdni/quadrature.hpp"

#include <memory>
#include <stdexcept>
#include <vector>

namespace pgdni {

/// Raised when a quadrature rule cannot resolve a basis (singular Gram).
class DegenerateRuleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Finite basis {psi_j} of functions on the parameter set.
class StochasticBasis {
 public:
  virtual ~StochasticBasis() = default;

  virtual Index size() const = 0;
  virtual Index dim() const = 0;
  /// Writes psi_1(p) .. psi_m(p) into `out` (length m).
  virtual void evaluate(const Eigen::VectorXd& p,
                        Eigen::Ref<Eigen::VectorXd> out) const = 0;
  /// True when the basis is orthonormal for the uniform probability measure.
  virtual bool orthonormal() const = 0;
  /// Parameter-domain midpoint, used as default preconditioner anchor.
  virtual Eigen::VectorXd midpoint() const = 0;

  Eigen::VectorXd evaluate(const Eigen::VectorXd& p) const {
    Eigen::VectorXd out(size());
    evaluate(p, out);
    return out;
  }
};

using BasisPtr = std::shared_ptr<const StochasticBasis>;

/// Tensor-product Legendre polynomials on [-1, 1]^dim of total degree <= d,
/// normalized to unit L2 norm for the uniform probability measure. Multi-
/// indices are sorted by total degree (constant first); within one degree
/// they are lexicographically descending (dim = 2, degree 1: (1,0), (0,1)).
class LegendreBasis final : public StochasticBasis {
 public:
  LegendreBasis(int dim, int degree);

  Index size() const override { return static_cast<Index>(indices_.size()); }
  Index dim() const override { return dim_; }
  void evaluate(const Eigen::VectorXd& p,
                Eigen::Ref<Eigen::VectorXd> out) const override;
  using StochasticBasis::evaluate;
  bool orthonormal() const override { return true; }
  Eigen::VectorXd midpoint() const override {
    return Eigen::VectorXd::Zero(dim_);
  }

  int degree() const { return degree_; }
  const std::vector<std::vector<int>>& multi_indices() const {
    return indices_;
  }

 private:
  int dim_;
  int degree_;
  std::vector<std::vector<int>> indices_;
};

/// Hat functions on a uniform mesh of [a, b] (n_elements + 1 functions).
class HatBasis final : public StochasticBasis {
 public:
  HatBasis(int n_elements, double a, double b);

  Index size() const override { return n_elements_ + 1; }
  Index dim() const override { return 1; }
  void evaluate(const Eigen::VectorXd& p,
                Eigen::Ref<Eigen::VectorXd> out) const override;
  using StochasticBasis::evaluate;
  bool orthonormal() const override { return false; }
  Eigen::VectorXd midpoint() const override {
    return Eigen::VectorXd::Constant(1, 0.5 * (a_ + b_));
  }

  int elements() const { return n_elements_; }

 private:
  int n_elements_;
  double a_;
  double b_;
};

BasisPtr legendre_total_degree(int dim, int degree);
BasisPtr piecewise_linear_basis(int n_elements, double a = 0.0, double b = 1.0);

/// Psi in R^{Z x m}; row z holds the basis evaluated at p_z.
Eigen::MatrixXd eval_matrix(const StochasticBasis& basis,
                            const QuadratureRule& rule);

/// Gram matrix Psi^T W Psi. Throws DegenerateRuleError if it is singular.
Eigen::MatrixXd gram(const StochasticBasis& basis, const QuadratureRule& rule);

/// Gram from an already evaluated Psi.
Eigen::MatrixXd gram(const Eigen::MatrixXd& psi, const Eigen::VectorXd& weights);

} // namespace pgdni
