#pragma once

#include <Eigen/Dense>

namespace pgdni {

using Index = Eigen::Index;

/// Rank-r tensor u_r = sum_k lambda_k (x) v_k stored as the coefficient pair
/// (Lambda in R^{m x r}, V in R^{n x r}); the full coefficient matrix is
/// Lambda V^T.
struct LowRankTensor {
  Eigen::MatrixXd lambda; // m x r
  Eigen::MatrixXd v;      // n x r

  LowRankTensor() = default;
  LowRankTensor(Eigen::MatrixXd lambda_, Eigen::MatrixXd v_);
  static LowRankTensor zero(Index m, Index n);

  Index rank() const { return lambda.cols(); }
  Index m() const { return lambda.rows(); }
  Index n() const { return v.rows(); }
};

/// State vector V (Lambda^T psi).
Eigen::VectorXd evaluate_at(const LowRankTensor& u, const Eigen::VectorXd& psi);

/// Lambda V^T (m x n); zero for rank 0.
Eigen::MatrixXd full_matrix(const LowRankTensor& u);

struct OrthResult {
  Eigen::MatrixXd basis;  // k x r, orthonormal columns
  Eigen::MatrixXd mixing; // r x r, x ~= basis * mixing
};

/// Orthonormal columns whose span contains span(x). Rank-deficient inputs are
/// completed with the unit vectors having the largest component outside the
/// current span (deterministic).
OrthResult orth_columns(const Eigen::MatrixXd& x);

/// Frobenius-optimal rank-r approximation: Lambda = U_r Sigma_r, V = V_r.
LowRankTensor truncated_svd(const Eigen::MatrixXd& m, Index r);

LowRankTensor append_rank_one(const LowRankTensor& u,
                              const Eigen::VectorXd& lambda_col,
                              const Eigen::VectorXd& v_col);

/// ||Lambda V^T||_F via the r x r Gram matrices of both factors.
double frobenius_norm(const LowRankTensor& u);

/// sqrt(trace(V Lambda^T G Lambda V^T)) for an SPD parameter Gram G.
double weighted_norm(const LowRankTensor& u, const Eigen::MatrixXd& gram);

} // namespace pgdni
