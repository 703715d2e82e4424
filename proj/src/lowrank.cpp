#include "pgdni/lowrank.hpp"

#include <cmath>
#include <stdexcept>

namespace pgdni {

LowRankTensor::LowRankTensor(Eigen::MatrixXd lambda_, Eigen::MatrixXd v_)
    : lambda(std::move(lambda_)), v(std::move(v_)) {
  if (lambda.cols() != v.cols()) {
    throw std::invalid_argument("LowRankTensor: factor column counts differ");
  }
  if (!lambda.allFinite() || !v.allFinite()) {
    throw std::invalid_argument("LowRankTensor: non-finite coefficients");
  }
}

LowRankTensor LowRankTensor::zero(Index m, Index n) {
  return LowRankTensor(Eigen::MatrixXd(m, 0), Eigen::MatrixXd(n, 0));
}

Eigen::VectorXd evaluate_at(const LowRankTensor& u, const Eigen::VectorXd& psi) {
  if (psi.size() != u.m()) {
    throw std::invalid_argument("evaluate_at: psi length differs from m");
  }
  if (u.rank() == 0) {
    return Eigen::VectorXd::Zero(u.n());
  }
  return u.v * (u.lambda.transpose() * psi);
}

Eigen::MatrixXd full_matrix(const LowRankTensor& u) {
  if (u.rank() == 0) {
    return Eigen::MatrixXd::Zero(u.m(), u.n());
  }
  return u.lambda * u.v.transpose();
}

OrthResult orth_columns(const Eigen::MatrixXd& x) {
  const Index k = x.rows();
  const Index r = x.cols();
  if (k < r) {
    throw std::invalid_argument("orth_columns: more columns than rows");
  }
  OrthResult out;
  if (r == 0) {
    out.basis = Eigen::MatrixXd(k, 0);
    out.mixing = Eigen::MatrixXd(0, 0);
    return out;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU |
                                               Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double cutoff = sigma(0) * 1e-13 * static_cast<double>(std::max(k, r));
  Index kept = 0;
  while (kept < r && sigma(kept) > cutoff && sigma(kept) > 0.0) {
    ++kept;
  }
  out.basis.resize(k, r);
  out.basis.leftCols(kept) = svd.matrixU().leftCols(kept);
  // Complete the orthonormal set with pivoted unit vectors.
  for (Index c = kept; c < r; ++c) {
    Eigen::VectorXd best;
    double best_norm = -1.0;
    for (Index j = 0; j < k; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Unit(k, j);
      for (int pass = 0; pass < 2; ++pass) {
        e -= out.basis.leftCols(c) * (out.basis.leftCols(c).transpose() * e);
      }
      const double nrm = e.norm();
      if (nrm > best_norm + 1e-14) {
        best_norm = nrm;
        best = e;
      }
    }
    out.basis.col(c) = best / best_norm;
  }
  out.mixing = out.basis.transpose() * x;
  return out;
}

LowRankTensor truncated_svd(const Eigen::MatrixXd& m, Index r) {
  if (r < 0 || r > std::min(m.rows(), m.cols())) {
    throw std::invalid_argument("truncated_svd: rank exceeds min(m, n)");
  }
  if (r == 0) {
    return LowRankTensor::zero(m.rows(), m.cols());
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU |
                                               Eigen::ComputeThinV);
  Eigen::MatrixXd lambda =
      svd.matrixU().leftCols(r) * svd.singularValues().head(r).asDiagonal();
  Eigen::MatrixXd v = svd.matrixV().leftCols(r);
  return LowRankTensor(std::move(lambda), std::move(v));
}

LowRankTensor append_rank_one(const LowRankTensor& u,
                              const Eigen::VectorXd& lambda_col,
                              const Eigen::VectorXd& v_col) {
  if (lambda_col.size() != u.m() || v_col.size() != u.n()) {
    throw std::invalid_argument("append_rank_one: dimension mismatch");
  }
  Eigen::MatrixXd lambda(u.m(), u.rank() + 1);
  Eigen::MatrixXd v(u.n(), u.rank() + 1);
  lambda << u.lambda, lambda_col;
  v << u.v, v_col;
  return LowRankTensor(std::move(lambda), std::move(v));
}

double frobenius_norm(const LowRankTensor& u) {
  if (u.rank() == 0) {
    return 0.0;
  }
  const Eigen::MatrixXd gl = u.lambda.transpose() * u.lambda;
  const Eigen::MatrixXd gv = u.v.transpose() * u.v;
  return std::sqrt(std::max(0.0, (gl.array() * gv.array()).sum()));
}

double weighted_norm(const LowRankTensor& u, const Eigen::MatrixXd& gram) {
  if (u.rank() == 0) {
    return 0.0;
  }
  const Eigen::MatrixXd gl = u.lambda.transpose() * gram * u.lambda;
  const Eigen::MatrixXd gv = u.v.transpose() * u.v;
  return std::sqrt(std::max(0.0, (gl.array() * gv.array()).sum()));
}

} // namespace pgdni
