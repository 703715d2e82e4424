#include "pgdni/lowrank.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace pgdni;
using pgdni::testing::random_matrix;

TEST_CASE("evaluate_at") {
  Eigen::MatrixXd lambda(2, 1), v(2, 1);
  lambda << 1, 0;
  v << 2, 3;
  const LowRankTensor u(lambda, v);
  const Eigen::VectorXd out = evaluate_at(u, Eigen::Vector2d(1.0, 5.0));
  CHECK(out(0) == 2.0);
  CHECK(out(1) == 3.0);

  Eigen::MatrixXd lambda2(2, 2), v2(2, 2);
  lambda2 << 1, 0, 0, 1;
  v2 << 1, 0, 0, 1;
  const Eigen::VectorXd out2 = evaluate_at(LowRankTensor(lambda2, v2), Eigen::Vector2d(0.5, -1.0));
  CHECK(out2(0) == 0.5);
  CHECK(out2(1) == -1.0);

  std::mt19937 rng0(1);
  const LowRankTensor zero(Eigen::MatrixXd::Zero(3, 2), random_matrix(4, 2, rng0));
  CHECK(evaluate_at(zero, Eigen::Vector3d(1, 2, 3)).norm() == 0.0);

  std::mt19937 rng(3);
  const LowRankTensor r(random_matrix(5, 3, rng), random_matrix(4, 3, rng));
  const Eigen::VectorXd psi = pgdni::testing::random_vector(5, rng);
  Eigen::VectorXd oracle = Eigen::VectorXd::Zero(4);
  for (Index k = 0; k < 3; ++k) {
    double c = 0.0;
    for (Index i = 0; i < 5; ++i) c += r.lambda(i, k) * psi(i);
    oracle += c * r.v.col(k);
  }
  CHECK((evaluate_at(r, psi) - oracle).norm() < 1e-14);
  CHECK_THROWS_AS(evaluate_at(r, Eigen::VectorXd::Zero(4)), std::invalid_argument);
}

TEST_CASE("full_matrix and GL_r invariance") {
  CHECK(full_matrix(LowRankTensor::zero(3, 4)).norm() == 0.0);
  CHECK(full_matrix(LowRankTensor::zero(3, 4)).rows() == 3);

  Eigen::MatrixXd lambda(2, 1), v(3, 1);
  lambda << 1, 2;
  v << 3, 4, 5;
  const Eigen::MatrixXd f = full_matrix(LowRankTensor(lambda, v));
  CHECK(f(1, 2) == 10.0);
  CHECK(f(0, 1) == 4.0);

  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd l = random_matrix(6, 3, rng);
    const Eigen::MatrixXd vv = random_matrix(5, 3, rng);
    Eigen::MatrixXd a = random_matrix(3, 3, rng) + 3.0 * Eigen::MatrixXd::Identity(3, 3);
    const Eigen::MatrixXd moved_l = l * a;
    const Eigen::MatrixXd moved_v = vv * a.inverse().transpose();
    const double diff =
        (full_matrix(LowRankTensor(l, vv)) - full_matrix(LowRankTensor(moved_l, moved_v))).norm();
    CHECK(diff < 1e-12 * std::max(1.0, full_matrix(LowRankTensor(l, vv)).norm()));
  }
}

TEST_CASE("LowRankTensor validates its factors") {
  CHECK_THROWS_AS(LowRankTensor(Eigen::MatrixXd::Zero(2, 1), Eigen::MatrixXd::Zero(2, 2)),
                  std::invalid_argument);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 1);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(LowRankTensor(bad, Eigen::MatrixXd::Zero(2, 1)), std::invalid_argument);
}

TEST_CASE("orth_columns") {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(4, 2);
  const OrthResult same = orth_columns(eye);
  CHECK((same.basis.transpose() * same.basis - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-14);
  CHECK((same.basis * same.mixing - eye).norm() < 1e-14);

  Eigen::MatrixXd dependent(3, 2);
  dependent << 1, 2, 1, 2, 0, 0;
  const OrthResult dep = orth_columns(dependent);
  CHECK((dep.basis.transpose() * dep.basis - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
  CHECK((dep.basis * dep.mixing - dependent).norm() < 1e-12);

  std::mt19937 rng(5);
  const Eigen::MatrixXd x = random_matrix(10, 3, rng);
  const OrthResult r = orth_columns(x);
  CHECK((r.basis.transpose() * r.basis - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-13);
  CHECK((r.basis * r.mixing - x).norm() < 1e-13);
  CHECK_THROWS_AS(orth_columns(random_matrix(2, 3, rng)), std::invalid_argument);
}

TEST_CASE("truncated_svd") {
  const Eigen::MatrixXd d = Eigen::Vector3d(3, 2, 1).asDiagonal();
  CHECK(std::abs((full_matrix(truncated_svd(d, 2)) - d).norm() - 1.0) < 1e-14);
  CHECK((full_matrix(truncated_svd(d, 3)) - d).norm() < 1e-14);
  CHECK_THROWS_AS(truncated_svd(d, 4), std::invalid_argument);

  std::mt19937 rng(9);
  const Eigen::MatrixXd a = random_matrix(6, 5, rng);
  const double best = (full_matrix(truncated_svd(a, 2)) - a).norm();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const Eigen::VectorXd s = svd.singularValues();
  CHECK(std::abs(best - std::sqrt(s.tail(3).squaredNorm())) < 1e-12);
  for (int k = 0; k < 1000; ++k) {
    const Eigen::MatrixXd candidate = random_matrix(6, 2, rng) * random_matrix(2, 5, rng);
    CHECK((candidate - a).norm() >= best - 1e-12);
  }
}

TEST_CASE("append_rank_one") {
  const LowRankTensor empty = LowRankTensor::zero(3, 2);
  const LowRankTensor one = append_rank_one(empty, Eigen::Vector3d(1, 2, 3), Eigen::Vector2d(4, 5));
  CHECK(one.rank() == 1);
  CHECK(full_matrix(one)(2, 1) == 15.0);

  std::mt19937 rng(2);
  const LowRankTensor base(random_matrix(3, 2, rng), random_matrix(2, 2, rng));
  const LowRankTensor zeros = append_rank_one(base, Eigen::Vector3d::Zero(), Eigen::Vector2d::Zero());
  CHECK((full_matrix(zeros) - full_matrix(base)).norm() == 0.0);
  const Eigen::Vector3d l(1, -1, 2);
  const Eigen::Vector2d w(0.5, 3);
  const LowRankTensor more = append_rank_one(base, l, w);
  CHECK((full_matrix(more) - full_matrix(base) - l * w.transpose()).norm() < 1e-14);
  CHECK_THROWS_AS(append_rank_one(base, Eigen::Vector2d::Zero(), w), std::invalid_argument);
}

TEST_CASE("frobenius_norm and weighted_norm") {
  const LowRankTensor unit(Eigen::Vector2d(1, 0), Eigen::Vector3d(0, 1, 0));
  CHECK(std::abs(frobenius_norm(unit) - 1.0) < 1e-15);
  CHECK(frobenius_norm(LowRankTensor::zero(3, 3)) == 0.0);

  std::mt19937 rng(4);
  const LowRankTensor r(random_matrix(5, 3, rng), random_matrix(4, 3, rng));
  CHECK(std::abs(frobenius_norm(r) - full_matrix(r).norm()) < 1e-13);

  const Eigen::MatrixXd g = pgdni::testing::random_spd(5, rng);
  const Eigen::MatrixXd f = full_matrix(r);
  const double oracle = std::sqrt((f.transpose() * g * f).trace());
  CHECK(std::abs(weighted_norm(r, g) - oracle) < 1e-12 * oracle);
  CHECK(std::abs(weighted_norm(r, Eigen::MatrixXd::Identity(5, 5)) - frobenius_norm(r)) < 1e-13);
}
