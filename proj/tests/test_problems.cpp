#include "pgdni/problem.hpp"
#include "pgdni/problems_builtin.hpp"
#include "pgdni/reference.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <thread>
#include <vector>

using namespace pgdni;
using pgdni::testing::fd_gradient;
using pgdni::testing::random_vector;

namespace {

Eigen::MatrixXd dense(const ObstacleProblem::Tridiagonal& t) {
  const Index n = t.diag.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    a(i, i) = t.diag(i);
    if (i + 1 < n) {
      a(i + 1, i) = t.lower(i);
      a(i, i + 1) = t.upper(i);
    }
  }
  return a;
}

Eigen::MatrixXd fd_jacobian(const ParametricProblem& prob, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& p, double h = 1e-7) {
  const Index n = u.size();
  Eigen::MatrixXd j(n, n);
  for (Index i = 0; i < n; ++i) {
    Eigen::VectorXd up = u, um = u;
    up(i) += h;
    um(i) -= h;
    j.col(i) = -(prob.residual(up, p) - prob.residual(um, p)) / (2.0 * h);
  }
  return j;
}

Eigen::VectorXd param(double a) { return Eigen::VectorXd::Constant(1, a); }

} // namespace

// ---------------------------------------------------------------------------
// Counting wrapper.

TEST_CASE("CountedProblem counts residual calls only") {
  const ElectronicNetwork net;
  ResidualCounter counter;
  const auto c = counted(net, counter);
  const Eigen::VectorXd u = Eigen::VectorXd::Ones(5);
  const Eigen::VectorXd p = Eigen::Vector2d(0.1, 0.2);
  for (int k = 0; k < 3; ++k) c.residual(u, p);
  CHECK(counter.count() == 3);
  c.precond_apply(u, p, u);
  c.precond_forward(u, p, u);
  CHECK(counter.count() == 3);
  CHECK((c.residual(u, p).array() == net.residual(u, p).array()).all());
  CHECK(c.state_dim() == 5);
  CHECK(c.param_dim() == 2);
  CHECK(c.reentrant());
}

TEST_CASE("nested counters both see every call") {
  const ElectronicNetwork net;
  ResidualCounter outer, inner;
  const auto a = counted(net, inner);
  const auto b = counted(a, outer);
  b.residual(Eigen::VectorXd::Zero(5), Eigen::Vector2d::Zero());
  b.residual(Eigen::VectorXd::Zero(5), Eigen::Vector2d::Zero());
  a.residual(Eigen::VectorXd::Zero(5), Eigen::Vector2d::Zero());
  CHECK(outer.count() == 2);
  CHECK(inner.count() == 3);
}

TEST_CASE("counter phases split the total") {
  ResidualCounter counter;
  counter.add(2);
  counter.set_phase("solve");
  counter.add(5);
  const auto phases = counter.phases();
  CHECK(counter.count() == 7);
  CHECK(phases.at("default") == 2);
  CHECK(phases.at("solve") == 5);
}

TEST_CASE("counter is thread safe") {
  ResidualCounter counter;
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      for (int k = 0; k < 1000; ++k) counter.add();
    });
  }
  for (auto& t : threads) t.join();
  CHECK(counter.count() == 4000);
}

// ---------------------------------------------------------------------------
// Network.

TEST_CASE("network residual examples") {
  const ElectronicNetwork net;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(5);
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(5);
  expected(0) = 25.0;
  CHECK((net.residual(zero, Eigen::Vector2d(0.0, 0.0)) - expected).norm() == 0.0);
  expected(0) = 24.0;
  CHECK((net.residual(zero, Eigen::Vector2d(1.0, -1.0)) - expected).norm() == 0.0);
  CHECK(std::abs(net.B()(0, 0) - 3.0 / 100.0) < 1e-17);
  CHECK((net.B() - net.B().transpose()).norm() == 0.0);
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(net.B()).eigenvalues().minCoeff() > 0.0);
  CHECK_THROWS_AS(ElectronicNetwork(0.0), std::invalid_argument);
}

TEST_CASE("network residual is the negative energy gradient") {
  const ElectronicNetwork net;
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u11(-1.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const Eigen::VectorXd p = Eigen::Vector2d(u11(rng), u11(rng));
    const Eigen::VectorXd u = random_vector(5, rng);
    const Eigen::VectorXd fd = fd_gradient([&](const Eigen::VectorXd& x) { return net.energy(x, p); }, u);
    const Eigen::VectorXd r = net.residual(u, p);
    CHECK((r + fd).norm() <= 1e-6 * std::max(1.0, r.norm()));
  }
}

TEST_CASE("network preconditioner is B") {
  const ElectronicNetwork net;
  std::mt19937 rng(22);
  const Eigen::VectorXd p = Eigen::Vector2d(0.5, 0.5);
  const Eigen::VectorXd x = random_vector(5, rng);
  const Eigen::VectorXd y = random_vector(5, rng);
  CHECK((net.precond_apply(net.B() * x, p, y) - x).norm() < 1e-12);
  CHECK((net.precond_forward(x, p, y) - net.B() * x).norm() < 1e-15);
  const Eigen::VectorXd lin = net.precond_apply(2.0 * x - 3.0 * y, p, x);
  CHECK((lin - 2.0 * net.precond_apply(x, p, x) + 3.0 * net.precond_apply(y, p, x)).norm() < 1e-9);
}

TEST_CASE("network strong convexity and Lipschitz bound") {
  const ElectronicNetwork net;
  const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(net.B()).eigenvalues().minCoeff();
  const double bnorm = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(net.B()).eigenvalues().maxCoeff();
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u11(-1.0, 1.0);
  const double radius = 2.0;
  const double lipschitz = bnorm + 3.0 * 3.0 * radius * radius;
  for (int k = 0; k < 50; ++k) {
    const Eigen::VectorXd p = Eigen::Vector2d(u11(rng), u11(rng));
    const Eigen::VectorXd u = random_vector(5, rng).normalized() * radius * std::abs(u11(rng));
    const Eigen::VectorXd w = random_vector(5, rng).normalized() * radius * std::abs(u11(rng));
    const Eigen::MatrixXd jac = fd_jacobian(net, u, p);
    const Eigen::MatrixXd sym = 0.5 * (jac + jac.transpose());
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym).eigenvalues().minCoeff() >= lmin - 1e-6);
    const double ratio = (net.residual(u, p) - net.residual(w, p)).norm() / (u - w).norm();
    CHECK(ratio <= lipschitz);
  }
}

// ---------------------------------------------------------------------------
// Obstacle.

TEST_CASE("obstacle profile examples") {
  CHECK(std::abs(obstacle_g(0.3, 1.0 / 6.0) - 0.3) < 1e-15);
  CHECK(std::abs(obstacle_g(0.3, 0.5) + 0.7) < 1e-15);
  CHECK(std::abs(obstacle_g(0.3, 1.0 / 3.0)) < 1e-15);
  CHECK(std::abs(obstacle_g(0.3, 1.0 / 6.0, ObstacleForm::Draped) - 0.3) < 1e-15);
  CHECK(std::abs(obstacle_g(0.3, 0.5, ObstacleForm::Draped) - 0.7) < 1e-15);
  CHECK(std::abs(obstacle_g(0.3, 1.0 / 3.0, ObstacleForm::Draped)) < 1e-15);
  for (double x : {0.05, 0.2, 0.45, 0.6, 0.9}) {
    CHECK(std::abs(obstacle_g(0.4, x) - obstacle_g(0.4, 1.0 - x)) < 1e-14);
  }
}

TEST_CASE("obstacle residual is the negative energy gradient") {
  for (ObstacleForm form : {ObstacleForm::AsStated, ObstacleForm::Draped}) {
    ObstacleProblem::Options opts;
    opts.n_elements = 20;
    opts.form = form;
    const ObstacleProblem prob(opts);
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
      const Eigen::VectorXd p = param(u01(rng));
      const Eigen::VectorXd u = 0.8 * random_vector(prob.state_dim(), rng);
      const Eigen::VectorXd fd =
          fd_gradient([&](const Eigen::VectorXd& x) { return prob.energy(x, p); }, u, 1e-7);
      const Eigen::VectorXd r = prob.residual(u, p);
      CHECK((r + fd).norm() <= 1e-6 * std::max(1.0, r.norm()));
    }
  }
}

TEST_CASE("obstacle tangent and preconditioner") {
  ObstacleProblem::Options opts;
  opts.n_elements = 10;
  const ObstacleProblem prob(opts);
  const Index n = prob.state_dim();
  const double h = prob.h();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    k(i, i) = 2.0 / h;
    if (i + 1 < n) k(i, i + 1) = k(i + 1, i) = -1.0 / h;
  }

  // Far below the obstacle nothing is penalized: the tangent is K.
  const Eigen::VectorXd p = param(0.5);
  const Eigen::VectorXd low = Eigen::VectorXd::Constant(n, -5.0);
  CHECK((dense(prob.tangent(low, p)) - k).norm() < 1e-12);
  CHECK(prob.max_violation(low, 0.5) == 0.0);
  std::mt19937 rng(32);
  const Eigen::VectorXd x = random_vector(n, rng);
  CHECK((prob.precond_apply(x, p, low) - k.ldlt().solve(x)).norm() < 1e-12);

  // Far above it every point is active: the tangent is K + rho M.
  const Eigen::VectorXd high = Eigen::VectorXd::Constant(n, 5.0);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    m(i, i) = 2.0 * h / 3.0;
    if (i + 1 < n) m(i, i + 1) = m(i + 1, i) = h / 6.0;
  }
  const Eigen::MatrixXd full = k + opts.penalty * m;
  CHECK((dense(prob.tangent(high, p)) - full).norm() < 1e-9 * full.norm());
  CHECK((prob.precond_apply(full * x, p, high) - x).norm() < 1e-10);
  CHECK((prob.precond_forward(x, p, high) - full * x).norm() < 1e-9 * (full * x).norm());

  // Away from kinks the tangent is the residual Jacobian.
  const Eigen::VectorXd mid = 0.3 * random_vector(n, rng);
  const Eigen::MatrixXd t = dense(prob.tangent(mid, p));
  CHECK((t - t.transpose()).norm() == 0.0);
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(t).eigenvalues().minCoeff() > 0.0);
  CHECK((t - fd_jacobian(prob, mid, p)).norm() < 1e-5 * t.norm());
}

TEST_CASE("obstacle residual at rest is the load") {
  ObstacleProblem::Options opts;
  opts.n_elements = 8;
  const ObstacleProblem prob(opts);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(prob.state_dim());
  // p = 1 puts the obstacle at or above zero, so u = 0 is feasible.
  const Eigen::VectorXd r = prob.residual(zero, param(1.0));
  CHECK((r - Eigen::VectorXd::Constant(prob.state_dim(), prob.h())).norm() < 1e-14);

  opts.form = ObstacleForm::Draped;
  const ObstacleProblem draped(opts);
  const Eigen::VectorXd rd = draped.residual(zero, param(0.0));
  // The middle lobe of height 1 pushes the rope up where it is violated.
  CHECK(rd.minCoeff() >= -draped.h() - 1e-14);
}

TEST_CASE("obstacle residual is mirror symmetric") {
  for (ObstacleForm form : {ObstacleForm::AsStated, ObstacleForm::Draped}) {
    ObstacleProblem::Options opts;
    opts.n_elements = 12;
    opts.form = form;
    const ObstacleProblem prob(opts);
    std::mt19937 rng(33);
    const Eigen::VectorXd u = random_vector(prob.state_dim(), rng);
    const Eigen::VectorXd p = param(0.37);
    const Eigen::VectorXd lhs = prob.residual(u.reverse(), p);
    const Eigen::VectorXd rhs = prob.residual(u, p).reverse();
    CHECK((lhs - rhs).norm() < 1e-10 * std::max(1.0, rhs.norm()));
  }
}

TEST_CASE("penalty violation shrinks as the penalty grows") {
  for (ObstacleForm form : {ObstacleForm::AsStated, ObstacleForm::Draped}) {
    double previous = 0.0;
    bool first = true;
    for (double rho : {1e2, 1e3, 1e4}) {
      ObstacleProblem::Options opts;
      opts.penalty = rho;
      opts.form = form;
      const ObstacleProblem prob(opts);
      const Eigen::VectorXd p = param(0.3);
      const Eigen::VectorXd u =
          deterministic_solve(prob, p, Eigen::VectorXd::Zero(prob.state_dim()), 1e-11, 5000);
      const double viol = prob.max_violation(u, 0.3);
      if (!first) CHECK(viol < previous);
      previous = viol;
      first = false;
    }
  }
}

TEST_CASE("invalid obstacle options are rejected") {
  ObstacleProblem::Options opts;
  opts.n_elements = 1;
  CHECK_THROWS_AS(ObstacleProblem{opts}, std::invalid_argument);
  opts.n_elements = 10;
  opts.penalty = -1.0;
  CHECK_THROWS_AS(ObstacleProblem{opts}, std::invalid_argument);
}
