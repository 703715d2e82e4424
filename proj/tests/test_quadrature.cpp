#include "pgdni/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

using namespace pgdni;

namespace {

// E[p^k] for p uniform on [-1, 1].
double uniform_moment(int k) { return k % 2 == 1 ? 0.0 : 1.0 / (k + 1); }

double rule_moment(const QuadratureRule& rule, int k) {
  return integrate(rule, [k](const Eigen::VectorXd& p) { return std::pow(p(0), k); });
}

} // namespace

TEST_CASE("gauss_legendre_1d small rules") {
  const auto one = gauss_legendre_1d(1);
  REQUIRE(one.size() == 1);
  CHECK(one.points(0, 0) == doctest::Approx(0.0));
  CHECK(one.weights(0) == doctest::Approx(1.0));

  const auto two = gauss_legendre_1d(2);
  const double x = 1.0 / std::sqrt(3.0);
  CHECK(std::abs(std::abs(two.points(0, 0)) - x) < 1e-15);
  CHECK(std::abs(two.points(0, 0) + two.points(1, 0)) < 1e-15);
  CHECK(std::abs(two.weights(0) - 0.5) < 1e-15);
  CHECK(std::abs(two.weights(1) - 0.5) < 1e-15);
}

TEST_CASE("gauss_legendre_1d exactness up to degree 2q-1") {
  for (int q = 1; q <= 10; ++q) {
    const auto rule = gauss_legendre_1d(q);
    CHECK(std::abs(rule.mass() - 1.0) < 1e-14);
    for (Index z = 0; z < rule.size(); ++z) CHECK(rule.weights(z) > 0.0);
    for (int k = 0; k <= 2 * q - 1; ++k) {
      CHECK(std::abs(rule_moment(rule, k) - uniform_moment(k)) < 1e-12);
    }
    CHECK(std::abs(rule_moment(rule, 2 * q) - uniform_moment(2 * q)) > 1e-6);
  }
}

TEST_CASE("five-point rule: odd powers vanish, degree ten is not resolved") {
  const auto rule = gauss_legendre_1d(5);
  CHECK(std::abs(rule_moment(rule, 9)) < 1e-14);
  CHECK(std::abs(rule_moment(rule, 8) - 1.0 / 9.0) < 1e-14);
  CHECK(std::abs(rule_moment(rule, 10) - 1.0 / 11.0) > 1e-4);
}

TEST_CASE("gauss_legendre_1d on a general interval without normalization") {
  const auto rule = gauss_legendre_1d(4, 2.0, 5.0, false);
  CHECK(std::abs(rule.mass() - 3.0) < 1e-13);
  const double cube = integrate(rule, [](const Eigen::VectorXd& p) { return p(0) * p(0) * p(0); });
  CHECK(std::abs(cube - (625.0 - 16.0) / 4.0) < 1e-11);
}

TEST_CASE("invalid rules are rejected") {
  CHECK_THROWS_AS(gauss_legendre_1d(0), std::invalid_argument);
  CHECK_THROWS_AS(gauss_legendre_1d(2, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(gauss_legendre_1d(2, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(tensorize(std::span<const QuadratureRule>{}), std::invalid_argument);
  CHECK_THROWS_AS(piecewise_gauss_1d(0, 2, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(piecewise_trapezoid_1d(0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("tensorize builds the full grid") {
  const std::vector<QuadratureRule> twos{gauss_legendre_1d(2), gauss_legendre_1d(2)};
  const auto grid = tensorize(twos);
  REQUIRE(grid.size() == 4);
  REQUIRE(grid.dim() == 2);
  for (Index z = 0; z < 4; ++z) CHECK(std::abs(grid.weights(z) - 0.25) < 1e-15);
  // The last rule varies fastest.
  CHECK(grid.points(0, 0) == grid.points(1, 0));
  CHECK(grid.points(0, 1) != grid.points(1, 1));

  const std::vector<QuadratureRule> sixes{gauss_legendre_1d(6), gauss_legendre_1d(6)};
  const auto fine = tensorize(sixes);
  CHECK(fine.size() == 36);
  const double v = integrate(fine, [](const Eigen::VectorXd& p) {
    return p(0) * p(0) * p(1) * p(1);
  });
  CHECK(std::abs(v - 1.0 / 9.0) < 1e-14);
  const double shifted = integrate(fine, [](const Eigen::VectorXd& p) { return p(1) + 25.0; });
  CHECK(std::abs(shifted - 25.0) < 1e-12);
}

TEST_CASE("tensorize integrates products as products") {
  const std::vector<QuadratureRule> rules{gauss_legendre_1d(3), gauss_legendre_1d(4, 0.0, 2.0)};
  const auto grid = tensorize(rules);
  auto f = [](double x) { return std::exp(x); };
  auto g = [](double y) { return std::cos(y); };
  const double joint = integrate(grid, [&](const Eigen::VectorXd& p) { return f(p(0)) * g(p(1)); });
  const double a = integrate(rules[0], [&](const Eigen::VectorXd& p) { return f(p(0)); });
  const double b = integrate(rules[1], [&](const Eigen::VectorXd& p) { return g(p(0)); });
  CHECK(std::abs(joint - a * b) < 1e-14);
}

TEST_CASE("piecewise_gauss_1d") {
  const auto one = piecewise_gauss_1d(1, 2, 0.0, 1.0);
  const double off = 0.5 / std::sqrt(3.0);
  CHECK(std::abs(one.points(0, 0) - (0.5 - off)) < 1e-15);
  CHECK(std::abs(one.points(1, 0) - (0.5 + off)) < 1e-15);

  const auto mids = piecewise_gauss_1d(2, 1, 0.0, 1.0);
  CHECK(std::abs(mids.points(0, 0) - 0.25) < 1e-15);
  CHECK(std::abs(mids.points(1, 0) - 0.75) < 1e-15);
  CHECK(std::abs(mids.weights(0) - 0.5) < 1e-15);

  const auto fine = piecewise_gauss_1d(100, 2, 0.0, 1.0);
  CHECK(fine.size() == 200);
  CHECK(std::abs(fine.mass() - 1.0) < 1e-13);
  const double lobes = integrate(fine, [](const Eigen::VectorXd& p) {
    return std::max(std::sin(3.0 * std::numbers::pi * p(0)), 0.0);
  });
  CHECK(std::abs(lobes - 4.0 / (3.0 * std::numbers::pi)) < 2e-5);
}

TEST_CASE("piecewise_trapezoid_1d") {
  const auto rule = piecewise_trapezoid_1d(4, 0.0, 1.0);
  REQUIRE(rule.size() == 5);
  CHECK(std::abs(rule.mass() - 1.0) < 1e-15);
  CHECK(std::abs(rule.weights(0) - 0.125) < 1e-15);
  CHECK(std::abs(rule.weights(2) - 0.25) < 1e-15);
  CHECK(std::abs(rule.points(4, 0) - 1.0) < 1e-15);
  const double linear = integrate(rule, [](const Eigen::VectorXd& p) { return 3.0 * p(0) - 1.0; });
  CHECK(std::abs(linear - 0.5) < 1e-15);
}

TEST_CASE("integrate examples") {
  const auto two = gauss_legendre_1d(2);
  CHECK(std::abs(integrate(two, [](const Eigen::VectorXd&) { return 1.0; }) - 1.0) < 1e-15);
  CHECK(std::abs(integrate(two, [](const Eigen::VectorXd& p) { return p(0) * p(0); }) - 1.0 / 3.0) <
        1e-15);
}
