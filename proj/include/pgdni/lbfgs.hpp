#pragma once

#include <Eigen/Dense>

#include <deque>
#include <functional>
#include <stdexcept>

namespace pgdni::lbfgs {

using Vec = Eigen::VectorXd;
/// Linear operator on the iterate space.
using LinearMap = std::function<Vec(const Vec&)>;
/// Residual map x -> R_y(x), the negative gradient of the functional.
using ResidualMap = std::function<Vec(const Vec&)>;

enum class MemoryPolicy { Fifo, Restart };

/// Limited-memory inverse Hessian approximation
///
///   C_{l+1} = C_l + (<z,t> + <z,s>) / <z,t>^2  t (x) t
///                 - 1 / <z,t> (s (x) t + t (x) s),
///
/// applied matrix-free. Vectors are flattened; the inner product is the
/// Euclidean one, which for flattened blocks is the trace product.
class BfgsState {
 public:
  BfgsState(LinearMap c0, int memory = 20, MemoryPolicy policy = MemoryPolicy::Fifo,
            double curvature_guard = 1e-12);

  /// C_l vec: C_0 followed by the queued corrections in insertion order.
  Vec apply_inverse(const Vec& vec) const;

  /// Stores the pair (t, s = C z). Returns false when the curvature guard
  /// rejects it. A full queue is cleared (Restart) or loses its oldest entry
  /// (Fifo) before s is computed, so the secant equation C z = t holds for
  /// the newest update.
  bool record_update(const Vec& t, const Vec& z);

  void clear() { queue_.clear(); }
  std::size_t size() const { return queue_.size(); }
  int memory() const { return memory_; }
  int skipped() const { return skipped_; }

 private:
  struct Update {
    Vec t;
    Vec s;
    double zt;
    double zs;
  };

  LinearMap c0_;
  int memory_;
  MemoryPolicy policy_;
  double guard_;
  int skipped_ = 0;
  std::deque<Update> queue_;
};

struct LineSearchOptions {
  double eta = 0.5;        // accept when |sigma(rho)| <= eta |sigma(0)|
  int max_expansions = 30; // doublings while looking for a sign change
  int max_iterations = 30; // regula falsi steps inside a bracket
};

struct LineSearchResult {
  double rho = 1.0;
  int evaluations = 0;
  bool bracket_failed = false; // no sign change or no coarse root found
};

/// Coarse root of sigma(rho) = <d, R(x + rho d)> by bracket expansion and an
/// Illinois-type regula falsi. sigma0 is sigma(0), known by the caller.
/// With `converging` set the step rho_init is returned without evaluations.
LineSearchResult line_search(const std::function<double(double)>& sigma,
                             double sigma0, double rho_init,
                             const LineSearchOptions& options = {},
                             bool converging = false);

struct SolveOptions {
  double tol = 1e-10;
  bool relative = true; // test ||R|| <= tol * max(1, ||R(x0)||)
  int max_iter = 200;
  int memory = 20;
  MemoryPolicy policy = MemoryPolicy::Fifo;
  LineSearchOptions line_search;
  int converging_after = 2; // consecutive decreases before rho = 1 is taken
};

struct SolveResult {
  Vec x;
  Vec residual;
  double residual_norm = 0.0;
  int iterations = 0;
  int residual_evaluations = 0;
  int line_search_evaluations = 0;
  int line_search_failures = 0;
  bool converged = false;
};

class NonFiniteResidualError : public std::runtime_error {
 public:
  NonFiniteResidualError(const std::string& what, Vec iterate)
      : std::runtime_error(what), iterate_(std::move(iterate)) {}
  const Vec& iterate() const { return iterate_; }

 private:
  Vec iterate_;
};

/// Quasi-Newton solve of R(x) = 0 with x_{l+1} = x_l + rho_l C_l R(x_l).
SolveResult solve(const ResidualMap& residual, Vec x0, const LinearMap& c0,
                  const SolveOptions& options = {});

} // namespace pgdni::lbfgs
