#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

namespace pgdni {

using Index = Eigen::Index;

/// A parametric problem A(u; p) = b(p), seen only through its residual
/// R(u; p) = b(p) - A(u; p) and the action of a preconditioner inverse.
/// Solvers in this library never access anything else.
class ParametricProblem {
 public:
  virtual ~ParametricProblem() = default;

  virtual Index state_dim() const = 0;
  virtual Index param_dim() const = 0;

  virtual Eigen::VectorXd residual(const Eigen::VectorXd& u,
                                   const Eigen::VectorXd& p) const = 0;

  /// P^{-1}(u_state; p) vec. Must be linear in vec.
  virtual Eigen::VectorXd precond_apply(const Eigen::VectorXd& vec,
                                        const Eigen::VectorXd& p,
                                        const Eigen::VectorXd& u_state) const = 0;

  /// Optional forward action P(u_state; p) vec.
  virtual bool has_precond_forward() const { return false; }
  virtual Eigen::VectorXd precond_forward(const Eigen::VectorXd& vec,
                                          const Eigen::VectorXd& p,
                                          const Eigen::VectorXd& u_state) const;

  /// Whether residual() may be called concurrently.
  virtual bool reentrant() const { return false; }
};

/// Thread-safe count of residual evaluations with a per-phase breakdown.
class ResidualCounter {
 public:
  void add(std::uint64_t n = 1);
  std::uint64_t count() const { return total_.load(); }

  /// Label subsequent increments; the total is unaffected.
  void set_phase(std::string label);
  std::map<std::string, std::uint64_t> phases() const;

 private:
  std::atomic<std::uint64_t> total_{0};
  mutable std::mutex mutex_;
  std::string phase_ = "default";
  std::map<std::string, std::uint64_t> by_phase_;
};

/// Transparent wrapper that counts residual calls. The wrapped problem and
/// the counter must outlive the wrapper.
class CountedProblem final : public ParametricProblem {
 public:
  CountedProblem(const ParametricProblem& inner, ResidualCounter& counter)
      : inner_(inner), counter_(counter) {}

  Index state_dim() const override { return inner_.state_dim(); }
  Index param_dim() const override { return inner_.param_dim(); }
  Eigen::VectorXd residual(const Eigen::VectorXd& u,
                           const Eigen::VectorXd& p) const override {
    counter_.add();
    return inner_.residual(u, p);
  }
  Eigen::VectorXd precond_apply(const Eigen::VectorXd& vec,
                                const Eigen::VectorXd& p,
                                const Eigen::VectorXd& u_state) const override {
    return inner_.precond_apply(vec, p, u_state);
  }
  bool has_precond_forward() const override {
    return inner_.has_precond_forward();
  }
  Eigen::VectorXd precond_forward(const Eigen::VectorXd& vec,
                                  const Eigen::VectorXd& p,
                                  const Eigen::VectorXd& u_state) const override {
    return inner_.precond_forward(vec, p, u_state);
  }
  bool reentrant() const override { return inner_.reentrant(); }

 private:
  const ParametricProblem& inner_;
  ResidualCounter& counter_;
};

inline CountedProblem counted(const ParametricProblem& problem,
                              ResidualCounter& counter) {
  return CountedProblem(problem, counter);
}

} // namespace pgdni
