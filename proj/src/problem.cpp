#include "pgdni/problem.hpp"

namespace pgdni {

Eigen::VectorXd ParametricProblem::precond_forward(const Eigen::VectorXd&,
                                                   const Eigen::VectorXd&,
                                                   const Eigen::VectorXd&) const {
  throw std::logic_error("problem does not expose a forward preconditioner");
}

void ResidualCounter::add(std::uint64_t n) {
  total_.fetch_add(n);
  std::lock_guard lock(mutex_);
  by_phase_[phase_] += n;
}

void ResidualCounter::set_phase(std::string label) {
  std::lock_guard lock(mutex_);
  phase_ = std::move(label);
}

std::map<std::string, std::uint64_t> ResidualCounter::phases() const {
  std::lock_guard lock(mutex_);
  return by_phase_;
}

} // namespace pgdni
