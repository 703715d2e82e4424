#include "pgdni/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace pgdni::lbfgs {

BfgsState::BfgsState(LinearMap c0, int memory, MemoryPolicy policy,
                     double curvature_guard)
    : c0_(std::move(c0)), memory_(memory), policy_(policy),
      guard_(curvature_guard) {
  if (memory_ < 1) {
    throw std::invalid_argument("BfgsState: memory must be >= 1");
  }
}

Vec BfgsState::apply_inverse(const Vec& vec) const {
  Vec out = c0_(vec);
  // Each correction acts on the input vector: two inner products and a
  // combination of three vectors.
  for (const auto& u : queue_) {
    const double tx = u.t.dot(vec);
    const double sx = u.s.dot(vec);
    const double a = (u.zt + u.zs) / (u.zt * u.zt);
    out += (a * tx - sx / u.zt) * u.t - (tx / u.zt) * u.s;
  }
  return out;
}

bool BfgsState::record_update(const Vec& t, const Vec& z) {
  const double zt = z.dot(t);
  if (!(zt > guard_ * z.norm() * t.norm())) {
    ++skipped_;
    return false;
  }
  if (static_cast<int>(queue_.size()) >= memory_) {
    if (policy_ == MemoryPolicy::Restart) {
      queue_.clear();
    } else {
      queue_.pop_front();
    }
  }
  Vec s = apply_inverse(z);
  const double zs = z.dot(s);
  queue_.push_back(Update{t, std::move(s), zt, zs});
  return true;
}

LineSearchResult line_search(const std::function<double(double)>& sigma,
                             double sigma0, double rho_init,
                             const LineSearchOptions& options, bool converging) {
  LineSearchResult res;
  res.rho = rho_init;
  if (converging) {
    return res;
  }
  const double target = options.eta * std::abs(sigma0);
  double best_rho = rho_init;
  double best_abs = std::numeric_limits<double>::infinity();
  auto eval = [&](double rho) {
    const double s = sigma(rho);
    ++res.evaluations;
    if (std::abs(s) < best_abs) {
      best_abs = std::abs(s);
      best_rho = rho;
    }
    return s;
  };
  auto same_side = [&](double s) { return (s > 0.0) == (sigma0 > 0.0); };

  double rho = rho_init;
  double s = eval(rho);
  if (std::abs(s) <= target) {
    res.rho = rho;
    return res;
  }
  double lo = 0.0;
  double slo = sigma0;
  double hi = rho;
  double shi = s;
  if (same_side(s)) {
    bool bracketed = false;
    lo = rho;
    slo = s;
    for (int k = 0; k < options.max_expansions; ++k) {
      rho *= 2.0;
      s = eval(rho);
      if (std::abs(s) <= target) {
        res.rho = rho;
        return res;
      }
      if (!same_side(s)) {
        hi = rho;
        shi = s;
        bracketed = true;
        break;
      }
      lo = rho;
      slo = s;
    }
    if (!bracketed) {
      res.rho = best_rho;
      res.bracket_failed = true;
      return res;
    }
  }
  // Illinois regula falsi on [lo, hi], step clamped to the inner 80% so the
  // bracket shrinks by at least 10% per evaluation.
  int retained = 0; // +1: lo kept last time, -1: hi kept last time
  for (int k = 0; k < options.max_iterations; ++k) {
    double fl = slo;
    double fh = shi;
    if (retained >= 2) {
      fl *= 0.5;
    } else if (retained <= -2) {
      fh *= 0.5;
    }
    double frac = fl / (fl - fh);
    frac = std::clamp(frac, 0.1, 0.9);
    rho = lo + frac * (hi - lo);
    s = eval(rho);
    if (std::abs(s) <= target) {
      res.rho = rho;
      return res;
    }
    if (same_side(s)) {
      lo = rho;
      slo = s;
      retained = retained < 0 ? retained - 1 : -1;
    } else {
      hi = rho;
      shi = s;
      retained = retained > 0 ? retained + 1 : 1;
    }
  }
  res.rho = best_rho;
  res.bracket_failed = true;
  return res;
}

namespace {

void require_finite(const Vec& r, const Vec& x) {
  if (!r.allFinite()) {
    throw NonFiniteResidualError("lbfgs: non-finite residual", x);
  }
}

} // namespace

SolveResult solve(const ResidualMap& residual, Vec x0, const LinearMap& c0,
                  const SolveOptions& options) {
  if (!(options.tol > 0.0)) {
    throw std::invalid_argument("lbfgs::solve: tolerance must be positive");
  }
  SolveResult out;
  Vec x = std::move(x0);
  Vec r = residual(x);
  ++out.residual_evaluations;
  require_finite(r, x);
  double rnorm = r.norm();
  const double threshold =
      options.relative ? options.tol * std::max(1.0, rnorm) : options.tol;

  BfgsState state(c0, options.memory, options.policy);
  int decreases = 0;
  if (rnorm > threshold) {
    Vec d = state.apply_inverse(r);
    for (int it = 0; it < options.max_iter; ++it) {
      double s0 = d.dot(r);
      if (!(s0 > 0.0)) {
        // Lost descent: drop the history and restart from C_0.
        state.clear();
        d = state.apply_inverse(r);
        s0 = d.dot(r);
        if (!(s0 > 0.0)) {
          d = r;
          s0 = r.squaredNorm();
        }
        decreases = 0;
      }
      // Trial residuals, reused for the accepted step.
      std::vector<std::pair<double, Vec>> trials;
      auto sigma = [&](double rho) {
        Vec xt = x + rho * d;
        Vec rt = residual(xt);
        ++out.residual_evaluations;
        ++out.line_search_evaluations;
        require_finite(rt, xt);
        const double val = d.dot(rt);
        trials.emplace_back(rho, std::move(rt));
        return val;
      };
      double rho = 1.0;
      bool accepted = false;
      if (decreases >= options.converging_after) {
        const double s1 = sigma(1.0);
        (void)s1;
        if (trials.back().second.norm() < rnorm) {
          accepted = true;
        } else {
          decreases = 0;
        }
      }
      if (!accepted) {
        // sigma(1) may already be cached from the converging probe.
        auto cached = [&](double q) {
          for (const auto& [rq, rv] : trials) {
            if (rq == q) {
              return d.dot(rv);
            }
          }
          return sigma(q);
        };
        const auto ls = line_search(cached, s0, 1.0, options.line_search);
        rho = ls.rho;
        if (ls.bracket_failed) {
          ++out.line_search_failures;
        }
      }
      Vec r_new;
      bool found = false;
      for (auto& [rq, rv] : trials) {
        if (rq == rho) {
          r_new = std::move(rv);
          found = true;
          break;
        }
      }
      if (!found) {
        sigma(rho);
        r_new = std::move(trials.back().second);
      }
      const Vec t = rho * d;
      x += t;
      const Vec z = r - r_new;
      r = std::move(r_new);
      const double new_norm = r.norm();
      decreases = new_norm < rnorm ? decreases + 1 : 0;
      rnorm = new_norm;
      ++out.iterations;
      if (rnorm <= threshold) {
        out.converged = true;
        break;
      }
      state.record_update(t, z);
      d = state.apply_inverse(r);
    }
  } else {
    out.converged = true;
  }
  out.x = std::move(x);
  out.residual = std::move(r);
  out.residual_norm = rnorm;
  return out;
}

} // namespace pgdni::lbfgs
