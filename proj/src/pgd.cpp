#include "pgdni/pgd.hpp"

#include <cmath>
#include <sstream>

namespace pgdni {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Eigen::MatrixXd sample_residuals(const ParametricProblem& problem,
                                 const QuadratureRule& rule,
                                 const MatrixXd& psi, const MatrixXd& lambda,
                                 const MatrixXd& v) {
  if (psi.rows() != rule.size() || psi.cols() != lambda.rows() ||
      lambda.cols() != v.cols() || v.rows() != problem.state_dim()) {
    throw std::invalid_argument("sample_residuals: inconsistent shapes");
  }
  // States u_r(p_z) for all z at once: V Lambda^T Psi^T.
  const MatrixXd states = v * (lambda.transpose() * psi.transpose());
  MatrixXd out(problem.state_dim(), rule.size());
  for (Index z = 0; z < rule.size(); ++z) {
    out.col(z) = problem.residual(states.col(z), rule.point(z));
    if (!out.col(z).allFinite()) {
      std::ostringstream msg;
      msg << "non-finite residual at quadrature point " << z;
      throw PgdError(msg.str());
    }
  }
  return out;
}

MatrixXd assemble_Rlambda(const MatrixXd& samples, const VectorXd& weights,
                          const MatrixXd& psi, const MatrixXd& lambda) {
  return samples * (weights.asDiagonal() * (psi * lambda));
}

MatrixXd assemble_Rlambda(const ParametricProblem& problem,
                          const QuadratureRule& rule, const MatrixXd& psi,
                          const MatrixXd& lambda, const MatrixXd& v) {
  return assemble_Rlambda(sample_residuals(problem, rule, psi, lambda, v),
                          rule.weights, psi, lambda);
}

MatrixXd assemble_Rv(const MatrixXd& samples, const VectorXd& weights,
                     const MatrixXd& psi, const MatrixXd& v) {
  return psi.transpose() * (weights.asDiagonal() * (samples.transpose() * v));
}

MatrixXd assemble_Rv(const ParametricProblem& problem,
                     const QuadratureRule& rule, const MatrixXd& psi,
                     const MatrixXd& lambda, const MatrixXd& v) {
  return assemble_Rv(sample_residuals(problem, rule, psi, lambda, v),
                     rule.weights, psi, v);
}

const MatrixXd& ResidualSampler::samples(const MatrixXd& lambda,
                                         const MatrixXd& v) {
  const bool hit = valid_ && lambda.rows() == lambda_.rows() &&
                   lambda.cols() == lambda_.cols() && v.rows() == v_.rows() &&
                   v.cols() == v_.cols() && lambda == lambda_ && v == v_;
  if (!hit) {
    samples_ = sample_residuals(problem_, rule_, psi_, lambda, v);
    lambda_ = lambda;
    v_ = v;
    valid_ = true;
    ++evaluations_;
  }
  return samples_;
}

// ---------------------------------------------------------------------------

lbfgs::LinearMap build_v_preconditioner(const ParametricProblem& problem,
                                        const QuadratureRule& rule,
                                        const MatrixXd& psi,
                                        const VectorXd& anchor,
                                        const VectorXd& psi_anchor,
                                        const LowRankTensor& state,
                                        const MatrixXd& lambda,
                                        VPrecondMode mode) {
  const Index n = problem.state_dim();
  const Index r = lambda.cols();
  if (mode == VPrecondMode::Anchor) {
    const VectorXd ua = evaluate_at(state, psi_anchor);
    return [&problem, anchor, ua, n, r](const VectorXd& x) {
      VectorXd out(x.size());
      for (Index i = 0; i < r; ++i) {
        out.segment(i * n, n) =
            problem.precond_apply(x.segment(i * n, n), anchor, ua);
      }
      return out;
    };
  }
  const MatrixXd states =
      state.rank() == 0
          ? MatrixXd::Zero(n, rule.size())
          : MatrixXd(state.v * (state.lambda.transpose() * psi.transpose()));
  const MatrixXd lam_z = psi * lambda; // Z x r
  const MatrixXd points = rule.points;
  const VectorXd weights = rule.weights;
  return [&problem, points, weights, states, lam_z, n, r](const VectorXd& x) {
    VectorXd out = VectorXd::Zero(x.size());
    for (Index z = 0; z < weights.size(); ++z) {
      const VectorXd p = points.row(z).transpose();
      for (Index i = 0; i < r; ++i) {
        const double c = weights(z) * lam_z(z, i) * lam_z(z, i);
        if (c != 0.0) {
          out.segment(i * n, n) +=
              c * problem.precond_apply(x.segment(i * n, n), p, states.col(z));
        }
      }
    }
    return out;
  };
}

VectorXd lambda_scalings(const ParametricProblem& problem,
                         const VectorXd& anchor,
                         const VectorXd& state_at_anchor, const MatrixXd& v) {
  VectorXd alpha(v.cols());
  for (Index i = 0; i < v.cols(); ++i) {
    const VectorXd vi = v.col(i);
    const double vv = vi.squaredNorm();
    if (!(vv > 0.0)) {
      throw DegeneratePreconditionerError("lambda preconditioner: zero column");
    }
    double a = 0.0;
    if (problem.has_precond_forward()) {
      a = vi.dot(problem.precond_forward(vi, anchor, state_at_anchor)) / vv;
    } else {
      const double inv = vi.dot(problem.precond_apply(vi, anchor, state_at_anchor)) / vv;
      a = inv > 0.0 ? 1.0 / inv : -1.0;
    }
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw DegeneratePreconditionerError(
          "lambda preconditioner: non-positive scaling alpha");
    }
    alpha(i) = a;
  }
  return alpha;
}

lbfgs::LinearMap build_lambda_preconditioner(const ParametricProblem& problem,
                                             const VectorXd& anchor,
                                             const VectorXd& state_at_anchor,
                                             const MatrixXd& v,
                                             const Eigen::LLT<MatrixXd>& gram,
                                             LambdaPrecondMode mode) {
  const Index r = v.cols();
  VectorXd inv_alpha = VectorXd::Ones(r);
  if (mode == LambdaPrecondMode::Anchor) {
    inv_alpha = lambda_scalings(problem, anchor, state_at_anchor, v).cwiseInverse();
  }
  return [gram, inv_alpha, r](const VectorXd& x) {
    const Index m = x.size() / r;
    MatrixXd block = Eigen::Map<const MatrixXd>(x.data(), m, r);
    MatrixXd solved = gram.solve(block) * inv_alpha.asDiagonal();
    return VectorXd(Eigen::Map<const VectorXd>(solved.data(), solved.size()));
  };
}

// ---------------------------------------------------------------------------

double PgdConfig::improved_stagnation(int rank) const {
  return std::max(std::pow(10.0, -(rank + 1)), improved_stagnation_floor);
}

void PgdConfig::validate() const {
  if (max_rank < 1 || basic_max_alt_iters < 1 || improved_max_alt_iters < 1) {
    throw std::invalid_argument("PgdConfig: ranks and iteration counts must be >= 1");
  }
  if (!(basic_stagnation_tol > 0.0) || !(improved_stagnation_floor > 0.0) ||
      !(bfgs.tol > 0.0) || outer_tol < 0.0) {
    throw std::invalid_argument("PgdConfig: tolerances must be positive");
  }
}

OrthResult orth_gram(const MatrixXd& lambda, const Eigen::LLT<MatrixXd>& gram) {
  const MatrixXd lt = gram.matrixU(); // L^T
  OrthResult y = orth_columns(lt * lambda);
  OrthResult out;
  out.basis = gram.matrixU().solve(y.basis);
  out.mixing = std::move(y.mixing);
  return out;
}

namespace {

using Vec = VectorXd;

Vec flatten(const MatrixXd& m) {
  return Eigen::Map<const Vec>(m.data(), m.size());
}

MatrixXd unflatten(const Vec& x, Index rows, Index cols) {
  return Eigen::Map<const MatrixXd>(x.data(), rows, cols);
}

// Shared per-run data.
struct Setup {
  const ParametricProblem& problem;
  const QuadratureRule& rule;
  MatrixXd psi;
  MatrixXd gram;
  Eigen::LLT<MatrixXd> gram_llt;
  VectorXd anchor;
  VectorXd psi_anchor;

  Setup(const ParametricProblem& problem_, const QuadratureRule& rule_,
        const StochasticBasis& basis, const PgdConfig& config)
      : problem(problem_), rule(rule_) {
    if (basis.dim() != problem.param_dim() || rule.dim() != problem.param_dim()) {
      throw std::invalid_argument("pgd: parameter dimensions disagree");
    }
    psi = eval_matrix(basis, rule);
    gram = pgdni::gram(psi, rule.weights);
    gram_llt.compute(gram);
    anchor = config.anchor ? *config.anchor : basis.midpoint();
    psi_anchor = basis.evaluate(anchor);
  }

  Index m() const { return psi.cols(); }
  Index n() const { return problem.state_dim(); }
  Index z() const { return rule.size(); }

  VectorXd state_at_anchor(const MatrixXd& lambda, const MatrixXd& v) const {
    if (lambda.cols() == 0) {
      return VectorXd::Zero(n());
    }
    return v * (lambda.transpose() * psi_anchor);
  }

  lbfgs::LinearMap v_precond(const MatrixXd& lambda_full, const MatrixXd& v_full,
                             const MatrixXd& block, VPrecondMode mode) const {
    return build_v_preconditioner(problem, rule, psi, anchor, psi_anchor,
                                  LowRankTensor(lambda_full, v_full), block, mode);
  }

  double q_norm(const VectorXd& lambda) const {
    return std::sqrt(std::max(0.0, lambda.dot(gram * lambda)));
  }
};

// Relative change ||A - B|| / ||A|| in the Q (x) U norm.
double relative_change(const MatrixXd& la, const MatrixXd& va,
                       const MatrixXd& lb, const MatrixXd& vb,
                       const MatrixXd& gram) {
  MatrixXd l(la.rows(), la.cols() + lb.cols());
  MatrixXd v(va.rows(), va.cols() + vb.cols());
  l << la, lb;
  v << va, -vb;
  const double diff = weighted_norm(LowRankTensor(l, v), gram);
  const double base = weighted_norm(LowRankTensor(la, va), gram);
  if (base == 0.0) {
    return diff == 0.0 ? 0.0 : 1.0;
  }
  return diff / base;
}

lbfgs::SolveResult run_bfgs(const lbfgs::ResidualMap& residual, Vec x0,
                            const lbfgs::LinearMap& c0,
                            const lbfgs::SolveOptions& options, int rank,
                            int sweep, const char* block) {
  try {
    return lbfgs::solve(residual, std::move(x0), c0, options);
  } catch (const std::exception& e) {
    std::ostringstream msg;
    msg << "pgd: BFGS failure at rank " << rank << ", sweep " << sweep
        << ", block " << block << ": " << e.what();
    throw PgdError(msg.str());
  }
}

} // namespace

std::vector<RankResult> basic_pgd(const ParametricProblem& problem,
                                  const QuadratureRule& rule,
                                  const StochasticBasis& basis,
                                  const PgdConfig& config) {
  config.validate();
  const Setup s(problem, rule, basis, config);
  const Index m = s.m();
  const Index n = s.n();
  const auto z_calls = static_cast<std::uint64_t>(s.z());

  std::vector<RankResult> results;
  MatrixXd big_lambda(m, 0);
  MatrixXd big_v(n, 0);
  std::uint64_t calls = 0;

  for (int rank = 1; rank <= config.max_rank; ++rank) {
    RankResult result;
    result.rank = rank;
    VectorXd lam = VectorXd::Constant(m, config.lambda_init);
    VectorXd v = VectorXd::Constant(n, config.v_init);
    MatrixXd lam_full(m, rank);
    MatrixXd v_full(n, rank);
    lam_full.leftCols(rank - 1) = big_lambda;
    v_full.leftCols(rank - 1) = big_v;
    // A vanishing factor beyond rank one means the previous rank already
    // solves the discrete problem; the driver then stops adding ranks.
    bool vanished = false;

    for (int sweep = 1; sweep <= config.basic_max_alt_iters; ++sweep) {
      const VectorXd lam_prev = lam;
      const VectorXd v_prev = v;

      const double ln = s.q_norm(lam);
      if (!(ln > 0.0)) {
        if (rank == 1) {
          throw PgdError("basic_pgd: lambda vanished");
        }
        vanished = true;
        break;
      }
      lam /= ln;
      lam_full.col(rank - 1) = lam;

      // v-block: R_lambda(v) = sum_z w_z lambda(p_z) R(u_r(p_z) + lambda(p_z) v).
      v_full.col(rank - 1) = v;
      const auto c0v = s.v_precond(lam_full, v_full, lam, config.v_precond);
      auto rv_map = [&](const Vec& x) {
        v_full.col(rank - 1) = x;
        const MatrixXd samples =
            sample_residuals(problem, rule, s.psi, lam_full, v_full);
        return Vec(samples * (rule.weights.asDiagonal() * (s.psi * lam)));
      };
      const auto vres = run_bfgs(rv_map, v, c0v, config.bfgs, rank, sweep, "v");
      v = vres.x;
      calls += z_calls * static_cast<std::uint64_t>(vres.residual_evaluations);
      result.records.push_back(SweepRecord{rank, sweep, 'v', vres.iterations,
                                           vres.residual_evaluations, calls,
                                           vres.converged, 0.0});

      const double vn = v.norm();
      if (!(vn > 0.0)) {
        if (rank == 1) {
          throw PgdError("basic_pgd: v vanished");
        }
        vanished = true;
        break;
      }
      v /= vn;
      v_full.col(rank - 1) = v;

      // lambda-block: R_v(lambda) = sum_z w_z psi_z <R(...), v>.
      const VectorXd ua2 = s.state_at_anchor(lam_full, v_full);
      const auto c0l = build_lambda_preconditioner(problem, s.anchor, ua2, v,
                                                   s.gram_llt, config.lambda_precond);
      auto rl_map = [&](const Vec& x) {
        lam_full.col(rank - 1) = x;
        const MatrixXd samples =
            sample_residuals(problem, rule, s.psi, lam_full, v_full);
        return Vec(s.psi.transpose() *
                   (rule.weights.asDiagonal() * (samples.transpose() * v)));
      };
      const auto lres = run_bfgs(rl_map, lam, c0l, config.bfgs, rank, sweep, "lambda");
      lam = lres.x;
      lam_full.col(rank - 1) = lam;
      calls += z_calls * static_cast<std::uint64_t>(lres.residual_evaluations);

      const double stag = relative_change(lam, v, lam_prev, v_prev, s.gram);
      result.records.push_back(SweepRecord{rank, sweep, 'l', lres.iterations,
                                           lres.residual_evaluations, calls,
                                           lres.converged, stag});
      result.sweeps = sweep;
      if (config.on_sweep) {
        config.on_sweep(LowRankTensor(lam_full, v_full), rank, sweep);
      }
      if (stag <= config.basic_stagnation_tol) {
        result.stagnated = true;
        break;
      }
    }

    if (vanished) {
      break;
    }
    big_lambda = lam_full;
    big_v = v_full;
    result.u = LowRankTensor(big_lambda, big_v);
    result.residual_calls = calls;
    const double total = weighted_norm(result.u, s.gram);
    const double corr = s.q_norm(lam) * v.norm();
    result.correction = total > 0.0 ? corr / total : 0.0;
    results.push_back(std::move(result));
    if (config.outer_tol > 0.0 && results.back().correction <= config.outer_tol) {
      break;
    }
  }
  return results;
}

std::vector<RankResult> improved_pgd(const ParametricProblem& problem,
                                     const QuadratureRule& rule,
                                     const StochasticBasis& basis,
                                     const PgdConfig& config) {
  config.validate();
  const Setup s(problem, rule, basis, config);
  const Index m = s.m();
  const Index n = s.n();
  const auto z_calls = static_cast<std::uint64_t>(s.z());

  std::vector<RankResult> results;
  MatrixXd prev_lambda(m, 0);
  MatrixXd prev_v(n, 0);
  std::uint64_t calls = 0;

  for (int rank = 1; rank <= config.max_rank; ++rank) {
    RankResult result;
    result.rank = rank;
    MatrixXd lam(m, rank);
    MatrixXd v(n, rank);
    lam << prev_lambda, VectorXd::Constant(m, config.lambda_init);
    v << prev_v, VectorXd::Constant(n, config.v_init);
    const double tol = config.improved_stagnation(rank);

    for (int sweep = 1; sweep <= config.improved_max_alt_iters; ++sweep) {
      const MatrixXd lam_prev = lam;
      const MatrixXd v_prev = v;

      OrthResult ol = orth_gram(lam, s.gram_llt);
      lam = std::move(ol.basis);
      if (config.compensate_orth) {
        v = v * ol.mixing.transpose();
      }

      // V-block, R_Lambda(V) = (sum_z w_z R_z psi_z^T) Lambda.
      const auto c0v = s.v_precond(lam, v, lam, config.v_precond);
      const MatrixXd weighted_psi_lam = rule.weights.asDiagonal() * (s.psi * lam);
      auto rv_map = [&](const Vec& x) {
        const MatrixXd vx = unflatten(x, n, rank);
        const MatrixXd samples = sample_residuals(problem, rule, s.psi, lam, vx);
        return flatten(samples * weighted_psi_lam);
      };
      const auto vres = run_bfgs(rv_map, flatten(v), c0v, config.bfgs, rank, sweep, "V");
      v = unflatten(vres.x, n, rank);
      calls += z_calls * static_cast<std::uint64_t>(vres.residual_evaluations);
      result.records.push_back(SweepRecord{rank, sweep, 'v', vres.iterations,
                                           vres.residual_evaluations, calls,
                                           vres.converged, 0.0});

      OrthResult ov = orth_columns(v);
      v = std::move(ov.basis);
      if (config.compensate_orth) {
        lam = lam * ov.mixing.transpose();
      }

      // Lambda-block, R_V(Lambda) = (sum_z w_z psi_z R_z^T) V.
      const VectorXd ua = s.state_at_anchor(lam, v);
      const auto c0l = build_lambda_preconditioner(problem, s.anchor, ua, v,
                                                   s.gram_llt, config.lambda_precond);
      auto rl_map = [&](const Vec& x) {
        const MatrixXd lx = unflatten(x, m, rank);
        const MatrixXd samples = sample_residuals(problem, rule, s.psi, lx, v);
        return flatten(s.psi.transpose() *
                       (rule.weights.asDiagonal() * (samples.transpose() * v)));
      };
      const auto lres = run_bfgs(rl_map, flatten(lam), c0l, config.bfgs, rank, sweep, "Lambda");
      lam = unflatten(lres.x, m, rank);
      calls += z_calls * static_cast<std::uint64_t>(lres.residual_evaluations);

      const double stag = relative_change(lam, v, lam_prev, v_prev, s.gram);
      result.records.push_back(SweepRecord{rank, sweep, 'l', lres.iterations,
                                           lres.residual_evaluations, calls,
                                           lres.converged, stag});
      result.sweeps = sweep;
      if (config.on_sweep) {
        config.on_sweep(LowRankTensor(lam, v), rank, sweep);
      }
      if (stag <= tol) {
        result.stagnated = true;
        break;
      }
    }

    result.u = LowRankTensor(lam, v);
    result.residual_calls = calls;
    result.correction = relative_change(lam, v, prev_lambda, prev_v, s.gram);
    prev_lambda = lam;
    prev_v = v;
    results.push_back(std::move(result));
    if (config.outer_tol > 0.0 && results.back().correction <= config.outer_tol) {
      break;
    }
  }
  return results;
}

} // namespace pgdni
