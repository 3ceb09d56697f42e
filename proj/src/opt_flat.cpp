#include "irslab/opt_flat.hpp"

#include <chrono>
#include <cmath>

namespace irslab {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Objective in the transformed domain: log2 det(I + S S^H / sigma2) with
// S = H' + sum_m alpha_m r_m t'_m^H. Equals capacity(effective_channel, Q).
double transformed_objective(const ComplexMatrix& s, double sigma2) {
  const Eigen::Index n_r = s.rows();
  return log2_det_hpd(ComplexMatrix::Identity(n_r, n_r) + s * s.adjoint() / sigma2);
}

struct SubproblemParts {
  ComplexMatrix a;   // A_m, Hermitian PD
  ComplexVector r;   // r_m
  ComplexVector b;   // S_minus * t'_m; B_m = r b^H / sigma2
  Complex lambda;
  bool diagonalizable;
};

// A_m, B_m and lambda = tr(A_m^-1 B_m) from the running sum with term m removed.
// lambda needs a single HPD solve: B_m = (1/sigma2) r b^H, so
// tr(A^-1 B) = (1/sigma2) b^H (A^-1 r).
SubproblemParts build_parts(const ComplexMatrix& s_minus, const ComplexVector& r_m,
                            const ComplexVector& tp_m, double sigma2,
                            const ToleranceConfig& tol) {
  const Eigen::Index n_r = s_minus.rows();
  SubproblemParts p;
  p.a = ComplexMatrix::Identity(n_r, n_r) + s_minus * s_minus.adjoint() / sigma2 +
        (tp_m.squaredNorm() / sigma2) * (r_m * r_m.adjoint());
  p.a = ((p.a + p.a.adjoint()) / 2.0).eval();
  p.r = r_m;
  p.b = s_minus * tp_m;
  const ComplexVector x = hpd_solve(p.a, r_m);
  p.lambda = p.b.dot(x) / sigma2;  // b^H x / sigma2
  const double inv_b_norm = x.norm() * p.b.norm() / sigma2;  // ||A^-1 B||_F
  p.diagonalizable = std::abs(p.lambda) > tol.zero_tol * inv_b_norm;
  return p;
}

Complex optimal_alpha(const SubproblemParts& p) {
  if (!p.diagonalizable) return Complex(1.0, 0.0);
  return std::conj(p.lambda) / std::abs(p.lambda);
}

}  // namespace

TransformedChannels transformed_channels(const FlatChannelSet& ch, const Covariance& q) {
  const HermitianEig eig = hermitian_eig(q.Q);
  RealVector sq = eig.eigenvalues;
  for (Eigen::Index i = 0; i < sq.size(); ++i) sq(i) = std::sqrt(std::max(sq(i), 0.0));
  const ComplexMatrix basis = eig.eigenvectors * sq.asDiagonal();
  return TransformedChannels{ch.H * basis, ch.T * basis};
}

RankOneSubproblem build_subproblem(int m, const TransformedChannels& tc,
                                   const FlatChannelSet& ch, const Reflection& refl,
                                   double sigma2, const ToleranceConfig& tol) {
  require(m >= 0 && m < ch.m(), "build_subproblem: element index out of range");
  require(refl.size() == ch.m(), "build_subproblem: reflection size must equal M");

  ComplexMatrix s_minus = tc.h_prime;
  for (int i = 0; i < ch.m(); ++i) {
    if (i == m) continue;
    s_minus += refl.alphas(i) * ch.R.col(i) * tc.t_prime.row(i);
  }
  const ComplexVector tp_m = tc.t_prime.row(m).adjoint();
  const SubproblemParts p = build_parts(s_minus, ch.R.col(m), tp_m, sigma2, tol);

  RankOneSubproblem sp;
  sp.A = p.a;
  sp.B = (p.r * p.b.adjoint()) / sigma2;
  sp.lambda = p.lambda;
  sp.diagonalizable = p.diagonalizable;
  return sp;
}

Complex solve_subproblem(const RankOneSubproblem& sp) {
  if (!sp.diagonalizable) return Complex(1.0, 0.0);
  return std::conj(sp.lambda) / std::abs(sp.lambda);
}

double subproblem_objective(const RankOneSubproblem& sp, Complex alpha) {
  const ComplexMatrix m = sp.A + alpha * sp.B + std::conj(alpha) * sp.B.adjoint();
  return log2_det_hpd((m + m.adjoint()) / 2.0);
}

double objective(const FlatChannelSet& ch, const Reflection& refl, const Covariance& q,
                 double sigma2) {
  require(refl.is_unit_modulus(), "objective: reflection must be unit-modulus");
  return capacity(effective_channel(ch, refl), q, sigma2);
}

namespace {

OptReport run_alternation(const FlatChannelSet& ch, double p_budget, double sigma2,
                          const AlgoConfig& cfg, Reflection refl, Covariance q,
                          double start_objective, int restarts_evaluated,
                          const StepObserver& observer, Clock::time_point t0) {
  const ToleranceConfig tol;
  OptReport report;
  report.restarts_evaluated = restarts_evaluated;
  report.rate_trace.push_back(start_objective);

  const int m_count = ch.m();
  double prev = start_objective;
  for (int iter = 1; iter <= cfg.max_outer_iters; ++iter) {
    const TransformedChannels tc = transformed_channels(ch, q);
    ComplexMatrix s = tc.h_prime;
    for (int i = 0; i < m_count; ++i)
      s += refl.alphas(i) * ch.R.col(i) * tc.t_prime.row(i);

    for (int m = 0; m < m_count; ++m) {
      const ComplexVector tp_m = tc.t_prime.row(m).adjoint();
      const ComplexMatrix s_minus = s - refl.alphas(m) * ch.R.col(m) * tc.t_prime.row(m);
      const SubproblemParts p = build_parts(s_minus, ch.R.col(m), tp_m, sigma2, tol);
      refl.alphas(m) = optimal_alpha(p);
      s = s_minus + refl.alphas(m) * ch.R.col(m) * tc.t_prime.row(m);
      if (observer) observer(transformed_objective(s, sigma2));
    }

    const WaterfillResult wf =
        waterfill(effective_channel(ch, refl), p_budget, sigma2, tol);
    q = wf.Q;
    const double obj = wf.rate;
    if (observer) observer(obj);

    report.rate_trace.push_back(obj);
    report.outer_iters = iter;
    if (obj - prev <= cfg.epsilon * std::max(prev, 1e-12)) break;
    prev = obj;
  }

  report.final_reflection = std::move(refl);
  report.final_Q = std::move(q);
  report.wall_ms = elapsed_ms(t0);
  return report;
}

}  // namespace

OptReport optimize(const FlatChannelSet& ch, double p_budget, double sigma2,
                   const AlgoConfig& cfg, const StepObserver& observer) {
  cfg.validate();
  const auto t0 = Clock::now();
  Rng rng = Rng(cfg.seed).derive(0x1A1u);

  Reflection best;
  Covariance best_q;
  double best_rate = -1.0;
  for (int l = 0; l < cfg.restarts; ++l) {
    Reflection cand{ComplexVector(ch.m())};
    for (int m = 0; m < ch.m(); ++m) cand.alphas(m) = std::polar(1.0, rng.uniform_phase());
    const WaterfillResult wf = waterfill(effective_channel(ch, cand), p_budget, sigma2);
    if (wf.rate > best_rate) {
      best_rate = wf.rate;
      best = std::move(cand);
      best_q = wf.Q;
    }
  }
  return run_alternation(ch, p_budget, sigma2, cfg, std::move(best), std::move(best_q),
                         best_rate, cfg.restarts, observer, t0);
}

OptReport optimize_from(const FlatChannelSet& ch, double p_budget, double sigma2,
                        const AlgoConfig& cfg, const Reflection& init,
                        const StepObserver& observer) {
  cfg.validate();
  require(init.size() == ch.m(), "optimize_from: reflection size must equal M");
  const auto t0 = Clock::now();
  const WaterfillResult wf = waterfill(effective_channel(ch, init), p_budget, sigma2);
  return run_alternation(ch, p_budget, sigma2, cfg, init, wf.Q, wf.rate, 0, observer, t0);
}

OptReport optimize_fixed_q(const FlatChannelSet& ch, const Covariance& q_fixed,
                           double sigma2, const AlgoConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  const ToleranceConfig tol;
  Rng rng = Rng(cfg.seed).derive(0x1A1u);

  const TransformedChannels tc = transformed_channels(ch, q_fixed);
  const int m_count = ch.m();

  Reflection refl;
  double best_rate = -1.0;
  for (int l = 0; l < cfg.restarts; ++l) {
    Reflection cand{ComplexVector(m_count)};
    for (int m = 0; m < m_count; ++m) cand.alphas(m) = std::polar(1.0, rng.uniform_phase());
    const double rate = capacity(effective_channel(ch, cand), q_fixed, sigma2);
    if (rate > best_rate) {
      best_rate = rate;
      refl = std::move(cand);
    }
  }

  OptReport report;
  report.restarts_evaluated = cfg.restarts;
  report.rate_trace.push_back(best_rate);

  ComplexMatrix s = tc.h_prime;
  for (int i = 0; i < m_count; ++i) s += refl.alphas(i) * ch.R.col(i) * tc.t_prime.row(i);

  double prev = best_rate;
  for (int iter = 1; iter <= cfg.max_outer_iters; ++iter) {
    for (int m = 0; m < m_count; ++m) {
      const ComplexVector tp_m = tc.t_prime.row(m).adjoint();
      const ComplexMatrix s_minus = s - refl.alphas(m) * ch.R.col(m) * tc.t_prime.row(m);
      const SubproblemParts p = build_parts(s_minus, ch.R.col(m), tp_m, sigma2, tol);
      refl.alphas(m) = optimal_alpha(p);
      s = s_minus + refl.alphas(m) * ch.R.col(m) * tc.t_prime.row(m);
    }
    const double obj = transformed_objective(s, sigma2);
    report.rate_trace.push_back(obj);
    report.outer_iters = iter;
    if (obj - prev <= cfg.epsilon * std::max(prev, 1e-12)) break;
    prev = obj;
  }

  report.final_reflection = std::move(refl);
  report.final_Q = q_fixed;
  report.wall_ms = elapsed_ms(t0);
  return report;
}

}  // namespace irslab
