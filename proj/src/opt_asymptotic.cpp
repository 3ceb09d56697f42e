#include "irslab/opt_asymptotic.hpp"

#include <chrono>
#include <cmath>

namespace irslab {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Reflection random_phases(int m, Rng& rng) {
  Reflection r{ComplexVector(m)};
  for (int i = 0; i < m; ++i) r.alphas(i) = std::polar(1.0, rng.uniform_phase());
  return r;
}

Complex phase_of(Complex z) {
  const double a = std::abs(z);
  return a > 0.0 ? z / a : Complex(1.0, 0.0);  // arg(0) treated as 0
}

// One cyclic sweep of the total-power updates alpha_m = exp(j arg(r_m^H D_-m t_m)).
// D is the running effective channel and is updated in place.
void power_sweep(const FlatChannelSet& ch, Reflection& refl, ComplexMatrix& d) {
  for (int m = 0; m < ch.m(); ++m) {
    const ComplexVector r_m = ch.R.col(m);
    const ComplexVector t_m = ch.T.row(m).adjoint();
    const ComplexMatrix d_minus = d - refl.alphas(m) * r_m * ch.T.row(m);
    const Complex beta = r_m.dot(d_minus * t_m);  // r_m^H D_-m t_m
    refl.alphas(m) = phase_of(beta);
    d = d_minus + refl.alphas(m) * r_m * ch.T.row(m);
  }
}

Reflection power_max_engine(const FlatChannelSet& ch, const AlgoConfig& cfg,
                            Reflection refl, int* sweeps_done) {
  ComplexMatrix d = effective_channel(ch, refl);
  double prev = d.squaredNorm();
  int sweeps = 0;
  for (int iter = 1; iter <= cfg.max_outer_iters; ++iter) {
    power_sweep(ch, refl, d);
    sweeps = iter;
    const double cur = d.squaredNorm();
    if (cur - prev <= cfg.epsilon * std::max(prev, 1e-30)) break;
    prev = cur;
  }
  if (sweeps_done) *sweeps_done = sweeps;
  return refl;
}

}  // namespace

OptReport low_snr_optimize(const FlatChannelSet& ch, double p_budget, double sigma2,
                           const AlgoConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  Rng rng = Rng(cfg.seed).derive(0x1A1u);

  // L restarts scored by the strongest eigenchannel power.
  Reflection refl;
  double best = -1.0;
  for (int l = 0; l < cfg.restarts; ++l) {
    Reflection cand = random_phases(ch.m(), rng);
    const Svd dec = svd(effective_channel(ch, cand));
    const double s1 = dec.singular_values.size() ? dec.singular_values(0) : 0.0;
    if (s1 * s1 > best) {
      best = s1 * s1;
      refl = std::move(cand);
    }
  }

  ComplexMatrix h_tilde = effective_channel(ch, refl);
  Svd dec = svd(h_tilde);
  ComplexVector x = dec.u.col(0);
  ComplexVector y = dec.v.col(0);
  double gain = best;  // [Lambda]_max^2

  auto rate_of = [&](double g) { return std::log2(1.0 + p_budget * g / sigma2); };

  OptReport report;
  report.restarts_evaluated = cfg.restarts;
  report.rate_trace.push_back(rate_of(gain));

  double prev = gain;
  for (int iter = 1; iter <= cfg.max_outer_iters; ++iter) {
    // Phase alignment for fixed (x, y): align every reflected term with the
    // direct term x^H H y.
    const Complex direct = (x.adjoint() * ch.H * y)(0);
    const ComplexVector xr = ch.R.adjoint() * x;  // entries conj([x^H R]_m)
    const ComplexVector ty = ch.T * y;            // entries [T y]_m
    for (int m = 0; m < ch.m(); ++m) {
      const Complex coupling = std::conj(xr(m)) * ty(m);
      refl.alphas(m) = phase_of(direct) * std::conj(phase_of(coupling));
    }
    h_tilde = effective_channel(ch, refl);

    // Refresh (x, y) from the strongest singular pair.
    dec = svd(h_tilde);
    x = dec.u.col(0);
    y = dec.v.col(0);
    gain = dec.singular_values(0) * dec.singular_values(0);

    report.rate_trace.push_back(rate_of(gain));
    report.outer_iters = iter;
    if (gain - prev <= cfg.epsilon * std::max(prev, 1e-30)) break;
    prev = gain;
  }

  report.final_reflection = std::move(refl);
  report.final_Q = Covariance{p_budget * (y * y.adjoint()), p_budget};
  report.wall_ms = elapsed_ms(t0);
  return report;
}

Reflection power_max_optimize(const FlatChannelSet& ch, const AlgoConfig& cfg) {
  cfg.validate();
  Rng rng = Rng(cfg.seed).derive(0x1A1u);
  Reflection refl;
  double best = -1.0;
  for (int l = 0; l < cfg.restarts; ++l) {
    Reflection cand = random_phases(ch.m(), rng);
    const double power = effective_channel(ch, cand).squaredNorm();
    if (power > best) {
      best = power;
      refl = std::move(cand);
    }
  }
  return power_max_engine(ch, cfg, std::move(refl), nullptr);
}

Reflection power_max_optimize_from(const FlatChannelSet& ch, const AlgoConfig& cfg,
                                   const Reflection& init, int* sweeps_done) {
  cfg.validate();
  require(init.size() == ch.m(), "power_max_optimize_from: reflection size must equal M");
  return power_max_engine(ch, cfg, init, sweeps_done);
}

namespace {

OptReport single_stream_report(const FlatChannelSet& ch, double p_budget, double sigma2,
                               const AlgoConfig& cfg, bool miso, Clock::time_point t0) {
  Rng rng = Rng(cfg.seed).derive(0x1A1u);
  auto rate_of = [&](double power) { return std::log2(1.0 + p_budget * power / sigma2); };

  Reflection refl;
  double best = -1.0;
  for (int l = 0; l < cfg.restarts; ++l) {
    Reflection cand = random_phases(ch.m(), rng);
    const double power = effective_channel(ch, cand).squaredNorm();
    if (power > best) {
      best = power;
      refl = std::move(cand);
    }
  }

  OptReport report;
  report.restarts_evaluated = cfg.restarts;
  report.rate_trace.push_back(rate_of(best));

  ComplexMatrix d = effective_channel(ch, refl);
  double prev = best;
  for (int iter = 1; iter <= cfg.max_outer_iters; ++iter) {
    power_sweep(ch, refl, d);
    const double cur = d.squaredNorm();
    report.rate_trace.push_back(rate_of(cur));
    report.outer_iters = iter;
    if (cur - prev <= cfg.epsilon * std::max(prev, 1e-30)) break;
    prev = cur;
  }

  const double power = d.squaredNorm();
  const Eigen::Index n_t = ch.H.cols();
  Covariance q{ComplexMatrix::Zero(n_t, n_t), p_budget};
  if (miso) {
    if (power > 0.0) {
      const ComplexVector h_tilde = d.adjoint();  // d is h~^H, 1 x N_t
      q.Q = p_budget * (h_tilde * h_tilde.adjoint()) / power;  // maximum ratio transmission
    }
  } else {
    q.Q = ComplexMatrix::Constant(1, 1, Complex(p_budget, 0.0));
  }

  report.final_reflection = std::move(refl);
  report.final_Q = std::move(q);
  report.wall_ms = elapsed_ms(t0);
  return report;
}

}  // namespace

OptReport miso_optimize(const FlatChannelSet& ch, double p_budget, double sigma2,
                        const AlgoConfig& cfg) {
  cfg.validate();
  require(ch.n_r() == 1, "miso_optimize: requires N_r == 1");
  return single_stream_report(ch, p_budget, sigma2, cfg, true, Clock::now());
}

OptReport simo_optimize(const FlatChannelSet& ch, double p_budget, double sigma2,
                        const AlgoConfig& cfg) {
  cfg.validate();
  require(ch.n_t() == 1, "simo_optimize: requires N_t == 1");
  return single_stream_report(ch, p_budget, sigma2, cfg, false, Clock::now());
}

Reflection heuristic_power_max(const FlatChannelSet& ch) {
  const Complex direct = ch.H.sum();
  Reflection refl{ComplexVector(ch.m())};
  for (int m = 0; m < ch.m(); ++m) {
    // Entry sum of the m-th reflected path r_m t_m^H; rows of T already hold
    // the conjugated transmit vectors.
    const Complex reflected = ch.R.col(m).sum() * ch.T.row(m).sum();
    refl.alphas(m) = phase_of(direct) * std::conj(phase_of(reflected));
  }
  return refl;
}

std::map<std::string, double> baselines(const FlatChannelSet& ch, double p_budget,
                                        double sigma2, std::uint64_t seed) {
  std::map<std::string, double> out;
  const WaterfillResult direct = waterfill(ch.H, p_budget, sigma2);
  out["no_irs"] = direct.rate;

  // Same stream as the optimizers' restart draws, so this reflection is exactly
  // the first restart candidate and the optimized rate can never fall below it.
  Rng rng = Rng(seed).derive(0x1A1u);
  Reflection random = random_phases(ch.m(), rng);
  out["random_phase"] = waterfill(effective_channel(ch, random), p_budget, sigma2).rate;

  AlgoConfig cfg;
  cfg.seed = seed;
  const OptReport fixed = optimize_fixed_q(ch, direct.Q, sigma2, cfg);
  out["fixed_Q"] = fixed.rate_trace.back();
  return out;
}

}  // namespace irslab
