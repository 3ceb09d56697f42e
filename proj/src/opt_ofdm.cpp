#include "irslab/opt_ofdm.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace irslab {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double weight_of(Complex alpha) {
  return std::max(0.0, 1.0 - std::norm(alpha));  // 1 - |alpha|^2, clamped
}

std::vector<ComplexMatrix> effective_per_subcarrier(const FreqChannelSet& fc,
                                                    const Reflection& refl) {
  std::vector<ComplexMatrix> h(fc.n_subcarriers());
  for (int n = 0; n < fc.n_subcarriers(); ++n)
    h[n] = effective_channel(fc.at(n), refl);
  return h;
}

// I + (S Q S^H + sum_m w_m (t_m^H Q t_m) r_m r_m^H) / sigma_bar2 for one subcarrier.
ComplexMatrix relaxed_gram(const ComplexMatrix& s, const ComplexMatrix& r_all,
                           const ComplexMatrix& t_all, const std::vector<double>& w,
                           const ComplexMatrix& q, double sigma_bar2) {
  const Eigen::Index n_r = s.rows();
  ComplexMatrix acc = s * q * s.adjoint();
  for (std::size_t m = 0; m < w.size(); ++m) {
    if (w[m] <= 0.0) continue;
    const ComplexVector t_m = t_all.row(m).adjoint();
    const double s_m = std::max(0.0, (t_m.adjoint() * q * t_m)(0).real());
    acc += (w[m] * s_m) * (r_all.col(m) * r_all.col(m).adjoint());
  }
  ComplexMatrix g = ComplexMatrix::Identity(n_r, n_r) + acc / sigma_bar2;
  return ((g + g.adjoint()) / 2.0).eval();
}

// Projection of per-subcarrier Hermitian matrices onto
// {Q[n] >= 0, sum_n tr(Q[n]) <= total_budget} in Frobenius norm: eigenvalue
// clipping, then a common water-level shift when the clipped trace overshoots.
FreqCovariances project_covariances(const std::vector<ComplexMatrix>& raw,
                                    double total_budget) {
  struct EigCache {
    RealVector values;
    ComplexMatrix vectors;
  };
  std::vector<EigCache> eigs(raw.size());
  std::vector<double> lambdas;
  for (std::size_t n = 0; n < raw.size(); ++n) {
    const ComplexMatrix h = ((raw[n] + raw[n].adjoint()) / 2.0).eval();
    const HermitianEig e = hermitian_eig(h);
    eigs[n] = {e.eigenvalues, e.eigenvectors};
    for (Eigen::Index i = 0; i < e.eigenvalues.size(); ++i)
      lambdas.push_back(e.eigenvalues(i));
  }

  double clipped_sum = 0.0;
  for (double l : lambdas) clipped_sum += std::max(l, 0.0);

  double tau = 0.0;
  if (clipped_sum > total_budget) {
    // Exact shift: sort descending, find the largest active set.
    std::sort(lambdas.begin(), lambdas.end(), std::greater<double>());
    double prefix = 0.0;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
      prefix += lambdas[k];
      const double cand = (prefix - total_budget) / static_cast<double>(k + 1);
      const bool last = (k + 1 == lambdas.size()) || (lambdas[k + 1] <= cand);
      if (cand <= lambdas[k] && last) {
        tau = std::max(cand, 0.0);
        break;
      }
    }
  }

  FreqCovariances out;
  out.Q.resize(raw.size());
  for (std::size_t n = 0; n < raw.size(); ++n) {
    RealVector shifted = eigs[n].values;
    for (Eigen::Index i = 0; i < shifted.size(); ++i)
      shifted(i) = std::max(shifted(i) - tau, 0.0);
    out.Q[n] = eigs[n].vectors * shifted.asDiagonal() * eigs[n].vectors.adjoint();
    out.Q[n] = ((out.Q[n] + out.Q[n].adjoint()) / 2.0).eval();
  }
  return out;
}

}  // namespace

double ofdm_objective(const FreqChannelSet& fc, const Reflection& refl,
                      const FreqCovariances& qs, double sigma_bar2) {
  require(refl.is_within_disk(), "ofdm_objective: reflection must lie in the unit disk");
  require(qs.size() == fc.n_subcarriers(), "ofdm_objective: one covariance per subcarrier");
  if (!(sigma_bar2 > 0)) throw ConfigError("ofdm_objective: noise power must be positive");

  std::vector<double> w(refl.size());
  for (int m = 0; m < refl.size(); ++m) w[m] = weight_of(refl.alphas(m));

  double acc = 0.0;
  for (int n = 0; n < fc.n_subcarriers(); ++n) {
    const ComplexMatrix s = effective_channel(fc.at(n), refl);
    acc += log2_det_hpd(relaxed_gram(s, fc.R[n], fc.T[n], w, qs.Q[n], sigma_bar2));
  }
  return acc;
}

Complex solve_alpha_disk(int m, const FreqChannelSet& fc, const Reflection& refl,
                         const FreqCovariances& qs, double sigma_bar2,
                         DiskSolveStats* stats) {
  const int n_sub = fc.n_subcarriers();
  require(m >= 0 && m < refl.size(), "solve_alpha_disk: element index out of range");

  std::vector<double> w(refl.size());
  for (int i = 0; i < refl.size(); ++i) w[i] = weight_of(refl.alphas(i));

  // Per-subcarrier reduction: with others fixed the objective term is
  // log2 det(C_n + alpha D_n + alpha^* D_n^H) with rank-one D_n = r (e)^H, so
  // det scales as 1 + 2 Re(alpha a_n) - c_n |alpha|^2 with c_n >= 0.
  std::vector<Complex> a(n_sub);
  std::vector<double> c(n_sub);
  for (int n = 0; n < n_sub; ++n) {
    const ComplexVector r_m = fc.R[n].col(m);
    const ComplexVector t_m = fc.T[n].row(m).adjoint();
    const ComplexMatrix s_minus =
        effective_channel(fc.at(n), refl) - refl.alphas(m) * r_m * fc.T[n].row(m);

    const Eigen::Index n_r = s_minus.rows();
    ComplexMatrix cmat = s_minus * qs.Q[n] * s_minus.adjoint();
    const double s_m = std::max(0.0, (t_m.adjoint() * qs.Q[n] * t_m)(0).real());
    cmat += s_m * (r_m * r_m.adjoint());
    for (int i = 0; i < refl.size(); ++i) {
      if (i == m || w[i] <= 0.0) continue;
      const ComplexVector t_i = fc.T[n].row(i).adjoint();
      const double s_i = std::max(0.0, (t_i.adjoint() * qs.Q[n] * t_i)(0).real());
      cmat += (w[i] * s_i) * (fc.R[n].col(i) * fc.R[n].col(i).adjoint());
    }
    ComplexMatrix cfull = ComplexMatrix::Identity(n_r, n_r) + cmat / sigma_bar2;
    cfull = ((cfull + cfull.adjoint()) / 2.0).eval();

    Eigen::LLT<ComplexMatrix> llt(cfull);
    if (llt.info() != Eigen::Success)
      throw DecompositionError("solve_alpha_disk: gram matrix not positive definite");
    const ComplexVector e = s_minus * (qs.Q[n] * t_m) / sigma_bar2;
    const ComplexVector ci_r = llt.solve(r_m);
    const ComplexVector ci_e = llt.solve(e);
    a[n] = e.dot(ci_r);  // e^H C^-1 r
    const double p = std::max(0.0, e.dot(ci_e).real());
    const double q = std::max(0.0, r_m.dot(ci_r).real());
    c[n] = std::max(0.0, p * q - std::norm(a[n]));
  }

  auto value = [&](Complex alpha) {
    double acc = 0.0;
    for (int n = 0; n < n_sub; ++n) {
      const double u = 1.0 + 2.0 * (alpha * a[n]).real() - c[n] * std::norm(alpha);
      if (u <= 0.0) return -std::numeric_limits<double>::infinity();
      acc += std::log2(u);
    }
    return acc;
  };
  auto gradient = [&](Complex alpha) {
    Complex g(0.0, 0.0);
    for (int n = 0; n < n_sub; ++n) {
      const double u = 1.0 + 2.0 * (alpha * a[n]).real() - c[n] * std::norm(alpha);
      g += (std::conj(a[n]) - c[n] * alpha) / u;
    }
    return g / std::log(2.0);
  };
  auto project = [](Complex alpha) {
    const double r = std::abs(alpha);
    return r > 1.0 ? alpha / r : alpha;
  };
  auto projected_gradient = [&](Complex alpha, Complex g) {
    const double r = std::abs(alpha);
    if (r < 1.0 - 1e-12) return g;
    const Complex u = alpha / r;
    const double radial = (g * std::conj(u)).real();
    return radial > 0.0 ? g - radial * u : g;
  };

  Complex alpha = project(refl.alphas(m));
  double f_cur = value(alpha);
  double eta = 1.0;
  int iters = 0;
  double pg_norm = std::abs(projected_gradient(alpha, gradient(alpha)));
  for (; iters < 500 && pg_norm > 1e-8; ++iters) {
    const Complex g = gradient(alpha);
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      const Complex trial = project(alpha + eta * g);
      const double gain_lin = 2.0 * (g * std::conj(trial - alpha)).real();
      if (value(trial) >= f_cur + 1e-4 * gain_lin && gain_lin >= 0.0) {
        alpha = trial;
        f_cur = value(trial);
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) break;
    eta = std::min(eta * 2.0, 1e6);
    pg_norm = std::abs(projected_gradient(alpha, gradient(alpha)));
  }

  // Second-order polish: gradient ascent bottoms out near sqrt(eps)*f, above
  // the 1e-8 stationarity target. Interior points get a complex Newton step on
  // the gradient; boundary points a bisection on the tangential derivative.
  for (int polish = 0; polish < 60 && pg_norm > 1e-13; ++polish) {
    const Complex g = gradient(alpha);
    Complex cand = alpha;
    if (std::abs(alpha) < 1.0 - 1e-9) {
      Complex da(0, 0), db(0, 0);  // dG/dalpha and dG/dalpha*
      for (int n = 0; n < n_sub; ++n) {
        const double u = 1.0 + 2.0 * (alpha * a[n]).real() - c[n] * std::norm(alpha);
        const Complex w = std::conj(a[n]) - c[n] * alpha;
        da += (-c[n] * u - w * (a[n] - c[n] * std::conj(alpha))) / (u * u);
        db += -(w * w) / (u * u);
      }
      da /= std::log(2.0);
      db /= std::log(2.0);
      const double denom = std::norm(da) - std::norm(db);
      if (std::abs(denom) < 1e-300) break;
      cand = project(alpha + (db * std::conj(g) - std::conj(da) * g) / denom);
    } else {
      // Tangential derivative d/dtheta f(e^{j theta}) = 2 Im(G conj(alpha));
      // bracket its sign change around the current phase and bisect.
      auto tangent = [&](double theta) {
        const Complex at = std::polar(1.0, theta);
        return 2.0 * (gradient(at) * std::conj(at)).imag();
      };
      double theta = std::arg(alpha);
      const double t0 = tangent(theta);
      double step = 1e-6;
      double lo = theta, hi = theta;
      bool bracketed = false;
      for (; step < 1.0; step *= 4.0) {
        const double side = t0 >= 0.0 ? theta + step : theta - step;
        if (tangent(side) * t0 <= 0.0) {
          lo = std::min(theta, side);
          hi = std::max(theta, side);
          bracketed = true;
          break;
        }
      }
      if (bracketed) {
        double flo = tangent(lo);
        for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double fm = tangent(mid);
          if (fm * flo <= 0.0) {
            hi = mid;
          } else {
            lo = mid;
            flo = fm;
          }
        }
        cand = std::polar(1.0, 0.5 * (lo + hi));
      }
      // If the boundary stationary point wants to move inward, hand over to the
      // interior branch on the next pass.
      const Complex gc = gradient(cand);
      if ((gc * std::conj(cand)).real() < -1e-15) cand = 0.999999 * cand;
    }
    const double f_cand = value(cand);
    if (f_cand + 1e-9 * (1.0 + std::abs(f_cur)) < f_cur) break;
    const double pg_cand = std::abs(projected_gradient(cand, gradient(cand)));
    if (pg_cand >= pg_norm && f_cand <= f_cur) break;
    if (f_cand >= f_cur || pg_cand < pg_norm) {
      alpha = cand;
      f_cur = std::max(f_cur, f_cand);
      pg_norm = pg_cand;
    }
  }

  if (stats) *stats = DiskSolveStats{pg_norm, iters};
  return alpha;
}

FreqCovariances solve_covariances_relaxed(const FreqChannelSet& fc, const Reflection& refl,
                                          const OfdmConfig& cfg, const FreqCovariances* warm,
                                          CovSolveStats* stats) {
  require(refl.is_within_disk(),
          "solve_covariances_relaxed: reflection must lie in the unit disk");
  const int n_sub = fc.n_subcarriers();
  const double total_budget = cfg.p_budget * n_sub;

  std::vector<double> w(refl.size());
  for (int m = 0; m < refl.size(); ++m) w[m] = weight_of(refl.alphas(m));

  const std::vector<ComplexMatrix> h_eff = effective_per_subcarrier(fc, refl);

  auto f_of = [&](const FreqCovariances& qs) {
    double acc = 0.0;
    for (int n = 0; n < n_sub; ++n)
      acc += log2_det_hpd(relaxed_gram(h_eff[n], fc.R[n], fc.T[n], w, qs.Q[n],
                                       cfg.sigma_bar2));
    return acc;
  };
  auto grad_of = [&](const FreqCovariances& qs, std::vector<ComplexMatrix>& g) {
    const double ln2 = std::log(2.0);
    for (int n = 0; n < n_sub; ++n) {
      const ComplexMatrix gram =
          relaxed_gram(h_eff[n], fc.R[n], fc.T[n], w, qs.Q[n], cfg.sigma_bar2);
      Eigen::LLT<ComplexMatrix> llt(gram);
      const ComplexMatrix minv =
          llt.solve(ComplexMatrix::Identity(gram.rows(), gram.cols()));
      ComplexMatrix acc = h_eff[n].adjoint() * minv * h_eff[n];
      for (int m = 0; m < refl.size(); ++m) {
        if (w[m] <= 0.0) continue;
        const ComplexVector r_m = fc.R[n].col(m);
        const ComplexVector t_m = fc.T[n].row(m).adjoint();
        const double coeff = std::max(0.0, r_m.dot(minv * r_m).real());
        acc += (w[m] * coeff) * (t_m * t_m.adjoint());
      }
      g[n] = acc / (cfg.sigma_bar2 * ln2);
      g[n] = ((g[n] + g[n].adjoint()) / 2.0).eval();
    }
  };

  // Start at the space-frequency water-filling point for the equivalent
  // augmented channels [H~[n]; sqrt(w_m) r_m t_m^H ...]; take the warm start
  // instead when it scores higher.
  FreqCovariances qs;
  {
    std::vector<ComplexMatrix> augmented(n_sub);
    for (int n = 0; n < n_sub; ++n) {
      int extra = 0;
      for (double wm : w)
        if (wm > 0.0) ++extra;
      ComplexMatrix big((1 + extra) * h_eff[n].rows(), h_eff[n].cols());
      big.topRows(h_eff[n].rows()) = h_eff[n];
      int at = 1;
      for (int m = 0; m < refl.size(); ++m) {
        if (w[m] <= 0.0) continue;
        big.middleRows(at * h_eff[n].rows(), h_eff[n].rows()) =
            std::sqrt(w[m]) * fc.R[n].col(m) * fc.T[n].row(m);
        ++at;
      }
      augmented[n] = std::move(big);
    }
    qs = space_frequency_waterfill(augmented, cfg).qs;
    if (warm && warm->size() == n_sub && f_of(*warm) > f_of(qs)) qs = *warm;
  }

  double f_cur = f_of(qs);
  std::vector<ComplexMatrix> g(n_sub);
  double eta = 0.0;
  double pg_rel = std::numeric_limits<double>::infinity();
  int iters = 0;
  bool converged = false;

  for (; iters < 2000; ++iters) {
    grad_of(qs, g);
    double g_norm2 = 0.0;
    for (const auto& gn : g) g_norm2 += gn.squaredNorm();
    const double g_norm = std::sqrt(g_norm2);
    if (g_norm == 0.0) {
      pg_rel = 0.0;
      converged = true;
      break;
    }

    // Projected-gradient norm at a small probe step, relative to the raw norm.
    // The probe must stay well above the water-filling bisection residual
    // (1e-12 * budget), which otherwise floods the displacement measurement.
    {
      const double probe = 1e-4 * total_budget / g_norm;
      std::vector<ComplexMatrix> trial_raw(n_sub);
      for (int n = 0; n < n_sub; ++n) trial_raw[n] = qs.Q[n] + probe * g[n];
      const FreqCovariances proj = project_covariances(trial_raw, total_budget);
      double disp2 = 0.0;
      for (int n = 0; n < n_sub; ++n) disp2 += (proj.Q[n] - qs.Q[n]).squaredNorm();
      pg_rel = std::sqrt(disp2) / (probe * g_norm);
      if (pg_rel <= 1e-6) {
        converged = true;
        break;
      }
    }

    if (eta <= 0.0) eta = total_budget / g_norm;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      std::vector<ComplexMatrix> trial_raw(n_sub);
      for (int n = 0; n < n_sub; ++n) trial_raw[n] = qs.Q[n] + eta * g[n];
      FreqCovariances trial = project_covariances(trial_raw, total_budget);
      double gain_lin = 0.0;
      for (int n = 0; n < n_sub; ++n)
        gain_lin += (g[n].cwiseProduct((trial.Q[n] - qs.Q[n]).conjugate())).sum().real();
      const double f_trial = f_of(trial);
      if (f_trial >= f_cur + 1e-4 * gain_lin && gain_lin >= 0.0 && f_trial >= f_cur) {
        qs = std::move(trial);
        f_cur = f_trial;
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) {
      converged = pg_rel <= 1e-4;  // stalled by line search; report best iterate
      break;
    }
    eta *= 2.0;
  }

  if (stats) *stats = CovSolveStats{pg_rel, iters, converged};
  return qs;
}

SfWaterfillResult space_frequency_waterfill(const std::vector<ComplexMatrix>& h_eff,
                                            const OfdmConfig& cfg) {
  const int n_sub = static_cast<int>(h_eff.size());
  require(n_sub >= 1, "space_frequency_waterfill: need at least one subcarrier");
  const double total = cfg.p_budget * n_sub;
  const double sigma2 = cfg.sigma_bar2;

  std::vector<Svd> decs(n_sub);
  double s_max = 0.0;
  for (int n = 0; n < n_sub; ++n) {
    decs[n] = svd(h_eff[n]);
    if (decs[n].singular_values.size())
      s_max = std::max(s_max, decs[n].singular_values(0));
  }

  SfWaterfillResult out;
  out.qs.Q.resize(n_sub);
  for (int n = 0; n < n_sub; ++n) {
    const Eigen::Index n_t = h_eff[n].cols();
    out.qs.Q[n] = ComplexMatrix::Zero(n_t, n_t);
  }
  if (s_max <= 0.0 || total <= 0.0) return out;  // zero channels -> zero rate

  auto total_alloc = [&](double w) {
    double acc = 0.0;
    for (int n = 0; n < n_sub; ++n) {
      const RealVector& s = decs[n].singular_values;
      for (Eigen::Index i = 0; i < s.size(); ++i) {
        const double gain = s(i) * s(i);
        if (gain > 0.0) acc += std::max(w - sigma2 / gain, 0.0);
      }
    }
    return acc;
  };

  double lo = 0.0, hi = total + sigma2 / (s_max * s_max);
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double t = total_alloc(mid);
    if (std::abs(t - total) <= 1e-12 * total) {
      lo = hi = mid;
      break;
    }
    (t > total ? hi : lo) = mid;
  }
  const double w = 0.5 * (lo + hi);
  out.water_level = w;

  for (int n = 0; n < n_sub; ++n) {
    const RealVector& s = decs[n].singular_values;
    RealVector p = RealVector::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const double gain = s(i) * s(i);
      if (gain > 0.0) p(i) = std::max(w - sigma2 / gain, 0.0);
      if (p(i) > 0.0) out.sum_rate += std::log2(1.0 + gain * p(i) / sigma2);
    }
    out.qs.Q[n] = decs[n].v * p.asDiagonal() * decs[n].v.adjoint();
  }
  return out;
}

OfdmOptReport algorithm2(const TimeDomainChannelSet& td, const OfdmConfig& cfg,
                         const AlgoConfig& algo) {
  algo.validate();
  const auto t0 = Clock::now();
  const FreqChannelSet fc = to_frequency_domain(td, cfg.n);
  const int m_count = fc.T.empty() ? 0 : static_cast<int>(fc.T[0].rows());

  OfdmOptReport report;
  const int l_max = static_cast<int>(
      std::max(td.taps_H.size(), td.taps_T.size() + td.taps_R.size() - 1));
  report.prefix_warning = cfg.mu < l_max;

  Rng rng = Rng(algo.seed).derive(0x1A1u);

  // Restart scoring: unit-modulus random phases, covariances from the relaxed
  // solver (closed-form water-filling point, since the extra term vanishes).
  Reflection refl;
  FreqCovariances qs;
  double best = -std::numeric_limits<double>::infinity();
  for (int l = 0; l < algo.restarts; ++l) {
    Reflection cand{ComplexVector(m_count)};
    for (int m = 0; m < m_count; ++m) cand.alphas(m) = std::polar(1.0, rng.uniform_phase());
    FreqCovariances cand_qs = solve_covariances_relaxed(fc, cand, cfg);
    const double f = ofdm_objective(fc, cand, cand_qs, cfg.sigma_bar2);
    if (f > best) {
      best = f;
      refl = std::move(cand);
      qs = std::move(cand_qs);
    }
  }
  report.restarts_evaluated = algo.restarts;
  report.relaxed_trace.push_back(best);

  // Alternate disk sweeps and covariance solves until the relaxed objective
  // stalls, then normalize amplitudes and water-fill. If the normalized
  // feasible point scores above the converged relaxed iterate (the alternation
  // stopped at an inferior local optimum), resume the relaxed iteration from
  // that feasible point; the relaxed trace stays monotone and the feasible
  // value can only improve, so the round loop terminates.
  bool q_converged = true;
  Reflection unit_refl;
  SfWaterfillResult sf;
  for (int round = 0; round < 20; ++round) {
    double prev = report.relaxed_trace.back();
    for (int iter = 1; iter <= algo.max_outer_iters; ++iter) {
      for (int m = 0; m < m_count; ++m)
        refl.alphas(m) = solve_alpha_disk(m, fc, refl, qs, cfg.sigma_bar2);

      CovSolveStats cov_stats;
      qs = solve_covariances_relaxed(fc, refl, cfg, &qs, &cov_stats);
      q_converged = q_converged && cov_stats.converged;

      const double f = ofdm_objective(fc, refl, qs, cfg.sigma_bar2);
      report.relaxed_trace.push_back(f);
      report.outer_iters += 1;
      if (f - prev <= algo.epsilon * std::max(prev, 1e-12)) break;
      prev = f;
    }

    // Amplitude normalization; zero magnitude falls back to 1.
    report.relaxation_tight = true;
    unit_refl = refl;
    for (int m = 0; m < m_count; ++m) {
      const double r = std::abs(unit_refl.alphas(m));
      if (r <= 1.0 - 1e-6) report.relaxation_tight = false;
      unit_refl.alphas(m) = r > 0.0 ? unit_refl.alphas(m) / r : Complex(1.0, 0.0);
    }
    sf = space_frequency_waterfill(effective_per_subcarrier(fc, unit_refl), cfg);
    if (sf.sum_rate <= report.relaxed_trace.back() * (1.0 + 1e-12) + 1e-12) break;

    refl = unit_refl;
    qs = sf.qs;
    report.relaxed_trace.push_back(sf.sum_rate);  // feasible point, exceeds the stall
  }
  report.q_solver_converged = q_converged;

  report.final_reflection = std::move(unit_refl);
  report.final_qs = sf.qs;
  report.feasible_sum_rate = sf.sum_rate;
  report.wall_ms = elapsed_ms(t0);
  return report;
}

double upper_bound_per_subcarrier(const TimeDomainChannelSet& td, const OfdmConfig& cfg,
                                  const AlgoConfig& algo) {
  const FreqChannelSet fc = to_frequency_domain(td, cfg.n);
  std::vector<ComplexMatrix> h_opt(fc.n_subcarriers());
  for (int n = 0; n < fc.n_subcarriers(); ++n) {
    const FlatChannelSet ch = fc.at(n);
    const OptReport rep = optimize(ch, cfg.p_budget, cfg.sigma_bar2, algo);
    h_opt[n] = effective_channel(ch, rep.final_reflection);
  }
  return space_frequency_waterfill(h_opt, cfg).sum_rate;
}

Reflection ofdm_optimize_fixed_q(const FreqChannelSet& fc, const FreqCovariances& qs_fixed,
                                 double sigma_bar2, const AlgoConfig& algo) {
  algo.validate();
  const int m_count = fc.T.empty() ? 0 : static_cast<int>(fc.T[0].rows());
  Rng rng = Rng(algo.seed).derive(0x1A1u);

  Reflection refl;
  double best = -std::numeric_limits<double>::infinity();
  for (int l = 0; l < algo.restarts; ++l) {
    Reflection cand{ComplexVector(m_count)};
    for (int m = 0; m < m_count; ++m) cand.alphas(m) = std::polar(1.0, rng.uniform_phase());
    const double f = ofdm_objective(fc, cand, qs_fixed, sigma_bar2);
    if (f > best) {
      best = f;
      refl = std::move(cand);
    }
  }

  double prev = best;
  for (int iter = 1; iter <= algo.max_outer_iters; ++iter) {
    for (int m = 0; m < m_count; ++m)
      refl.alphas(m) = solve_alpha_disk(m, fc, refl, qs_fixed, sigma_bar2);
    const double f = ofdm_objective(fc, refl, qs_fixed, sigma_bar2);
    if (f - prev <= algo.epsilon * std::max(prev, 1e-12)) break;
    prev = f;
  }

  for (int m = 0; m < m_count; ++m) {
    const double r = std::abs(refl.alphas(m));
    refl.alphas(m) = r > 0.0 ? refl.alphas(m) / r : Complex(1.0, 0.0);
  }
  return refl;
}

Reflection ofdm_heuristic_power(const FreqChannelSet& fc) {
  Complex direct(0.0, 0.0);
  for (const auto& h : fc.H) direct += h.sum();
  const int m_count = fc.T.empty() ? 0 : static_cast<int>(fc.T[0].rows());

  auto phase_of = [](Complex z) {
    const double a = std::abs(z);
    return a > 0.0 ? z / a : Complex(1.0, 0.0);
  };

  Reflection refl{ComplexVector(m_count)};
  for (int m = 0; m < m_count; ++m) {
    Complex reflected(0.0, 0.0);
    for (int n = 0; n < fc.n_subcarriers(); ++n)
      reflected += fc.R[n].col(m).sum() * fc.T[n].row(m).sum();
    refl.alphas(m) = phase_of(direct) * std::conj(phase_of(reflected));
  }
  return refl;
}

double ofdm_rate(double sum_rate, const OfdmConfig& cfg) {
  require(sum_rate >= 0.0, "ofdm_rate: sum rate must be >= 0");
  const double prefactor = static_cast<double>(cfg.n_f) / (cfg.n_f + cfg.mu);
  return prefactor * sum_rate / cfg.n;
}

}  // namespace irslab
