#include "irslab/mimo.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

namespace irslab {

ComplexMatrix effective_channel(const FlatChannelSet& ch, const Reflection& refl) {
  require(ch.H.rows() == ch.R.rows() && ch.H.cols() == ch.T.cols() &&
              ch.R.cols() == ch.T.rows(),
          "effective_channel: inconsistent channel dimensions");
  require(refl.size() == ch.m(), "effective_channel: reflection size must equal M");
  if (ch.m() == 0) return ch.H;
  return ch.H + ch.R * refl.alphas.asDiagonal() * ch.T;
}

double capacity(const ComplexMatrix& h_tilde, const Covariance& q, double sigma2) {
  if (!(sigma2 > 0)) throw ConfigError("capacity: noise power must be positive");
  require(q.Q.rows() == q.Q.cols() && q.Q.rows() == h_tilde.cols(),
          "capacity: covariance dimension mismatch");
  require(is_hermitian(q.Q), "capacity: covariance must be Hermitian");
  if (q.budget > 0)
    require(q.Q.real().trace() <= q.budget * (1.0 + 1e-9) + 1e-30,
            "capacity: covariance exceeds its trace budget");

  const Eigen::Index n_r = h_tilde.rows();
  const ComplexMatrix gram =
      ComplexMatrix::Identity(n_r, n_r) + h_tilde * q.Q * h_tilde.adjoint() / sigma2;
  return log2_det_hpd((gram + gram.adjoint()) / 2.0);
}

WaterfillResult waterfill(const ComplexMatrix& h_tilde, double p_budget, double sigma2,
                          const ToleranceConfig& tol) {
  if (!(sigma2 > 0)) throw ConfigError("waterfill: noise power must be positive");
  if (!(p_budget >= 0)) throw ConfigError("waterfill: power budget must be >= 0");

  const Eigen::Index n_t = h_tilde.cols();
  const Svd dec = svd(h_tilde);
  const RealVector& s = dec.singular_values;
  const Eigen::Index k = s.size();

  WaterfillResult out;
  out.mode_gains = s;
  out.mode_powers = RealVector::Zero(k);
  out.Q = Covariance{ComplexMatrix::Zero(n_t, n_t), p_budget};
  if (k == 0 || s(0) <= 0.0 || p_budget == 0.0) return out;  // zero channel or no power

  // p_i(w) = max(w - sigma2/s_i^2, 0); find the common level w with sum = P by
  // bisection (the level is monotone in the total power).
  auto alloc = [&](double w, RealVector& p) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double g = s(i) * s(i);
      p(i) = (g > 0.0) ? std::max(w - sigma2 / g, 0.0) : 0.0;
      total += p(i);
    }
    return total;
  };

  double lo = 0.0;
  double hi = p_budget + sigma2 / (s(0) * s(0));
  RealVector p(k);
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double total = alloc(mid, p);
    if (std::abs(total - p_budget) <= 1e-12 * p_budget) {
      lo = hi = mid;
      break;
    }
    (total > p_budget ? hi : lo) = mid;
  }
  const double w = 0.5 * (lo + hi);
  alloc(w, p);

  out.water_level = w;
  out.mode_powers = p;
  out.Q.Q = dec.v * p.asDiagonal() * dec.v.adjoint();
  for (Eigen::Index i = 0; i < k; ++i) {
    const double g = s(i) * s(i);
    if (p(i) > 0.0) out.rate += std::log2(1.0 + g * p(i) / sigma2);
  }
  (void)tol;
  return out;
}

ChannelMetrics channel_metrics(const ComplexMatrix& h_tilde, const ToleranceConfig& tol) {
  require(all_finite(h_tilde), "channel_metrics: entries must be finite");
  const Svd dec = svd(h_tilde);
  const RealVector& s = dec.singular_values;

  ChannelMetrics m{};
  m.total_power = h_tilde.squaredNorm();
  m.strongest_eig_power = s.size() ? s(0) * s(0) : 0.0;
  const double cutoff = s.size() ? tol.rank_tol * s(0) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff && s(i) > 0.0) ++rank;
  m.rank = rank;
  const double s_min = s.size() ? s(s.size() - 1) : 0.0;
  m.condition_number =
      (s_min > 0.0) ? s(0) / s_min : std::numeric_limits<double>::infinity();
  if (s.size() && s(0) == 0.0) m.condition_number = 1.0;  // zero channel
  return m;
}

}  // namespace irslab
