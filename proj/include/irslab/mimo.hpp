#pragma once

#include "irslab/channel.hpp"
#include "irslab/numerics.hpp"

namespace irslab {

/// Surface reflection coefficients, one per element. Feasible solutions are
/// unit-modulus; relaxed iterates may lie inside the unit disk.
struct Reflection {
  ComplexVector alphas;

  int size() const { return static_cast<int>(alphas.size()); }

  static Reflection ones(int m) { return {ComplexVector::Ones(m)}; }

  static Reflection from_phases(const RealVector& phases) {
    ComplexVector a(phases.size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) a(i) = std::polar(1.0, phases(i));
    return {a};
  }

  bool is_unit_modulus(double tol = 1e-9) const {
    for (Eigen::Index i = 0; i < alphas.size(); ++i)
      if (std::abs(std::abs(alphas(i)) - 1.0) > tol) return false;
    return true;
  }

  bool is_within_disk(double tol = 1e-9) const {
    for (Eigen::Index i = 0; i < alphas.size(); ++i)
      if (std::abs(alphas(i)) > 1.0 + tol) return false;
    return true;
  }
};

/// Transmit covariance with its trace budget (watts).
struct Covariance {
  ComplexMatrix Q;
  double budget = 0.0;
};

struct ChannelMetrics {
  double total_power;            ///< ||H~||_F^2, linear
  int rank;                      ///< numerical rank at rank_tol
  double condition_number;       ///< sigma_max / sigma_min (+inf if rank-deficient)
  double strongest_eig_power;    ///< sigma_max^2
};

/// H~ = H + R diag(alpha) T.
ComplexMatrix effective_channel(const FlatChannelSet& ch, const Reflection& refl);

/// log2 det(I + H~ Q H~^H / sigma2), bits/s/Hz.
double capacity(const ComplexMatrix& h_tilde, const Covariance& q, double sigma2);

struct WaterfillResult {
  Covariance Q;
  double rate = 0.0;         ///< bits/s/Hz at the optimal allocation
  double water_level = 0.0;  ///< common level 1/p0 (0 for the zero channel)
  RealVector mode_powers;    ///< per-mode allocation, descending mode order
  RealVector mode_gains;     ///< singular values of H~, descending
};

/// Eigenmode transmission with water-filled powers under trace budget P.
WaterfillResult waterfill(const ComplexMatrix& h_tilde, double p_budget, double sigma2,
                          const ToleranceConfig& tol = {});

ChannelMetrics channel_metrics(const ComplexMatrix& h_tilde, const ToleranceConfig& tol = {});

}  // namespace irslab
