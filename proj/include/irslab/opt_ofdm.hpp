#pragma once

#include "irslab/opt_flat.hpp"

namespace irslab {

struct OfdmConfig {
  int n_f = 512;            ///< total subcarriers
  int n = 8;                ///< allocated subcarriers
  int mu = 128;             ///< cyclic prefix length
  double sigma_bar2 = 0.0;  ///< per-subcarrier noise power (watts)
  double p_budget = 0.0;    ///< average power budget (watts)

  void validate() const {
    if (!(n > 1 && n <= n_f)) throw ConfigError("OfdmConfig: need 1 < N <= N_f");
    if (mu < 0) throw ConfigError("OfdmConfig: cyclic prefix must be >= 0");
    if (!(sigma_bar2 > 0)) throw ConfigError("OfdmConfig: noise power must be positive");
    if (!(p_budget > 0)) throw ConfigError("OfdmConfig: power budget must be positive");
  }
};

/// Per-subcarrier transmit covariances under the average trace budget.
struct FreqCovariances {
  std::vector<ComplexMatrix> Q;

  int size() const { return static_cast<int>(Q.size()); }
};

/// Relaxed objective over the unit disk |alpha_m| <= 1:
///   sum_n log2 det(I + (H~[n] Q[n] H~[n]^H
///                       + sum_m (1-|alpha_m|^2) r_m[n] t_m[n]^H Q[n] t_m[n] r_m[n]^H)
///                      / sigma_bar2).
/// Reduces to the plain per-subcarrier capacity sum when all |alpha_m| = 1.
double ofdm_objective(const FreqChannelSet& fc, const Reflection& refl,
                      const FreqCovariances& qs, double sigma_bar2);

struct DiskSolveStats {
  double proj_grad_norm = 0.0;
  int iters = 0;
};

/// Concave maximization of the relaxed objective over one coefficient's unit
/// disk (two real variables), projected gradient ascent with backtracking.
Complex solve_alpha_disk(int m, const FreqChannelSet& fc, const Reflection& refl,
                         const FreqCovariances& qs, double sigma_bar2,
                         DiskSolveStats* stats = nullptr);

struct CovSolveStats {
  double proj_grad_norm = 0.0;  ///< relative, at the returned point
  int iters = 0;
  bool converged = true;        ///< false when the iteration cap was hit
};

/// Concave maximization of the relaxed objective over PSD covariances with an
/// average trace budget. Projected gradient ascent; the start point is the
/// better of the warm start and the space-frequency water-filling solution for
/// the equivalent augmented channels, so the result never falls below either.
FreqCovariances solve_covariances_relaxed(const FreqChannelSet& fc, const Reflection& refl,
                                          const OfdmConfig& cfg,
                                          const FreqCovariances* warm = nullptr,
                                          CovSolveStats* stats = nullptr);

struct SfWaterfillResult {
  FreqCovariances qs;
  double sum_rate = 0.0;     ///< sum over subcarriers, bits/s/Hz, no prefactor
  double water_level = 0.0;
};

/// One common water level across all eigenmodes of all subcarriers;
/// (1/N) sum_n tr(Q[n]) = P.
SfWaterfillResult space_frequency_waterfill(const std::vector<ComplexMatrix>& h_eff,
                                            const OfdmConfig& cfg);

struct OfdmOptReport {
  Reflection final_reflection;        ///< unit-modulus (amplitudes normalized)
  FreqCovariances final_qs;           ///< water-filled for the normalized reflection
  std::vector<double> relaxed_trace;  ///< relaxed objective per outer iteration (sum over n)
  double feasible_sum_rate = 0.0;     ///< objective of the feasible solution (sum over n)
  bool relaxation_tight = false;      ///< all converged |alpha_m| within 1e-6 of 1
  bool prefix_warning = false;        ///< cyclic prefix shorter than the channel memory
  bool q_solver_converged = true;
  int outer_iters = 0;
  int restarts_evaluated = 0;
  double wall_ms = 0.0;
};

/// Convex-relaxation alternating optimization for the common-reflection
/// MIMO-OFDM problem: restart scoring, disk sweeps and covariance solves until
/// the relaxed objective stalls, then amplitude normalization and a final
/// space-frequency water-filling pass.
OfdmOptReport algorithm2(const TimeDomainChannelSet& td, const OfdmConfig& cfg,
                         const AlgoConfig& algo);

/// Benchmark upper bound with per-subcarrier reflections: each subcarrier's
/// reflection is optimized independently under budget P, then one joint
/// space-frequency water-filling distributes power across the resulting
/// channels. Returns the sum rate over subcarriers (no prefactor).
double upper_bound_per_subcarrier(const TimeDomainChannelSet& td, const OfdmConfig& cfg,
                                  const AlgoConfig& algo);

/// Reflection-only benchmark: disk sweeps with the covariances frozen, then
/// amplitude normalization. Returns the normalized (unit-modulus) reflection.
Reflection ofdm_optimize_fixed_q(const FreqChannelSet& fc, const FreqCovariances& qs_fixed,
                                 double sigma_bar2, const AlgoConfig& algo);

/// Closed-form total-power heuristic with entry sums taken across subcarriers.
Reflection ofdm_heuristic_power(const FreqChannelSet& fc);

/// (N_f / (N_f + mu)) * (1/N) * sum_rate.
double ofdm_rate(double sum_rate, const OfdmConfig& cfg);

}  // namespace irslab
