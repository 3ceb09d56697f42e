#pragma once

#include <map>
#include <string>

#include "irslab/opt_flat.hpp"

namespace irslab {

/// Low-SNR optimizer: alternates closed-form phase alignment of the reflection
/// against fixed unit vectors (x, y) with refreshing (x, y) from the strongest
/// singular pair of the effective channel. Final covariance is rank-one
/// beamforming along the strongest right singular vector.
OptReport low_snr_optimize(const FlatChannelSet& ch, double p_budget, double sigma2,
                           const AlgoConfig& cfg);

/// High-SNR surrogate: maximize the channel total power ||H~||_F^2 by cyclic
/// closed-form phase updates. Returns the reflection only; rate evaluation is
/// the caller's choice of covariance.
Reflection power_max_optimize(const FlatChannelSet& ch, const AlgoConfig& cfg);

/// Same sweep started from a given reflection (restart scoring skipped).
/// Used for fixed-point checks; sweeps_done reports outer iterations.
Reflection power_max_optimize_from(const FlatChannelSet& ch, const AlgoConfig& cfg,
                                   const Reflection& init, int* sweeps_done = nullptr);

/// Single-receive-antenna specialization: total-power sweep plus maximum ratio
/// transmission. Requires N_r == 1.
OptReport miso_optimize(const FlatChannelSet& ch, double p_budget, double sigma2,
                        const AlgoConfig& cfg);

/// Single-transmit-antenna specialization: total-power sweep, Q = P. N_t == 1.
OptReport simo_optimize(const FlatChannelSet& ch, double p_budget, double sigma2,
                        const AlgoConfig& cfg);

/// Non-iterative total-power heuristic: phase-align every reflected path's
/// entry-sum with the direct channel's entry-sum.
Reflection heuristic_power_max(const FlatChannelSet& ch);

/// Benchmark rates: "no_irs" (water-filling on the direct channel),
/// "random_phase" (uniform random phases, water-filled covariance), and
/// "fixed_Q" (reflection sweep with the direct channel's covariance frozen).
std::map<std::string, double> baselines(const FlatChannelSet& ch, double p_budget,
                                        double sigma2, std::uint64_t seed);

}  // namespace irslab
