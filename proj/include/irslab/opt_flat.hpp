#pragma once

#include <functional>
#include <vector>

#include "irslab/mimo.hpp"

namespace irslab {

/// Alternating-optimization knobs shared by all optimizers.
struct AlgoConfig {
  int restarts = 20;           ///< random unit-modulus initializations L
  double epsilon = 1e-5;       ///< relative objective-increment convergence threshold
  int max_outer_iters = 200;   ///< safety cap; convergence normally triggers first
  std::uint64_t seed = 0;

  void validate() const {
    if (restarts < 1) throw ConfigError("AlgoConfig: restarts must be >= 1");
    if (!(epsilon > 0)) throw ConfigError("AlgoConfig: epsilon must be positive");
    if (max_outer_iters < 1) throw ConfigError("AlgoConfig: max_outer_iters must be >= 1");
  }
};

/// Channels rebased onto the covariance eigenbasis: H' = H U_Q S_Q^(1/2) and
/// t'_m = S_Q^(1/2) U_Q^H t_m. Must be recomputed whenever Q changes.
struct TransformedChannels {
  ComplexMatrix h_prime;   ///< N_r x N_t
  ComplexMatrix t_prime;   ///< M x N_t, row m = t'_m^H (same layout as T)
};

/// One-coefficient subproblem: maximize log2 det(A + alpha B + alpha^* B^H)
/// over |alpha| = 1. A is Hermitian PD, B has rank <= 1.
struct RankOneSubproblem {
  ComplexMatrix A;
  ComplexMatrix B;
  Complex lambda;            ///< tr(A^-1 B), the sole eigenvalue of A^-1 B
  bool diagonalizable;       ///< |lambda| above the zero threshold
};

TransformedChannels transformed_channels(const FlatChannelSet& ch, const Covariance& q);

RankOneSubproblem build_subproblem(int m, const TransformedChannels& tc,
                                   const FlatChannelSet& ch, const Reflection& refl,
                                   double sigma2, const ToleranceConfig& tol = {});

/// Closed-form optimum of the subproblem: exp(-j arg lambda), or 1 when the
/// objective does not depend on alpha.
Complex solve_subproblem(const RankOneSubproblem& sp);

/// Objective value of the subproblem at a given alpha (used by oracles).
double subproblem_objective(const RankOneSubproblem& sp, Complex alpha);

/// Capacity of the effective channel under unit-modulus reflection.
double objective(const FlatChannelSet& ch, const Reflection& refl, const Covariance& q,
                 double sigma2);

struct OptReport {
  Reflection final_reflection;
  Covariance final_Q;
  std::vector<double> rate_trace;  ///< objective before iterating, then per outer iteration
  int outer_iters = 0;
  int restarts_evaluated = 0;
  double wall_ms = 0.0;
};

/// Invoked after every single-variable update with the objective value at that
/// point; lets tests assert per-step monotonicity.
using StepObserver = std::function<void(double)>;

/// Alternating optimization of (reflection, covariance): L random restarts
/// scored with water-filled covariances, then coefficient sweeps with the
/// closed-form update followed by a water-filling covariance update, until the
/// relative objective increment drops below epsilon.
OptReport optimize(const FlatChannelSet& ch, double p_budget, double sigma2,
                   const AlgoConfig& cfg, const StepObserver& observer = {});

/// Same inner loop, but started from a given reflection (no restart scoring).
OptReport optimize_from(const FlatChannelSet& ch, double p_budget, double sigma2,
                        const AlgoConfig& cfg, const Reflection& init,
                        const StepObserver& observer = {});

/// Reflection-only variant: the covariance stays frozen (benchmark scheme).
OptReport optimize_fixed_q(const FlatChannelSet& ch, const Covariance& q_fixed,
                           double sigma2, const AlgoConfig& cfg);

}  // namespace irslab
