#pragma once

#include <optional>
#include <string>
#include <vector>

#include "irslab/opt_asymptotic.hpp"
#include "irslab/opt_ofdm.hpp"

namespace irslab {

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double db_of(double linear) { return 10.0 * std::log10(linear); }

struct OfdmBlock {
  int n_f = 512;
  int n = 8;
  int mu = 128;
  int taps_d = 2;
  int taps_ti = 1;
  int taps_ir = 1;
};

/// One experiment: an id from the registry, a sweep, system dimensions, the
/// channel model blocks and the scheme list. Loaded from a JSON config file.
struct ExperimentConfig {
  std::string experiment_id;
  int n_t = 4;
  int n_r = 4;
  std::vector<double> sweep;   ///< M values, or P values in dBm for rate_vs_P
  int m_elements = 40;         ///< fixed M for convergence / rate_vs_P
  double power_dbm = 30.0;
  double noise_dbm = -90.0;
  int realizations = 20;
  std::uint64_t master_seed = 1;
  int restarts = 20;
  double epsilon = 1e-5;
  int max_outer_iters = 200;
  std::vector<std::string> schemes;
  std::string output = "results.csv";
  GeometryConfig geometry;
  PathLossModel path_loss;
  RicianConfig rician;
  std::optional<OfdmBlock> ofdm;
  bool record_timing = false;  ///< wall_ms column stays 0 unless enabled

  void validate() const;
};

struct ResultRow {
  std::string experiment_id;
  std::string scheme;
  double sweep_value = 0.0;
  int realization_index = 0;
  std::uint64_t seed = 0;
  double rate = 0.0;                 ///< bits/s/Hz
  double channel_total_power = 0.0;  ///< dB
  double strongest_eig_power = 0.0;  ///< dB
  double condition_number = 0.0;
  double rank = 0.0;
  int outer_iters = 0;
  double wall_ms = 0.0;
};

ExperimentConfig load_config(const std::string& path);

/// Names understood by the runner, in report order.
const std::vector<std::string>& registered_schemes();
const std::vector<std::string>& registered_experiments();

/// Runs every (sweep value, realization, scheme) combination; rows come back
/// sorted by (sweep value, realization, scheme order). Realizations execute
/// concurrently with per-realization derived seeds, so the row contents do not
/// depend on scheduling.
std::vector<ResultRow> run_rows(const ExperimentConfig& cfg);

/// run_rows + CSV file + per-(scheme, sweep) mean/standard-error summary on
/// stdout.
void run(const ExperimentConfig& cfg);

void write_csv(const std::vector<ResultRow>& rows, const std::string& path);

}  // namespace irslab
