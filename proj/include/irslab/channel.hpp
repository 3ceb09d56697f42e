#pragma once

#include <cstdint>
#include <vector>

#include "irslab/numerics.hpp"
#include "irslab/rng.hpp"

namespace irslab {

/// Deployment geometry: transmitter at the origin, receiver d_bar_D away on the
/// x axis, surface offset (d_bar_h, d_bar_p) from the receiver's projection,
/// transmitter and surface elevated H_bar above the receiver.
struct GeometryConfig {
  double d_bar_D = 600.0;  ///< horizontal transmitter-receiver distance (m)
  double d_bar_h = 2.0;    ///< surface horizontal offset along x (m)
  double d_bar_p = 2.0;    ///< surface perpendicular offset (m)
  double H_bar = 10.0;     ///< altitude difference (m)
  double antenna_spacing_over_lambda = 0.5;   ///< ULA spacing d_A / lambda
  double element_spacing_over_lambda = 0.125; ///< surface element spacing d_I / lambda
  int M_x = 10;            ///< surface elements per row

  void validate() const {
    if (!(d_bar_D > 0 && d_bar_h > 0 && d_bar_p > 0 && H_bar > 0))
      throw ConfigError("GeometryConfig: distances must be positive");
    if (M_x < 1) throw ConfigError("GeometryConfig: M_x must be >= 1");
  }
};

struct LinkGeometry {
  double d_D, d_TI, d_IR;  ///< 3D link distances (m)
  double theta_D_aoa, theta_D_aod;
  double theta_TI_aoa, psi_TI_aoa, theta_TI_aod;
  double theta_IR_aoa, theta_IR_aod, psi_IR_aod;
};

struct PathLossModel {
  double beta0_db = -30.0;  ///< reference path loss (dB) at d0
  double d0 = 1.0;          ///< reference distance (m)
  double alpha_D = 3.5;
  double alpha_TI = 2.2;
  double alpha_IR = 2.8;

  void validate() const {
    if (!(d0 > 0)) throw ConfigError("PathLossModel: d0 must be positive");
    for (double e : {alpha_D, alpha_TI, alpha_IR})
      if (!(e >= 1.5 && e <= 6.0))
        throw ConfigError("PathLossModel: exponents must lie in [1.5, 6]");
  }
};

/// Rician factor in linear scale; pure line-of-sight (K -> infinity) is a
/// distinct state so the LoS limit is exact rather than approximated.
struct RicianFactor {
  double k = 0.0;
  bool pure_los = false;

  static RicianFactor rayleigh() { return {0.0, false}; }
  static RicianFactor infinite() { return {0.0, true}; }
  static RicianFactor finite(double k) { return {k, false}; }
};

/// Table-row convention for the surface-to-receiver LoS component. The printed
/// row reuses the transmitter-to-surface angles; the corrected reading uses the
/// surface-to-receiver ones. Both are selectable; corrected is the default.
enum class RLosAngles { ir_link, ti_link_as_printed };

struct RicianConfig {
  RicianFactor K_D, K_TI, K_IR;
  RLosAngles r_los_angles = RLosAngles::ir_link;

  void validate() const {
    for (const auto& f : {K_D, K_TI, K_IR})
      if (!f.pure_los && !(f.k >= 0)) throw ConfigError("RicianConfig: K must be >= 0");
  }
};

/// Frequency-flat channel triple: direct (N_r x N_t), transmitter-to-surface
/// (M x N_t), surface-to-receiver (N_r x M). Path loss is already included.
struct FlatChannelSet {
  ComplexMatrix H, T, R;

  int n_r() const { return static_cast<int>(H.rows()); }
  int n_t() const { return static_cast<int>(H.cols()); }
  int m() const { return static_cast<int>(T.rows()); }
};

struct TimeDomainChannelSet {
  std::vector<ComplexMatrix> taps_H, taps_T, taps_R;
};

/// Per-subcarrier channel triples, n = 0..N-1.
struct FreqChannelSet {
  std::vector<ComplexMatrix> H, T, R;

  int n_subcarriers() const { return static_cast<int>(H.size()); }
  FlatChannelSet at(int n) const { return FlatChannelSet{H[n], T[n], R[n]}; }
};

LinkGeometry link_geometry(const GeometryConfig& cfg);

/// Uniform linear array response; entry n has phase 2*pi*n*spacing*sin(theta).
ComplexVector ula_response(int n_elems, double theta, double spacing_over_lambda);

/// Uniform planar array response with M_x elements per row; element m (0-based)
/// has phase 2*pi*spacing*(floor(m/M_x)*sin(psi)*sin(theta)
///                         + (m - floor(m/M_x)*M_x)*sin(psi)*cos(theta)).
ComplexVector upa_response(int m_total, int m_x, double theta, double psi,
                           double spacing_over_lambda);

/// Linear power gain beta0 * (d/d0)^(-exponent).
double path_loss_linear(const PathLossModel& model, double d, double exponent);

/// Rician-faded flat channels. Deterministic in (configs, seed); each link has
/// its own derived stream and T/R are drawn element-major so a draw with larger
/// M extends a draw with smaller M.
FlatChannelSet draw_flat_channels(const GeometryConfig& geom, const PathLossModel& pl,
                                  const RicianConfig& ric, int n_t, int n_r, int m,
                                  std::uint64_t seed);

/// Rayleigh time-domain taps, tap l of each link i.i.d. CN(0, beta_link/L_link).
TimeDomainChannelSet draw_selective_channels(const GeometryConfig& geom,
                                             const PathLossModel& pl, int taps_d,
                                             int taps_ti, int taps_ir, int n_t, int n_r,
                                             int m, std::uint64_t seed);

/// DFT to per-subcarrier matrices: X[n] = sum_l X_l * exp(-j*2*pi*n*l/N).
FreqChannelSet to_frequency_domain(const TimeDomainChannelSet& td, int n_subcarriers);

}  // namespace irslab
