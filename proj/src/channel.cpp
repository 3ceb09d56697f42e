#include "irslab/channel.hpp"

#include <cmath>

namespace irslab {

namespace {

// Stream tags for per-link substreams.
enum : std::uint64_t { kStreamH = 1, kStreamT = 2, kStreamR = 3 };

ComplexMatrix rician_mix(double beta, const RicianFactor& k, const ComplexMatrix& los,
                         const ComplexMatrix& nlos) {
  if (k.pure_los) return std::sqrt(beta) * los;
  const double scale = std::sqrt(beta / (k.k + 1.0));
  return scale * (std::sqrt(k.k) * los + nlos);
}

}  // namespace

LinkGeometry link_geometry(const GeometryConfig& cfg) {
  cfg.validate();
  LinkGeometry g{};
  g.d_D = std::hypot(cfg.d_bar_D, cfg.H_bar);
  g.d_TI = std::hypot(cfg.d_bar_D - cfg.d_bar_h, cfg.d_bar_p);
  g.d_IR = std::sqrt(cfg.d_bar_h * cfg.d_bar_h + cfg.d_bar_p * cfg.d_bar_p +
                     cfg.H_bar * cfg.H_bar);
  g.theta_D_aoa = 0.0;
  g.theta_D_aod = 0.0;
  g.theta_TI_aoa = std::atan((cfg.d_bar_D - cfg.d_bar_h) / cfg.d_bar_p);
  g.psi_TI_aoa = 0.0;
  g.theta_TI_aod = M_PI / 2.0 - g.theta_TI_aoa;
  g.theta_IR_aoa = std::atan(cfg.d_bar_h / cfg.d_bar_p);
  g.theta_IR_aod = M_PI / 2.0 - g.theta_IR_aoa;
  g.psi_IR_aod = std::atan(-cfg.H_bar / std::hypot(cfg.d_bar_p, cfg.d_bar_h));
  return g;
}

ComplexVector ula_response(int n_elems, double theta, double spacing_over_lambda) {
  require(n_elems >= 1, "ula_response: need at least one element");
  ComplexVector v(n_elems);
  const double step = 2.0 * M_PI * spacing_over_lambda * std::sin(theta);
  for (int n = 0; n < n_elems; ++n) v(n) = std::polar(1.0, step * n);
  return v;
}

ComplexVector upa_response(int m_total, int m_x, double theta, double psi,
                           double spacing_over_lambda) {
  require(m_total >= 1 && m_x >= 1, "upa_response: need at least one element");
  ComplexVector v(m_total);
  const double sp = std::sin(psi);
  const double st = std::sin(theta);
  const double ct = std::cos(theta);
  for (int m = 0; m < m_total; ++m) {
    const int row = m / m_x;
    const int col = m - row * m_x;
    const double phase = 2.0 * M_PI * spacing_over_lambda * (row * sp * st + col * sp * ct);
    v(m) = std::polar(1.0, phase);
  }
  return v;
}

double path_loss_linear(const PathLossModel& model, double d, double exponent) {
  require(d > 0, "path_loss_linear: distance must be positive");
  return std::pow(10.0, model.beta0_db / 10.0) * std::pow(d / model.d0, -exponent);
}

FlatChannelSet draw_flat_channels(const GeometryConfig& geom, const PathLossModel& pl,
                                  const RicianConfig& ric, int n_t, int n_r, int m,
                                  std::uint64_t seed) {
  geom.validate();
  pl.validate();
  ric.validate();
  require(n_t >= 1 && n_r >= 1 && m >= 0, "draw_flat_channels: bad dimensions");

  const LinkGeometry lg = link_geometry(geom);
  const double beta_d = path_loss_linear(pl, lg.d_D, pl.alpha_D);
  const double beta_ti = path_loss_linear(pl, lg.d_TI, pl.alpha_TI);
  const double beta_ir = path_loss_linear(pl, lg.d_IR, pl.alpha_IR);

  const double da = geom.antenna_spacing_over_lambda;
  const double di = geom.element_spacing_over_lambda;

  const ComplexMatrix h_los =
      ula_response(n_r, lg.theta_D_aoa, da) * ula_response(n_t, lg.theta_D_aod, da).adjoint();

  const Rng base(seed);
  FlatChannelSet ch;

  {
    Rng rng = base.derive(kStreamH);
    ComplexMatrix nlos(n_r, n_t);
    if (!ric.K_D.pure_los)
      for (int i = 0; i < n_r; ++i)
        for (int j = 0; j < n_t; ++j) nlos(i, j) = rng.cnormal(1.0);
    ch.H = rician_mix(beta_d, ric.K_D, h_los, nlos);
  }

  ComplexMatrix t_los, r_los;
  if (m > 0) {
    t_los = upa_response(m, geom.M_x, lg.theta_TI_aoa, lg.psi_TI_aoa, di) *
            ula_response(n_t, lg.theta_TI_aod, da).adjoint();
    if (ric.r_los_angles == RLosAngles::ir_link) {
      r_los = ula_response(n_r, lg.theta_IR_aoa, da) *
              upa_response(m, geom.M_x, lg.theta_IR_aod, lg.psi_IR_aod, di).adjoint();
    } else {
      // Literal table row; its surface elevation angle is undefined there, so the
      // transmitter-link value (zero) is carried over.
      r_los = ula_response(n_r, lg.theta_TI_aoa, da) *
              upa_response(m, geom.M_x, lg.theta_TI_aod, lg.psi_TI_aoa, di).adjoint();
    }
  } else {
    t_los = ComplexMatrix::Zero(0, n_t);
    r_los = ComplexMatrix::Zero(n_r, 0);
  }

  {
    Rng rng = base.derive(kStreamT);
    ComplexMatrix nlos(m, n_t);
    if (!ric.K_TI.pure_los)
      for (int i = 0; i < m; ++i)  // element-major: row i belongs to surface element i
        for (int j = 0; j < n_t; ++j) nlos(i, j) = rng.cnormal(1.0);
    ch.T = rician_mix(beta_ti, ric.K_TI, t_los, nlos);
  }
  {
    Rng rng = base.derive(kStreamR);
    ComplexMatrix nlos(n_r, m);
    if (!ric.K_IR.pure_los)
      for (int j = 0; j < m; ++j)  // element-major: column j belongs to surface element j
        for (int i = 0; i < n_r; ++i) nlos(i, j) = rng.cnormal(1.0);
    ch.R = rician_mix(beta_ir, ric.K_IR, r_los, nlos);
  }
  return ch;
}

TimeDomainChannelSet draw_selective_channels(const GeometryConfig& geom,
                                             const PathLossModel& pl, int taps_d,
                                             int taps_ti, int taps_ir, int n_t, int n_r,
                                             int m, std::uint64_t seed) {
  geom.validate();
  pl.validate();
  require(taps_d >= 1 && taps_ti >= 1 && taps_ir >= 1,
          "draw_selective_channels: tap counts must be >= 1");
  require(n_t >= 1 && n_r >= 1 && m >= 0, "draw_selective_channels: bad dimensions");

  const LinkGeometry lg = link_geometry(geom);
  const double beta_d = path_loss_linear(pl, lg.d_D, pl.alpha_D);
  const double beta_ti = path_loss_linear(pl, lg.d_TI, pl.alpha_TI);
  const double beta_ir = path_loss_linear(pl, lg.d_IR, pl.alpha_IR);

  const Rng base(seed);
  TimeDomainChannelSet td;

  for (int l = 0; l < taps_d; ++l) {
    Rng rng = base.derive(kStreamH, static_cast<std::uint64_t>(l));
    ComplexMatrix tap(n_r, n_t);
    for (int i = 0; i < n_r; ++i)
      for (int j = 0; j < n_t; ++j) tap(i, j) = rng.cnormal(beta_d / taps_d);
    td.taps_H.push_back(std::move(tap));
  }
  for (int l = 0; l < taps_ti; ++l) {
    Rng rng = base.derive(kStreamT, static_cast<std::uint64_t>(l));
    ComplexMatrix tap(m, n_t);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n_t; ++j) tap(i, j) = rng.cnormal(beta_ti / taps_ti);
    td.taps_T.push_back(std::move(tap));
  }
  for (int l = 0; l < taps_ir; ++l) {
    Rng rng = base.derive(kStreamR, static_cast<std::uint64_t>(l));
    ComplexMatrix tap(n_r, m);
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < n_r; ++i) tap(i, j) = rng.cnormal(beta_ir / taps_ir);
    td.taps_R.push_back(std::move(tap));
  }
  return td;
}

FreqChannelSet to_frequency_domain(const TimeDomainChannelSet& td, int n_subcarriers) {
  const auto max_taps = std::max(
      {td.taps_H.size(), td.taps_T.size(), td.taps_R.size()});
  if (n_subcarriers < static_cast<int>(max_taps))
    throw ConfigError("to_frequency_domain: subcarrier count below tap count");

  auto dft = [n_subcarriers](const std::vector<ComplexMatrix>& taps) {
    std::vector<ComplexMatrix> out(n_subcarriers);
    for (int n = 0; n < n_subcarriers; ++n) {
      ComplexMatrix acc = ComplexMatrix::Zero(taps[0].rows(), taps[0].cols());
      for (std::size_t l = 0; l < taps.size(); ++l) {
        const double phase = -2.0 * M_PI * static_cast<double>(n) *
                             static_cast<double>(l) / n_subcarriers;
        acc += std::polar(1.0, phase) * taps[l];
      }
      out[n] = std::move(acc);
    }
    return out;
  };

  FreqChannelSet fc;
  fc.H = dft(td.taps_H);
  fc.T = dft(td.taps_T);
  fc.R = dft(td.taps_R);
  return fc;
}

}  // namespace irslab
