#include "irslab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace irslab {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

const std::vector<std::string> kExperiments = {
    "convergence",     "rate_vs_M_lowsnr", "rate_vs_M_highsnr",
    "rate_vs_P",       "ofdm_rate_vs_M",   "metrics_vs_M"};

const std::vector<std::string> kSchemes = {
    "proposed_flat", "low_snr",       "power_max",        "heuristic_power",
    "fixed_Q",       "random_phase",  "no_irs",           "miso",
    "simo",          "proposed_ofdm", "ofdm_upper_bound", "ofdm_heuristic",
    "ofdm_random_phase", "ofdm_no_irs", "ofdm_fixed_Q"};

bool is_ofdm_scheme(const std::string& s) { return s.rfind("ofdm", 0) == 0 || s == "proposed_ofdm"; }

int scheme_order(const std::string& s) {
  const auto it = std::find(kSchemes.begin(), kSchemes.end(), s);
  return static_cast<int>(it - kSchemes.begin());
}

RicianFactor parse_rician_factor(const json& j, const char* key) {
  if (!j.contains(key)) return RicianFactor::rayleigh();
  const auto& v = j.at(key);
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return RicianFactor::infinite();
    throw ConfigError(std::string("rician.") + key + ": expected a number or \"inf\"");
  }
  return RicianFactor::finite(v.get<double>());
}

// Stream tags for harness-derived randomness.
enum : std::uint64_t { kRealizationStream = 11, kSchemeStream = 13 };

struct SchemeOutput {
  double rate = 0.0;
  double total_power_lin = 0.0;
  double strongest_lin = 0.0;
  double condition_number = 0.0;
  double rank = 0.0;
  int outer_iters = 0;
};

SchemeOutput flat_metrics(const ComplexMatrix& h_tilde, double rate, int iters) {
  const ChannelMetrics m = channel_metrics(h_tilde);
  SchemeOutput out;
  out.rate = rate;
  out.total_power_lin = m.total_power;
  out.strongest_lin = m.strongest_eig_power;
  out.condition_number = m.condition_number;
  out.rank = m.rank;
  out.outer_iters = iters;
  return out;
}

SchemeOutput run_flat_scheme(const std::string& scheme, const FlatChannelSet& ch,
                             double p_watts, double sigma2, const AlgoConfig& algo,
                             std::uint64_t scheme_seed) {
  if (scheme == "no_irs") {
    const WaterfillResult wf = waterfill(ch.H, p_watts, sigma2);
    return flat_metrics(ch.H, wf.rate, 0);
  }
  if (scheme == "random_phase") {
    Rng rng = Rng(scheme_seed).derive(kSchemeStream);
    Reflection refl{ComplexVector(ch.m())};
    for (int m = 0; m < ch.m(); ++m) refl.alphas(m) = std::polar(1.0, rng.uniform_phase());
    const ComplexMatrix h = effective_channel(ch, refl);
    return flat_metrics(h, waterfill(h, p_watts, sigma2).rate, 0);
  }
  if (scheme == "proposed_flat") {
    const OptReport rep = optimize(ch, p_watts, sigma2, algo);
    const ComplexMatrix h = effective_channel(ch, rep.final_reflection);
    return flat_metrics(h, rep.rate_trace.back(), rep.outer_iters);
  }
  if (scheme == "low_snr") {
    const OptReport rep = low_snr_optimize(ch, p_watts, sigma2, algo);
    const ComplexMatrix h = effective_channel(ch, rep.final_reflection);
    return flat_metrics(h, waterfill(h, p_watts, sigma2).rate, rep.outer_iters);
  }
  if (scheme == "power_max") {
    const Reflection refl = power_max_optimize(ch, algo);
    const ComplexMatrix h = effective_channel(ch, refl);
    return flat_metrics(h, waterfill(h, p_watts, sigma2).rate, 0);
  }
  if (scheme == "heuristic_power") {
    const Reflection refl = heuristic_power_max(ch);
    const ComplexMatrix h = effective_channel(ch, refl);
    return flat_metrics(h, waterfill(h, p_watts, sigma2).rate, 0);
  }
  if (scheme == "fixed_Q") {
    const WaterfillResult direct = waterfill(ch.H, p_watts, sigma2);
    const OptReport rep = optimize_fixed_q(ch, direct.Q, sigma2, algo);
    const ComplexMatrix h = effective_channel(ch, rep.final_reflection);
    return flat_metrics(h, rep.rate_trace.back(), rep.outer_iters);
  }
  if (scheme == "miso") {
    const OptReport rep = miso_optimize(ch, p_watts, sigma2, algo);
    const ComplexMatrix h = effective_channel(ch, rep.final_reflection);
    return flat_metrics(h, rep.rate_trace.back(), rep.outer_iters);
  }
  if (scheme == "simo") {
    const OptReport rep = simo_optimize(ch, p_watts, sigma2, algo);
    const ComplexMatrix h = effective_channel(ch, rep.final_reflection);
    return flat_metrics(h, rep.rate_trace.back(), rep.outer_iters);
  }
  throw ConfigError("unknown flat scheme: " + scheme);
}

SchemeOutput ofdm_metrics(const std::vector<ComplexMatrix>& h_eff, double rate, int iters) {
  SchemeOutput out;
  out.rate = rate;
  double cond = 0.0;
  for (const auto& h : h_eff) {
    const ChannelMetrics m = channel_metrics(h);
    out.total_power_lin += m.total_power;
    out.strongest_lin += m.strongest_eig_power;
    cond += m.condition_number;
    out.rank += m.rank;
  }
  const double n = static_cast<double>(h_eff.size());
  out.total_power_lin /= n;
  out.strongest_lin /= n;
  out.condition_number = cond / n;
  out.rank /= n;
  out.outer_iters = iters;
  return out;
}

SchemeOutput run_ofdm_scheme(const std::string& scheme, const TimeDomainChannelSet& td,
                             const OfdmConfig& ofdm, const AlgoConfig& algo,
                             std::uint64_t scheme_seed) {
  const FreqChannelSet fc = to_frequency_domain(td, ofdm.n);
  auto effective_all = [&](const Reflection& refl) {
    std::vector<ComplexMatrix> h(fc.n_subcarriers());
    for (int n = 0; n < fc.n_subcarriers(); ++n) h[n] = effective_channel(fc.at(n), refl);
    return h;
  };

  if (scheme == "ofdm_no_irs") {
    const SfWaterfillResult sf = space_frequency_waterfill(fc.H, ofdm);
    return ofdm_metrics(fc.H, ofdm_rate(sf.sum_rate, ofdm), 0);
  }
  if (scheme == "ofdm_random_phase") {
    Rng rng = Rng(scheme_seed).derive(kSchemeStream);
    const int m_count = fc.T.empty() ? 0 : static_cast<int>(fc.T[0].rows());
    Reflection refl{ComplexVector(m_count)};
    for (int m = 0; m < m_count; ++m) refl.alphas(m) = std::polar(1.0, rng.uniform_phase());
    const auto h = effective_all(refl);
    const SfWaterfillResult sf = space_frequency_waterfill(h, ofdm);
    return ofdm_metrics(h, ofdm_rate(sf.sum_rate, ofdm), 0);
  }
  if (scheme == "ofdm_heuristic") {
    const Reflection refl = ofdm_heuristic_power(fc);
    const auto h = effective_all(refl);
    const SfWaterfillResult sf = space_frequency_waterfill(h, ofdm);
    return ofdm_metrics(h, ofdm_rate(sf.sum_rate, ofdm), 0);
  }
  if (scheme == "proposed_ofdm") {
    const OfdmOptReport rep = algorithm2(td, ofdm, algo);
    const auto h = effective_all(rep.final_reflection);
    return ofdm_metrics(h, ofdm_rate(rep.feasible_sum_rate, ofdm), rep.outer_iters);
  }
  if (scheme == "ofdm_upper_bound") {
    const double sum = upper_bound_per_subcarrier(td, ofdm, algo);
    // Per-subcarrier reflections have no single effective channel; report the
    // direct channel's metrics alongside the bound's rate.
    return ofdm_metrics(fc.H, ofdm_rate(sum, ofdm), 0);
  }
  if (scheme == "ofdm_fixed_Q") {
    const SfWaterfillResult direct = space_frequency_waterfill(fc.H, ofdm);
    const Reflection refl = ofdm_optimize_fixed_q(fc, direct.qs, ofdm.sigma_bar2, algo);
    const auto h = effective_all(refl);
    double sum = 0.0;
    for (int n = 0; n < fc.n_subcarriers(); ++n)
      sum += capacity(h[n], Covariance{direct.qs.Q[n], 0.0}, ofdm.sigma_bar2);
    return ofdm_metrics(h, ofdm_rate(sum, ofdm), 0);
  }
  throw ConfigError("unknown OFDM scheme: " + scheme);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (std::find(kExperiments.begin(), kExperiments.end(), experiment_id) ==
      kExperiments.end())
    throw ConfigError("unknown experiment id: " + experiment_id);
  if (realizations < 1) throw ConfigError("realizations must be >= 1");
  if (schemes.empty()) throw ConfigError("schemes must be non-empty");
  for (const auto& s : schemes) {
    if (std::find(kSchemes.begin(), kSchemes.end(), s) == kSchemes.end())
      throw ConfigError("unknown scheme: " + s);
    const bool ofdm_exp = experiment_id == "ofdm_rate_vs_M";
    if (ofdm_exp != is_ofdm_scheme(s))
      throw ConfigError("scheme " + s + " does not match experiment " + experiment_id);
  }
  if (experiment_id != "convergence" && sweep.empty())
    throw ConfigError("sweep must be non-empty");
  if (experiment_id == "ofdm_rate_vs_M") {
    if (!ofdm) throw ConfigError("ofdm experiments need an ofdm block");
    OfdmConfig probe;
    probe.n_f = ofdm->n_f;
    probe.n = ofdm->n;
    probe.mu = ofdm->mu;
    probe.sigma_bar2 = dbm_to_watts(noise_dbm - 10.0 * std::log10(ofdm->n_f));
    probe.p_budget = dbm_to_watts(power_dbm);
    probe.validate();
    const int l_max = std::max(ofdm->taps_d, ofdm->taps_ti + ofdm->taps_ir - 1);
    if (ofdm->mu < l_max)
      std::cerr << "warning: cyclic prefix (" << ofdm->mu
                << ") shorter than channel memory (" << l_max << ")\n";
  }
  geometry.validate();
  path_loss.validate();
  rician.validate();
  if (n_t < 1 || n_r < 1 || m_elements < 0) throw ConfigError("bad dimensions");
  AlgoConfig probe;
  probe.restarts = restarts;
  probe.epsilon = epsilon;
  probe.max_outer_iters = max_outer_iters;
  probe.validate();
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }

  ExperimentConfig cfg;
  try {
    cfg.experiment_id = j.at("experiment").get<std::string>();
    cfg.n_t = j.value("n_t", cfg.n_t);
    cfg.n_r = j.value("n_r", cfg.n_r);
    if (j.contains("sweep")) cfg.sweep = j.at("sweep").get<std::vector<double>>();
    cfg.m_elements = j.value("m_elements", cfg.m_elements);
    cfg.power_dbm = j.value("power_dbm", cfg.power_dbm);
    cfg.noise_dbm = j.value("noise_dbm", cfg.noise_dbm);
    cfg.realizations = j.value("realizations", cfg.realizations);
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    cfg.restarts = j.value("restarts", cfg.restarts);
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
    cfg.max_outer_iters = j.value("max_outer_iters", cfg.max_outer_iters);
    cfg.schemes = j.at("schemes").get<std::vector<std::string>>();
    cfg.output = j.value("output", cfg.output);

    if (j.contains("geometry")) {
      const auto& g = j.at("geometry");
      cfg.geometry.d_bar_D = g.value("d_bar_D", cfg.geometry.d_bar_D);
      cfg.geometry.d_bar_h = g.value("d_bar_h", cfg.geometry.d_bar_h);
      cfg.geometry.d_bar_p = g.value("d_bar_p", cfg.geometry.d_bar_p);
      cfg.geometry.H_bar = g.value("H_bar", cfg.geometry.H_bar);
      cfg.geometry.antenna_spacing_over_lambda =
          g.value("antenna_spacing_over_lambda", cfg.geometry.antenna_spacing_over_lambda);
      cfg.geometry.element_spacing_over_lambda =
          g.value("element_spacing_over_lambda", cfg.geometry.element_spacing_over_lambda);
    }
    if (j.contains("path_loss")) {
      const auto& p = j.at("path_loss");
      cfg.path_loss.beta0_db = p.value("beta0_db", cfg.path_loss.beta0_db);
      cfg.path_loss.d0 = p.value("d0", cfg.path_loss.d0);
      cfg.path_loss.alpha_D = p.value("alpha_D", cfg.path_loss.alpha_D);
      cfg.path_loss.alpha_TI = p.value("alpha_TI", cfg.path_loss.alpha_TI);
      cfg.path_loss.alpha_IR = p.value("alpha_IR", cfg.path_loss.alpha_IR);
    }
    if (j.contains("rician")) {
      const auto& r = j.at("rician");
      cfg.rician.K_D = parse_rician_factor(r, "K_D");
      cfg.rician.K_TI = parse_rician_factor(r, "K_TI");
      cfg.rician.K_IR = parse_rician_factor(r, "K_IR");
      const std::string conv = r.value("r_los_angles", std::string("ir_link"));
      if (conv == "ir_link")
        cfg.rician.r_los_angles = RLosAngles::ir_link;
      else if (conv == "ti_link_as_printed")
        cfg.rician.r_los_angles = RLosAngles::ti_link_as_printed;
      else
        throw ConfigError("rician.r_los_angles: expected ir_link or ti_link_as_printed");
    }
    if (j.contains("ofdm")) {
      const auto& o = j.at("ofdm");
      OfdmBlock b;
      b.n_f = o.value("n_f", b.n_f);
      b.n = o.value("n", b.n);
      b.mu = o.value("mu", b.mu);
      b.taps_d = o.value("taps_D", b.taps_d);
      b.taps_ti = o.value("taps_TI", b.taps_ti);
      b.taps_ir = o.value("taps_IR", b.taps_ir);
      cfg.ofdm = b;
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
  return cfg;
}

const std::vector<std::string>& registered_schemes() { return kSchemes; }
const std::vector<std::string>& registered_experiments() { return kExperiments; }

namespace {

std::vector<ResultRow> realization_rows(const ExperimentConfig& cfg, int r) {
  const Rng master(cfg.master_seed);
  const std::uint64_t ch_seed =
      master.derive(kRealizationStream, static_cast<std::uint64_t>(r)).origin_seed();
  const double p_watts = dbm_to_watts(cfg.power_dbm);
  const double sigma2 = dbm_to_watts(cfg.noise_dbm);

  auto algo_for = [&](const std::string& scheme) {
    AlgoConfig a;
    a.restarts = cfg.restarts;
    a.epsilon = cfg.epsilon;
    a.max_outer_iters = cfg.max_outer_iters;
    a.seed = Rng(ch_seed).derive(kSchemeStream, scheme_order(scheme)).origin_seed();
    return a;
  };
  auto base_row = [&](const std::string& scheme, double sweep_value) {
    ResultRow row;
    row.experiment_id = cfg.experiment_id;
    row.scheme = scheme;
    row.sweep_value = sweep_value;
    row.realization_index = r;
    row.seed = ch_seed;
    return row;
  };
  auto fill = [&](ResultRow& row, const SchemeOutput& out, double wall_ms) {
    row.rate = out.rate;
    row.channel_total_power = db_of(out.total_power_lin);
    row.strongest_eig_power = db_of(out.strongest_lin);
    row.condition_number = out.condition_number;
    row.rank = out.rank;
    row.outer_iters = out.outer_iters;
    row.wall_ms = cfg.record_timing ? wall_ms : 0.0;
  };

  std::vector<ResultRow> rows;

  if (cfg.experiment_id == "convergence") {
    GeometryConfig geom = cfg.geometry;
    geom.M_x = std::min(cfg.m_elements, 10);
    const FlatChannelSet ch = draw_flat_channels(geom, cfg.path_loss, cfg.rician, cfg.n_t,
                                                 cfg.n_r, cfg.m_elements, ch_seed);
    for (const auto& scheme : cfg.schemes) {
      const auto t0 = Clock::now();
      const OptReport rep = optimize(ch, p_watts, sigma2, algo_for(scheme));
      const double ms =
          std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
      const ComplexMatrix h = effective_channel(ch, rep.final_reflection);
      const SchemeOutput metrics = flat_metrics(h, 0.0, rep.outer_iters);
      for (std::size_t k = 0; k < rep.rate_trace.size(); ++k) {
        ResultRow row = base_row(scheme, static_cast<double>(k));
        SchemeOutput out = metrics;
        out.rate = rep.rate_trace[k];
        fill(row, out, ms);
        rows.push_back(std::move(row));
      }
    }
    return rows;
  }

  if (cfg.experiment_id == "ofdm_rate_vs_M") {
    OfdmConfig ocfg;
    ocfg.n_f = cfg.ofdm->n_f;
    ocfg.n = cfg.ofdm->n;
    ocfg.mu = cfg.ofdm->mu;
    ocfg.sigma_bar2 = dbm_to_watts(cfg.noise_dbm - 10.0 * std::log10(cfg.ofdm->n_f));
    ocfg.p_budget = p_watts;
    for (double m_val : cfg.sweep) {
      const int m = static_cast<int>(m_val);
      const TimeDomainChannelSet td =
          draw_selective_channels(cfg.geometry, cfg.path_loss, cfg.ofdm->taps_d,
                                  cfg.ofdm->taps_ti, cfg.ofdm->taps_ir, cfg.n_t, cfg.n_r,
                                  m, ch_seed);
      for (const auto& scheme : cfg.schemes) {
        const auto t0 = Clock::now();
        const SchemeOutput out =
            run_ofdm_scheme(scheme, td, ocfg, algo_for(scheme), ch_seed);
        const double ms =
            std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        ResultRow row = base_row(scheme, m_val);
        fill(row, out, ms);
        rows.push_back(std::move(row));
      }
    }
    return rows;
  }

  if (cfg.experiment_id == "rate_vs_P") {
    GeometryConfig geom = cfg.geometry;
    geom.M_x = std::min(cfg.m_elements, 10);
    const FlatChannelSet ch = draw_flat_channels(geom, cfg.path_loss, cfg.rician, cfg.n_t,
                                                 cfg.n_r, cfg.m_elements, ch_seed);
    for (double p_dbm : cfg.sweep) {
      const double p = dbm_to_watts(p_dbm);
      for (const auto& scheme : cfg.schemes) {
        const auto t0 = Clock::now();
        const SchemeOutput out = run_flat_scheme(scheme, ch, p, sigma2, algo_for(scheme),
                                                 ch_seed);
        const double ms =
            std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        ResultRow row = base_row(scheme, p_dbm);
        fill(row, out, ms);
        rows.push_back(std::move(row));
      }
    }
    return rows;
  }

  // rate_vs_M_lowsnr / rate_vs_M_highsnr / metrics_vs_M: flat M sweep. The
  // direct channel's stream does not depend on M and T/R draws are nested, so
  // rows for different M share the same underlying fading.
  for (double m_val : cfg.sweep) {
    const int m = static_cast<int>(m_val);
    GeometryConfig geom = cfg.geometry;
    geom.M_x = std::min(std::max(m, 1), 10);
    const FlatChannelSet ch =
        draw_flat_channels(geom, cfg.path_loss, cfg.rician, cfg.n_t, cfg.n_r, m, ch_seed);
    for (const auto& scheme : cfg.schemes) {
      const auto t0 = Clock::now();
      const SchemeOutput out = run_flat_scheme(scheme, ch, p_watts, sigma2,
                                               algo_for(scheme), ch_seed);
      const double ms =
          std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
      ResultRow row = base_row(scheme, m_val);
      fill(row, out, ms);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

std::vector<ResultRow> run_rows(const ExperimentConfig& cfg) {
  cfg.validate();

  std::vector<std::vector<ResultRow>> per_realization(cfg.realizations);
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = std::min<unsigned>(hw, cfg.realizations);

  std::exception_ptr error;
  std::mutex error_mutex;
  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= cfg.realizations) return;
      try {
        per_realization[r] = realization_rows(cfg, r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned i = 0; i + 1 < workers; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  std::vector<ResultRow> rows;
  for (auto& part : per_realization)
    for (auto& row : part) rows.push_back(std::move(row));

  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.sweep_value != b.sweep_value) return a.sweep_value < b.sweep_value;
    if (a.realization_index != b.realization_index)
      return a.realization_index < b.realization_index;
    return scheme_order(a.scheme) < scheme_order(b.scheme);
  });
  return rows;
}

void write_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!out) throw IoError("cannot open output file: " + path);
  out << "experiment_id,scheme,sweep_value,realization_index,seed,rate,"
         "channel_total_power,strongest_eig_power,condition_number,rank,outer_iters,"
         "wall_ms\n";
  for (const auto& r : rows) {
    out << r.experiment_id << ',' << r.scheme << ',' << format_double(r.sweep_value) << ','
        << r.realization_index << ',' << r.seed << ',' << format_double(r.rate) << ','
        << format_double(r.channel_total_power) << ','
        << format_double(r.strongest_eig_power) << ','
        << format_double(r.condition_number) << ',' << format_double(r.rank) << ','
        << r.outer_iters << ',' << format_double(r.wall_ms) << '\n';
  }
  if (!out) throw IoError("failed while writing: " + path);
}

void run(const ExperimentConfig& cfg) {
  const std::vector<ResultRow> rows = run_rows(cfg);
  write_csv(rows, cfg.output);

  struct Agg {
    double sum = 0.0, sum_sq = 0.0;
    int n = 0;
  };
  std::map<std::pair<double, std::string>, Agg> by_key;
  for (const auto& r : rows) {
    Agg& a = by_key[{r.sweep_value, r.scheme}];
    a.sum += r.rate;
    a.sum_sq += r.rate * r.rate;
    a.n += 1;
  }

  std::cout << "experiment: " << cfg.experiment_id << "  rows: " << rows.size()
            << "  output: " << cfg.output << "\n";
  std::cout << "sweep      scheme               mean_rate    stderr\n";
  for (const auto& [key, a] : by_key) {
    const double mean = a.sum / a.n;
    const double var = std::max(0.0, a.sum_sq / a.n - mean * mean);
    const double se = a.n > 1 ? std::sqrt(var / (a.n - 1)) : 0.0;
    std::printf("%-10g %-20s %-12.6g %-12.4g\n", key.first, key.second.c_str(), mean, se);
  }
}

}  // namespace irslab
