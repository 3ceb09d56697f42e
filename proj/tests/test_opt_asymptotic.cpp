#include <doctest.h>

#include "irslab/opt_asymptotic.hpp"
#include "test_util.hpp"

using namespace irslab;
using test::random_channels;
using test::random_matrix;

namespace {

Complex unit_phase(Complex z) {
  const double a = std::abs(z);
  return a > 0.0 ? z / a : Complex(1.0, 0.0);
}

}  // namespace

TEST_SUITE_BEGIN("opt_asymptotic");

TEST_CASE("low-SNR phase alignment beats an exhaustive grid") {
  Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const FlatChannelSet ch = random_channels(rng, 3, 3, 1);
    ComplexVector x = random_matrix(rng, 3, 1);
    ComplexVector y = random_matrix(rng, 3, 1);
    x /= x.norm();
    y /= y.norm();

    const Complex direct = (x.adjoint() * ch.H * y)(0);
    const Complex coupling = (x.adjoint() * ch.R)(0, 0) * (ch.T * y)(0);
    const Complex star = unit_phase(direct) * std::conj(unit_phase(coupling));

    const double achieved = std::norm(direct + star * coupling);
    for (int g = 0; g < 4096; ++g) {
      const Complex a = std::polar(1.0, 2 * M_PI * g / 4096.0);
      CHECK(achieved >= std::norm(direct + a * coupling) - 1e-9);
    }
  }
}

TEST_CASE("low-SNR optimizer: trace, final covariance, degenerate direct link") {
  Rng rng(42);
  const double p = 2.0, sigma2 = 0.01;

  const FlatChannelSet ch = random_channels(rng, 3, 4, 6);
  AlgoConfig cfg;
  cfg.seed = 5;
  const OptReport rep = low_snr_optimize(ch, p, sigma2, cfg);

  for (std::size_t k = 1; k < rep.rate_trace.size(); ++k)
    CHECK(rep.rate_trace[k] >= rep.rate_trace[k - 1] - 1e-9);
  CHECK(rep.final_reflection.is_unit_modulus(1e-9));

  const ComplexMatrix h = effective_channel(ch, rep.final_reflection);
  const auto dec = svd(h);
  const double gain = dec.singular_values(0) * dec.singular_values(0);
  CHECK(rep.rate_trace.back() ==
        doctest::Approx(std::log2(1.0 + p * gain / sigma2)).epsilon(1e-6));
  CHECK(rep.final_Q.Q.real().trace() == doctest::Approx(p).epsilon(1e-9));
  CHECK(capacity(h, rep.final_Q, sigma2) ==
        doctest::Approx(rep.rate_trace.back()).epsilon(1e-6));

  // Single reflected path with no direct link: the phase is immaterial and the
  // strongest eigenchannel power equals ||r||^2 ||t||^2.
  FlatChannelSet bare = random_channels(rng, 3, 4, 1);
  bare.H.setZero();
  const OptReport rep2 = low_snr_optimize(bare, p, sigma2, cfg);
  const double expected = bare.R.col(0).squaredNorm() * bare.T.row(0).squaredNorm();
  CHECK(rep2.rate_trace.back() ==
        doctest::Approx(std::log2(1.0 + p * expected / sigma2)).epsilon(1e-9));
}

TEST_CASE("power-max sweep: per-update monotone and grid-optimal") {
  Rng rng(43);

  SUBCASE("single element matches the 4096-point grid") {
    for (int trial = 0; trial < 5; ++trial) {
      const FlatChannelSet ch = random_channels(rng, 3, 3, 1);
      Reflection init{ComplexVector(1)};
      init.alphas(0) = std::polar(1.0, rng.uniform_phase());
      const Reflection out = power_max_optimize_from(ch, AlgoConfig{}, init);
      const double achieved = effective_channel(ch, out).squaredNorm();
      for (int g = 0; g < 4096; ++g) {
        Reflection probe{ComplexVector(1)};
        probe.alphas(0) = std::polar(1.0, 2 * M_PI * g / 4096.0);
        CHECK(achieved >= effective_channel(ch, probe).squaredNorm() - 1e-9);
      }
    }
  }

  SUBCASE("every single-coefficient update increases the total power") {
    const FlatChannelSet ch = random_channels(rng, 4, 4, 8);
    Reflection refl{ComplexVector(8)};
    for (int m = 0; m < 8; ++m) refl.alphas(m) = std::polar(1.0, rng.uniform_phase());

    double prev = effective_channel(ch, refl).squaredNorm();
    for (int sweep = 0; sweep < 3; ++sweep) {
      for (int m = 0; m < 8; ++m) {
        ComplexMatrix d_minus = ch.H;
        for (int i = 0; i < 8; ++i)
          if (i != m) d_minus += refl.alphas(i) * ch.R.col(i) * ch.T.row(i);
        const Complex beta = ch.R.col(m).dot(d_minus * ch.T.row(m).adjoint());
        refl.alphas(m) = unit_phase(beta);
        const double cur = effective_channel(ch, refl).squaredNorm();
        CHECK(cur >= prev - 1e-9 * prev);
        prev = cur;
      }
    }
  }

  SUBCASE("zero direct link, single element: power is phase-invariant") {
    FlatChannelSet ch = random_channels(rng, 2, 3, 1);
    ch.H.setZero();
    AlgoConfig cfg;
    cfg.seed = 3;
    const Reflection out = power_max_optimize(ch, cfg);
    const double expected = ch.R.col(0).squaredNorm() * ch.T.row(0).squaredNorm();
    CHECK(effective_channel(ch, out).squaredNorm() ==
          doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("SISO total power equals the heuristic's aligned optimum") {
    const FlatChannelSet ch = random_channels(rng, 1, 1, 5);
    AlgoConfig cfg;
    cfg.seed = 9;
    cfg.epsilon = 1e-13;  // drive the sweep all the way to the aligned optimum
    const Reflection swept = power_max_optimize(ch, cfg);
    const Reflection heur = heuristic_power_max(ch);
    const double p_swept = effective_channel(ch, swept).squaredNorm();
    const double p_heur = effective_channel(ch, heur).squaredNorm();
    CHECK(p_swept == doctest::Approx(p_heur).epsilon(1e-8));
  }
}

TEST_CASE("MISO optimizer") {
  Rng rng(44);
  const double p = 1.0, sigma2 = 0.02;

  SUBCASE("contract on dimensions") {
    const FlatChannelSet wide = random_channels(rng, 2, 4, 3);
    CHECK_THROWS_AS(miso_optimize(wide, p, sigma2, AlgoConfig{}), ContractViolation);
    const FlatChannelSet tall = random_channels(rng, 3, 2, 3);
    CHECK_THROWS_AS(simo_optimize(tall, p, sigma2, AlgoConfig{}), ContractViolation);
  }

  SUBCASE("no surface: maximum ratio transmission on the direct channel") {
    FlatChannelSet ch;
    ch.H = random_matrix(rng, 1, 4);
    ch.T = ComplexMatrix::Zero(0, 4);
    ch.R = ComplexMatrix::Zero(1, 0);
    const OptReport rep = miso_optimize(ch, p, sigma2, AlgoConfig{});
    CHECK(rep.rate_trace.back() ==
          doctest::Approx(std::log2(1.0 + p * ch.H.squaredNorm() / sigma2)).epsilon(1e-12));
    CHECK(capacity(ch.H, rep.final_Q, sigma2) ==
          doctest::Approx(rep.rate_trace.back()).epsilon(1e-9));
  }

  SUBCASE("single update achieves the stated optimal value") {
    for (int trial = 0; trial < 5; ++trial) {
      const FlatChannelSet ch = random_channels(rng, 1, 3, 1);
      Reflection init{ComplexVector(1)};
      init.alphas(0) = std::polar(1.0, rng.uniform_phase());
      const Reflection out = power_max_optimize_from(ch, AlgoConfig{}, init);

      // Stated optimal value: ||h_-m||^2 + ||r* t^H||^2 + 2 |r (h_-m^H ...) t|.
      const ComplexMatrix d_minus = ch.H;
      const Complex beta = ch.R.col(0).dot(d_minus * ch.T.row(0).adjoint());
      const double stated = d_minus.squaredNorm() +
                            ch.R.col(0).squaredNorm() * ch.T.row(0).squaredNorm() +
                            2.0 * std::abs(beta);
      CHECK(effective_channel(ch, out).squaredNorm() ==
            doctest::Approx(stated).epsilon(1e-10));
    }
  }

  SUBCASE("agrees with the general alternating optimizer (or both are fixed points)") {
    int agreements = 0;
    for (int trial = 0; trial < 5; ++trial) {
      const FlatChannelSet ch = random_channels(rng, 1, 4, 8);
      AlgoConfig cfg;
      cfg.seed = 900 + trial;
      cfg.epsilon = 1e-10;  // both must settle well below the 1e-6 comparison
      const OptReport fast = miso_optimize(ch, p, sigma2, cfg);
      const OptReport full = optimize(ch, p, sigma2, cfg);
      if (std::abs(fast.rate_trace.back() - full.rate_trace.back()) < 1e-6) {
        ++agreements;
      } else {
        int sweeps = 0;
        const Reflection again =
            power_max_optimize_from(ch, cfg, fast.final_reflection, &sweeps);
        CHECK(effective_channel(ch, again).squaredNorm() <=
              effective_channel(ch, fast.final_reflection).squaredNorm() *
                  (1.0 + cfg.epsilon));
        AlgoConfig one = cfg;
        one.max_outer_iters = 1;
        const OptReport extra = optimize_from(ch, p, sigma2, one, full.final_reflection);
        CHECK(extra.rate_trace.back() - extra.rate_trace.front() <=
              cfg.epsilon * std::max(extra.rate_trace.front(), 1e-12));
      }
    }
    CHECK(agreements >= 3);
  }
}

TEST_CASE("SIMO optimizer mirrors MISO with transposed roles") {
  Rng rng(45);
  const double p = 1.0, sigma2 = 0.02;

  FlatChannelSet ch;
  ch.H = random_matrix(rng, 4, 1);
  ch.T = ComplexMatrix::Zero(0, 1);
  ch.R = ComplexMatrix::Zero(4, 0);
  const OptReport rep = simo_optimize(ch, p, sigma2, AlgoConfig{});
  CHECK(rep.rate_trace.back() ==
        doctest::Approx(std::log2(1.0 + p * ch.H.squaredNorm() / sigma2)).epsilon(1e-12));
  CHECK(rep.final_Q.Q(0, 0).real() == doctest::Approx(p));

  // Single update achieves the stated optimal value with transposed roles.
  for (int trial = 0; trial < 5; ++trial) {
    const FlatChannelSet sc = random_channels(rng, 3, 1, 1);
    Reflection init{ComplexVector(1)};
    init.alphas(0) = std::polar(1.0, rng.uniform_phase());
    const Reflection out = power_max_optimize_from(sc, AlgoConfig{}, init);
    const Complex beta = sc.R.col(0).dot(sc.H * sc.T.row(0).adjoint());
    const double stated = sc.H.squaredNorm() +
                          sc.R.col(0).squaredNorm() * sc.T.row(0).squaredNorm() +
                          2.0 * std::abs(beta);
    CHECK(effective_channel(sc, out).squaredNorm() ==
          doctest::Approx(stated).epsilon(1e-10));
  }

  int agreements = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const FlatChannelSet sc = random_channels(rng, 4, 1, 8);
    AlgoConfig cfg;
    cfg.seed = 950 + trial;
    cfg.epsilon = 1e-10;
    const OptReport fast = simo_optimize(sc, p, sigma2, cfg);
    const OptReport full = optimize(sc, p, sigma2, cfg);
    if (std::abs(fast.rate_trace.back() - full.rate_trace.back()) < 1e-6) ++agreements;
  }
  CHECK(agreements >= 3);
}

TEST_CASE("total-power heuristic") {
  Rng rng(46);

  SUBCASE("aligned sum reaches its closed-form value") {
    const FlatChannelSet ch = random_channels(rng, 3, 4, 6);
    const Reflection refl = heuristic_power_max(ch);
    const Complex hd = ch.H.sum();
    Complex aligned = hd;
    double bound = std::abs(hd);
    for (int m = 0; m < 6; ++m) {
      const Complex hr = ch.R.col(m).sum() * ch.T.row(m).sum();
      aligned += refl.alphas(m) * hr;
      bound += std::abs(hr);
    }
    CHECK(std::norm(aligned) == doctest::Approx(bound * bound).epsilon(1e-10));
    // Cauchy-Schwarz over the N_r*N_t entries: the normalized aligned sum
    // lower-bounds the channel total power (equality in the 1x1 case).
    CHECK(effective_channel(ch, refl).squaredNorm() >=
          std::norm(aligned) / (3.0 * 4.0) - 1e-12);
  }

  SUBCASE("zero direct sum: pure conjugate phases") {
    FlatChannelSet ch = random_channels(rng, 2, 2, 4);
    ch.H.setZero();
    const Reflection refl = heuristic_power_max(ch);
    for (int m = 0; m < 4; ++m) {
      const Complex hr = ch.R.col(m).sum() * ch.T.row(m).sum();
      CHECK(std::abs(refl.alphas(m) - std::conj(hr) / std::abs(hr)) < 1e-12);
    }
  }
}

TEST_CASE("baseline schemes") {
  Rng rng(47);
  const double p = 1.0, sigma2 = 0.05;

  SUBCASE("no surface: all baselines coincide") {
    FlatChannelSet ch;
    ch.H = random_matrix(rng, 3, 3);
    ch.T = ComplexMatrix::Zero(0, 3);
    ch.R = ComplexMatrix::Zero(3, 0);
    const auto rates = baselines(ch, p, sigma2, 1);
    CHECK(rates.at("no_irs") == doctest::Approx(rates.at("random_phase")).epsilon(1e-12));
    CHECK(rates.at("no_irs") == doctest::Approx(rates.at("fixed_Q")).epsilon(1e-12));
  }

  SUBCASE("ordering against the full optimizer on seeded instances") {
    for (int trial = 0; trial < 5; ++trial) {
      const FlatChannelSet ch = random_channels(rng, 4, 4, 6);
      const std::uint64_t seed = 700 + trial;
      const auto rates = baselines(ch, p, sigma2, seed);
      AlgoConfig cfg;
      cfg.seed = seed;
      const OptReport full = optimize(ch, p, sigma2, cfg);
      CHECK(rates.at("random_phase") <= full.rate_trace.back() + 1e-9);
      CHECK(rates.at("fixed_Q") <= full.rate_trace.back() + 1e-9);
      CHECK(rates.at("no_irs") <= full.rate_trace.back() + 1e-9);
    }
  }
}

TEST_SUITE_END();
