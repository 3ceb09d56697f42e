#include <doctest.h>

#include "irslab/mimo.hpp"
#include "test_util.hpp"

using namespace irslab;
using test::random_channels;
using test::random_matrix;
using test::random_psd_with_trace;

TEST_SUITE_BEGIN("mimo");

TEST_CASE("effective channel: degenerate reflections and dual-route equality") {
  Rng rng(21);
  const FlatChannelSet ch = random_channels(rng, 3, 4, 6);

  const Reflection zeros{ComplexVector::Zero(6)};
  CHECK((effective_channel(ch, zeros) - ch.H).norm() == 0.0);

  FlatChannelSet empty;
  empty.H = ch.H;
  empty.T = ComplexMatrix::Zero(0, 4);
  empty.R = ComplexMatrix::Zero(3, 0);
  CHECK((effective_channel(empty, Reflection{ComplexVector(0)}) - ch.H).norm() == 0.0);

  Reflection refl{ComplexVector(6)};
  for (int m = 0; m < 6; ++m) refl.alphas(m) = std::polar(1.0, rng.uniform_phase());
  ComplexMatrix by_sum = ch.H;
  for (int m = 0; m < 6; ++m)
    by_sum += refl.alphas(m) * ch.R.col(m) * ch.T.row(m);  // rank-one route
  const ComplexMatrix by_diag = effective_channel(ch, refl);
  CHECK((by_sum - by_diag).norm() <= 1e-12 * by_sum.norm());

  Reflection wrong{ComplexVector(5)};
  CHECK_THROWS_AS(effective_channel(ch, wrong), ContractViolation);
}

TEST_CASE("capacity: zero covariance, isotropic identity, SVD route") {
  Rng rng(22);
  const double p = 2.0, sigma2 = 0.5;

  const ComplexMatrix h = random_matrix(rng, 3, 3);
  CHECK(capacity(h, Covariance{ComplexMatrix::Zero(3, 3), p}, sigma2) == 0.0);

  const ComplexMatrix eye = ComplexMatrix::Identity(2, 2);
  const double iso = capacity(eye, Covariance{(p / 2) * eye, p}, sigma2);
  CHECK(iso == doctest::Approx(2.0 * std::log2(1.0 + p / (2 * sigma2))).epsilon(1e-12));

  // Eigenmode-aligned covariance: determinant route equals the scalar product
  // over singular values.
  const Svd dec = svd(h);
  RealVector powers(3);
  powers << 1.0, 0.6, 0.4;
  const ComplexMatrix q = dec.v * powers.asDiagonal() * dec.v.adjoint();
  double scalar_route = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double g = dec.singular_values(i) * dec.singular_values(i);
    scalar_route += std::log2(1.0 + g * powers(i) / sigma2);
  }
  CHECK(capacity(h, Covariance{q, p}, sigma2) ==
        doctest::Approx(scalar_route).epsilon(1e-10));

  CHECK_THROWS_AS(capacity(h, Covariance{q, p}, 0.0), ConfigError);
  CHECK_THROWS_AS(capacity(h, Covariance{q, p}, -1.0), ConfigError);
}

TEST_CASE("waterfill: single mode, symmetric split, zero channel") {
  Rng rng(23);
  const double p = 4.0, sigma2 = 0.1;

  ComplexVector u = random_matrix(rng, 3, 1);
  ComplexVector v = random_matrix(rng, 4, 1);
  const ComplexMatrix rank_one = u * v.adjoint();
  const WaterfillResult single = waterfill(rank_one, p, sigma2);
  const double gain = u.squaredNorm() * v.squaredNorm();
  CHECK(single.mode_powers(0) == doctest::Approx(p).epsilon(1e-9));
  CHECK(single.rate == doctest::Approx(std::log2(1.0 + gain * p / sigma2)).epsilon(1e-9));

  ComplexMatrix two = ComplexMatrix::Zero(2, 2);
  two(0, 0) = 0.7;
  two(1, 1) = 0.7;
  const WaterfillResult equal = waterfill(two, p, sigma2);
  CHECK(equal.mode_powers(0) == doctest::Approx(p / 2).epsilon(1e-9));
  CHECK(equal.mode_powers(1) == doctest::Approx(p / 2).epsilon(1e-9));

  const WaterfillResult zero = waterfill(ComplexMatrix::Zero(3, 3), p, sigma2);
  CHECK(zero.rate == 0.0);
  CHECK(zero.Q.Q.norm() == 0.0);
}

TEST_CASE("waterfill beats random feasible covariances and satisfies KKT") {
  Rng rng(24);
  const double p = 1.0, sigma2 = 0.05;
  for (int trial = 0; trial < 5; ++trial) {
    const ComplexMatrix h = random_matrix(rng, 4, 4);
    const WaterfillResult wf = waterfill(h, p, sigma2);

    CHECK(wf.Q.Q.real().trace() == doctest::Approx(p).epsilon(1e-9));
    CHECK(capacity(h, wf.Q, sigma2) == doctest::Approx(wf.rate).epsilon(1e-9));

    // KKT: allocated modes exactly reach the water level, unallocated modes sit
    // below it.
    for (Eigen::Index i = 0; i < wf.mode_powers.size(); ++i) {
      const double inv_gain = sigma2 / (wf.mode_gains(i) * wf.mode_gains(i));
      if (wf.mode_powers(i) > 0.0)
        CHECK(std::abs(wf.water_level - inv_gain - wf.mode_powers(i)) <= 1e-8 * p);
      else
        CHECK(inv_gain >= wf.water_level - 1e-8);
    }

    for (int probe = 0; probe < 1000; ++probe) {
      const Covariance grid{random_psd_with_trace(rng, 4, p), p};
      CHECK(capacity(h, grid, sigma2) <= wf.rate + 1e-9);
    }
  }
}

TEST_CASE("waterfill capacity is invariant under right-unitary channel rotation") {
  Rng rng(25);
  const double p = 2.0, sigma2 = 0.3;
  const ComplexMatrix h = random_matrix(rng, 4, 4);
  const WaterfillResult base = waterfill(h, p, sigma2);

  const ComplexMatrix g = random_matrix(rng, 4, 4);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  const ComplexMatrix unitary = qr.householderQ();
  const WaterfillResult rotated = waterfill(h * unitary, p, sigma2);
  CHECK(rotated.rate == doctest::Approx(base.rate).epsilon(1e-10));
}

TEST_CASE("channel metrics") {
  const ComplexMatrix eye = ComplexMatrix::Identity(3, 3);
  const ChannelMetrics id = channel_metrics(eye);
  CHECK(id.condition_number == doctest::Approx(1.0));
  CHECK(id.rank == 3);
  CHECK(id.total_power == doctest::Approx(3.0));

  Rng rng(26);
  ComplexVector u = random_matrix(rng, 4, 1);
  ComplexVector v = random_matrix(rng, 4, 1);
  const ChannelMetrics r1 = channel_metrics(u * v.adjoint());
  CHECK(r1.rank == 1);
  CHECK(r1.strongest_eig_power == doctest::Approx(r1.total_power).epsilon(1e-12));
  // sigma_min is rounding-level noise, so the condition number is effectively
  // unbounded (infinite when sigma_min lands on exact zero).
  CHECK(r1.condition_number > 1e12);

  const ComplexMatrix h = random_matrix(rng, 4, 4);
  const ChannelMetrics m = channel_metrics(h);
  const Svd dec = svd(h);
  double sum_sq = 0.0;
  for (int i = 0; i < 4; ++i) sum_sq += dec.singular_values(i) * dec.singular_values(i);
  CHECK(m.total_power == doctest::Approx(sum_sq).epsilon(1e-10));
  CHECK(m.rank == 4);
}

TEST_SUITE_END();
