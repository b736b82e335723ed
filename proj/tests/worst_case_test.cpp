#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "robustbf/instance.hpp"
#include "robustbf/worst_case.hpp"

using namespace robustbf;

namespace {

PrecoderSet random_precoders(const NetworkInstance& inst, std::mt19937_64& rng) {
  PrecoderSet p = PrecoderSet::zeros(inst.config);
  for (int m = 0; m < inst.config.cells; ++m) {
    p[m] = oracle::random_matrix(rng, inst.config.antennas, inst.config.users);
    p[m] *= std::sqrt(inst.power(m)) / p[m].norm();
  }
  return p;
}

NetworkInstance scalar_pair() {
  // N=1, M=2, K=1: h11 = 2, h12 = 1, everything else 1, eps = 0.5.
  NetworkInstance inst;
  inst.config = {2, 1, 1};
  auto row = [](double v) {
    CRowVector r(1);
    r << v;
    return r;
  };
  inst.estimates = {row(2.0), row(1.0), row(1.0), row(2.0)};
  inst.radii = {0.5, 0.5, 0.5, 0.5};
  inst.powers = {1.0, 1.0};
  inst.weights = {1.0, 1.0};
  return inst;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(GainExtrema, CollinearCase) {
  CRowVector h(2);
  h << 1.0, 0.0;
  CVector w(2);
  w << 1.0, 0.0;
  auto g = robust_gain_extrema(h, w, 0.5, CMatrix::Identity(2, 2));
  EXPECT_DOUBLE_EQ(g.min, 0.25);
  EXPECT_DOUBLE_EQ(g.max, 2.25);
}

TEST(GainExtrema, OrthogonalCaseClampsAtZero) {
  CRowVector h(2);
  h << 1.0, 0.0;
  CVector w(2);
  w << 0.0, 1.0;
  auto g = robust_gain_extrema(h, w, 0.5);
  EXPECT_EQ(g.min, 0.0);
  EXPECT_DOUBLE_EQ(g.max, 0.25);
}

TEST(GainExtrema, ZeroRadiusIsNominal) {
  std::mt19937_64 rng(1);
  CRowVector h = oracle::random_row(rng, 3);
  CVector w = oracle::random_row(rng, 3).transpose();
  auto g = robust_gain_extrema(h, w, 0.0);
  EXPECT_DOUBLE_EQ(g.min, std::norm((h * w)(0)));
  EXPECT_DOUBLE_EQ(g.max, g.min);
}

TEST(GainExtrema, RejectsIndefiniteWeighting) {
  CRowVector h = CRowVector::Ones(2);
  CVector w = CVector::Ones(2);
  CMatrix q = CMatrix::Identity(2, 2);
  q(1, 1) = -1.0;
  EXPECT_THROW(robust_gain_extrema(h, w, 0.1, q), InvalidArgument);
}

TEST(GainExtrema, MatchesBallSearch) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 4;
    CRowVector h = oracle::random_row(rng, n);
    CVector w = oracle::random_row(rng, n).transpose();
    const double eps = 0.6 * u(rng);
    auto g = robust_gain_extrema(h, w, eps);
    auto f = oracle::gain(h, w);
    const double hi = oracle::ball_search(f, n, eps, +1.0, rng, 4000, 4, 2000);
    const double lo = oracle::ball_search(f, n, eps, -1.0, rng, 4000, 4, 2000);
    EXPECT_LE(rel(g.max, hi), 1e-6) << trial;
    EXPECT_LE(std::abs(g.min - lo), 1e-6 * std::max(1.0, hi)) << trial;
  }
}

TEST(BallMaximum, IsotropicCase) {
  std::mt19937_64 rng(3);
  CRowVector h = oracle::random_row(rng, 3);
  const double v = max_quadratic_over_ball(h, CMatrix::Identity(3, 3), 0.3);
  EXPECT_NEAR(v, std::pow(h.norm() + 0.3, 2), 1e-12);
}

TEST(BallMaximum, ZeroRadius) {
  std::mt19937_64 rng(4);
  CRowVector h = oracle::random_row(rng, 3);
  CMatrix a = oracle::random_matrix(rng, 3, 2);
  EXPECT_DOUBLE_EQ(max_quadratic_over_ball(h, a, 0.0), (h * a).squaredNorm());
  EXPECT_DOUBLE_EQ(max_quadratic_over_ball(h, CMatrix(3, 0), 0.4), 0.0);
}

TEST(BallMaximum, MatchesAscentOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 4, j = 1 + (trial / 4) % 4;
    CRowVector h = oracle::random_row(rng, n);
    CMatrix a = oracle::random_matrix(rng, n, j);
    const double eps = u(rng);
    auto r = maximize_over_ball(h, a, eps);
    const double ref = oracle::ball_search(oracle::residual(h, a, CRowVector::Zero(j)), n, eps, +1.0, rng, 4000, 6);
    EXPECT_LE(rel(r.value, ref), 1e-6) << trial;
    EXPECT_GE(r.value, ref - 1e-9 * ref) << trial;
    EXPECT_LE(r.delta.norm(), eps * (1 + 1e-12));
    EXPECT_NEAR(((h + r.delta) * a).squaredNorm(), r.value, 1e-8 * r.value);
  }
}

TEST(BallMaximum, HardCaseWithOrthogonalLinearTerm) {
  // h orthogonal to the dominant eigenvector of A A^H.
  CRowVector h(2);
  h << 0.0, 0.1;
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = 1.0;
  auto r = maximize_over_ball(h, a, 1.0);
  std::mt19937_64 rng(6);
  const double ref = oracle::ball_search(oracle::residual(h, a, CRowVector::Zero(2)), 2, 1.0, +1.0, rng);
  EXPECT_NEAR(r.value, ref, 1e-8);
}

TEST(BallMaximum, AffineOffsetMatchesOracle) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 3, j = 1 + trial % 3;
    CRowVector h = oracle::random_row(rng, n);
    CMatrix a = oracle::random_matrix(rng, n, j);
    CRowVector o = oracle::random_row(rng, j);
    auto r = maximize_over_ball(h, a, 0.4, o);
    const double ref = oracle::ball_search(oracle::residual(h, a, o), n, 0.4, +1.0, rng, 4000, 6);
    EXPECT_LE(rel(r.value, ref), 1e-6) << trial;
  }
}

TEST(SingleUser, ScalarHandValue) {
  auto inst = scalar_pair();
  PrecoderSet p = PrecoderSet::zeros(inst.config);
  p[0](0, 0) = 1.0;
  p[1](0, 0) = 1.0;
  EXPECT_NEAR(worst_case_sinr_single(inst, p, 0), 2.25 / 3.25, 1e-15);
  // Perturbation sampling in the scalar case: shrink own link, grow the interferer.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ph(0.0, 2 * M_PI);
  double best = 1e9;
  for (int s = 0; s < 20000; ++s) {
    PerturbationSet d{inst.config, {}};
    for (int c = 0; c < 4; ++c) {
      CRowVector x(1);
      x << std::polar(0.5, ph(rng));
      d.deltas.push_back(x);
    }
    best = std::min(best, nominal_sinr(inst, p, 0, 0, &d));
  }
  EXPECT_GE(best, 2.25 / 3.25 - 1e-12);
  EXPECT_LE(best, 2.25 / 3.25 + 1e-3);
}

TEST(SingleUser, RequiresOneUser) {
  auto inst = sample_instance({2, 2, 2}, {}, 1);
  EXPECT_THROW(worst_case_sinr_single(inst, PrecoderSet::zeros(inst.config), 0), InvalidArgument);
}

TEST(Bounds, ZeroRadiusCollapse) {
  std::mt19937_64 rng(9);
  auto inst = sample_instance({2, 2, 3}, {}, 9);
  auto p = random_precoders(inst, rng);
  for (int m = 0; m < 2; ++m)
    for (int k = 0; k < 2; ++k) {
      const double nom = nominal_sinr(inst, p, m, k);
      EXPECT_NEAR(sinr_lower_bound(inst, p, m, k), nom, 1e-12 * nom);
      EXPECT_NEAR(oracle_sinr_estimate(inst, p, m, k, 50, 1), nom, 1e-12 * nom);
      // SLINR at eps = 0: direct evaluation.
      const CVector w = p[m].col(k);
      double leak = 1.0;
      for (int j = 0; j < 2; ++j)
        if (j != k) leak += std::norm((inst.h(m, m, j) * w)(0));
      for (int n = 0; n < 2; ++n)
        if (n != m)
          for (int l = 0; l < 2; ++l) leak += std::norm((inst.h(n, m, l) * w)(0));
      EXPECT_NEAR(worst_case_slinr(inst, p, m, k), std::norm((inst.h(m, m, k) * w)(0)) / leak, 1e-12);
    }
}

TEST(Bounds, SingleUserLowerBoundIsExact) {
  std::mt19937_64 rng(10);
  SampleSpec spec;
  spec.radius = 0.1;
  for (int s = 0; s < 20; ++s) {
    auto inst = sample_instance({3, 1, 2}, spec, s);
    auto p = random_precoders(inst, rng);
    for (int m = 0; m < 3; ++m)
      EXPECT_NEAR(sinr_lower_bound(inst, p, m, 0), worst_case_sinr_single(inst, p, m),
                  1e-12 * worst_case_sinr_single(inst, p, m));
  }
}

TEST(Bounds, LowerBoundBelowSampledSinr) {
  std::mt19937_64 rng(11);
  SampleSpec spec;
  spec.radius = 0.1;
  auto inst = sample_instance({2, 2, 2}, spec, 11);
  auto p = random_precoders(inst, rng);
  for (int m = 0; m < 2; ++m)
    for (int k = 0; k < 2; ++k) {
      const double lb = sinr_lower_bound(inst, p, m, k);
      double lowest = 1e300;
      for (int s = 0; s < 10000; ++s) {
        auto d = sample_perturbation(inst, 100000 + s, s % 2 ? PerturbationMode::surface : PerturbationMode::interior);
        lowest = std::min(lowest, nominal_sinr(inst, p, m, k, &d));
      }
      EXPECT_LE(lb, lowest);
    }
}

TEST(Bounds, SandwichOnRandomInstances) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  OracleOptions opts;
  opts.descent_steps = 30;
  for (int trial = 0; trial < 200; ++trial) {
    NetworkConfig cfg{1 + trial % 3, 1 + (trial / 3) % 3, 1 + (trial / 9) % 3};
    SampleSpec spec;
    spec.radius = 0.2 * u(rng);
    auto inst = sample_instance(cfg, spec, 500 + trial);
    auto p = random_precoders(inst, rng);
    const int m = trial % cfg.cells, k = trial % cfg.users;
    const double lo = sinr_lower_bound(inst, p, m, k);
    const double up = sinr_upper_bound(inst, p, m, k);
    const double orc = oracle_sinr_estimate(inst, p, m, k, 200, trial, opts);
    EXPECT_LE(lo, orc * (1 + 1e-9)) << trial;
    EXPECT_LE(orc, up * (1 + 1e-9)) << trial;
  }
}

TEST(Bounds, UpperBoundSpecialCases) {
  NetworkInstance inst;
  inst.config = {1, 1, 2};
  CRowVector h(2);
  h << 1.0, 1.0;
  inst.estimates = {h};
  inst.radii = {0.2};
  inst.powers = {4.0};
  inst.weights = {1.0};
  PrecoderSet p = PrecoderSet::zeros(inst.config);
  p[0](0, 0) = 1.0;
  p[0](1, 0) = cplx(0.0, 1.0);
  EXPECT_NEAR(sinr_upper_bound(inst, p, 0, 0), std::pow(std::sqrt(2.0) + 0.2, 2) * 2.0, 1e-12);
  EXPECT_EQ(sinr_upper_bound(inst, PrecoderSet::zeros(inst.config), 0, 0), 0.0);
}

TEST(Oracle, SingleUserConvergesToExact) {
  std::mt19937_64 rng(13);
  SampleSpec spec;
  spec.radius = 0.1;
  for (int s = 0; s < 5; ++s) {
    auto inst = sample_instance({2, 1, 2}, spec, 40 + s);
    auto p = random_precoders(inst, rng);
    const double exact = worst_case_sinr_single(inst, p, 0);
    const double est = oracle_sinr_estimate(inst, p, 0, 0, 10000, s);
    EXPECT_GE(est, exact * (1 - 1e-9));
    EXPECT_LE(est, exact * 1.01);
  }
}

TEST(Oracle, MonotoneInSamples) {
  std::mt19937_64 rng(14);
  SampleSpec spec;
  spec.radius = 0.1;
  auto inst = sample_instance({2, 2, 2}, spec, 3);
  auto p = random_precoders(inst, rng);
  double prev = 1e300;
  for (int n : {1, 10, 100, 1000}) {
    const double v = oracle_sinr_estimate(inst, p, 1, 0, n, 77);
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(Mse, ScalarHandValue) {
  NetworkInstance inst;
  inst.config = {1, 1, 1};
  CRowVector h(1);
  h << 1.0;
  inst.estimates = {h};
  inst.radii = {0.5};
  inst.powers = {1.0};
  inst.weights = {1.0};
  PrecoderSet p = PrecoderSet::zeros(inst.config);
  p[0](0, 0) = 1.0;
  EXPECT_NEAR(worst_case_mse(inst, p, 1.0, 0, 0), 1.25, 1e-12);
  EXPECT_THROW(worst_case_mse(inst, p, 0.0, 0, 0), InvalidArgument);
  // The best equalizer beats f = 1 and agrees with a 1-D grid.
  auto eq = best_worst_case_equalizer(inst, p, 0, 0);
  EXPECT_LT(eq.mse, 1.25);
  double grid = 1e9;
  for (int i = 1; i <= 20000; ++i) grid = std::min(grid, worst_case_mse(inst, p, 0.001 * i, 0, 0));
  EXPECT_NEAR(eq.mse, grid, 1e-6);
}

TEST(Mse, DualityWithMmseEqualizer) {
  std::mt19937_64 rng(15);
  auto inst = sample_instance({2, 2, 2}, {}, 15);
  auto p = random_precoders(inst, rng);
  for (int m = 0; m < 2; ++m)
    for (int k = 0; k < 2; ++k) {
      const double sinr = nominal_sinr(inst, p, m, k);
      // Real positive MMSE equalizer (phase absorbed into the beam): f = total power / |h w|.
      PrecoderSet q = p;
      const cplx hw = (inst.h(m, m, k) * p[m].col(k))(0);
      q[m].col(k) *= std::conj(hw) / std::abs(hw);
      double total = 1.0;
      for (int n = 0; n < 2; ++n) total += (inst.h(m, n, k) * q[n]).squaredNorm();
      const double f = total / std::abs(hw);
      const double mse = worst_case_mse(inst, q, f, m, k);
      EXPECT_NEAR(mse * (1 + sinr), 1.0, 1e-10);
      EXPECT_NEAR(best_worst_case_equalizer(inst, q, m, k).mse, mse, 1e-8);
    }
}

TEST(Mse, MatchesJointPerturbationOracle) {
  std::mt19937_64 rng(16);
  SampleSpec spec;
  spec.radius = 0.15;
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = sample_instance({2, 2, 2}, spec, 60 + trial);
    auto p = random_precoders(inst, rng);
    const double f = 0.5 + trial * 0.1;
    // Channels are independent, so the maximum splits into one ball search per link.
    CRowVector e = CRowVector::Zero(2);
    e[1] = f;
    double total = 1.0 + oracle::ball_search(oracle::residual(inst.h(0, 0, 1), p[0], e), 2, 0.15, 1.0, rng, 3000, 4);
    total += oracle::ball_search(oracle::residual(inst.h(0, 1, 1), p[1], CRowVector::Zero(2)), 2, 0.15, 1.0, rng, 3000, 4);
    EXPECT_LE(rel(worst_case_mse(inst, p, f, 0, 1), total / (f * f)), 1e-6);
  }
}

TEST(Slinr, MatchesPerTermOracle) {
  std::mt19937_64 rng(17);
  SampleSpec spec;
  spec.radius = 0.1;
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = sample_instance({2, 2, 2}, spec, 80 + trial);
    auto p = random_precoders(inst, rng);
    const CVector w = p[1].col(0);
    const double num = oracle::ball_search(oracle::gain(inst.h(1, 1, 0), w), 2, 0.1, -1.0, rng, 3000, 4);
    double den = 1.0 + oracle::ball_search(oracle::gain(inst.h(1, 1, 1), w), 2, 0.1, 1.0, rng, 3000, 4);
    for (int l = 0; l < 2; ++l) den += oracle::ball_search(oracle::gain(inst.h(0, 1, l), w), 2, 0.1, 1.0, rng, 3000, 4);
    EXPECT_LE(rel(worst_case_slinr(inst, p, 1, 0), num / den), 1e-6);
  }
}

TEST(Slinr, SingleLinkIsMatchedFilterGain) {
  NetworkInstance inst;
  inst.config = {1, 1, 2};
  CRowVector h(2);
  h << 3.0, 4.0;
  inst.estimates = {h};
  inst.radii = {1.0};
  inst.powers = {1.0};
  inst.weights = {1.0};
  PrecoderSet p = PrecoderSet::zeros(inst.config);
  p[0].col(0) = h.adjoint() / h.norm();
  EXPECT_NEAR(worst_case_slinr(inst, p, 0, 0), 16.0, 1e-12);
}

TEST(Monotonicity, BoundsInEachRadius) {
  std::mt19937_64 rng(18);
  SampleSpec spec;
  spec.radius = 0.05;
  auto inst = sample_instance({2, 2, 2}, spec, 18);
  auto p = random_precoders(inst, rng);
  for (size_t c = 0; c < inst.radii.size(); ++c) {
    auto grown = inst;
    grown.radii[c] = 0.2;
    for (int m = 0; m < 2; ++m)
      for (int k = 0; k < 2; ++k) {
        EXPECT_LE(sinr_lower_bound(grown, p, m, k), sinr_lower_bound(inst, p, m, k) * (1 + 1e-12));
        EXPECT_LE(worst_case_slinr(grown, p, m, k), worst_case_slinr(inst, p, m, k) * (1 + 1e-12));
        EXPECT_GE(worst_case_mse(grown, p, 1.3, m, k), worst_case_mse(inst, p, 1.3, m, k) * (1 - 1e-12));
      }
    if (inst.config.users == 1) continue;
  }
  SampleSpec single;
  single.radius = 0.05;
  auto one = sample_instance({2, 1, 2}, single, 19);
  auto q = random_precoders(one, rng);
  double prev = 1e300;
  for (double e : {0.0, 0.05, 0.1, 0.2}) {
    const double v = worst_case_sinr_single(one.with_radius(e), q, 0);
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(Rates, Conversions) {
  EXPECT_EQ(rate_from_sinr(0.0), 0.0);
  EXPECT_NEAR(rate_from_sinr(std::exp(1.0) - 1.0), 1.0, 1e-15);
  EXPECT_THROW(rate_from_sinr(-0.1), InvalidArgument);
  auto r = rates_from({1.0, 3.0, 7.0});
  EXPECT_NEAR(weighted_sum(r, {1.0, 0.5, 2.0}), std::log(2.0) + 0.5 * std::log(4.0) + 2.0 * std::log(8.0), 1e-14);
}

TEST(Report, FieldsConsistent) {
  std::mt19937_64 rng(20);
  SampleSpec spec;
  spec.radius = 0.1;
  auto inst = sample_instance({2, 2, 2}, spec, 20);
  auto p = random_precoders(inst, rng);
  auto r = evaluate_design(inst, p, 100, 1);
  ASSERT_EQ(r.lower.size(), 4u);
  ASSERT_EQ(r.oracle.size(), 4u);
  for (int i = 0; i < 4; ++i) {
    EXPECT_LE(r.lower[i], r.oracle[i] * (1 + 1e-9));
    EXPECT_LE(r.oracle[i], r.upper[i] * (1 + 1e-9));
    EXPECT_GE(r.certified_rate[i], std::log1p(r.lower[i]) - 1e-15);
    EXPECT_LE(r.certified_rate[i], std::log1p(r.oracle[i]) + 1e-9);
  }
}
