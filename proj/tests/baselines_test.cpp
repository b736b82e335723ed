#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "robustbf/baselines.hpp"
#include "robustbf/worst_case.hpp"

using namespace robustbf;

namespace {

NetworkInstance sampled(NetworkConfig cfg, double eps, std::uint64_t seed, double power = 10.0) {
  SampleSpec spec;
  spec.radius = eps;
  spec.powers = {power};
  return sample_instance(cfg, spec, seed);
}

NetworkInstance one_cell(const std::vector<CRowVector>& rows, double eps, double power) {
  NetworkInstance inst;
  inst.config = {1, static_cast<int>(rows.size()), static_cast<int>(rows[0].size())};
  inst.estimates = rows;
  inst.radii.assign(rows.size(), eps);
  inst.powers = {power};
  inst.weights.assign(rows.size(), 1.0);
  return inst;
}

CRowVector row(std::initializer_list<cplx> v) {
  CRowVector r(static_cast<int>(v.size()));
  int i = 0;
  for (cplx x : v) r(i++) = x;
  return r;
}

double angle(const CVector& a, const CVector& b) {
  return std::acos(std::min(1.0, std::abs(a.dot(b)) / (a.norm() * b.norm())));
}

}  // namespace

TEST(Waterfill, MatchesOneDimensionalSearch) {
  const std::vector<double> g{2.0, 0.5};
  const double budget = 3.0;
  auto p = waterfill(g, budget);
  EXPECT_NEAR(p[0] + p[1], budget, 1e-12);
  // Golden-section search on the split.
  auto f = [&](double x) { return std::log1p(x * g[0]) + std::log1p((budget - x) * g[1]); };
  double lo = 0.0, hi = budget;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int i = 0; i < 200; ++i) {
    const double a = hi - r * (hi - lo), b = lo + r * (hi - lo);
    (f(a) < f(b) ? lo : hi) = f(a) < f(b) ? a : b;
  }
  EXPECT_NEAR(p[0], 0.5 * (lo + hi), 1e-6);
}

TEST(Waterfill, WeakChannelSwitchedOff) {
  auto p = waterfill({10.0, 0.01}, 1.0);
  EXPECT_DOUBLE_EQ(p[1], 0.0);
  EXPECT_DOUBLE_EQ(p[0], 1.0);
  EXPECT_THROW(waterfill({1.0, 0.0}, 1.0), InvalidArgument);
}

TEST(ZeroForcing, OrthonormalRowsGiveUnitDirections) {
  auto inst = one_cell({row({1.0, 0.0}), row({0.0, 1.0})}, 0.0, 2.0);
  auto p = zero_forcing(inst, ZfObjective::maxmin);
  EXPECT_NEAR(std::abs(p[0](0, 0)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(p[0](1, 0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(p[0](0, 1)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(p[0](1, 1)), 1.0, 1e-12);
}

TEST(ZeroForcing, NullsInCellInterferenceAndUsesFullBudget) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto inst = sampled({2, 2, 3}, 0.1, seed);
    for (auto obj : {ZfObjective::maxmin, ZfObjective::sumrate}) {
      auto p = zero_forcing(inst, obj);
      for (int m = 0; m < 2; ++m) {
        EXPECT_NEAR(p.power(m), inst.power(m), 1e-9 * inst.power(m));
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l)
            if (l != k) EXPECT_LT(std::abs((inst.h(m, m, k) * p[m].col(l))(0)), 1e-10);
      }
    }
  }
}

TEST(ZeroForcing, MaxMinEqualisesInCellSnr) {
  auto inst = sampled({2, 3, 3}, 0.1, 9);
  auto p = zero_forcing(inst, ZfObjective::maxmin);
  for (int m = 0; m < 2; ++m) {
    std::vector<double> snr;
    for (int k = 0; k < 3; ++k) snr.push_back(std::norm((inst.h(m, m, k) * p[m].col(k))(0)));
    for (double s : snr) EXPECT_NEAR(s, snr[0], 1e-9 * snr[0]);
  }
}

TEST(ZeroForcing, SumRateBeatsMaxMinOnNominalInCellSum) {
  auto inst = sampled({1, 2, 2}, 0.0, 4);
  auto a = zero_forcing(inst, ZfObjective::maxmin);
  auto b = zero_forcing(inst, ZfObjective::sumrate);
  auto sum = [&](const PrecoderSet& p) {
    double s = 0.0;
    for (int k = 0; k < 2; ++k) s += std::log1p(std::norm((inst.h(0, 0, k) * p[0].col(k))(0)));
    return s;
  };
  EXPECT_GE(sum(b), sum(a) - 1e-12);
}

TEST(ZeroForcing, RejectsRankDeficiency) {
  auto inst = one_cell({row({1.0, 2.0}), row({2.0, 4.0})}, 0.0, 1.0);
  EXPECT_THROW(zero_forcing(inst, ZfObjective::maxmin), InvalidArgument);
  auto wide = sampled({1, 3, 2}, 0.0, 1);
  EXPECT_THROW(zero_forcing(wide, ZfObjective::sumrate), InvalidArgument);
}

TEST(Slinr, SingleUserIsMatchedFilterAtFullPower) {
  auto inst = one_cell({row({cplx(0.6, 0.8), cplx(0.0, 0.0)})}, 0.1, 4.0);
  BisectionOptions o;
  o.delta = 1e-6;
  auto b = slinr_beam(inst, 0, 0, 4.0, o);
  EXPECT_NEAR(b.slinr, 4.0 * 0.81, 1e-5 * 3.24);
  EXPECT_NEAR(b.w.squaredNorm(), 4.0, 1e-5);
  EXPECT_LT(angle(b.w, inst.h(0, 0, 0).adjoint()), 1e-3);
}

TEST(Slinr, CertificateHolds) {
  auto inst = sampled({2, 2, 2}, 0.1, 12);
  BisectionOptions o;
  o.delta = 1e-4;
  auto p = slinr_beamforming(inst, {}, o);
  for (int m = 0; m < 2; ++m)
    for (int k = 0; k < 2; ++k) {
      const double target = slinr_beam(inst, m, k, inst.power(m) / 2, o).slinr;
      EXPECT_NEAR(p[m].col(k).squaredNorm(), inst.power(m) / 2, 1e-5 * inst.power(m));
      EXPECT_GE(worst_case_slinr(inst, p, m, k), target * (1 - 1e-5));
    }
}

TEST(Slinr, ZeroRadiusMatchesGeneralisedEigenvector) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto inst = sampled({2, 2, 2}, 0.0, 30 + seed);
    const double power = 3.0;
    BisectionOptions o;
    o.delta = 1e-8;
    auto b = slinr_beam(inst, 0, 1, power, o);
    // argmax |h w|^2 / w^H (A + I/P) w with A the leakage Gram matrix.
    CMatrix a = CMatrix::Identity(2, 2) / power;
    for (int n = 0; n < 2; ++n)
      for (int l = 0; l < 2; ++l)
        if (n != 0 || l != 1) a += inst.h(n, 0, l).adjoint() * inst.h(n, 0, l);
    const CVector v = a.ldlt().solve(inst.h(0, 0, 1).adjoint());
    EXPECT_LT(angle(b.w, v), 1e-4) << seed;
  }
}

TEST(Slinr, ZeroPowerGivesZeroBeam) {
  auto inst = sampled({1, 2, 2}, 0.1, 2);
  auto b = slinr_beam(inst, 0, 0, 0.0);
  EXPECT_EQ(b.slinr, 0.0);
  EXPECT_EQ(b.w.norm(), 0.0);
  EXPECT_THROW(slinr_beamforming(inst, {8.0, 8.0}), InvalidArgument);
  EXPECT_THROW(slinr_beamforming(inst, {1.0}), InvalidArgument);
}

TEST(SlinrSearch, SingleUserTakesFullPower) {
  auto inst = sampled({2, 1, 2}, 0.1, 3);
  auto r = slinr_profile_search(inst, 4);
  for (int m = 0; m < 2; ++m) EXPECT_DOUBLE_EQ(r.profile[m], inst.power(m));
}

TEST(SlinrSearch, RefinedGridNeverWorse) {
  auto inst = sampled({2, 2, 2}, 0.1, 5);
  BisectionOptions o;
  o.delta = 1e-5;
  const double coarse = slinr_profile_search(inst, 2, o).sum_slinr;
  const double fine = slinr_profile_search(inst, 4, o).sum_slinr;
  EXPECT_GE(fine, coarse * (1 - 1e-5));
}

TEST(SlinrSearch, CloseToContinuousSearch) {
  auto inst = sampled({2, 2, 2}, 0.1, 6);
  const int r = 8;
  auto grid = slinr_profile_search(inst, r);
  double cont = 0.0;
  for (int m = 0; m < 2; ++m) {
    const double pm = inst.power(m);
    auto f = [&](double t) { return slinr_beam(inst, m, 0, t * pm).slinr + slinr_beam(inst, m, 1, (1 - t) * pm).slinr; };
    // Coarse restarts, then golden section around the best one.
    double best_t = 0.0, best = f(0.0);
    for (int i = 1; i <= 6; ++i)
      if (double v = f(i / 6.0); v > best) {
        best = v;
        best_t = i / 6.0;
      }
    double lo = std::max(0.0, best_t - 1.0 / 6), hi = std::min(1.0, best_t + 1.0 / 6);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int i = 0; i < 15; ++i) {
      const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
      if (f(a) < f(b)) lo = a; else hi = b;
    }
    cont += std::max(best, f(0.5 * (lo + hi)));
  }
  EXPECT_LE(grid.sum_slinr, cont * (1 + 1e-3));
  EXPECT_GE(grid.sum_slinr, cont * (1 - 0.05));
  for (int m = 0; m < 2; ++m) EXPECT_LE(grid.precoders.power(m), inst.power(m) * (1 + 1e-6));
}
