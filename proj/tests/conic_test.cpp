#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "robustbf/conic.hpp"
#include "solver_internal.hpp"

using namespace robustbf;

namespace {

RMatrix random_psd(std::mt19937_64& rng, int n, double shift) {
  std::normal_distribution<double> g;
  RMatrix b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = g(rng);
  return b * b.transpose() + shift * RMatrix::Identity(n, n);
}

CMatrix random_complex(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  CMatrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = {g(rng), g(rng)};
  return m;
}

}  // namespace

TEST(Solver, LowerBoundOnScalar) {
  ConicProgram p;
  auto x = p.add_variable("x");
  p.add_nonnegative(x[0] - 3.0);
  p.minimize(x[0]);
  auto r = solve(p);
  ASSERT_EQ(r.status, SolveStatus::optimal);
  EXPECT_NEAR(r.objective, 3.0, 1e-7);
}

TEST(Solver, SecondOrderConeEpigraph) {
  ConicProgram p;
  auto t = p.add_variable("t");
  p.add_soc({t[0], 1.0, 2.0});
  p.minimize(t[0]);
  auto r = solve(p);
  ASSERT_EQ(r.status, SolveStatus::optimal);
  EXPECT_NEAR(r.objective, std::sqrt(5.0), 1e-7);
}

TEST(Solver, TraceAboveRandomPsd) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 3 + trial % 2;
    RMatrix m = random_psd(rng, n, 0.1);
    ConicProgram p;
    auto x = p.add_variable("X", n * n);
    std::vector<LinExpr> e(n * n);
    LinExpr tr;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        e[j * n + i] = x[j * n + i] - m(i, j);
        if (i == j) tr += x[j * n + i];
      }
    p.add_psd(n, e);
    // The unused antisymmetric part of X is pinned by symmetry equalities.
    for (int j = 0; j < n; ++j)
      for (int i = j + 1; i < n; ++i) p.add_equality(x[j * n + i] - x[i * n + j]);
    p.minimize(tr);
    auto r = solve(p);
    ASSERT_EQ(r.status, SolveStatus::optimal);
    EXPECT_NEAR(r.objective, m.trace(), 1e-6 * m.trace());
  }
}

TEST(Solver, DetectsPrimalInfeasibility) {
  ConicProgram p;
  auto x = p.add_variable("x");
  p.add_nonnegative(x[0] - 2.0);
  p.add_nonnegative(1.0 - x[0]);
  p.minimize(x[0]);
  EXPECT_EQ(solve(p).status, SolveStatus::infeasible);
}

TEST(Solver, DetectsUnboundedness) {
  ConicProgram p;
  auto x = p.add_variable("x", 2);
  p.add_soc({x[0], x[1]});
  p.minimize(-1.0 * x[0]);
  EXPECT_EQ(solve(p).status, SolveStatus::unbounded);
}

TEST(Solver, EqualityAndConeMix) {
  // min x0 + x1 with x0 + 2 x1 = 4, x >= 0  ->  x = (0, 2), value 2.
  ConicProgram p;
  auto x = p.add_variable("x", 2);
  p.add_equality(x[0] + 2.0 * x[1] - 4.0);
  p.add_nonnegative(x[0]);
  p.add_nonnegative(x[1]);
  p.minimize(x[0] + x[1]);
  auto r = solve(p);
  ASSERT_EQ(r.status, SolveStatus::optimal);
  EXPECT_NEAR(r.objective, 2.0, 1e-7);
  EXPECT_NEAR(r.value(x, 1), 2.0, 1e-6);
}

TEST(Solver, DeterministicAndStatusSound) {
  std::mt19937_64 rng(5);
  ConicProgram p;
  auto x = p.add_variable("x", 3);
  RMatrix m = random_psd(rng, 3, 0.5);
  std::vector<LinExpr> e(9);
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) e[j * 3 + i] = LinExpr(m(i, j)) + (i == j ? x[i] : LinExpr());
  p.add_psd(3, e);
  p.add_soc({2.0, x[0], x[1], x[2]});
  p.minimize(x[0] + 2.0 * x[1] + 3.0 * x[2]);
  auto a = solve(p), b = solve(p);
  ASSERT_EQ(a.status, SolveStatus::optimal);
  EXPECT_EQ(a.x, b.x);
  EXPECT_LE(p.max_violation(a.x), 1e-7);
}

TEST(Scaling, NesterovToddIdentity) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  detail::ConeLayout k;
  k.l = 2;
  k.q = {3};
  k.q_off = {2};
  k.s = {3};
  k.s_off = {5};
  k.total = 14;
  RVector s(14), z(14);
  s.head(2) << 0.7, 2.0;
  z.head(2) << 1.3, 0.1;
  s.segment(2, 3) << 2.0, 0.5, -0.7;
  z.segment(2, 3) << 1.5, -0.3, 0.9;
  RMatrix S = random_psd(rng, 3, 0.2), Z = random_psd(rng, 3, 0.3);
  s.tail(9) = Eigen::Map<RVector>(S.data(), 9);
  z.tail(9) = Eigen::Map<RVector>(Z.data(), 9);
  detail::Scaling w;
  w.init(k, s, z);
  RVector wz = w.apply(z, false, false);
  RVector wits = w.apply(s, true, true);
  EXPECT_LE((wz - wits).norm(), 1e-10);
  EXPECT_LE((w.lambda - wz).norm(), 1e-10);
  RVector x(14);
  for (int i = 0; i < 14; ++i) x[i] = g(rng);
  x.tail(9) = Eigen::Map<RVector>(RMatrix(Eigen::Map<RMatrix>(x.tail(9).data(), 3, 3) +
                                          Eigen::Map<RMatrix>(x.tail(9).data(), 3, 3).transpose())
                                      .data(),
                                  9);
  EXPECT_LE((w.apply(w.apply(x, false, false), false, true) - x).norm(), 1e-10);
  EXPECT_LE((w.apply(w.apply(x, true, false), true, true) - x).norm(), 1e-10);

  // Product-form update from a second pair given in scaled coordinates.
  RVector ls = k.identity(), lz = k.identity();
  ls.head(2) << 0.4, 1.1;
  lz.head(2) << 2.0, 0.6;
  ls.segment(2, 3) << 1.2, 0.3, 0.8;
  lz.segment(2, 3) << 0.9, -0.5, 0.1;
  RMatrix S2 = random_psd(rng, 3, 0.1), Z2 = random_psd(rng, 3, 0.4);
  ls.tail(9) = Eigen::Map<RVector>(S2.data(), 9);
  lz.tail(9) = Eigen::Map<RVector>(Z2.data(), 9);
  RVector s2 = w.apply(ls, true, false), z2 = w.apply(lz, false, true);
  w.update(ls, lz);
  RVector wz2 = w.apply(z2, false, false);
  EXPECT_LE((wz2 - w.apply(s2, true, true)).norm(), 1e-9);
  EXPECT_LE((w.lambda - wz2).norm(), 1e-9);
  EXPECT_LE((w.apply(w.apply(x, false, false), false, true) - x).norm(), 1e-9);
}

TEST(Realify, IdentityStaysIdentity) {
  CMatrix h = CMatrix::Identity(2, 2);
  RMatrix r = realify_hermitian(h);
  EXPECT_TRUE(r.isApprox(RMatrix::Identity(4, 4)));
}

TEST(Realify, IndefiniteSpectrumDoubles) {
  CMatrix h(2, 2);
  h << 0.0, cplx(0, 1), cplx(0, -1), 0.0;
  RMatrix r = realify_hermitian(h);
  Eigen::SelfAdjointEigenSolver<RMatrix> es(r);
  RVector ev = es.eigenvalues();
  EXPECT_NEAR(ev[0], -1.0, 1e-12);
  EXPECT_NEAR(ev[1], -1.0, 1e-12);
  EXPECT_NEAR(ev[2], 1.0, 1e-12);
  EXPECT_NEAR(ev[3], 1.0, 1e-12);
  EXPECT_TRUE(r.isApprox(r.transpose()));
}

TEST(Realify, RejectsNonHermitian) {
  CMatrix h(2, 2);
  h << 1.0, 2.0, 0.0, 1.0;
  EXPECT_THROW(realify_hermitian(h), InvalidArgument);
}

TEST(Realify, AffineFormsRoundTrip) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  ConicProgram p;
  auto w = p.add_complex_matrix("w", 3, 2);
  CMatrix c = random_complex(rng, 2, 3);
  ComplexExprMatrix y = c * w;
  for (int trial = 0; trial < 100; ++trial) {
    RVector x(p.variable_count());
    for (int i = 0; i < x.size(); ++i) x[i] = g(rng);
    CMatrix wv = w.evaluate(x);
    CMatrix expect = c * wv;
    CMatrix got = y.evaluate(x);
    EXPECT_LE((expect - got).cwiseAbs().maxCoeff(), 1e-12);
    RVector rv = realify_vector(wv.col(0));
    EXPECT_LE((rv.head(3) - wv.col(0).real()).norm() + (rv.tail(3) - wv.col(0).imag()).norm(), 1e-15);
  }
}

TEST(Realify, HermitianPsdConstraintMatchesEigenvalues) {
  // Constraint t*I + H >= 0 minimised over t must give -lambda_min(H).
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    CMatrix b = random_complex(rng, 3, 3);
    CMatrix h = b + b.adjoint();
    ConicProgram p;
    auto t = p.add_variable("t");
    ComplexExprMatrix m(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = ComplexExpr(h(i, j)) + (i == j ? ComplexExpr(t[0], 0.0) : ComplexExpr());
    p.add_hermitian_psd(m);
    p.minimize(t[0]);
    auto r = solve(p);
    ASSERT_EQ(r.status, SolveStatus::optimal);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    EXPECT_NEAR(r.objective, -es.eigenvalues()[0], 1e-6);
  }
}

TEST(Builders, OwnChannelConeScalarFeasibility) {
  // eps |w| <= h w - sqrt(a) t with t = 1, |w|^2 <= P: feasible iff (h - eps) sqrt(P) >= sqrt(a).
  for (double a : {0.5, 0.8, 0.82, 0.9}) {
    ConicProgram p;
    auto w = p.add_complex_matrix("w", 1, 1);
    auto t = p.add_variable("t");
    p.add_equality(t[0] - 1.0);
    CRowVector h(1);
    h << 1.0;
    add_own_channel_soc(p, h, 0.1, std::sqrt(a), t[0], w);
    add_frobenius_bound(p, w, 1.0);
    p.minimize(LinExpr());
    auto r = solve(p);
    const bool feasible = (1.0 - 0.1) * 1.0 >= std::sqrt(a) + 1e-9;
    if (feasible)
      EXPECT_EQ(r.status, SolveStatus::optimal) << a;
    else
      EXPECT_EQ(r.status, SolveStatus::infeasible) << a;
  }
}

TEST(Builders, OwnChannelConeZeroRadiusIsHalfspace) {
  ConicProgram p;
  auto w = p.add_complex_matrix("w", 2, 1);
  CRowVector h(2);
  h << cplx(1, 0), cplx(0, 1);
  add_own_channel_soc(p, h, 0.0, 0.0, LinExpr(), w);
  ASSERT_EQ(p.constraints().size(), 2u);
  EXPECT_EQ(p.constraints()[1].kind, ConeKind::nonnegative);
}

TEST(Builders, DumpListsConesAndTriplets) {
  ConicProgram p;
  auto t = p.add_variable("t");
  p.add_soc({t[0], 1.0, 2.0});
  p.minimize(t[0]);
  std::ostringstream os;
  p.dump(os);
  const std::string text = os.str();
  EXPECT_NE(text.find("soc 1 3"), std::string::npos);
  EXPECT_NE(text.find("0 0 1"), std::string::npos);
}
