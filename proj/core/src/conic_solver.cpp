// Primal-dual interior-point method on the homogeneous self-dual embedding of
//   minimize c'x  s.t.  Gx + s = h, Ax = b, s in K
// with Nesterov-Todd scaling and Mehrotra predictor-corrector steps.
// K is a product of a nonnegative orthant, second-order cones and PSD cones
// (PSD blocks stored as full column-major matrices).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "robustbf/conic.hpp"
#include "solver_internal.hpp"

namespace robustbf {
namespace detail {

double ConeLayout::inner(const RVector& x, const RVector& y) const { return x.dot(y); }

RVector ConeLayout::identity() const {
  RVector e = RVector::Zero(total);
  e.head(l).setOnes();
  for (size_t i = 0; i < q.size(); ++i) e[q_off[i]] = 1.0;
  for (size_t i = 0; i < s.size(); ++i)
    for (int j = 0; j < s[i]; ++j) e[s_off[i] + j * s[i] + j] = 1.0;
  return e;
}

RVector ConeLayout::product(const RVector& x, const RVector& y) const {
  RVector r(total);
  r.head(l) = x.head(l).cwiseProduct(y.head(l));
  for (size_t i = 0; i < q.size(); ++i) {
    const int o = q_off[i], d = q[i];
    r[o] = x.segment(o, d).dot(y.segment(o, d));
    r.segment(o + 1, d - 1) = x[o] * y.segment(o + 1, d - 1) + y[o] * x.segment(o + 1, d - 1);
  }
  for (size_t i = 0; i < s.size(); ++i) {
    const int o = s_off[i], d = s[i];
    Eigen::Map<const RMatrix> X(x.data() + o, d, d), Y(y.data() + o, d, d);
    Eigen::Map<RMatrix> R(r.data() + o, d, d);
    R = 0.5 * (X * Y + Y * X);
  }
  return r;
}

RVector ConeLayout::divide(const RVector& lam, const RVector& y) const {
  RVector u(total);
  u.head(l) = y.head(l).cwiseQuotient(lam.head(l));
  for (size_t i = 0; i < q.size(); ++i) {
    const int o = q_off[i], d = q[i];
    const double l0 = lam[o];
    auto l1 = lam.segment(o + 1, d - 1);
    const double det = (l0 - l1.norm()) * (l0 + l1.norm());
    const double u0 = (l0 * y[o] - l1.dot(y.segment(o + 1, d - 1))) / det;
    u[o] = u0;
    u.segment(o + 1, d - 1) = (y.segment(o + 1, d - 1) - u0 * l1) / l0;
  }
  for (size_t i = 0; i < s.size(); ++i) {
    const int o = s_off[i], d = s[i];
    for (int c = 0; c < d; ++c)
      for (int r = 0; r < d; ++r)
        u[o + c * d + r] = 2.0 * y[o + c * d + r] / (lam[o + r * d + r] + lam[o + c * d + c]);
  }
  return u;
}

double ConeLayout::min_eig(const RVector& x) const {
  double m = std::numeric_limits<double>::infinity();
  if (l > 0) m = x.head(l).minCoeff();
  for (size_t i = 0; i < q.size(); ++i) m = std::min(m, x[q_off[i]] - x.segment(q_off[i] + 1, q[i] - 1).norm());
  for (size_t i = 0; i < s.size(); ++i) {
    Eigen::Map<const RMatrix> X(x.data() + s_off[i], s[i], s[i]);
    Eigen::SelfAdjointEigenSolver<RMatrix> es(X, Eigen::EigenvaluesOnly);
    m = std::min(m, es.eigenvalues()[0]);
  }
  return m;
}

double ConeLayout::max_step(const RVector& lam, const RVector& d) const {
  double alpha = std::numeric_limits<double>::infinity();
  for (int i = 0; i < l; ++i)
    if (d[i] < 0) alpha = std::min(alpha, -lam[i] / d[i]);
  for (size_t i = 0; i < q.size(); ++i) {
    const int o = q_off[i], n = q[i];
    const double x0 = lam[o], d0 = d[o];
    auto x1 = lam.segment(o + 1, n - 1);
    auto d1 = d.segment(o + 1, n - 1);
    // (x0 + t d0)^2 - ||x1 + t d1||^2 = a t^2 + 2 b t + c, first positive root.
    const double a = d0 * d0 - d1.squaredNorm();
    const double b = x0 * d0 - x1.dot(d1);
    const double c = (x0 - x1.norm()) * (x0 + x1.norm());
    double t = std::numeric_limits<double>::infinity();
    if (std::abs(a) < 1e-300) {
      if (b < 0) t = -c / (2 * b);
    } else {
      const double disc = b * b - a * c;
      if (disc >= 0) {
        const double sq = std::sqrt(disc);
        // Roots (-b +- sq) / a computed without cancellation.
        const double qv = -(b + std::copysign(sq, b));
        double r1 = qv / a;
        double r2 = (qv != 0.0) ? c / qv : std::numeric_limits<double>::infinity();
        for (double r : {r1, r2})
          if (r > 0) t = std::min(t, r);
      }
    }
    if (d0 < 0) t = std::min(t, -x0 / d0);
    alpha = std::min(alpha, t);
  }
  for (size_t i = 0; i < s.size(); ++i) {
    const int o = s_off[i], n = s[i];
    RVector isq(n);
    for (int j = 0; j < n; ++j) isq[j] = 1.0 / std::sqrt(lam[o + j * n + j]);
    Eigen::Map<const RMatrix> D(d.data() + o, n, n);
    RMatrix B = isq.asDiagonal() * D * isq.asDiagonal();
    Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (B + B.transpose()), Eigen::EigenvaluesOnly);
    const double mn = es.eigenvalues()[0];
    if (mn < 0) alpha = std::min(alpha, -1.0 / mn);
  }
  return alpha;
}

namespace {

double jnorm(const RVector& x) {
  const double t = x.tail(x.size() - 1).norm();
  return std::sqrt(std::max((x[0] - t) * (x[0] + t), 1e-300));
}

// Symmetric NT scaling of one second-order block in the coordinates of (s, z),
// its inverse, and lambda = W z.
void soc_nt(const RVector& s, const RVector& z, RMatrix& w, RMatrix& winv, Eigen::Ref<RVector> lam) {
  const int n = static_cast<int>(s.size());
  const double aa = jnorm(s), bb = jnorm(z);
  const double beta = std::sqrt(aa / bb);
  const RVector sb = s / aa, zb = z / bb;
  const double gamma = std::sqrt(std::max(0.5 * (1.0 + sb.dot(zb)), 1e-300));
  RVector u = sb;
  u[0] += zb[0];
  u.tail(n - 1) -= zb.tail(n - 1);
  u /= 2.0 * gamma;
  RVector v = u;
  v[0] += 1.0;
  v /= std::sqrt(2.0 * (u[0] + 1.0));
  RMatrix h = 2.0 * v * v.transpose();
  h(0, 0) -= 1.0;
  for (int j = 1; j < n; ++j) h(j, j) += 1.0;
  w = beta * h;
  RVector jv = v;
  jv.tail(n - 1) *= -1.0;
  winv = 2.0 * jv * jv.transpose();
  winv(0, 0) -= 1.0;
  for (int j = 1; j < n; ++j) winv(j, j) += 1.0;
  winv /= beta;
  const double scale = std::sqrt(aa * bb);
  lam[0] = scale * gamma;
  lam.tail(n - 1) = scale * ((gamma + zb[0]) * sb.tail(n - 1) + (gamma + sb[0]) * zb.tail(n - 1)) /
                    (sb[0] + zb[0] + 2.0 * gamma);
}

}  // namespace

void Scaling::set_psd(size_t i, const RMatrix& ls, const RMatrix& lz) {
  const ConeLayout& k = *layout;
  const int n = k.s[i];
  Eigen::JacobiSVD<RMatrix> svd(lz.transpose() * ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
  RVector sig = svd.singularValues().cwiseMax(1e-300);
  RVector isq = sig.cwiseSqrt().cwiseInverse();
  r[i] = ls * svd.matrixV() * isq.asDiagonal();
  rinv[i] = isq.asDiagonal() * svd.matrixU().transpose() * lz.transpose();
  Eigen::Map<RMatrix> L(lambda.data() + k.s_off[i], n, n);
  L = sig.asDiagonal();
}

void Scaling::init(const ConeLayout& k, const RVector& s, const RVector& z) {
  layout = &k;
  lambda = RVector::Zero(k.total);
  d = (s.head(k.l).cwiseQuotient(z.head(k.l))).cwiseSqrt();
  lambda.head(k.l) = (s.head(k.l).cwiseProduct(z.head(k.l))).cwiseSqrt();
  w.resize(k.q.size());
  winv.resize(k.q.size());
  for (size_t i = 0; i < k.q.size(); ++i) {
    const int o = k.q_off[i], n = k.q[i];
    soc_nt(s.segment(o, n), z.segment(o, n), w[i], winv[i], lambda.segment(o, n));
  }
  r.resize(k.s.size());
  rinv.resize(k.s.size());
  for (size_t i = 0; i < k.s.size(); ++i) {
    const int n = k.s[i];
    Eigen::Map<const RMatrix> S(s.data() + k.s_off[i], n, n), Z(z.data() + k.s_off[i], n, n);
    set_psd(i, RMatrix(S.llt().matrixL()), RMatrix(Z.llt().matrixL()));
  }
}

void Scaling::update(const RVector& lam_s, const RVector& lam_z) {
  const ConeLayout& k = *layout;
  RVector ls = lam_s.head(k.l), lz = lam_z.head(k.l);
  d = d.cwiseProduct(ls.cwiseQuotient(lz).cwiseSqrt());
  lambda.head(k.l) = ls.cwiseProduct(lz).cwiseSqrt();
  for (size_t i = 0; i < k.q.size(); ++i) {
    const int o = k.q_off[i], n = k.q[i];
    RMatrix wb, wbinv;
    soc_nt(lam_s.segment(o, n), lam_z.segment(o, n), wb, wbinv, lambda.segment(o, n));
    w[i] = wb * w[i];
    winv[i] = winv[i] * wbinv;
  }
  for (size_t i = 0; i < k.s.size(); ++i) {
    const int o = k.s_off[i], m = k.s[i];
    Eigen::Map<const RMatrix> Ms(lam_s.data() + o, m, m), Mz(lam_z.data() + o, m, m);
    Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (Ms + Ms.transpose()));
    Eigen::SelfAdjointEigenSolver<RMatrix> ez(0.5 * (Mz + Mz.transpose()));
    RVector evs = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt();
    RVector evz = ez.eigenvalues().cwiseMax(1e-300).cwiseSqrt();
    set_psd(i, RMatrix(r[i] * es.eigenvectors() * evs.asDiagonal()),
            RMatrix(rinv[i].transpose() * ez.eigenvectors() * evz.asDiagonal()));
  }
}

RVector Scaling::apply(const RVector& x, bool transpose, bool inverse) const {
  const ConeLayout& k = *layout;
  RVector y(x.size());
  if (inverse)
    y.head(k.l) = x.head(k.l).cwiseQuotient(d);
  else
    y.head(k.l) = x.head(k.l).cwiseProduct(d);
  for (size_t i = 0; i < k.q.size(); ++i) {
    const int o = k.q_off[i], n = k.q[i];
    const RMatrix& M = inverse ? winv[i] : w[i];
    if (transpose)
      y.segment(o, n) = M.transpose() * x.segment(o, n);
    else
      y.segment(o, n) = M * x.segment(o, n);
  }
  for (size_t i = 0; i < k.s.size(); ++i) {
    const int o = k.s_off[i], n = k.s[i];
    Eigen::Map<const RMatrix> X(x.data() + o, n, n);
    Eigen::Map<RMatrix> Y(y.data() + o, n, n);
    const RMatrix& R = r[i];
    const RMatrix& Ri = rinv[i];
    if (!transpose && !inverse)
      Y = R.transpose() * X * R;
    else if (transpose && !inverse)
      Y = R * X * R.transpose();
    else if (!transpose && inverse)
      Y = Ri.transpose() * X * Ri;
    else
      Y = Ri * X * Ri.transpose();
  }
  return y;
}

}  // namespace detail

namespace {

using detail::ConeLayout;
using detail::Scaling;

struct Compiled {
  int n = 0;
  RVector c;
  RMatrix G;
  RVector h;
  RMatrix A;
  RVector b;
  ConeLayout cones;
  std::vector<int> block_rows;  // original cone block index -> first row in s
  double objective_constant = 0.0;
};

Compiled compile(const ConicProgram& p) {
  Compiled out;
  out.n = p.variable_count();
  out.c = RVector::Zero(out.n);
  for (const auto& [i, v] : p.objective().terms()) out.c[i] += v;
  out.objective_constant = p.objective().constant();

  int neq = 0, nl = 0;
  ConeLayout& k = out.cones;
  for (const auto& blk : p.constraints()) {
    if (blk.kind == ConeKind::zero) ++neq;
    if (blk.kind == ConeKind::nonnegative) ++nl;
    if (blk.kind == ConeKind::second_order) k.q.push_back(blk.dim);
    if (blk.kind == ConeKind::psd) k.s.push_back(blk.dim);
  }
  k.l = nl;
  int off = nl;
  for (int d : k.q) {
    k.q_off.push_back(off);
    off += d;
  }
  for (int d : k.s) {
    k.s_off.push_back(off);
    off += d * d;
  }
  k.total = off;
  k.degree = nl + static_cast<int>(k.q.size());
  for (int d : k.s) k.degree += d;

  out.G = RMatrix::Zero(k.total, out.n);
  out.h = RVector::Zero(k.total);
  out.A = RMatrix::Zero(neq, out.n);
  out.b = RVector::Zero(neq);
  int ie = 0, il = 0, iq = 0, is = 0;
  for (const auto& blk : p.constraints()) {
    int row0 = 0;
    switch (blk.kind) {
      case ConeKind::zero:
        for (const auto& [i, v] : blk.rows[0].terms()) out.A(ie, i) += v;
        out.b[ie] = -blk.rows[0].constant();
        out.block_rows.push_back(-1 - ie);
        ++ie;
        continue;
      case ConeKind::nonnegative: row0 = il++; break;
      case ConeKind::second_order: row0 = k.q_off[iq++]; break;
      case ConeKind::psd: row0 = k.s_off[is++]; break;
    }
    out.block_rows.push_back(row0);
    for (size_t r = 0; r < blk.rows.size(); ++r) {
      for (const auto& [i, v] : blk.rows[r].terms()) out.G(row0 + r, i) -= v;
      out.h[row0 + r] = blk.rows[r].constant();
    }
  }
  return out;
}

// Solves  [0 A' G'; A 0 0; G 0 -W'W] [ux; uy; uz] = [bx; by; bz].
class KktSolver {
 public:
  KktSolver(const Compiled& p, const Scaling& w) : p_(p), w_(w) {
    const int n = p.n, m = static_cast<int>(p.A.rows());
    gt_.resize(p.G.rows(), n);
    for (int j = 0; j < n; ++j) gt_.col(j) = w.apply(p.G.col(j), true, true);
    RMatrix K = RMatrix::Zero(n + m, n + m);
    K.topLeftCorner(n, n) = gt_.transpose() * gt_;
    if (m > 0) {
      K.topLeftCorner(n, n) += p.A.transpose() * p.A;
      K.topRightCorner(n, m) = p.A.transpose();
      K.bottomLeftCorner(m, n) = p.A;
    }
    // Symmetric diagonal equilibration of the primal block.
    d_ = RVector::Ones(n + m);
    for (int i = 0; i < n; ++i) {
      const double v = K(i, i);
      if (v > 0.0) d_[i] = 1.0 / std::sqrt(v);
    }
    K = d_.asDiagonal() * K * d_.asDiagonal();
    for (int i = 0; i < n; ++i) K(i, i) += 1e-14;
    lu_.compute(K);
  }

  void solve(const RVector& bx, const RVector& by, const RVector& bz, RVector& ux, RVector& uy, RVector& uz) const {
    raw(bx, by, bz, ux, uy, uz);
    const double scale = std::max({1.0, bx.norm(), by.norm(), bz.norm()});
    double last = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 8; ++it) {
      RVector rx = bx - p_.A.transpose() * uy - p_.G.transpose() * uz;
      RVector ry = by - p_.A * ux;
      RVector wz = w_.apply(uz, false, false);
      RVector rz = bz - (p_.G * ux - w_.apply(wz, true, false));
      const double res = std::sqrt(rx.squaredNorm() + ry.squaredNorm() + rz.squaredNorm());
      if (res <= 1e-15 * scale || res >= 0.5 * last) break;
      last = res;
      RVector dx, dy, dz;
      raw(rx, ry, rz, dx, dy, dz);
      ux += dx;
      uy += dy;
      uz += dz;
    }
  }

 private:
  void raw(const RVector& bx, const RVector& by, const RVector& bz, RVector& ux, RVector& uy, RVector& uz) const {
    const int n = p_.n, m = static_cast<int>(p_.A.rows());
    RVector wbz = w_.apply(bz, true, true);
    RVector rhs(n + m);
    rhs.head(n) = bx + gt_.transpose() * wbz;
    if (m > 0) {
      rhs.head(n) += p_.A.transpose() * by;
      rhs.tail(m) = by;
    }
    RVector sol = d_.asDiagonal() * lu_.solve(RVector(d_.asDiagonal() * rhs));
    ux = sol.head(n);
    uy = sol.tail(m);
    uz = w_.apply(gt_ * ux - wbz, false, true);
  }

  const Compiled& p_;
  const Scaling& w_;
  RMatrix gt_;
  RVector d_;
  Eigen::PartialPivLU<RMatrix> lu_;
};

bool finite(const RVector& v) { return v.allFinite(); }

}  // namespace

SolveReport solve(const ConicProgram& program, const SolverOptions& opts) {
  Compiled P = compile(program);
  const ConeLayout& K = P.cones;
  const int n = P.n;
  SolveReport rep;
  rep.x = RVector::Zero(n);

  if (K.total == 0) {
    // Only equalities: any solution of Ax = b, objective must be in the row space.
    Eigen::CompleteOrthogonalDecomposition<RMatrix> cod(P.A);
    rep.x = cod.solve(P.b);
    rep.objective = P.c.dot(rep.x) + P.objective_constant;
    rep.status = (P.A * rep.x - P.b).norm() <= 1e-9 * std::max(1.0, P.b.norm()) ? SolveStatus::optimal
                                                                              : SolveStatus::infeasible;
    return rep;
  }

  const RVector e = K.identity();
  const double resx0 = std::max(1.0, P.c.norm());
  const double resy0 = std::max(1.0, P.b.norm());
  const double resz0 = std::max(1.0, P.h.norm());

  Scaling W;
  // Identity scaling for the starting point.
  {
    RVector ones = e;
    W.init(K, ones, ones);
  }
  RVector x, y, z, s;
  {
    KktSolver kkt(P, W);
    RVector zz;
    kkt.solve(RVector::Zero(n), P.b, P.h, x, y, zz);
    s = -zz;
    RVector xx;
    kkt.solve(-P.c, RVector::Zero(P.b.size()), RVector::Zero(K.total), xx, y, z);
  }
  {
    const double ms = K.min_eig(s);
    if (ms <= 1e-8 * std::max(1.0, s.norm())) s += (1.0 - ms) * e;
    const double mz = K.min_eig(z);
    if (mz <= 1e-8 * std::max(1.0, z.norm())) z += (1.0 - mz) * e;
  }
  double tau = 1.0, kappa = 1.0;
  W.init(K, s, z);

  // Best iterate so far, returned when the method stalls.
  struct Snapshot {
    RVector x, y, z;
    double tau = 1.0, pcost = 0.0, merit = std::numeric_limits<double>::infinity();
    double pres = 0.0, dres = 0.0, gap = 0.0;
  } best;

  for (int iter = 0;; ++iter) {
    rep.iterations = iter;
    RVector hrx = -P.A.transpose() * y - P.G.transpose() * z;
    RVector rx = -hrx + P.c * tau;  // A'y + G'z + c tau
    RVector hry = P.A * x;
    RVector ry = hry - P.b * tau;
    RVector hrz = s + P.G * x;
    RVector rz = hrz - P.h * tau;
    const double cx = P.c.dot(x), by = P.b.dot(y), hz = P.h.dot(z);
    const double rt = kappa + cx + by + hz;

    const double gap = K.inner(s, z) / (tau * tau);
    const double pcost = cx / tau, dcost = -(by + hz) / tau;
    double relgap = std::numeric_limits<double>::infinity();
    if (pcost < 0)
      relgap = gap / -pcost;
    else if (dcost > 0)
      relgap = gap / dcost;
    const double pres = std::max(ry.norm() / tau / resy0, rz.norm() / tau / resz0);
    const double dres = rx.norm() / tau / resx0;
    const double pinfres = (hz + by < 0) ? hrx.norm() / resx0 / (-hz - by) : std::numeric_limits<double>::infinity();
    const double dinfres = (cx < 0) ? std::max(hry.norm() / resy0, hrz.norm() / resz0) / (-cx)
                                    : std::numeric_limits<double>::infinity();

    rep.primal_residual = pres;
    rep.dual_residual = dres;
    rep.gap = gap;
    if (opts.verbose)
      std::fprintf(stderr, "%3d pcost %+.6e dcost %+.6e gap %.2e pres %.2e dres %.2e pinf %.2e dinf %.2e k/t %.2e\n",
                   iter, pcost, dcost, gap, pres, dres, pinfres, dinfres, kappa / tau);

    const double merit = std::max({pres, dres, std::min(gap, relgap)});
    if (merit < best.merit) best = {x, y, z, tau, pcost, merit, pres, dres, gap};
    auto finish_best = [&]() {
      const double f = std::max(1.0, opts.reduced_accuracy_factor);
      const bool close = best.pres <= f * opts.feastol && best.dres <= f * opts.feastol &&
                         best.merit <= f * std::max(opts.abstol, opts.reltol);
      rep.status = close && f > 1.0 ? SolveStatus::optimal : SolveStatus::numerical_limit;
      rep.reduced_accuracy = rep.status == SolveStatus::optimal;
      rep.x = best.x / best.tau;
      rep.dual_eq = best.y / best.tau;
      rep.dual_cone = best.z / best.tau;
      rep.objective = best.pcost + P.objective_constant;
      rep.primal_residual = best.pres;
      rep.dual_residual = best.dres;
      rep.gap = best.gap;
      return rep;
    };

    auto finish_optimal = [&](SolveStatus st) {
      rep.status = st;
      rep.x = x / tau;
      rep.dual_eq = y / tau;
      RVector zn = z / tau;
      rep.dual_cone = zn;
      rep.objective = pcost + P.objective_constant;
      return rep;
    };

    if (pres <= opts.feastol && dres <= opts.feastol && (gap <= opts.abstol || relgap <= opts.reltol))
      return finish_optimal(SolveStatus::optimal);
    if (pinfres <= opts.feastol) {
      rep.status = SolveStatus::infeasible;
      rep.x = x / tau;
      const double sc = -hz - by;
      rep.dual_eq = y / sc;
      rep.dual_cone = z / sc;
      rep.objective = std::numeric_limits<double>::infinity();
      return rep;
    }
    if (dinfres <= opts.feastol) {
      rep.status = SolveStatus::unbounded;
      rep.x = x / -cx;
      rep.objective = -std::numeric_limits<double>::infinity();
      return rep;
    }
    if (iter >= opts.max_iterations || (best.merit < 1e-5 && merit > 1e3 * best.merit)) return finish_best();

    const RVector& lam = W.lambda;
    if (!finite(lam)) return finish_best();

    KktSolver kkt(P, W);
    RVector vx, vy, vz;
    kkt.solve(-P.c, P.b, P.h, vx, vy, vz);
    const double vden = P.c.dot(vx) + P.b.dot(vy) + P.h.dot(vz) - kappa / tau;

    const double mu = (K.inner(s, z) + tau * kappa) / (K.degree + 1);
    const RVector lamsq = K.product(lam, lam);

    RVector dx, dy, dz, dsh, dzh;
    double dtau = 0, dkappa = 0;
    auto newton = [&](double sigma, const RVector& rs, double rk) {
      const double f = 1.0 - sigma;
      RVector qv = K.divide(lam, rs);
      RVector ux, uy, uz;
      kkt.solve(-f * rx, -f * ry, -f * rz - W.apply(qv, true, false), ux, uy, uz);
      const double r4 = -f * rt - rk / tau;
      dtau = (r4 - P.c.dot(ux) - P.b.dot(uy) - P.h.dot(uz)) / vden;
      dx = ux + dtau * vx;
      dy = uy + dtau * vy;
      dz = uz + dtau * vz;
      dzh = W.apply(dz, false, false);
      dsh = qv - dzh;
      dkappa = (rk - kappa * dtau) / tau;
    };
    auto step_to_boundary = [&]() {
      double a = std::min(K.max_step(lam, dsh), K.max_step(lam, dzh));
      if (dtau < 0) a = std::min(a, -tau / dtau);
      if (dkappa < 0) a = std::min(a, -kappa / dkappa);
      return a;
    };

    // Predictor.
    newton(0.0, -lamsq, -tau * kappa);
    if (!finite(dx) || !finite(dzh)) return finish_best();
    const double alpha_aff = std::min(1.0, step_to_boundary());
    const double sigma = std::pow(1.0 - alpha_aff, 3);
    const RVector corr = K.product(dsh, dzh);
    const double kcorr = dtau * dkappa;

    // Corrector.
    newton(sigma, -lamsq + sigma * mu * e - corr, -tau * kappa + sigma * mu - kcorr);
    if (!finite(dx) || !finite(dzh)) return finish_best();
    const double amax = step_to_boundary();
    const double alpha = std::min(1.0, 0.99 * amax);
    if (!(alpha > 1e-12)) return finish_best();

    RVector lam_s = lam + alpha * dsh;
    RVector lam_z = lam + alpha * dzh;
    s = W.apply(lam_s, true, false);
    z = W.apply(lam_z, false, true);
    x += alpha * dx;
    y += alpha * dy;
    tau += alpha * dtau;
    kappa += alpha * dkappa;

    W.update(lam_s, lam_z);
  }
}

}  // namespace robustbf
