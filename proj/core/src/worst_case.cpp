#include "robustbf/worst_case.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

namespace robustbf {

namespace {

double pos(double x) { return x > 0.0 ? x : 0.0; }

void check_user(const NetworkInstance& inst, const PrecoderSet& p, int m, int k) {
  const NetworkConfig& c = inst.config;
  if (m < 0 || m >= c.cells || k < 0 || k >= c.users) throw InvalidArgument("user index out of range");
  if (p.size() != c.cells) throw InvalidArgument("precoder set has wrong number of cells");
}

}  // namespace

GainExtrema robust_gain_extrema(const CRowVector& h, const CVector& w, double eps, const CMatrix& q) {
  if (eps < 0) throw InvalidArgument("radius must be non-negative");
  if (q.rows() != q.cols() || q.rows() != w.size()) throw InvalidArgument("shape mismatch in gain extrema");
  if ((q - q.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, q.cwiseAbs().maxCoeff()))
    throw InvalidArgument("weighting matrix is not Hermitian");
  Eigen::LLT<CMatrix> llt(q);
  if (llt.info() != Eigen::Success || llt.matrixL().toDenseMatrix().diagonal().real().minCoeff() <= 0.0)
    throw InvalidArgument("weighting matrix is not positive definite");
  const double r = std::sqrt(std::max(0.0, std::real(w.dot(llt.solve(w)))));
  const double a = std::abs((h * w)(0));
  const double lo = pos(a - eps * r);
  const double hi = a + eps * r;
  return {lo * lo, hi * hi};
}

GainExtrema robust_gain_extrema(const CRowVector& h, const CVector& w, double eps) {
  if (eps < 0) throw InvalidArgument("radius must be non-negative");
  const double a = std::abs((h * w)(0));
  const double r = w.norm();
  const double lo = pos(a - eps * r);
  const double hi = a + eps * r;
  return {lo * lo, hi * hi};
}

BallMaximum maximize_over_ball(const CRowVector& h, const CMatrix& a, double eps, const CRowVector& offset) {
  const int n = static_cast<int>(h.size());
  if (a.rows() != n) throw InvalidArgument("maximize_over_ball: shape mismatch");
  if (offset.size() != 0 && offset.size() != a.cols()) throw InvalidArgument("maximize_over_ball: offset shape mismatch");
  CRowVector c = h * a;
  if (offset.size() != 0) c -= offset;
  BallMaximum out;
  out.delta = CRowVector::Zero(n);
  if (eps == 0.0 || a.cols() == 0) {
    out.value = c.squaredNorm();
    return out;
  }
  // With x = D^H the objective is x'Bx + 2 Re(p'x) + ||c||^2, B = A A^H, p = A c^H.
  const CMatrix b = a * a.adjoint();
  const CVector p = a * c.adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(b);
  const RVector sig = es.eigenvalues();
  const CMatrix& qm = es.eigenvectors();
  const CVector ph = qm.adjoint() * p;
  const double smax = sig[n - 1];
  const double pnorm = p.norm();
  const double top_tol = 1e-12 * std::max(1.0, smax);

  CVector xh = CVector::Zero(n);
  double top2 = 0.0;
  for (int i = 0; i < n; ++i)
    if (sig[i] >= smax - top_tol) top2 += std::norm(ph[i]);

  bool hard = false;
  if (top2 <= 1e-28 * std::max(1.0, pnorm * pnorm)) {
    double rest = 0.0;
    for (int i = 0; i < n; ++i)
      if (sig[i] < smax - top_tol) rest += std::norm(ph[i]) / ((smax - sig[i]) * (smax - sig[i]));
    if (rest <= eps * eps) {
      hard = true;
      for (int i = 0; i < n; ++i)
        if (sig[i] < smax - top_tol) xh[i] = ph[i] / (smax - sig[i]);
      xh[n - 1] += std::sqrt(std::max(0.0, eps * eps - rest));
    }
  }
  if (!hard) {
    auto psi = [&](double mu) {
      double phi = 0.0;
      for (int i = 0; i < n; ++i) {
        const double d = mu - sig[i];
        phi += std::norm(ph[i]) / (d * d);
      }
      return 1.0 / std::sqrt(phi) - 1.0 / eps;
    };
    double lo = smax + std::sqrt(top2) / eps;
    double hi = smax + pnorm / eps;
    double mu = hi;
    if (hi > lo) {
      const double flo = psi(lo), fhi = psi(hi);
      if (flo >= 0.0) {
        mu = lo;
      } else if (fhi <= 0.0) {
        mu = hi;
      } else {
        std::uintmax_t iters = 200;
        auto r = boost::math::tools::toms748_solve(psi, lo, hi, flo, fhi,
                                                   boost::math::tools::eps_tolerance<double>(52), iters);
        mu = 0.5 * (r.first + r.second);
      }
    }
    for (int i = 0; i < n; ++i) xh[i] = ph[i] / (mu - sig[i]);
  }
  const CVector x = qm * xh;
  out.delta = x.adjoint();
  const double nrm = out.delta.norm();
  if (nrm > eps) out.delta *= eps / nrm;
  CRowVector v = (h + out.delta) * a;
  if (offset.size() != 0) v -= offset;
  out.value = std::max(v.squaredNorm(), c.squaredNorm());
  return out;
}

double max_quadratic_over_ball(const CRowVector& h, const CMatrix& a, double eps) {
  return maximize_over_ball(h, a, eps).value;
}

double nominal_sinr(const NetworkInstance& inst, const PrecoderSet& p, int m, int k, const PerturbationSet* delta) {
  check_user(inst, p, m, k);
  auto ch = [&](int n) -> CRowVector {
    CRowVector h = inst.h(m, n, k);
    if (delta) h += (*delta)(m, n, k);
    return h;
  };
  const CRowVector hm = ch(m);
  const double s = std::norm((hm * p[m].col(k))(0));
  double i = 1.0;
  for (int l = 0; l < inst.config.users; ++l)
    if (l != k) i += std::norm((hm * p[m].col(l))(0));
  for (int n = 0; n < inst.config.cells; ++n)
    if (n != m) i += (ch(n) * p[n]).squaredNorm();
  return s / i;
}

double worst_case_sinr_single(const NetworkInstance& inst, const PrecoderSet& p, int m) {
  if (inst.config.users != 1) throw InvalidArgument("worst_case_sinr_single requires one user per cell");
  check_user(inst, p, m, 0);
  const CVector wm = p[m].col(0);
  const double num = pos(std::abs((inst.h(m, m, 0) * wm)(0)) - inst.eps(m, m, 0) * wm.norm());
  double den = 1.0;
  for (int n = 0; n < inst.config.cells; ++n) {
    if (n == m) continue;
    const CVector wn = p[n].col(0);
    const double t = std::abs((inst.h(m, n, 0) * wn)(0)) + inst.eps(m, n, 0) * wn.norm();
    den += t * t;
  }
  return num * num / den;
}

double sinr_lower_bound(const NetworkInstance& inst, const PrecoderSet& p, int m, int k) {
  check_user(inst, p, m, k);
  const GainExtrema g = robust_gain_extrema(inst.h(m, m, k), p[m].col(k), inst.eps(m, m, k));
  double den = 1.0;
  if (inst.config.users > 1) den += max_quadratic_over_ball(inst.h(m, m, k), p.without_column(m, k), inst.eps(m, m, k));
  for (int n = 0; n < inst.config.cells; ++n)
    if (n != m) den += max_quadratic_over_ball(inst.h(m, n, k), p[n], inst.eps(m, n, k));
  return g.min / den;
}

double sinr_upper_bound(const NetworkInstance& inst, const PrecoderSet& p, int m, int k) {
  check_user(inst, p, m, k);
  auto term = [](const CRowVector& h, const CVector& w, double eps) {
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    const double t = std::abs((h * w)(0)) / nw + eps;
    return t * t * nw * nw;
  };
  const double own = p[m].col(k).norm();
  if (own == 0.0) return 0.0;
  const double hn = inst.h(m, m, k).norm() + inst.eps(m, m, k);
  const double num = hn * hn * own * own;
  double intra = 0.0;
  for (int q = 0; q < inst.config.users; ++q)
    if (q != k) intra = std::max(intra, term(inst.h(m, m, k), p[m].col(q), inst.eps(m, m, k)));
  double inter = 0.0;
  for (int n = 0; n < inst.config.cells; ++n) {
    if (n == m) continue;
    double best = 0.0;
    for (int q = 0; q < inst.config.users; ++q) best = std::max(best, term(inst.h(m, n, k), p[n].col(q), inst.eps(m, n, k)));
    inter += best;
  }
  return num / (1.0 + intra + inter);
}

namespace {

double outer_interference(const NetworkInstance& inst, const PrecoderSet& p, int m, int k) {
  double s = 0.0;
  for (int n = 0; n < inst.config.cells; ++n)
    if (n != m) s += max_quadratic_over_ball(inst.h(m, n, k), p[n], inst.eps(m, n, k));
  return s;
}

CRowVector unit_row(int size, int k) {
  CRowVector e = CRowVector::Zero(size);
  e[k] = 1.0;
  return e;
}

}  // namespace

double worst_case_mse(const NetworkInstance& inst, const PrecoderSet& p, double f, int m, int k) {
  check_user(inst, p, m, k);
  if (!(f > 0.0)) throw InvalidArgument("equalizer must be strictly positive");
  const double own = maximize_over_ball(inst.h(m, m, k), p[m], inst.eps(m, m, k), f * unit_row(inst.config.users, k)).value;
  return (own + outer_interference(inst, p, m, k) + 1.0) / (f * f);
}

EqualizerChoice best_worst_case_equalizer(const NetworkInstance& inst, const PrecoderSet& p, int m, int k) {
  check_user(inst, p, m, k);
  const double rest = outer_interference(inst, p, m, k) + 1.0;
  const CRowVector e = unit_row(inst.config.users, k);
  const CRowVector& h = inst.h(m, m, k);
  const double eps = inst.eps(m, m, k);
  // With g = 1/f: F(g) = max ||g (h + D) Phi - e_k||^2 + g^2 rest, convex, F(0) = 1.
  auto objective = [&](double g) { return maximize_over_ball(h, g * p[m], eps, e).value + g * g * rest; };
  const double hi = 1.0 / std::sqrt(rest);
  auto r = boost::math::tools::brent_find_minima(objective, 0.0, hi, 40);
  double g = r.first, val = r.second;
  EqualizerChoice out;
  if (!(g > 1e-12) || val >= 1.0) {
    // Signal useless in the worst case: the limit f -> infinity gives mse -> 1.
    out.f = 1e12;
    out.mse = std::min(1.0, worst_case_mse(inst, p, out.f, m, k));
    return out;
  }
  out.f = 1.0 / g;
  out.mse = worst_case_mse(inst, p, out.f, m, k);
  return out;
}

double worst_case_slinr(const NetworkInstance& inst, const PrecoderSet& p, int m, int k) {
  check_user(inst, p, m, k);
  const CVector w = p[m].col(k);
  const double num = robust_gain_extrema(inst.h(m, m, k), w, inst.eps(m, m, k)).min;
  double den = 1.0;
  for (int j = 0; j < inst.config.users; ++j)
    if (j != k) den += robust_gain_extrema(inst.h(m, m, j), w, inst.eps(m, m, j)).max;
  for (int n = 0; n < inst.config.cells; ++n) {
    if (n == m) continue;
    for (int l = 0; l < inst.config.users; ++l) den += robust_gain_extrema(inst.h(n, m, l), w, inst.eps(n, m, l)).max;
  }
  return num / den;
}

namespace {

// SINR of user (m,k) as a function of its M incoming-channel perturbations.
struct SinrFunction {
  const NetworkInstance& inst;
  const PrecoderSet& p;
  int m, k;

  double value(const std::vector<CRowVector>& d) const {
    const CRowVector x = inst.h(m, m, k) + d[m];
    const double s = std::norm((x * p[m].col(k))(0));
    double i = 1.0;
    for (int l = 0; l < inst.config.users; ++l)
      if (l != k) i += std::norm((x * p[m].col(l))(0));
    for (int n = 0; n < inst.config.cells; ++n)
      if (n != m) i += ((inst.h(m, n, k) + d[n]) * p[n]).squaredNorm();
    return s / i;
  }

  // Real gradient of the SINR with respect to each perturbation, as complex rows.
  std::vector<CRowVector> gradient(const std::vector<CRowVector>& d) const {
    const int M = inst.config.cells;
    std::vector<CRowVector> g(M);
    const CRowVector x = inst.h(m, m, k) + d[m];
    const cplx sk = (x * p[m].col(k))(0);
    const double s = std::norm(sk);
    double i = 1.0;
    CRowVector gi_m = CRowVector::Zero(x.size());
    for (int l = 0; l < inst.config.users; ++l) {
      if (l == k) continue;
      const cplx sl = (x * p[m].col(l))(0);
      i += std::norm(sl);
      gi_m += 2.0 * sl * p[m].col(l).adjoint();
    }
    std::vector<CRowVector> xn(M);
    for (int n = 0; n < M; ++n) {
      if (n == m) continue;
      xn[n] = inst.h(m, n, k) + d[n];
      i += (xn[n] * p[n]).squaredNorm();
    }
    const CRowVector gs = 2.0 * sk * p[m].col(k).adjoint();
    g[m] = (gs * i - s * gi_m) / (i * i);
    for (int n = 0; n < M; ++n) {
      if (n == m) continue;
      g[n] = -s * (2.0 * xn[n] * p[n] * p[n].adjoint()) / (i * i);
    }
    return g;
  }
};

void project(std::vector<CRowVector>& d, const std::vector<double>& eps) {
  for (size_t n = 0; n < d.size(); ++n) {
    const double nr = d[n].norm();
    if (nr > eps[n]) d[n] *= (eps[n] > 0 ? eps[n] / nr : 0.0);
  }
}

double descend(const SinrFunction& f, std::vector<CRowVector> d, const std::vector<double>& eps,
               const OracleOptions& opts) {
  double best = f.value(d);
  double t = opts.step;
  double emax = *std::max_element(eps.begin(), eps.end());
  if (emax == 0.0) return best;
  for (int it = 0; it < opts.descent_steps; ++it) {
    auto g = f.gradient(d);
    double gn = 0.0;
    for (size_t n = 0; n < g.size(); ++n) gn += eps[n] > 0 ? g[n].squaredNorm() : 0.0;
    gn = std::sqrt(gn);
    if (gn == 0.0) break;
    std::vector<CRowVector> trial = d;
    for (size_t n = 0; n < g.size(); ++n)
      if (eps[n] > 0) trial[n] -= (t * emax / gn) * g[n];
    project(trial, eps);
    const double v = f.value(trial);
    if (v < best) {
      best = v;
      d = std::move(trial);
      t = std::min(1.0, 2.0 * t);
    } else {
      t *= 0.5;
      if (t < 1e-12) break;
    }
  }
  return best;
}

}  // namespace

double oracle_sinr_estimate(const NetworkInstance& inst, const PrecoderSet& p, int m, int k, int samples,
                            std::uint64_t seed, const OracleOptions& opts) {
  check_user(inst, p, m, k);
  if (samples < 1) throw InvalidArgument("oracle needs at least one sample");
  const int M = inst.config.cells, N = inst.config.antennas;
  SinrFunction f{inst, p, m, k};
  std::vector<double> eps(M);
  for (int n = 0; n < M; ++n) eps[n] = inst.eps(m, n, k);

  // Structured candidates: shrink the useful signal, and align each link with its dominant beam.
  auto aligned = [&](const CRowVector& h, const CVector& w, double e, double sign) -> CRowVector {
    const double nw = w.norm();
    if (nw == 0.0 || e == 0.0) return CRowVector::Zero(N);
    const cplx hw = (h * w)(0);
    const cplx ph = std::abs(hw) > 0 ? hw / std::abs(hw) : cplx(1.0);
    return sign * e * ph * w.adjoint() / nw;
  };
  std::vector<std::vector<CRowVector>> candidates;
  {
    std::vector<CRowVector> d(M, CRowVector::Zero(N));
    candidates.push_back(d);
    d[m] = aligned(inst.h(m, m, k), p[m].col(k), eps[m], -1.0);
    for (int n = 0; n < M; ++n) {
      if (n == m) continue;
      d[n] = maximize_over_ball(inst.h(m, n, k), p[n], eps[n]).delta;
    }
    candidates.push_back(d);
    for (int q = 0; q < inst.config.users; ++q) {
      if (q == k) continue;
      std::vector<CRowVector> e = d;
      e[m] = aligned(inst.h(m, m, k), p[m].col(q), eps[m], 1.0);
      candidates.push_back(e);
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) best = std::min(best, descend(f, c, eps, opts));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double record = std::numeric_limits<double>::infinity();
  std::vector<CRowVector> d(M, CRowVector::Zero(N));
  for (int s = 0; s < samples; ++s) {
    for (int n = 0; n < M; ++n) {
      CRowVector v(N);
      for (int a = 0; a < N; ++a) {
        const double re = g(rng);
        const double im = g(rng);
        v[a] = {re, im};
      }
      const bool surface = u(rng) < opts.surface_fraction;
      const double radius = surface ? eps[n] : eps[n] * std::pow(u(rng), 1.0 / (2.0 * N));
      const double nv = v.norm();
      d[n] = (eps[n] == 0.0 || nv == 0.0) ? CRowVector(CRowVector::Zero(N)) : CRowVector(v * (radius / nv));
    }
    const double v = f.value(d);
    if (v < record) {
      record = v;
      best = std::min(best, descend(f, d, eps, opts));
    }
  }
  return best;
}

double rate_from_sinr(double sinr) {
  if (sinr < 0.0) throw InvalidArgument("negative SINR");
  return std::log1p(sinr);
}

std::vector<double> rates_from(const std::vector<double>& sinr) {
  std::vector<double> r;
  r.reserve(sinr.size());
  for (double s : sinr) r.push_back(rate_from_sinr(s));
  return r;
}

double weighted_sum(const std::vector<double>& values, const std::vector<double>& weights) {
  if (values.size() != weights.size()) throw InvalidArgument("weighted_sum: size mismatch");
  double s = 0.0;
  for (size_t i = 0; i < values.size(); ++i) s += values[i] * weights[i];
  return s;
}

double WorstCaseReport::min_certified_rate() const {
  return certified_rate.empty() ? 0.0 : *std::min_element(certified_rate.begin(), certified_rate.end());
}

WorstCaseReport evaluate_design(const NetworkInstance& inst, const PrecoderSet& p, int oracle_samples,
                                std::uint64_t oracle_seed) {
  WorstCaseReport r;
  const NetworkConfig& c = inst.config;
  for (int m = 0; m < c.cells; ++m)
    for (int k = 0; k < c.users; ++k) {
      const double lo = sinr_lower_bound(inst, p, m, k);
      r.lower.push_back(lo);
      r.exact_single.push_back(c.users == 1 ? worst_case_sinr_single(inst, p, m)
                                            : std::numeric_limits<double>::quiet_NaN());
      r.upper.push_back(sinr_upper_bound(inst, p, m, k));
      const EqualizerChoice eq = best_worst_case_equalizer(inst, p, m, k);
      r.mse.push_back(eq.mse);
      r.slinr.push_back(worst_case_slinr(inst, p, m, k));
      r.certified_rate.push_back(std::max(rate_from_sinr(lo), -std::log(std::min(1.0, eq.mse))));
      if (oracle_samples > 0)
        r.oracle.push_back(oracle_sinr_estimate(inst, p, m, k, oracle_samples,
                                                oracle_seed + static_cast<std::uint64_t>(user_index(c, m, k))));
    }
  return r;
}

}  // namespace robustbf
