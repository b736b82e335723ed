#include "robustbf/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "design_internal.hpp"

namespace robustbf {

namespace {

void check_instance(const NetworkInstance& inst) {
  auto v = validate(inst);
  if (!v.empty()) throw InvalidArgument("invalid instance: " + v.front());
}

}  // namespace

std::vector<double> waterfill(const std::vector<double>& gains, double budget) {
  if (!(budget >= 0.0)) throw InvalidArgument("power budget must be non-negative");
  std::vector<double> floor;
  for (double g : gains) {
    if (!(g > 0.0)) throw InvalidArgument("gains must be positive");
    floor.push_back(1.0 / g);
  }
  std::vector<double> sorted = floor;
  std::sort(sorted.begin(), sorted.end());
  // Water level with the n lowest floors active.
  double level = 0.0, acc = 0.0;
  for (size_t n = 1; n <= sorted.size(); ++n) {
    acc += sorted[n - 1];
    level = (budget + acc) / static_cast<double>(n);
    if (n == sorted.size() || level <= sorted[n]) break;
  }
  std::vector<double> p;
  for (double f : floor) p.push_back(std::max(0.0, level - f));
  return p;
}

PrecoderSet zero_forcing(const NetworkInstance& inst, ZfObjective objective) {
  check_instance(inst);
  const NetworkConfig& c = inst.config;
  if (c.users > c.antennas) throw InvalidArgument("zero forcing needs K <= N");
  PrecoderSet out = PrecoderSet::zeros(c);
  for (int m = 0; m < c.cells; ++m) {
    CMatrix h(c.users, c.antennas);
    for (int k = 0; k < c.users; ++k) h.row(k) = inst.h(m, m, k);
    Eigen::JacobiSVD<CMatrix> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(c.users - 1) <= 1e-10 * std::max(1.0, sv(0)))
      throw InvalidArgument("own-cell estimates of cell " + std::to_string(m + 1) + " are rank deficient");
    const CMatrix pinv = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().adjoint();
    std::vector<double> gains;
    CMatrix dirs(c.antennas, c.users);
    for (int k = 0; k < c.users; ++k) {
      dirs.col(k) = pinv.col(k).normalized();
      gains.push_back(std::norm((inst.h(m, m, k) * dirs.col(k))(0)));
    }
    std::vector<double> p;
    if (objective == ZfObjective::maxmin) {
      double inv = 0.0;
      for (double g : gains) inv += 1.0 / g;
      for (double g : gains) p.push_back(inst.power(m) / (g * inv));
    } else {
      p = waterfill(gains, inst.power(m));
    }
    for (int k = 0; k < c.users; ++k) out[m].col(k) = std::sqrt(p[k]) * dirs.col(k);
  }
  return out;
}

SlinrBeam slinr_beam(const NetworkInstance& original, int m, int k, double power, const BisectionOptions& opts) {
  check_instance(original);
  const NetworkConfig& c = original.config;
  if (m < 0 || m >= c.cells || k < 0 || k >= c.users) throw InvalidArgument("user index out of range");
  if (!(power >= 0.0)) throw InvalidArgument("beam power must be non-negative");
  SlinrBeam out;
  out.w = CVector::Zero(c.antennas);
  const double g = std::max(0.0, original.h(m, m, k).norm() - original.eps(m, m, k));
  if (power == 0.0 || g == 0.0) return out;
  const double sigma = detail::design_scale(original);
  const NetworkInstance inst = detail::rescaled(original, sigma);
  const double budget = power / (sigma * sigma);
  auto probe = [&](double a) {
    ConicProgram p;
    auto s = p.add_variable("s");
    auto w = p.add_complex_matrix("w", c.antennas, 1);
    add_frobenius_bound(p, w, std::sqrt(budget) * s[0], "power");
    // Leakage onto every other user, in-cell and out-of-cell, in place of the interference terms.
    std::vector<LinExpr> leak;
    for (int n = 0; n < c.cells; ++n)
      for (int l = 0; l < c.users; ++l)
        if (n != m || l != k)
          leak.push_back(detail::add_interference_bound(p, inst.h(n, m, l), w, inst.eps(n, m, l),
                                                        detail::user_tag(n, l) + ".leak"));
    detail::add_sinr_constraint(p, inst.h(m, m, k), inst.eps(m, m, k), w, 0, a, leak, 1.0, detail::user_tag(m, k));
    p.minimize(s[0]);
    auto r = solve(p, opts.solver);
    PowerResult res;
    res.status = r.status;
    if (r.optimal()) {
      res.b = r.value(s) * r.value(s);
      res.precoders.cells.push_back(sigma * value_of(r, w));
    }
    return res;
  };
  MaxMinResult r = detail::bisect_power({1, 1, c.antennas}, power * g * g, opts, probe);
  out.slinr = r.a;
  out.w = r.precoders[0].col(0);
  return out;
}

PrecoderSet slinr_beamforming(const NetworkInstance& inst, const std::vector<double>& profile,
                              const BisectionOptions& opts) {
  check_instance(inst);
  const NetworkConfig& c = inst.config;
  if (!profile.empty() && static_cast<int>(profile.size()) != c.user_count())
    throw InvalidArgument("power profile needs one entry per user");
  for (int m = 0; m < c.cells; ++m) {
    if (profile.empty()) break;
    double total = 0.0;
    for (int k = 0; k < c.users; ++k) {
      const double p = profile[user_index(c, m, k)];
      if (!(p >= 0.0)) throw InvalidArgument("power profile entries must be non-negative");
      total += p;
    }
    if (total > inst.power(m) * (1 + 1e-12))
      throw InvalidArgument("power profile of cell " + std::to_string(m + 1) + " exceeds its budget");
  }
  PrecoderSet out = PrecoderSet::zeros(c);
  for (int m = 0; m < c.cells; ++m)
    for (int k = 0; k < c.users; ++k) {
      const double p = profile.empty() ? inst.power(m) / c.users : profile[user_index(c, m, k)];
      out[m].col(k) = slinr_beam(inst, m, k, p, opts).w;
    }
  return out;
}

SlinrSearchResult slinr_profile_search(const NetworkInstance& inst, int resolution, const BisectionOptions& opts) {
  check_instance(inst);
  if (resolution < 1) throw InvalidArgument("grid resolution must be at least 1");
  const NetworkConfig& c = inst.config;
  const int K = c.users, r = resolution;
  SlinrSearchResult out;
  out.precoders = PrecoderSet::zeros(c);
  out.profile.assign(c.user_count(), 0.0);
  for (int m = 0; m < c.cells; ++m) {
    // table[k][i]: beam of user k with power P_m i / r.
    std::vector<std::vector<SlinrBeam>> table(K);
    for (int k = 0; k < K; ++k)
      for (int i = 0; i <= r; ++i) table[k].push_back(slinr_beam(inst, m, k, inst.power(m) * i / r, opts));
    // best[k][j]: largest sum over users k.. with j grid units left.
    const double none = -std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> best(K + 1, std::vector<double>(r + 1, 0.0));
    std::vector<std::vector<int>> pick(K, std::vector<int>(r + 1, 0));
    for (int k = K - 1; k >= 0; --k)
      for (int j = 0; j <= r; ++j) {
        best[k][j] = none;
        for (int i = 0; i <= j; ++i) {
          const double v = table[k][i].slinr + best[k + 1][j - i];
          if (v > best[k][j]) {
            best[k][j] = v;
            pick[k][j] = i;
          }
        }
      }
    out.sum_slinr += best[0][r];
    for (int k = 0, j = r; k < K; ++k) {
      const int i = pick[k][j];
      out.precoders[m].col(k) = table[k][i].w;
      out.profile[user_index(c, m, k)] = inst.power(m) * i / r;
      j -= i;
    }
  }
  return out;
}

}  // namespace robustbf
