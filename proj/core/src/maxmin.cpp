#include "robustbf/maxmin.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "design_internal.hpp"
#include "robustbf/worst_case.hpp"

namespace robustbf {

using detail::user_tag;

namespace {

void check_target(const NetworkInstance& inst, double a) {
  if (!(a >= 0.0)) throw InvalidArgument("SINR target must be non-negative");
  auto v = validate(inst);
  if (!v.empty()) throw InvalidArgument("invalid instance: " + v.front());
}

PrecoderSet read_precoders(const SolveReport& r, const std::vector<ComplexExprMatrix>& phi, double sigma) {
  PrecoderSet out;
  for (const auto& x : phi) out.cells.push_back(sigma * value_of(r, x));
  return out;
}

}  // namespace

PowerResult power_opt_single(const NetworkInstance& original, double a, const SolverOptions& opts) {
  check_target(original, a);
  if (original.config.users != 1) throw InvalidArgument("power_opt_single requires one user per cell");
  const double sigma = detail::design_scale(original);
  const NetworkInstance inst = detail::rescaled(original, sigma);
  const int M = inst.config.cells, N = inst.config.antennas;

  ConicProgram p;
  auto s = p.add_variable("s");
  std::vector<ComplexExprMatrix> w;
  std::vector<LinExpr> norm_w;
  for (int m = 0; m < M; ++m) {
    w.push_back(p.add_complex_matrix("w" + std::to_string(m + 1), N, 1));
    auto e = p.add_variable("norm" + std::to_string(m + 1));
    add_frobenius_bound(p, w[m], e[0]);
    p.add_nonnegative(std::sqrt(inst.power(m)) * s[0] - e[0]);
    norm_w.push_back(e[0]);
  }
  for (int m = 0; m < M; ++m) {
    const std::string tag = user_tag(m, 0);
    auto t = p.add_variable(tag + ".t");
    const ComplexExprMatrix hw = row_times(inst.h(m, m, 0), w[m]);
    p.add_equality(hw(0, 0).im, tag + ".phase");
    p.add_nonnegative(hw(0, 0).re - inst.eps(m, m, 0) * norm_w[m] - std::sqrt(a) * t[0], tag + ".own");
    std::vector<LinExpr> den{t[0]};
    for (int n = 0; n < M; ++n) {
      if (n == m) continue;
      auto c = p.add_variable(tag + ".c");
      auto d = p.add_variable(tag + ".d");
      const ComplexExprMatrix g = row_times(inst.h(m, n, 0), w[n]);
      p.add_soc({d[0], g(0, 0).re, g(0, 0).im});
      p.add_nonnegative(c[0] - d[0] - inst.eps(m, n, 0) * norm_w[n]);
      den.push_back(c[0]);
    }
    den.emplace_back(1.0);
    p.add_soc(std::move(den), tag + ".den");
  }
  p.minimize(s[0]);
  auto r = solve(p, opts);
  PowerResult out;
  out.status = r.status;
  if (r.optimal()) {
    out.b = std::pow(r.value(s), 2);
    out.precoders = read_precoders(r, w, sigma);
  }
  return out;
}

PowerResult power_opt_multi(const NetworkInstance& original, double a, const SolverOptions& opts) {
  check_target(original, a);
  const double sigma = detail::design_scale(original);
  const NetworkInstance inst = detail::rescaled(original, sigma);
  const NetworkConfig& c = inst.config;

  ConicProgram p;
  auto s = p.add_variable("s");
  std::vector<ComplexExprMatrix> phi;
  for (int m = 0; m < c.cells; ++m) {
    phi.push_back(p.add_complex_matrix("phi" + std::to_string(m + 1), c.antennas, c.users));
    add_frobenius_bound(p, phi[m], std::sqrt(inst.power(m)) * s[0], "power" + std::to_string(m + 1));
  }
  for (int m = 0; m < c.cells; ++m)
    for (int k = 0; k < c.users; ++k) {
      const std::string tag = user_tag(m, k);
      std::vector<LinExpr> extra;
      for (int n = 0; n < c.cells; ++n)
        if (n != m)
          extra.push_back(detail::add_interference_bound(p, inst.h(m, n, k), phi[n], inst.eps(m, n, k),
                                                         tag + ".from" + std::to_string(n + 1)));
      detail::add_sinr_constraint(p, inst.h(m, m, k), inst.eps(m, m, k), phi[m], k, a, extra, 1.0, tag);
    }
  p.minimize(s[0]);
  auto r = solve(p, opts);
  PowerResult out;
  out.status = r.status;
  if (r.optimal()) {
    out.b = std::pow(r.value(s), 2);
    out.precoders = read_precoders(r, phi, sigma);
  }
  return out;
}

double maxmin_upper_bracket(const NetworkInstance& inst) {
  double best = std::numeric_limits<double>::infinity();
  for (int m = 0; m < inst.config.cells; ++m)
    for (int k = 0; k < inst.config.users; ++k) {
      const double g = std::max(0.0, inst.h(m, m, k).norm() - inst.eps(m, m, k));
      best = std::min(best, inst.power(m) * g * g);
    }
  return best;
}

double MaxMinResult::rate() const { return std::log1p(a); }

namespace detail {

MaxMinResult bisect_power(const NetworkConfig& cfg, double hi, const BisectionOptions& opts,
                          const std::function<PowerResult(double)>& probe) {
  if (!(opts.delta > 0.0)) throw InvalidArgument("bisection tolerance must be positive");
  MaxMinResult out;
  out.precoders = PrecoderSet::zeros(cfg);
  out.trace.delta = opts.delta;
  double lo = 0.0;
  const double top = hi;
  for (int step = 0; step < opts.max_steps; ++step) {
    if (lo > 0.0 ? hi - lo <= opts.delta * lo : hi <= 1e-12 * top) break;
    const double a = 0.5 * (lo + hi);
    PowerResult r = probe(a);
    BisectionStep st{lo, hi, a, r.within_budget(), r.b};
    out.trace.steps.push_back(st);
    if (st.feasible) {
      lo = a;
      out.precoders = r.precoders;
      // Scaling all beams up to the budget only raises the lower bound.
      if (r.b > 0.0)
        for (auto& x : out.precoders.cells) x /= std::sqrt(r.b);
    } else {
      hi = a;
    }
  }
  out.a = lo;
  out.degenerate = lo == 0.0;
  out.trace.a_star = lo;
  return out;
}

}  // namespace detail

MaxMinResult maxmin_via_power(const NetworkInstance& inst, const BisectionOptions& opts) {
  return detail::bisect_power(inst.config, maxmin_upper_bracket(inst), opts,
                              [&](double a) { return power_opt_multi(inst, a, opts.solver); });
}

double MseResult::rate_lower_bound() const { return std::max(0.0, -std::log(a * a)); }

MseFeasibility mse_feasibility(const NetworkInstance& original, double a, const SolverOptions& opts) {
  if (!(a > 0.0)) throw InvalidArgument("MSE target must be positive");
  const double sigma = detail::design_scale(original);
  const NetworkInstance inst = detail::rescaled(original, sigma);
  const NetworkConfig& c = inst.config;

  ConicProgram p;
  auto beta = p.add_variable("beta");
  auto f = p.add_variable("f", c.user_count());
  std::vector<ComplexExprMatrix> phi;
  for (int m = 0; m < c.cells; ++m) {
    phi.push_back(p.add_complex_matrix("phi" + std::to_string(m + 1), c.antennas, c.users));
    add_frobenius_bound(p, phi[m], std::sqrt(inst.power(m)) * beta[0], "power" + std::to_string(m + 1));
  }
  for (int m = 0; m < c.cells; ++m)
    for (int k = 0; k < c.users; ++k) {
      const std::string tag = user_tag(m, k);
      const LinExpr fk = f[user_index(c, m, k)];
      ComplexExprMatrix offset(1, c.users);
      offset(0, k) = ComplexExpr(fk, 0.0);
      auto e = p.add_variable(tag + ".e");
      auto lam = p.add_variable(tag + ".lambda");
      add_s_lemma_lmi(p, inst.h(m, m, k), phi[m], inst.eps(m, m, k), e[0], lam[0], &offset, tag + ".own");
      std::vector<LinExpr> rows{a * fk, e[0]};
      for (int n = 0; n < c.cells; ++n)
        if (n != m)
          rows.push_back(detail::add_interference_bound(p, inst.h(m, n, k), phi[n], inst.eps(m, n, k),
                                                        tag + ".from" + std::to_string(n + 1)));
      rows.emplace_back(1.0);
      p.add_soc(std::move(rows), tag + ".mse");
    }
  p.minimize(beta[0]);
  auto r = solve(p, opts);
  MseFeasibility out;
  out.status = r.status;
  if (r.optimal()) {
    out.beta = r.value(beta);
    out.precoders = read_precoders(r, phi, sigma);
    for (int i = 0; i < c.user_count(); ++i) out.equalizers.gains.push_back(r.value(f, i));
  }
  return out;
}

MseResult minmax_mse_gevp(const NetworkInstance& inst, const BisectionOptions& opts) {
  if (!(opts.delta > 0.0)) throw InvalidArgument("bisection tolerance must be positive");
  auto v = validate(inst);
  if (!v.empty()) throw InvalidArgument("invalid instance: " + v.front());
  const NetworkConfig& c = inst.config;
  MseResult out;
  out.trace.delta = opts.delta;
  out.precoders = PrecoderSet::zeros(c);
  out.equalizers.gains.assign(c.user_count(), 1.0);
  // The estimate itself is in every ball, so the nominal MMSE bound caps what is reachable.
  double lo = 0.0, hi = 1.0;
  for (int m = 0; m < c.cells; ++m)
    for (int k = 0; k < c.users; ++k)
      lo = std::max(lo, std::sqrt(1.0 / (1.0 + inst.power(m) * inst.h(m, m, k).squaredNorm())));
  bool found = false;
  for (int step = 0; step < opts.max_steps && hi - lo > opts.delta * hi; ++step) {
    const double a = 0.5 * (lo + hi);
    MseFeasibility r = mse_feasibility(inst, a, opts.solver);
    const bool ok = r.status == SolveStatus::optimal && r.beta <= 1.0 && r.beta > 0.0;
    out.trace.steps.push_back({lo, hi, a, ok, r.beta});
    if (ok) {
      hi = a;
      found = true;
      out.precoders = r.precoders;
      out.equalizers = r.equalizers;
      // Shrinking beta to one scales signal and residual together and leaves the noise term.
      for (auto& x : out.precoders.cells) x /= r.beta;
      for (auto& g : out.equalizers.gains) g /= r.beta;
    } else {
      lo = a;
    }
  }
  out.a = found ? hi : 1.0;
  out.trace.a_star = out.a;
  return out;
}

}  // namespace robustbf
