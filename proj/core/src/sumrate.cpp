#include "robustbf/sumrate.hpp"

#include <algorithm>
#include <cmath>

#include "design_internal.hpp"
#include "robustbf/worst_case.hpp"

namespace robustbf {

namespace {

std::vector<double> user_mses(const NetworkInstance& inst, const PrecoderSet& p, const EqualizerSet& f) {
  const NetworkConfig& c = inst.config;
  std::vector<double> out;
  for (int m = 0; m < c.cells; ++m)
    for (int k = 0; k < c.users; ++k) out.push_back(worst_case_mse(inst, p, f(c, m, k), m, k));
  return out;
}

CRowVector unit_row(int n, int k) {
  CRowVector e = CRowVector::Zero(n);
  e[k] = 1.0;
  return e;
}

// Terms of the weighted objective that depend on the precoder of cell m, with q the per-user
// weights alpha exp(u - 1) / f^2.
double cell_share(const NetworkInstance& inst, const CMatrix& phi, int m, const EqualizerSet& f,
                  const std::vector<double>& q) {
  const NetworkConfig& c = inst.config;
  double v = 0.0;
  for (int k = 0; k < c.users; ++k)
    v += q[user_index(c, m, k)] *
         maximize_over_ball(inst.h(m, m, k), phi, inst.eps(m, m, k), f(c, m, k) * unit_row(c.users, k)).value;
  for (int n = 0; n < c.cells; ++n) {
    if (n == m) continue;
    for (int l = 0; l < c.users; ++l)
      v += q[user_index(c, n, l)] * max_quadratic_over_ball(inst.h(n, m, l), phi, inst.eps(n, m, l));
  }
  return v;
}

}  // namespace

std::vector<double> update_u(const NetworkInstance& inst, const PrecoderSet& p, const EqualizerSet& f) {
  std::vector<double> u = user_mses(inst, p, f);
  for (double& x : u) x = 1.0 - std::log(x);
  return u;
}

double weighted_mse_objective(const NetworkInstance& inst, const PrecoderSet& p, const EqualizerSet& f,
                              const std::vector<double>& u) {
  const std::vector<double> mse = user_mses(inst, p, f);
  double v = 0.0;
  for (size_t i = 0; i < mse.size(); ++i) v += inst.weights[i] * std::exp(u[i] - 1.0) * mse[i];
  return v;
}

double sumrate_lower_bound(const NetworkInstance& inst, const PrecoderSet& p, const EqualizerSet& f) {
  const std::vector<double> mse = user_mses(inst, p, f);
  double v = 0.0;
  for (size_t i = 0; i < mse.size(); ++i) v += inst.weights[i] * std::max(0.0, -std::log(mse[i]));
  return v;
}

EqualizerSet optimize_equalizers(const NetworkInstance& inst, const PrecoderSet& p, const std::vector<double>&) {
  const NetworkConfig& c = inst.config;
  EqualizerSet out;
  for (int m = 0; m < c.cells; ++m)
    for (int k = 0; k < c.users; ++k) out.gains.push_back(best_worst_case_equalizer(inst, p, m, k).f);
  return out;
}

PrecoderSet optimize_precoders(const NetworkInstance& original, const EqualizerSet& f, const std::vector<double>& u,
                               const PrecoderSet& current, const SolverOptions& opts) {
  const NetworkConfig& c = original.config;
  std::vector<double> q(c.user_count());
  for (int i = 0; i < c.user_count(); ++i) q[i] = original.weights[i] * std::exp(u[i] - 1.0) / (f.gains[i] * f.gains[i]);

  const double sigma = detail::design_scale(original);
  const NetworkInstance inst = detail::rescaled(original, sigma);
  PrecoderSet out = current;
  for (int m = 0; m < c.cells; ++m) {
    ConicProgram p;
    auto t = p.add_variable("t");
    ComplexExprMatrix phi = p.add_complex_matrix("phi" + std::to_string(m + 1), c.antennas, c.users);
    add_frobenius_bound(p, phi, std::sqrt(inst.power(m)), "power");
    std::vector<LinExpr> rows{t[0]};
    for (int k = 0; k < c.users; ++k) {
      const double qk = q[user_index(c, m, k)];
      if (!(qk > 0.0)) continue;
      const std::string tag = detail::user_tag(m, k);
      ComplexExprMatrix offset(1, c.users);
      offset(0, k) = ComplexExpr(LinExpr(f(c, m, k)), LinExpr(0.0));
      auto e = p.add_variable(tag + ".e");
      auto lam = p.add_variable(tag + ".lambda");
      add_s_lemma_lmi(p, inst.h(m, m, k), phi, inst.eps(m, m, k), e[0], lam[0], &offset, tag + ".own");
      rows.push_back(std::sqrt(qk) * e[0]);
    }
    for (int n = 0; n < c.cells; ++n) {
      if (n == m) continue;
      for (int l = 0; l < c.users; ++l) {
        const double ql = q[user_index(c, n, l)];
        if (!(ql > 0.0)) continue;
        rows.push_back(std::sqrt(ql) * detail::add_interference_bound(p, inst.h(n, m, l), phi, inst.eps(n, m, l),
                                                                       detail::user_tag(n, l) + ".leak"));
      }
    }
    p.add_soc(std::move(rows), "objective");
    p.minimize(t[0]);
    auto r = solve(p, opts);
    if (!r.optimal()) continue;
    CMatrix candidate = sigma * value_of(r, phi);
    // Clip round-off above the budget.
    const double norm = candidate.norm(), cap = std::sqrt(original.power(m));
    if (norm > cap) candidate *= cap / norm;
    if (cell_share(original, candidate, m, f, q) <= cell_share(original, current[m], m, f, q)) out[m] = candidate;
  }
  return out;
}

AoState initial_ao_state(const NetworkInstance& inst) {
  AoState s;
  s.precoders = detail::matched_filter(inst);
  s.equalizers = optimize_equalizers(inst.with_radius(0.0), s.precoders, {});
  s.u = update_u(inst, s.precoders, s.equalizers);
  return s;
}

SumRateResult weighted_sumrate_ao(const NetworkInstance& inst, const AoOptions& opts) {
  auto v = validate(inst);
  if (!v.empty()) throw InvalidArgument("invalid instance: " + v.front());
  return weighted_sumrate_ao(inst, initial_ao_state(inst), opts);
}

SumRateResult weighted_sumrate_ao(const NetworkInstance& inst, const AoState& start, const AoOptions& opts) {
  auto v = validate(inst);
  if (!v.empty()) throw InvalidArgument("invalid instance: " + v.front());
  const NetworkConfig& c = inst.config;
  if (static_cast<int>(start.precoders.cells.size()) != c.cells ||
      static_cast<int>(start.equalizers.gains.size()) != c.user_count())
    throw InvalidArgument("starting point does not match the instance");
  for (int m = 0; m < c.cells; ++m) {
    if (start.precoders[m].rows() != c.antennas || start.precoders[m].cols() != c.users)
      throw InvalidArgument("starting precoder has the wrong shape");
    if (start.precoders.power(m) > inst.power(m) * (1.0 + 1e-9))
      throw InvalidArgument("starting precoder exceeds the power budget");
  }
  SumRateResult out;
  AoState& s = out.state;
  s.precoders = start.precoders;
  s.equalizers = start.equalizers;
  s.u = update_u(inst, s.precoders, s.equalizers);
  s.trace.push_back(sumrate_lower_bound(inst, s.precoders, s.equalizers));
  for (int outer = 0; outer < opts.max_outer; ++outer) {
    double obj = weighted_mse_objective(inst, s.precoders, s.equalizers, s.u);
    for (int inner = 0; inner < opts.max_inner; ++inner) {
      ++out.inner_iterations;
      s.precoders = optimize_precoders(inst, s.equalizers, s.u, s.precoders, opts.solver);
      EqualizerSet f = optimize_equalizers(inst, s.precoders, s.u);
      if (weighted_mse_objective(inst, s.precoders, f, s.u) <= weighted_mse_objective(inst, s.precoders, s.equalizers, s.u))
        s.equalizers = f;
      const double next = weighted_mse_objective(inst, s.precoders, s.equalizers, s.u);
      const bool done = obj - next < opts.inner_tol * std::max(1.0, obj);
      obj = next;
      if (done) break;
    }
    s.u = update_u(inst, s.precoders, s.equalizers);
    ++out.outer_iterations;
    const double lb = sumrate_lower_bound(inst, s.precoders, s.equalizers);
    const double prev = s.trace.back();
    s.trace.push_back(lb);
    if (lb - prev < opts.outer_tol) {
      out.converged = true;
      break;
    }
  }
  out.lower_bound = s.trace.back();
  return out;
}

}  // namespace robustbf
