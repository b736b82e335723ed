#include "robustbf/distributed.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "design_internal.hpp"
#include "robustbf/worst_case.hpp"

namespace robustbf {

using nlohmann::json;

namespace {

void check_cell(const NetworkInstance& inst, int m) {
  auto v = validate(inst);
  if (!v.empty()) throw InvalidArgument("invalid instance: " + v.front());
  if (m < 0 || m >= inst.config.cells) throw InvalidArgument("cell index out of range");
}

double cell_min(const NetworkInstance& inst, const PrecoderSet& p, int m) {
  double v = std::numeric_limits<double>::infinity();
  for (int k = 0; k < inst.config.users; ++k) v = std::min(v, sinr_lower_bound(inst, p, m, k));
  return v;
}

std::vector<double> cell_mins(const NetworkInstance& inst, const PrecoderSet& p) {
  std::vector<double> out;
  for (int m = 0; m < inst.config.cells; ++m) out.push_back(cell_min(inst, p, m));
  return out;
}

std::vector<CMatrix> covariances(const PrecoderSet& p) {
  std::vector<CMatrix> out;
  for (int m = 0; m < p.size(); ++m) out.push_back(p.covariance(m));
  return out;
}

Message broadcast(int m, int round, const CMatrix& phi) {
  Message msg;
  msg.kind = MessageKind::broadcast_w;
  msg.from = m;
  msg.round = round;
  msg.w = phi * phi.adjoint();
  return msg;
}

Message simple(MessageKind kind, int from, int to, int round) {
  Message msg;
  msg.kind = kind;
  msg.from = from;
  msg.to = to;
  msg.round = round;
  return msg;
}

struct Proposal {
  int m = 0;
  CMatrix phi;
  std::vector<double> mins;
  bool improves = false;
  bool vetoed = false;
};

Proposal propose(const NetworkInstance& inst, const PrecoderSet& p, const std::vector<double>& mins, int m,
                 const BisectionOptions& opts, int round, EventLog& log) {
  Proposal out;
  out.m = m;
  out.phi = local_maxmin_update(inst, m, covariances(p), opts).precoder;
  PrecoderSet q = p;
  q[m] = out.phi;
  out.mins = cell_mins(inst, q);
  out.improves = out.mins[m] > mins[m] && out.mins[m] > mins[m] * (1.0 + opts.delta);
  if (!out.improves) return out;
  log.messages.push_back(broadcast(m, round, out.phi));
  for (int n = 0; n < inst.config.cells; ++n)
    if (n != m && out.mins[n] < mins[n]) {
      log.messages.push_back(simple(MessageKind::error, n, m, round));
      out.vetoed = true;
    }
  return out;
}

Algorithm2Result start_algorithm2(const NetworkInstance& inst, std::vector<double>& mins) {
  auto v = validate(inst);
  if (!v.empty()) throw InvalidArgument("invalid instance: " + v.front());
  Algorithm2Result out;
  out.precoders = detail::matched_filter(inst);
  for (int m = 0; m < inst.config.cells; ++m) out.log.messages.push_back(broadcast(m, 0, out.precoders[m]));
  mins = cell_mins(inst, out.precoders);
  out.committed_min.push_back(*std::min_element(mins.begin(), mins.end()));
  return out;
}

void commit(Algorithm2Result& out, std::vector<double>& mins, const Proposal& pr, int round) {
  out.precoders[pr.m] = pr.phi;
  mins = pr.mins;
  out.log.messages.push_back(simple(MessageKind::update, pr.m, -1, round));
  out.committed_min.push_back(*std::min_element(mins.begin(), mins.end()));
  ++out.commits;
}

json complex_matrix_json(const CMatrix& w) {
  json rows = json::array();
  for (int i = 0; i < w.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < w.cols(); ++j) row.push_back({w(i, j).real(), w(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

CMatrix complex_matrix_from(const json& rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r > 0 ? static_cast<int>(rows[0].size()) : 0;
  CMatrix w(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) w(i, j) = {rows[i][j][0].get<double>(), rows[i][j][1].get<double>()};
  return w;
}

MessageKind kind_from(const std::string& s) {
  for (MessageKind k : {MessageKind::broadcast_w, MessageKind::error, MessageKind::update, MessageKind::beta_exchange})
    if (s == to_string(k)) return k;
  throw InvalidArgument("unknown message kind '" + s + "'");
}

}  // namespace

LocalUpdate local_maxmin_update(const NetworkInstance& original, int m, const std::vector<CMatrix>& covs,
                                const BisectionOptions& opts) {
  check_cell(original, m);
  const NetworkConfig& c = original.config;
  if (static_cast<int>(covs.size()) != c.cells) throw InvalidArgument("one covariance per cell required");
  // Interference bound of each in-cell user from the fixed cells, through a factor of W_n.
  std::vector<std::vector<double>> fixed(c.users);
  for (int n = 0; n < c.cells; ++n) {
    if (n == m) continue;
    if (covs[n].rows() != c.antennas || covs[n].cols() != c.antennas)
      throw InvalidArgument("covariance " + std::to_string(n + 1) + " has the wrong size");
    const CMatrix l = detail::psd_factor(covs[n]);
    for (int k = 0; k < c.users; ++k)
      fixed[k].push_back(l.cols() > 0 ? std::sqrt(max_quadratic_over_ball(original.h(m, n, k), l, original.eps(m, n, k)))
                                      : 0.0);
  }
  const double sigma = detail::design_scale(original);
  const NetworkInstance inst = detail::rescaled(original, sigma);
  double hi = std::numeric_limits<double>::infinity();
  for (int k = 0; k < c.users; ++k) {
    const double g = std::max(0.0, original.h(m, m, k).norm() - original.eps(m, m, k));
    hi = std::min(hi, original.power(m) * g * g);
  }
  auto probe = [&](double a) {
    ConicProgram p;
    auto s = p.add_variable("s");
    auto phi = p.add_complex_matrix("phi" + std::to_string(m + 1), c.antennas, c.users);
    add_frobenius_bound(p, phi, std::sqrt(inst.power(m)) * s[0], "power");
    for (int k = 0; k < c.users; ++k) {
      std::vector<LinExpr> extra(fixed[k].begin(), fixed[k].end());
      detail::add_sinr_constraint(p, inst.h(m, m, k), inst.eps(m, m, k), phi, k, a, extra, 1.0, detail::user_tag(m, k));
    }
    p.minimize(s[0]);
    auto r = solve(p, opts.solver);
    PowerResult out;
    out.status = r.status;
    if (r.optimal()) {
      out.b = r.value(s) * r.value(s);
      out.precoders.cells.push_back(sigma * value_of(r, phi));
    }
    return out;
  };
  MaxMinResult r = detail::bisect_power({1, c.users, c.antennas}, hi, opts, probe);
  LocalUpdate out;
  out.a = r.a;
  out.precoder = r.precoders[0];
  out.trace = r.trace;
  return out;
}

const char* to_string(MessageKind k) {
  switch (k) {
    case MessageKind::broadcast_w: return "broadcast_w";
    case MessageKind::error: return "error";
    case MessageKind::update: return "update";
    case MessageKind::beta_exchange: return "beta_exchange";
  }
  return "?";
}

std::string EventLog::to_jsonl() const {
  std::ostringstream os;
  for (const Message& m : messages) {
    json j{{"kind", to_string(m.kind)}, {"from", m.from}, {"to", m.to}, {"round", m.round}};
    if (m.kind == MessageKind::broadcast_w) j["w"] = complex_matrix_json(m.w);
    if (m.kind == MessageKind::beta_exchange) {
      j["user"] = m.user;
      j["cell"] = m.cell;
      j["other"] = m.other;
      j["value"] = m.value;
    }
    os << j.dump() << '\n';
  }
  return os.str();
}

EventLog EventLog::from_jsonl(const std::string& text) {
  EventLog log;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      Message m;
      m.kind = kind_from(j.at("kind").get<std::string>());
      m.from = j.at("from").get<int>();
      m.to = j.at("to").get<int>();
      m.round = j.at("round").get<int>();
      if (j.contains("w")) m.w = complex_matrix_from(j["w"]);
      if (m.kind == MessageKind::beta_exchange) {
        m.user = j.at("user").get<int>();
        m.cell = j.at("cell").get<int>();
        m.other = j.at("other").get<int>();
        m.value = j.at("value").get<double>();
      }
      log.messages.push_back(std::move(m));
    } catch (const json::exception& e) {
      throw InvalidArgument("event log line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return log;
}

Algorithm2Result run_algorithm2(const NetworkInstance& inst, const BisectionOptions& opts, int max_rounds) {
  std::vector<double> mins;
  Algorithm2Result out = start_algorithm2(inst, mins);
  for (int round = 1; round <= max_rounds; ++round) {
    out.rounds = round;
    bool any = false;
    for (int m = 0; m < inst.config.cells; ++m) {
      Proposal pr = propose(inst, out.precoders, mins, m, opts, round, out.log);
      if (pr.improves && !pr.vetoed) {
        commit(out, mins, pr, round);
        any = true;
      }
    }
    if (!any) break;
  }
  return out;
}

Algorithm2Result run_algorithm2_greedy(const NetworkInstance& inst, const BisectionOptions& opts, int max_rounds) {
  std::vector<double> mins;
  Algorithm2Result out = start_algorithm2(inst, mins);
  for (int round = 1; round <= max_rounds; ++round) {
    out.rounds = round;
    const Proposal* best = nullptr;
    double best_min = -1.0;
    std::vector<Proposal> bids;
    for (int m = 0; m < inst.config.cells; ++m)
      bids.push_back(propose(inst, out.precoders, mins, m, opts, round, out.log));
    for (const Proposal& pr : bids) {
      if (!pr.improves || pr.vetoed) continue;
      const double v = *std::min_element(pr.mins.begin(), pr.mins.end());
      if (v > best_min) {
        best_min = v;
        best = &pr;
      }
    }
    if (!best) break;
    commit(out, mins, *best, round);
  }
  return out;
}

namespace {

// Subproblem of BS m for fixed multipliers: minimise sigma^2 ||Phi_m||^2 plus the multiplier terms
// over its precoder and its copies of the coupling variables.
struct CellSolve {
  bool ok = false;
  CMatrix phi;
  std::vector<std::pair<int, double>> victim, source;  // (channel index, value)
};

struct Coupling {
  const std::vector<double>& lambda;
  const std::vector<double>& bound;
  const std::vector<double>& anchor;
  double rho = 0.0;  // proximal weight, zero for the plain subgradient step
  double budget = 1.0;
};

CellSolve solve_cell(const NetworkInstance& inst, double sigma, int m, double a, const Coupling& cp,
                     const std::vector<double>* fixed, const SolverOptions& opts) {
  const NetworkConfig& c = inst.config;
  ConicProgram p;
  auto phi = p.add_complex_matrix("phi" + std::to_string(m + 1), c.antennas, c.users);
  LinExpr objective;
  std::vector<std::pair<int, LinExpr>> victim, source;
  auto coupling = [&](int idx, const std::string& name) -> LinExpr {
    if (fixed) return LinExpr((*fixed)[idx]);
    auto b = p.add_variable(name);
    p.add_nonnegative(cp.bound[idx] - b[0]);
    if (cp.rho > 0.0) {
      auto t = p.add_variable(name + ".prox");
      p.add_soc({0.5 * (t[0] + 1.0), b[0] - cp.anchor[idx], 0.5 * (t[0] - 1.0)});
      objective += 0.5 * cp.rho * t[0];
    }
    return b[0];
  };
  for (int k = 0; k < c.users; ++k) {
    std::vector<LinExpr> extra;
    for (int n = 0; n < c.cells; ++n) {
      if (n == m) continue;
      const int idx = channel_index(c, m, n, k);
      LinExpr b = coupling(idx, detail::user_tag(m, k) + ".from" + std::to_string(n + 1));
      extra.push_back(b);
      victim.emplace_back(idx, b);
      if (!fixed) objective += cp.lambda[idx] * b;
    }
    detail::add_sinr_constraint(p, inst.h(m, m, k), inst.eps(m, m, k), phi, k, a, extra, 1.0, detail::user_tag(m, k));
  }
  for (int n = 0; n < c.cells; ++n) {
    if (n == m) continue;
    for (int j = 0; j < c.users; ++j) {
      const int idx = channel_index(c, n, m, j);
      const std::string tag = detail::user_tag(n, j) + ".leak";
      LinExpr b = coupling(idx, tag);
      auto lam = p.add_variable(tag + ".lambda");
      add_s_lemma_lmi(p, inst.h(n, m, j), phi, inst.eps(n, m, j), (fixed ? 1.0 : cp.budget) * b, lam[0], nullptr, tag);
      source.emplace_back(idx, b);
      if (!fixed) objective -= cp.lambda[idx] * b;
    }
  }
  auto s = p.add_variable("s");
  add_frobenius_bound(p, phi, s[0], "norm");
  p.add_nonnegative(std::sqrt((fixed ? 1.0 : cp.budget) * inst.power(m)) - s[0], "power");
  if (fixed) {
    objective = s[0];
  } else {
    // r >= ||Phi||^2 as a rotated cone.
    auto r = p.add_variable("r");
    std::vector<LinExpr> rows{0.5 * (r[0] + 1.0), s[0], 0.5 * (r[0] - 1.0)};
    p.add_soc(std::move(rows), "energy");
    objective += r[0];
  }
  p.minimize(objective);
  auto sol = solve(p, opts);
  CellSolve out;
  out.ok = sol.optimal();
  if (!out.ok) return out;
  out.phi = sigma * value_of(sol, phi);
  for (const auto& [i, e] : victim) out.victim.emplace_back(i, sol.value(e));
  for (const auto& [i, e] : source) out.source.emplace_back(i, sol.value(e));
  return out;
}

}  // namespace

DualCheck dual_feasibility_check(const NetworkInstance& original, double a, const DualOptions& opts) {
  if (!(a >= 0.0)) throw InvalidArgument("SINR target must be non-negative");
  if (!(opts.mu >= 0.0)) throw InvalidArgument("step size must be non-negative");
  auto v = validate(original);
  if (!v.empty()) throw InvalidArgument("invalid instance: " + v.front());
  const NetworkConfig& c = original.config;
  const double sigma = detail::design_scale(original);
  const NetworkInstance inst = detail::rescaled(original, sigma);
  const int channels = c.cells * c.cells * c.users;

  DualCheck out;
  DualState& st = out.state;
  st.lambda.assign(channels, 0.0);
  st.beta_victim.assign(channels, 0.0);
  st.beta_source.assign(channels, 0.0);
  // Any feasible precoder keeps each coupling term below this, so the box never cuts the optimum.
  std::vector<double> bound(channels, 0.0);
  for (int m = 0; m < c.cells; ++m)
    for (int n = 0; n < c.cells; ++n)
      for (int k = 0; k < c.users; ++k)
        if (n != m)
          bound[channel_index(c, m, n, k)] =
              (original.h(m, n, k).norm() + original.eps(m, n, k)) * std::sqrt(original.power(n));

  if (!(opts.margin >= 0.0 && opts.margin < 1.0)) throw InvalidArgument("budget margin must lie in [0, 1)");
  std::vector<double> mean(channels, 0.0);
  const Coupling cp{st.lambda, bound, mean, 0.0, 1.0 - opts.margin};
  bool consensus = false;
  for (int it = 1;; ++it) {
    st.iterations = it;
    st.mu = opts.diminishing ? opts.mu / std::sqrt(static_cast<double>(it)) : opts.mu;
    Coupling step = cp;
    if (opts.proximal) step.rho = 2.0 * st.mu;
    for (int m = 0; m < c.cells; ++m) {
      CellSolve cs = solve_cell(inst, sigma, m, a, step, nullptr, opts.solver);
      if (!cs.ok) {
        out.culprit = m;
        return out;
      }
      for (const auto& [i, x] : cs.victim) st.beta_victim[i] = x;
      for (const auto& [i, x] : cs.source) st.beta_source[i] = x;
    }
    st.residual = 0.0;
    for (int i = 0; i < channels; ++i) st.residual = std::max(st.residual, std::abs(st.beta_victim[i] - st.beta_source[i]));
    if (opts.record_messages)
      for (int m = 0; m < c.cells; ++m)
        for (int n = 0; n < c.cells; ++n)
          for (int k = 0; k < c.users; ++k) {
            if (n == m) continue;
            const int i = channel_index(c, m, n, k);
            for (int side = 0; side < 2; ++side) {
              Message msg = simple(MessageKind::beta_exchange, side ? n : m, side ? m : n, it);
              msg.user = k;
              msg.cell = m;
              msg.other = n;
              msg.value = side ? st.beta_source[i] : st.beta_victim[i];
              out.log.messages.push_back(msg);
            }
          }
    // With the proximal term the copies agree early; the mean must also have settled.
    double drift = 0.0;
    if (opts.proximal)
      for (int i = 0; i < channels; ++i)
        drift = std::max(drift, std::abs(0.5 * (st.beta_victim[i] + st.beta_source[i]) - mean[i]));
    if (st.residual < opts.consensus_tol && drift < opts.consensus_tol) {
      consensus = true;
      break;
    }
    if (opts.average_after > 0 && it >= std::min(opts.average_after, opts.max_iters)) break;
    if (it >= opts.max_iters) break;
    for (int i = 0; i < channels; ++i) {
      st.lambda[i] += st.mu * (st.beta_victim[i] - st.beta_source[i]);
      mean[i] = 0.5 * (st.beta_victim[i] + st.beta_source[i]);
    }
  }
  if (!consensus && opts.average_after <= 0) return out;

  // Force both copies to their mean and re-solve every cell with the coupling fixed.
  for (int i = 0; i < channels; ++i) mean[i] = 0.5 * (st.beta_victim[i] + st.beta_source[i]);
  st.averaged = true;
  out.precoders = PrecoderSet::zeros(c);
  for (int m = 0; m < c.cells; ++m) {
    CellSolve cs = solve_cell(inst, sigma, m, a, cp, &mean, opts.solver);
    if (!cs.ok) {
      out.culprit = m;
      return out;
    }
    out.precoders[m] = cs.phi;
  }
  out.feasible = true;
  return out;
}

MaxMinResult distributed_maxmin(const NetworkInstance& inst, const BisectionOptions& opts, const DualOptions& dual) {
  auto probe = [&](double a) {
    DualCheck d = dual_feasibility_check(inst, a, dual);
    PowerResult r;
    r.status = d.feasible ? SolveStatus::optimal : SolveStatus::infeasible;
    if (d.feasible) {
      r.precoders = d.precoders;
      for (int m = 0; m < inst.config.cells; ++m) r.b = std::max(r.b, d.precoders.power(m) / inst.power(m));
    }
    return r;
  };
  return detail::bisect_power(inst.config, maxmin_upper_bracket(inst), opts, probe);
}

}  // namespace robustbf
