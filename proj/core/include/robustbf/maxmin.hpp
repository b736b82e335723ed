#pragma once

#include <vector>

#include "robustbf/conic.hpp"
#include "robustbf/instance.hpp"

namespace robustbf {

/// Outcome of a min-power problem at a fixed SINR target: b = max_m ||Phi_m||^2 / P_m.
struct PowerResult {
  SolveStatus status = SolveStatus::numerical_limit;
  double b = 0.0;
  PrecoderSet precoders;

  bool solved() const { return status == SolveStatus::optimal; }
  /// Target reachable within the power budgets.
  bool within_budget() const { return solved() && b <= 1.0; }
};

/// One-user-per-cell problem at target a, as a second-order cone program.
PowerResult power_opt_single(const NetworkInstance& inst, double a, const SolverOptions& opts = {});

/// Multi-user problem at target a with every certified SINR lower bound >= a.
PowerResult power_opt_multi(const NetworkInstance& inst, double a, const SolverOptions& opts = {});

struct BisectionStep {
  double a_min = 0.0;  // bracket before the probe
  double a_max = 0.0;
  double a = 0.0;      // probe
  bool feasible = false;
  double value = 0.0;  // b at the probe (power route) or beta (MSE route)
};

struct BisectionTrace {
  std::vector<BisectionStep> steps;
  double a_star = 0.0;
  double delta = 0.0;
};

struct BisectionOptions {
  double delta = 1e-3;  // stop when a_max - a_min <= delta * a_min
  int max_steps = 60;
  SolverOptions solver;
};

struct MaxMinResult {
  double a = 0.0;  // certified max-min SINR lower bound
  PrecoderSet precoders;
  BisectionTrace trace;
  bool degenerate = false;  // no positive target found feasible

  double rate() const;
};

/// Bisection over the SINR target with the power problem as oracle.
MaxMinResult maxmin_via_power(const NetworkInstance& inst, const BisectionOptions& opts = {});

/// Upper end of the bracket: min over users of P_m ((||h|| - eps)^+)^2.
double maxmin_upper_bracket(const NetworkInstance& inst);

struct MseResult {
  double a = 1.0;  // worst-case RMS MSE bound
  PrecoderSet precoders;
  EqualizerSet equalizers;
  BisectionTrace trace;

  /// -log(a^2) clipped at zero.
  double rate_lower_bound() const;
};

/// Feasibility of worst-case MSE <= a^2 for all users; returns beta = min max_m ||Phi_m|| / sqrt(P_m).
struct MseFeasibility {
  SolveStatus status = SolveStatus::numerical_limit;
  double beta = 0.0;
  PrecoderSet precoders;
  EqualizerSet equalizers;
};
MseFeasibility mse_feasibility(const NetworkInstance& inst, double a, const SolverOptions& opts = {});

/// Min-max worst-case MSE via bisection on a.
MseResult minmax_mse_gevp(const NetworkInstance& inst, const BisectionOptions& opts = {});

}  // namespace robustbf
