#pragma once

#include <vector>

#include "robustbf/conic.hpp"
#include "robustbf/instance.hpp"

namespace robustbf {

struct AoOptions {
  double inner_tol = 1e-6;  // weighted worst-case MSE improvement
  int max_inner = 50;
  double outer_tol = 1e-4;  // lower-bound improvement, nats
  int max_outer = 100;
  SolverOptions solver;
};

/// Iterate of the alternating scheme. u are the rate slacks (nats).
struct AoState {
  std::vector<double> u;
  PrecoderSet precoders;
  EqualizerSet equalizers;
  std::vector<double> trace;  // sum-rate lower bound after each outer step, trace[0] at the start
};

/// u = 1 - log(worst-case MSE) per user.
std::vector<double> update_u(const NetworkInstance& inst, const PrecoderSet& p, const EqualizerSet& f);

/// sum over users of alpha exp(u - 1) * worst-case MSE.
double weighted_mse_objective(const NetworkInstance& inst, const PrecoderSet& p, const EqualizerSet& f,
                              const std::vector<double>& u);

/// sum over users of alpha * max(0, -log worst-case MSE).
double sumrate_lower_bound(const NetworkInstance& inst, const PrecoderSet& p, const EqualizerSet& f);

/// Per-user minimiser of the worst-case MSE for fixed precoders. u only scales each
/// user's term, so it does not change the minimiser.
EqualizerSet optimize_equalizers(const NetworkInstance& inst, const PrecoderSet& p, const std::vector<double>& u);

/// One SDP per cell minimising that cell's share of the weighted objective under its power budget.
/// A cell keeps its current precoder (taken from current) when the solve fails or does not improve.
PrecoderSet optimize_precoders(const NetworkInstance& inst, const EqualizerSet& f, const std::vector<double>& u,
                               const PrecoderSet& current, const SolverOptions& opts = {});

/// Matched filter at full power with nominal MMSE equalizers.
AoState initial_ao_state(const NetworkInstance& inst);

struct SumRateResult {
  AoState state;
  double lower_bound = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;  // total over all outer steps
  bool converged = false;
};

SumRateResult weighted_sumrate_ao(const NetworkInstance& inst, const AoOptions& opts = {});

/// Same iteration from a given point (u is recomputed from its precoders and equalizers).
/// Warm-starting from a design that fits the budgets never ends below that design's bound.
SumRateResult weighted_sumrate_ao(const NetworkInstance& inst, const AoState& start, const AoOptions& opts = {});

}  // namespace robustbf
