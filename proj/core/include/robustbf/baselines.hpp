#pragma once

#include <vector>

#include "robustbf/instance.hpp"
#include "robustbf/maxmin.hpp"

namespace robustbf {

enum class ZfObjective { maxmin, sumrate };

/// Per-cell zero-forcing on the own-cell estimates: unit pseudo-inverse columns as
/// directions, then a nominal power allocation that ignores other cells and CSI error.
/// Throws InvalidArgument when K > N or the estimates are rank deficient.
PrecoderSet zero_forcing(const NetworkInstance& inst, ZfObjective objective);

/// Powers p_k = (nu - 1/g_k)^+ with sum p_k = budget.
std::vector<double> waterfill(const std::vector<double>& gains, double budget);

/// Max worst-case SLINR beam for user (m,k) under ||w||^2 <= power.
struct SlinrBeam {
  double slinr = 0.0;
  CVector w;
};

SlinrBeam slinr_beam(const NetworkInstance& inst, int m, int k, double power, const BisectionOptions& opts = {});

/// Every beam designed on its own; profile holds per-user powers indexed by user_index and
/// defaults to an equal split of each cell budget.
PrecoderSet slinr_beamforming(const NetworkInstance& inst, const std::vector<double>& profile = {},
                              const BisectionOptions& opts = {});

struct SlinrSearchResult {
  PrecoderSet precoders;
  std::vector<double> profile;
  double sum_slinr = 0.0;
};

/// Best sum of worst-case SLINR over per-user powers on the grid P_m i / resolution.
SlinrSearchResult slinr_profile_search(const NetworkInstance& inst, int resolution,
                                       const BisectionOptions& opts = {});

}  // namespace robustbf
