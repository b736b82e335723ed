#pragma once

#include <functional>
#include <string>
#include <vector>

#include "robustbf/conic.hpp"
#include "robustbf/instance.hpp"
#include "robustbf/maxmin.hpp"

namespace robustbf::detail {

/// Same network with channels and radii scaled by sigma and powers by 1/sigma^2.
/// Every SINR and MSE is unchanged when precoders are divided by sigma, so the
/// solver works with O(1) beam amplitudes at any SNR.
NetworkInstance rescaled(const NetworkInstance& inst, double sigma);

/// sigma = sqrt(max power), the scale used by the design routines.
double design_scale(const NetworkInstance& inst);

std::string user_tag(int m, int k);

/// Worst-case SINR lower bound of user k of a cell at least a:
///   Re(h w_k) - eps ||w_k|| >= sqrt(a) t,  Im(h w_k) = 0,
///   t >= ||(e_intra, extra..., sqrt(noise))||,
/// with e_intra bounding the intra-cell interference over the ball through an
/// S-lemma LMI. extra are caller-supplied bounds on the other-cell terms.
void add_sinr_constraint(ConicProgram& p, const CRowVector& h_own, double eps_own, const ComplexExprMatrix& phi,
                         int k, double a, const std::vector<LinExpr>& extra, double noise, const std::string& tag);

/// New bound variable e with max over the ball of ||(h + D) X|| <= e.
LinExpr add_interference_bound(ConicProgram& p, const CRowVector& h, const ComplexExprMatrix& x, double eps,
                               const std::string& tag);

/// Columns sqrt(P/K) h^H / ||h|| of the own-cell estimates.
PrecoderSet matched_filter(const NetworkInstance& inst);

/// Bisection on the SINR target over [0, hi]; probe(a) answers the min-power problem at a.
MaxMinResult bisect_power(const NetworkConfig& cfg, double hi, const BisectionOptions& opts,
                          const std::function<PowerResult(double)>& probe);

/// Thin factor L with L L^H = W, dropping numerically zero directions.
CMatrix psd_factor(const CMatrix& w);

}  // namespace robustbf::detail
