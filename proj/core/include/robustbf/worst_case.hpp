#pragma once

#include <cstdint>
#include <vector>

#include "robustbf/instance.hpp"
#include "robustbf/types.hpp"

namespace robustbf {

struct GainExtrema {
  double min = 0.0;
  double max = 0.0;
};

/// Extremes of |(h + D) w|^2 over D' Q^{-1}-weighted balls of radius eps (Q positive definite).
GainExtrema robust_gain_extrema(const CRowVector& h, const CVector& w, double eps, const CMatrix& q);
GainExtrema robust_gain_extrema(const CRowVector& h, const CVector& w, double eps);

struct BallMaximum {
  double value = 0.0;
  CRowVector delta;  // a maximising perturbation, ||delta|| == eps
};

/// max over ||D|| <= eps of ||(h + D) A - offset||^2 (offset may be empty for zero).
BallMaximum maximize_over_ball(const CRowVector& h, const CMatrix& a, double eps, const CRowVector& offset = {});

/// max over ||D|| <= eps of ||(h + D) A||^2.
double max_quadratic_over_ball(const CRowVector& h, const CMatrix& a, double eps);

/// SINR of user (m,k) on the channels h~ + delta (delta may be null for the estimates).
double nominal_sinr(const NetworkInstance& inst, const PrecoderSet& p, int m, int k,
                    const PerturbationSet* delta = nullptr);

/// Exact worst-case SINR of the single-user-per-cell case.
double worst_case_sinr_single(const NetworkInstance& inst, const PrecoderSet& p, int m);

/// Certified lower bound on the worst-case SINR with decoupled uncertainties.
double sinr_lower_bound(const NetworkInstance& inst, const PrecoderSet& p, int m, int k);

/// Upper bound on the worst-case SINR built from one dominant interferer per link.
double sinr_upper_bound(const NetworkInstance& inst, const PrecoderSet& p, int m, int k);

/// Worst case over all perturbations of the MSE with equalizer f > 0.
double worst_case_mse(const NetworkInstance& inst, const PrecoderSet& p, double f, int m, int k);

struct EqualizerChoice {
  double f = 1.0;
  double mse = 1.0;
};

/// Equalizer minimising the worst-case MSE (one-dimensional convex search over g = 1/f).
EqualizerChoice best_worst_case_equalizer(const NetworkInstance& inst, const PrecoderSet& p, int m, int k);

/// Worst-case signal-to-leakage-plus-noise ratio of beam (m,k).
double worst_case_slinr(const NetworkInstance& inst, const PrecoderSet& p, int m, int k);

struct OracleOptions {
  int samples = 10000;
  int descent_steps = 50;
  double step = 1e-2;
  double surface_fraction = 0.75;
};

/// Minimum SINR found by sampling joint perturbations and refining by projected descent.
/// Monotone non-increasing in samples for a fixed seed.
double oracle_sinr_estimate(const NetworkInstance& inst, const PrecoderSet& p, int m, int k, int samples,
                            std::uint64_t seed, const OracleOptions& opts = {});

/// log(1 + sinr) in nats; throws on negative input.
double rate_from_sinr(double sinr);
std::vector<double> rates_from(const std::vector<double>& sinr);
double weighted_sum(const std::vector<double>& values, const std::vector<double>& weights);

struct WorstCaseReport {
  std::vector<double> lower;         // certified SINR lower bound per user
  std::vector<double> exact_single;  // exact worst-case SINR (only when K = 1)
  std::vector<double> upper;
  std::vector<double> mse;           // worst-case MSE with the best equalizer
  std::vector<double> slinr;
  std::vector<double> certified_rate;  // max(log(1 + lower), -log(mse))
  std::vector<double> oracle;          // filled when oracle samples > 0

  double min_certified_rate() const;
};

WorstCaseReport evaluate_design(const NetworkInstance& inst, const PrecoderSet& p, int oracle_samples = 0,
                                std::uint64_t oracle_seed = 0);

}  // namespace robustbf
