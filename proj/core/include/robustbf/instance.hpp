#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "robustbf/types.hpp"

namespace robustbf {

/// All problem data. Channels are indexed by channel_index(m, n, k), users by user_index(m, k).
struct NetworkInstance {
  NetworkConfig config;
  std::vector<CRowVector> estimates;
  std::vector<double> radii;
  std::vector<double> powers;   // linear, per cell
  std::vector<double> weights;  // per user

  const CRowVector& h(int m, int n, int k) const { return estimates[channel_index(config, m, n, k)]; }
  double eps(int m, int n, int k) const { return radii[channel_index(config, m, n, k)]; }
  double power(int m) const { return powers[m]; }
  double weight(int m, int k) const { return weights[user_index(config, m, k)]; }

  /// Copy with every radius replaced by eps.
  NetworkInstance with_radius(double eps) const;
  /// Copy with every power budget multiplied by gamma.
  NetworkInstance with_power_scale(double gamma) const;
};

/// Human-readable invariant violations (1-based indices); empty when the instance is valid.
std::vector<std::string> validate(const NetworkInstance& inst);

struct SampleSpec {
  double radius = 0.0;
  std::vector<double> powers{10.0};  // one entry for all cells, or one per cell
  std::vector<double> weights{1.0};  // one entry for all users, or one per user
};

/// Estimates with i.i.d. CN(0,1) entries, resampled until validate() passes (1000 attempts).
NetworkInstance sample_instance(const NetworkConfig& cfg, const SampleSpec& spec, std::uint64_t seed);

enum class PerturbationMode { surface, interior };

/// One perturbation per channel, uniform on the sphere or in the ball of its radius.
PerturbationSet sample_perturbation(const NetworkInstance& inst, std::uint64_t seed,
                                    PerturbationMode mode = PerturbationMode::surface);

std::string instance_to_json(const NetworkInstance& inst);
NetworkInstance instance_from_json(const std::string& text);
void save_instance(const NetworkInstance& inst, const std::string& path);
NetworkInstance load_instance(const std::string& path);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace robustbf
