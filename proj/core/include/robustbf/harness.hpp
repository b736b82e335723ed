#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "robustbf/instance.hpp"

namespace robustbf {

enum class Algorithm {
  maxmin_power,
  maxmin_mse,
  sumrate_ao,
  algorithm2,
  algorithm2_greedy,
  distributed_dual,
  zf_maxmin,
  zf_sumrate,
  slinr,
};

const char* to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);
const std::vector<Algorithm>& all_algorithms();

struct ExperimentConfig {
  std::string name = "experiment";
  NetworkConfig network{2, 2, 2};
  double power_db = 10.0;
  std::vector<double> radii{0.0};
  std::vector<double> gamma_db{0.0};  // extra SNR scaling on every budget
  std::vector<std::uint64_t> seeds{0};
  std::vector<Algorithm> algorithms{Algorithm::maxmin_power};
  std::vector<double> weights{1.0};  // one for all users, or one per user
  double tol = 1e-3;                 // relative bisection tolerance
  int slinr_grid = 0;                // power-profile grid for SLINR; 0 keeps the equal split
  int threads = 0;                   // 0 uses the hardware concurrency
  bool record_time = true;           // wall_ms is written as 0 when off, making the CSV reproducible
  std::string csv_path;
  std::string summary_path;
};

std::vector<std::string> validate(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

/// The SNR sweep used when a config does not give one: 0..40 dB in 5 dB steps.
std::vector<double> default_gamma_grid();

struct ResultRow {
  std::uint64_t seed = 0;
  double eps = 0.0;
  double gamma_db = 0.0;
  Algorithm algo = Algorithm::maxmin_power;
  double min_rate = 0.0;  // min over users of the certified worst-case rate, nats
  double sum_rate = 0.0;  // weighted sum of certified rates
  std::vector<double> per_user_rates;
  double wall_ms = 0.0;
  int iters = 0;
  std::string error;  // non-empty when the design failed; rates are then meaningless

  bool ok() const { return error.empty(); }
};

/// Instance for one sweep point: estimates drawn from seed at radius 0, then radius eps and
/// every budget at power_db + gamma_db.
NetworkInstance sweep_instance(const ExperimentConfig& cfg, std::uint64_t seed, double eps, double gamma_db);

/// Runs one algorithm on one instance and scores the design.
ResultRow run_design(const ExperimentConfig& cfg, const NetworkInstance& inst, Algorithm algo);

/// One row per (seed, eps, gamma, algorithm) in that nesting order, computed on a thread pool.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

extern const char* const kCsvHeader;
std::string rows_to_csv(const std::vector<ResultRow>& rows, bool record_time = true);
std::vector<ResultRow> rows_from_csv(const std::string& text);

/// Per (algorithm, eps, gamma): means, normalized means against eps = 0 and failure counts.
std::string summary_json(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows);

/// Writes the CSV and summary to the paths in cfg (when set).
void write_outputs(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows);

struct SaturationCurve {
  Algorithm algo = Algorithm::maxmin_power;
  double eps = 0.0;
  std::vector<double> gamma_db;
  std::vector<double> mean_min_rate;
  int violations = 0;           // per-seed decreases beyond the tolerance
  double last_step_gain = 0.0;  // relative gain of the mean over the last grid step
  double decade_gain = 0.0;     // relative gain of the mean over the last 10 dB
};

/// Monotonicity and high-SNR flattening of the min rate, per (algorithm, eps).
std::vector<SaturationCurve> snr_saturation_check(const std::vector<ResultRow>& rows, double tol = 1e-4);

enum class FigureKind {
  per_seed,  // normalized min rate by seed, one series per (algorithm, eps)
  vs_snr,    // mean rate against gamma, one series per (algorithm, eps)
};

struct FigureSpec {
  FigureKind kind = FigureKind::vs_snr;
  std::string metric = "min_rate";  // or sum_rate
  std::string title;
};

/// Deterministic SVG for a CSV produced by rows_to_csv. Throws InvalidArgument on missing columns.
std::string emit_figure(const std::string& csv, const FigureSpec& spec);

}  // namespace robustbf
