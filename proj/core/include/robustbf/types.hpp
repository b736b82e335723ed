#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace robustbf {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CRowVector = Eigen::RowVectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

/// Thrown for malformed input that a caller could have checked up front.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Problem dimensions: M cells, K users per cell, N transmit antennas per BS.
struct NetworkConfig {
  int cells = 1;
  int users = 1;
  int antennas = 1;

  bool valid() const { return cells >= 1 && users >= 1 && antennas >= 1; }
  int user_count() const { return cells * users; }
  bool operator==(const NetworkConfig&) const = default;
};

/// Flat index of user k in cell m.
inline int user_index(const NetworkConfig& cfg, int m, int k) { return m * cfg.users + k; }

/// Flat index of the channel from BS n to user k of cell m.
inline int channel_index(const NetworkConfig& cfg, int m, int n, int k) {
  return (m * cfg.cells + n) * cfg.users + k;
}

/// One N x K complex precoder per cell; column k is the beam of user k.
struct PrecoderSet {
  std::vector<CMatrix> cells;

  PrecoderSet() = default;
  explicit PrecoderSet(std::vector<CMatrix> c) : cells(std::move(c)) {}
  static PrecoderSet zeros(const NetworkConfig& cfg);

  const CMatrix& operator[](int m) const { return cells[m]; }
  CMatrix& operator[](int m) { return cells[m]; }
  int size() const { return static_cast<int>(cells.size()); }

  CVector beam(int m, int k) const { return cells[m].col(k); }
  /// Precoder of cell m with column k removed (the intra-cell interferers of user k).
  CMatrix without_column(int m, int k) const;
  double power(int m) const { return cells[m].squaredNorm(); }
  /// Transmit covariance Phi Phi^H, the quantity exchanged between base stations.
  CMatrix covariance(int m) const { return cells[m] * cells[m].adjoint(); }
};

/// Scalar receive equalizers, real and strictly positive (phase lives in the precoder).
struct EqualizerSet {
  std::vector<double> gains;  // indexed by user_index(m, k)

  double operator()(const NetworkConfig& cfg, int m, int k) const { return gains[user_index(cfg, m, k)]; }
};

/// Channel perturbations, one complex row per channel, indexed like estimates.
struct PerturbationSet {
  NetworkConfig config;
  std::vector<CRowVector> deltas;

  const CRowVector& operator()(int m, int n, int k) const { return deltas[channel_index(config, m, n, k)]; }
};

}  // namespace robustbf
