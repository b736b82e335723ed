#pragma once

#include <vector>

#include "robustbf/types.hpp"

namespace robustbf::detail {

/// Cone product: l nonnegative rows, then SOC blocks, then PSD blocks (full m*m storage).
struct ConeLayout {
  int l = 0;
  std::vector<int> q, q_off;
  std::vector<int> s, s_off;
  int total = 0;
  int degree = 0;

  double inner(const RVector& x, const RVector& y) const;
  RVector identity() const;
  /// Jordan product x o y.
  RVector product(const RVector& x, const RVector& y) const;
  /// Solves lam o u = y for u; PSD blocks of lam must be diagonal.
  RVector divide(const RVector& lam, const RVector& y) const;
  double min_eig(const RVector& x) const;
  /// Largest t with lam + t d in the cone; PSD blocks of lam must be diagonal.
  double max_step(const RVector& lam, const RVector& d) const;
};

/// Nesterov-Todd scaling W with W z = W^{-T} s = lambda.
/// After the first point it is updated in product form from the scaled iterates,
/// so near-boundary s and z never have their cone norms recomputed.
struct Scaling {
  const ConeLayout* layout = nullptr;
  RVector d;
  std::vector<RMatrix> w, winv;  // second-order blocks, dense
  std::vector<RMatrix> r, rinv;  // PSD blocks: W X = R' X R
  RVector lambda;

  void init(const ConeLayout& k, const RVector& s, const RVector& z);
  /// New scaling for s = W' lam_s, z = W^{-1} lam_z under the current W.
  void update(const RVector& lam_s, const RVector& lam_z);
  /// W x, W' x, W^{-1} x or W^{-T} x.
  RVector apply(const RVector& x, bool transpose, bool inverse) const;

 private:
  void set_psd(size_t i, const RMatrix& ls, const RMatrix& lz);
};

}  // namespace robustbf::detail
