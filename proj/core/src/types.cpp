#include "robustbf/types.hpp"

namespace robustbf {

PrecoderSet PrecoderSet::zeros(const NetworkConfig& cfg) {
  std::vector<CMatrix> c(cfg.cells, CMatrix::Zero(cfg.antennas, cfg.users));
  return PrecoderSet(std::move(c));
}

CMatrix PrecoderSet::without_column(int m, int k) const {
  const CMatrix& phi = cells[m];
  CMatrix out(phi.rows(), phi.cols() - 1);
  for (int c = 0, d = 0; c < phi.cols(); ++c)
    if (c != k) out.col(d++) = phi.col(c);
  return out;
}

}  // namespace robustbf
