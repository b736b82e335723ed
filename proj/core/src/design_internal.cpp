#include "design_internal.hpp"

#include <algorithm>
#include <cmath>

namespace robustbf::detail {

NetworkInstance rescaled(const NetworkInstance& inst, double sigma) {
  NetworkInstance out = inst;
  for (auto& h : out.estimates) h *= sigma;
  for (auto& e : out.radii) e *= sigma;
  for (auto& p : out.powers) p /= sigma * sigma;
  return out;
}

double design_scale(const NetworkInstance& inst) {
  return std::sqrt(*std::max_element(inst.powers.begin(), inst.powers.end()));
}

std::string user_tag(int m, int k) { return "u" + std::to_string(m + 1) + "." + std::to_string(k + 1); }

LinExpr add_interference_bound(ConicProgram& p, const CRowVector& h, const ComplexExprMatrix& x, double eps,
                               const std::string& tag) {
  auto e = p.add_variable(tag + ".e");
  auto lam = p.add_variable(tag + ".lambda");
  add_s_lemma_lmi(p, h, x, eps, e[0], lam[0], nullptr, tag);
  return e[0];
}

void add_sinr_constraint(ConicProgram& p, const CRowVector& h_own, double eps_own, const ComplexExprMatrix& phi,
                         int k, double a, const std::vector<LinExpr>& extra, double noise, const std::string& tag) {
  auto t = p.add_variable(tag + ".t");
  add_own_channel_soc(p, h_own, eps_own, std::sqrt(a), t[0], phi.col(k), tag + ".own");
  std::vector<LinExpr> rows{t[0]};
  if (phi.cols() > 1) rows.push_back(add_interference_bound(p, h_own, phi.without_column(k), eps_own, tag + ".intra"));
  for (const auto& e : extra) rows.push_back(e);
  rows.emplace_back(std::sqrt(noise));
  p.add_soc(std::move(rows), tag + ".den");
}

PrecoderSet matched_filter(const NetworkInstance& inst) {
  const NetworkConfig& c = inst.config;
  PrecoderSet p = PrecoderSet::zeros(c);
  for (int m = 0; m < c.cells; ++m)
    for (int k = 0; k < c.users; ++k) {
      const CRowVector& h = inst.h(m, m, k);
      p[m].col(k) = h.adjoint() * (std::sqrt(inst.power(m) / c.users) / h.norm());
    }
  return p;
}

CMatrix psd_factor(const CMatrix& w) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(w);
  const RVector& ev = es.eigenvalues();
  const double top = std::max(0.0, ev.maxCoeff());
  std::vector<int> keep;
  for (int i = 0; i < ev.size(); ++i)
    if (ev[i] > 1e-14 * top && ev[i] > 0.0) keep.push_back(i);
  CMatrix l(w.rows(), static_cast<int>(keep.size()));
  for (size_t j = 0; j < keep.size(); ++j) l.col(j) = es.eigenvectors().col(keep[j]) * std::sqrt(ev[keep[j]]);
  return l;
}

}  // namespace robustbf::detail
