#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "robustbf/conic.hpp"

namespace robustbf {

namespace {

LinExpr compact(const LinExpr& e) {
  std::map<int, double> acc;
  for (const auto& [i, c] : e.terms()) acc[i] += c;
  LinExpr out(e.constant());
  for (const auto& [i, c] : acc)
    if (c != 0.0) out += LinExpr::variable(i, c);
  return out;
}

}  // namespace

double LinExpr::evaluate(const RVector& x) const {
  double v = constant_;
  for (const auto& [i, c] : terms_) v += c * x[i];
  return v;
}

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  constant_ += o.constant_;
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
  terms_.reserve(terms_.size() + o.terms_.size());
  for (const auto& [i, c] : o.terms_) terms_.emplace_back(i, -c);
  constant_ -= o.constant_;
  return *this;
}

LinExpr& LinExpr::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    constant_ = 0.0;
    return *this;
  }
  for (auto& t : terms_) t.second *= s;
  constant_ *= s;
  return *this;
}

CMatrix ComplexExprMatrix::evaluate(const RVector& x) const {
  CMatrix m(rows_, cols_);
  for (int j = 0; j < cols_; ++j)
    for (int i = 0; i < rows_; ++i) m(i, j) = (*this)(i, j).evaluate(x);
  return m;
}

ComplexExprMatrix ComplexExprMatrix::col(int j) const {
  ComplexExprMatrix out(rows_, 1);
  for (int i = 0; i < rows_; ++i) out(i, 0) = (*this)(i, j);
  return out;
}

ComplexExprMatrix ComplexExprMatrix::without_column(int j) const {
  ComplexExprMatrix out(rows_, cols_ - 1);
  for (int c = 0, d = 0; c < cols_; ++c) {
    if (c == j) continue;
    for (int i = 0; i < rows_; ++i) out(i, d) = (*this)(i, c);
    ++d;
  }
  return out;
}

ComplexExprMatrix ComplexExprMatrix::adjoint() const {
  ComplexExprMatrix out(cols_, rows_);
  for (int j = 0; j < cols_; ++j)
    for (int i = 0; i < rows_; ++i) out(j, i) = (*this)(i, j).conj();
  return out;
}

ComplexExprMatrix operator*(const CMatrix& c, const ComplexExprMatrix& x) {
  if (c.cols() != x.rows()) throw InvalidArgument("matrix product shape mismatch");
  ComplexExprMatrix out(static_cast<int>(c.rows()), x.cols());
  for (int j = 0; j < x.cols(); ++j)
    for (int i = 0; i < c.rows(); ++i) {
      ComplexExpr acc;
      for (int l = 0; l < x.rows(); ++l)
        if (c(i, l) != cplx(0.0)) acc += c(i, l) * x(l, j);
      out(i, j) = {compact(acc.re), compact(acc.im)};
    }
  return out;
}

ComplexExprMatrix operator*(double s, const ComplexExprMatrix& x) {
  ComplexExprMatrix out(x.rows(), x.cols());
  for (int j = 0; j < x.cols(); ++j)
    for (int i = 0; i < x.rows(); ++i) out(i, j) = s * x(i, j);
  return out;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::numerical_limit: return "numerical-limit";
  }
  return "unknown";
}

VarBlock ConicProgram::add_variable(const std::string& name, int size) {
  if (size < 1) throw InvalidArgument("variable block '" + name + "' must have positive size");
  VarBlock b{name, nvars_, size};
  nvars_ += size;
  blocks_.push_back(b);
  return b;
}

ComplexExprMatrix ConicProgram::add_complex_matrix(const std::string& name, int rows, int cols) {
  VarBlock re = add_variable(name + ".re", rows * cols);
  VarBlock im = add_variable(name + ".im", rows * cols);
  ComplexExprMatrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = {re[j * rows + i], im[j * rows + i]};
  return m;
}

void ConicProgram::add_equality(const LinExpr& e, const std::string& tag) {
  cones_.push_back({ConeKind::zero, 1, {compact(e)}, tag});
}

void ConicProgram::add_nonnegative(const LinExpr& e, const std::string& tag) {
  cones_.push_back({ConeKind::nonnegative, 1, {compact(e)}, tag});
}

void ConicProgram::add_soc(std::vector<LinExpr> rows, const std::string& tag) {
  if (rows.empty()) throw InvalidArgument("second-order cone needs at least one row");
  if (rows.size() == 1) {
    add_nonnegative(rows[0], tag);
    return;
  }
  for (auto& r : rows) r = compact(r);
  const int d = static_cast<int>(rows.size());
  cones_.push_back({ConeKind::second_order, d, std::move(rows), tag});
}

void ConicProgram::add_psd(int order, const std::vector<LinExpr>& entries, const std::string& tag) {
  if (order < 1 || static_cast<int>(entries.size()) != order * order)
    throw InvalidArgument("psd block '" + tag + "' has inconsistent size");
  if (order == 1) {
    add_nonnegative(entries[0], tag);
    return;
  }
  std::vector<LinExpr> rows(entries.size());
  for (int j = 0; j < order; ++j)
    for (int i = j; i < order; ++i) {
      LinExpr s = (i == j) ? entries[j * order + i] : 0.5 * (entries[j * order + i] + entries[i * order + j]);
      s = compact(s);
      rows[j * order + i] = s;
      rows[i * order + j] = s;
    }
  cones_.push_back({ConeKind::psd, order, std::move(rows), tag});
}

void ConicProgram::add_hermitian_psd(const ComplexExprMatrix& h, const std::string& tag) {
  const int n = h.rows();
  if (h.cols() != n) throw InvalidArgument("hermitian psd block '" + tag + "' is not square");
  const int m = 2 * n;
  std::vector<LinExpr> e(static_cast<size_t>(m) * m);
  auto at = [&](int i, int j) -> LinExpr& { return e[static_cast<size_t>(j) * m + i]; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const ComplexExpr& z = h(i, j);
      at(i, j) = z.re;
      at(i + n, j + n) = z.re;
      at(i, j + n) = -z.im;
      at(i + n, j) = z.im;
    }
  add_psd(m, e, tag);
}

void ConicProgram::dump(std::ostream& os) const {
  int zero = 0, nonneg = 0;
  std::vector<int> soc, psd;
  for (const auto& c : cones_) {
    switch (c.kind) {
      case ConeKind::zero: ++zero; break;
      case ConeKind::nonnegative: ++nonneg; break;
      case ConeKind::second_order: soc.push_back(c.dim); break;
      case ConeKind::psd: psd.push_back(c.dim); break;
    }
  }
  os << "vars " << nvars_ << "\n";
  os << "zero " << zero << "\nnonneg " << nonneg << "\nsoc " << soc.size();
  for (int d : soc) os << ' ' << d;
  os << "\npsd " << psd.size();
  for (int d : psd) os << ' ' << d;
  os << "\nobjective\n";
  for (const auto& [i, c] : compact(objective_).terms()) os << i << ' ' << c << "\n";
  os << "constraints\n";
  int row = 0;
  for (const auto& c : cones_) {
    for (const auto& r : c.rows) {
      for (const auto& [i, v] : r.terms()) os << row << ' ' << i << ' ' << v << "\n";
      if (r.constant() != 0.0) os << row << " const " << r.constant() << "\n";
      ++row;
    }
  }
}

double ConicProgram::max_violation(const RVector& x) const {
  double worst = 0.0;
  for (const auto& c : cones_) {
    RVector v(c.rows.size());
    for (size_t i = 0; i < c.rows.size(); ++i) v[i] = c.rows[i].evaluate(x);
    switch (c.kind) {
      case ConeKind::zero: worst = std::max(worst, std::abs(v[0])); break;
      case ConeKind::nonnegative: worst = std::max(worst, -v[0]); break;
      case ConeKind::second_order: worst = std::max(worst, v.tail(v.size() - 1).norm() - v[0]); break;
      case ConeKind::psd: {
        Eigen::Map<RMatrix> m(v.data(), c.dim, c.dim);
        Eigen::SelfAdjointEigenSolver<RMatrix> es(m, Eigen::EigenvaluesOnly);
        worst = std::max(worst, -es.eigenvalues()[0]);
        break;
      }
    }
  }
  return worst;
}

RMatrix realify_hermitian(const CMatrix& h, double tol) {
  if (h.rows() != h.cols()) throw InvalidArgument("realify: matrix is not square");
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > tol * scale) throw InvalidArgument("realify: matrix is not Hermitian");
  const auto n = h.rows();
  RMatrix r(2 * n, 2 * n);
  r << h.real(), -h.imag(), h.imag(), h.real();
  return r;
}

RVector realify_vector(const CVector& v) {
  RVector r(2 * v.size());
  r << v.real(), v.imag();
  return r;
}

ComplexExprMatrix row_times(const CRowVector& h, const ComplexExprMatrix& x) {
  CMatrix hm = h;
  return hm * x;
}

void add_own_channel_soc(ConicProgram& p, const CRowVector& h, double eps, double sqrt_a, const LinExpr& t,
                         const ComplexExprMatrix& w, const std::string& tag) {
  ComplexExpr hw = row_times(h, w)(0, 0);
  p.add_equality(hw.im, tag + ".phase");
  LinExpr head = hw.re - sqrt_a * t;
  if (eps == 0.0) {
    p.add_nonnegative(head, tag);
    return;
  }
  std::vector<LinExpr> rows{head};
  for (int i = 0; i < w.rows(); ++i) rows.push_back(eps * w(i, 0).re);
  for (int i = 0; i < w.rows(); ++i) rows.push_back(eps * w(i, 0).im);
  p.add_soc(std::move(rows), tag);
}

void add_s_lemma_lmi(ConicProgram& p, const CRowVector& h, const ComplexExprMatrix& x, double eps, const LinExpr& e,
                     const LinExpr& lambda, const ComplexExprMatrix* offset, const std::string& tag) {
  const int n = x.rows();
  const int jn = x.cols();
  if (h.size() != n) throw InvalidArgument("s-lemma: channel length does not match matrix rows");
  if (offset && (offset->rows() != 1 || offset->cols() != jn)) throw InvalidArgument("s-lemma: offset shape mismatch");
  ComplexExprMatrix hx = row_times(h, x);
  if (offset)
    for (int j = 0; j < jn; ++j) hx(0, j) -= (*offset)(0, j);

  if (eps == 0.0) {
    // Without uncertainty the constraint is the plain cone ||h X - offset|| <= e.
    std::vector<LinExpr> rows{e};
    for (int j = 0; j < jn; ++j) rows.push_back(hx(0, j).re);
    for (int j = 0; j < jn; ++j) rows.push_back(hx(0, j).im);
    p.add_soc(std::move(rows), tag);
    if (!lambda.is_constant()) p.add_equality(lambda, tag + ".mult");
    return;
  }

  const int d = 1 + jn + n;
  ComplexExprMatrix m(d, d);
  m(0, 0) = {e - lambda, 0.0};
  for (int j = 0; j < jn; ++j) {
    m(0, 1 + j) = hx(0, j);
    m(1 + j, 0) = hx(0, j).conj();
    m(1 + j, 1 + j) = {e, 0.0};
  }
  for (int i = 0; i < n; ++i) {
    m(1 + jn + i, 1 + jn + i) = {lambda, 0.0};
    for (int j = 0; j < jn; ++j) {
      m(1 + jn + i, 1 + j) = -eps * x(i, j);
      m(1 + j, 1 + jn + i) = -eps * x(i, j).conj();
    }
  }
  p.add_hermitian_psd(m, tag);
}

void add_frobenius_bound(ConicProgram& p, const ComplexExprMatrix& x, const LinExpr& bound, const std::string& tag) {
  std::vector<LinExpr> rows{bound};
  for (int j = 0; j < x.cols(); ++j)
    for (int i = 0; i < x.rows(); ++i) {
      rows.push_back(x(i, j).re);
      rows.push_back(x(i, j).im);
    }
  p.add_soc(std::move(rows), tag);
}

CMatrix value_of(const SolveReport& r, const ComplexExprMatrix& x) { return x.evaluate(r.x); }

}  // namespace robustbf
