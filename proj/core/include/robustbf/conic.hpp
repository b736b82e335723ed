#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "robustbf/types.hpp"

namespace robustbf {

/// Affine function of the program variables: sum of coef * x[index] plus a constant.
class LinExpr {
 public:
  LinExpr() = default;
  LinExpr(double c) : constant_(c) {}  // NOLINT(google-explicit-constructor)

  static LinExpr variable(int index, double coef = 1.0) {
    LinExpr e;
    e.terms_.emplace_back(index, coef);
    return e;
  }

  const std::vector<std::pair<int, double>>& terms() const { return terms_; }
  double constant() const { return constant_; }
  bool is_constant() const { return terms_.empty(); }

  double evaluate(const RVector& x) const;

  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator-=(const LinExpr& o);
  LinExpr& operator*=(double s);

  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
  friend LinExpr operator-(LinExpr a) { return a *= -1.0; }
  friend LinExpr operator*(LinExpr a, double s) { return a *= s; }
  friend LinExpr operator*(double s, LinExpr a) { return a *= s; }

 private:
  std::vector<std::pair<int, double>> terms_;
  double constant_ = 0.0;
};

/// Complex affine function stored as real and imaginary LinExpr parts.
struct ComplexExpr {
  LinExpr re;
  LinExpr im;

  ComplexExpr() = default;
  ComplexExpr(LinExpr r, LinExpr i) : re(std::move(r)), im(std::move(i)) {}
  ComplexExpr(cplx c) : re(c.real()), im(c.imag()) {}  // NOLINT(google-explicit-constructor)

  cplx evaluate(const RVector& x) const { return {re.evaluate(x), im.evaluate(x)}; }
  ComplexExpr conj() const { return {re, -im}; }

  ComplexExpr& operator+=(const ComplexExpr& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  ComplexExpr& operator-=(const ComplexExpr& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  friend ComplexExpr operator+(ComplexExpr a, const ComplexExpr& b) { return a += b; }
  friend ComplexExpr operator-(ComplexExpr a, const ComplexExpr& b) { return a -= b; }
  friend ComplexExpr operator*(cplx s, const ComplexExpr& a) {
    return {a.re * s.real() - a.im * s.imag(), a.im * s.real() + a.re * s.imag()};
  }
  friend ComplexExpr operator*(double s, const ComplexExpr& a) { return {a.re * s, a.im * s}; }
};

/// Dense matrix of complex affine expressions, column-major like Eigen.
class ComplexExprMatrix {
 public:
  ComplexExprMatrix() = default;
  ComplexExprMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  ComplexExpr& operator()(int i, int j) { return data_[static_cast<size_t>(j) * rows_ + i]; }
  const ComplexExpr& operator()(int i, int j) const { return data_[static_cast<size_t>(j) * rows_ + i]; }

  CMatrix evaluate(const RVector& x) const;
  ComplexExprMatrix col(int j) const;
  ComplexExprMatrix without_column(int j) const;
  ComplexExprMatrix adjoint() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<ComplexExpr> data_;
};

/// Constant-times-expression product C * X.
ComplexExprMatrix operator*(const CMatrix& c, const ComplexExprMatrix& x);
ComplexExprMatrix operator*(double s, const ComplexExprMatrix& x);

/// Named contiguous block of scalar variables.
struct VarBlock {
  std::string name;
  int offset = 0;
  int size = 0;

  LinExpr operator[](int i) const { return LinExpr::variable(offset + i); }
};

enum class ConeKind { zero, nonnegative, second_order, psd };

/// One constraint block: rows must lie in the cone. PSD rows are the m*m entries
/// of a symmetric matrix in column-major order.
struct ConeBlock {
  ConeKind kind;
  int dim;  // matrix order for psd, row count otherwise
  std::vector<LinExpr> rows;
  std::string tag;
};

enum class SolveStatus { optimal, infeasible, unbounded, numerical_limit };

const char* to_string(SolveStatus s);

struct SolverOptions {
  double feastol = 1e-7;
  double abstol = 1e-7;
  double reltol = 1e-7;
  int max_iterations = 100;
  // A stalled run still counts as optimal when its best iterate meets the tolerances
  // loosened by this factor; 1 disables the fallback.
  double reduced_accuracy_factor = 100.0;
  bool verbose = false;  // per-iteration residuals on stderr
};

struct SolveReport {
  SolveStatus status = SolveStatus::numerical_limit;
  RVector x;
  RVector dual_eq;    // multipliers of the zero cone
  RVector dual_cone;  // multipliers of the conic rows, concatenated in block order
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  bool reduced_accuracy = false;  // optimal only within the loosened tolerances

  bool optimal() const { return status == SolveStatus::optimal; }
  double value(const VarBlock& b, int i = 0) const { return x[b.offset + i]; }
  double value(const LinExpr& e) const { return e.evaluate(x); }
};

/// Real cone program: minimize c'x subject to affine expressions lying in cones.
class ConicProgram {
 public:
  VarBlock add_variable(const std::string& name, int size = 1);
  /// N x cols complex matrix variable; real and imaginary parts are separate blocks.
  ComplexExprMatrix add_complex_matrix(const std::string& name, int rows, int cols);

  void minimize(const LinExpr& objective) { objective_ = objective; }

  void add_equality(const LinExpr& e, const std::string& tag = {});
  void add_nonnegative(const LinExpr& e, const std::string& tag = {});
  /// rows[0] >= ||rows[1..]||.
  void add_soc(std::vector<LinExpr> rows, const std::string& tag = {});
  /// Symmetric matrix in column-major order; entries (i,j),(j,i) are averaged.
  void add_psd(int order, const std::vector<LinExpr>& entries, const std::string& tag = {});
  /// Hermitian matrix constraint through the real 2x embedding.
  void add_hermitian_psd(const ComplexExprMatrix& h, const std::string& tag = {});

  int variable_count() const { return nvars_; }
  const std::vector<VarBlock>& variables() const { return blocks_; }
  const std::vector<ConeBlock>& constraints() const { return cones_; }
  const LinExpr& objective() const { return objective_; }

  /// Sparse text dump: header of cones and sizes, then (row, col, value) triplets.
  void dump(std::ostream& os) const;

  /// Largest violation of any constraint at x (cone distance for SOC/PSD).
  double max_violation(const RVector& x) const;

 private:
  int nvars_ = 0;
  std::vector<VarBlock> blocks_;
  std::vector<ConeBlock> cones_;
  LinExpr objective_;
};

/// Realified Hermitian matrix [[Re, -Im], [Im, Re]]; throws if h is not Hermitian.
RMatrix realify_hermitian(const CMatrix& h, double tol = 1e-12);
/// Complex vector as stacked (Re, Im).
RVector realify_vector(const CVector& v);

SolveReport solve(const ConicProgram& program, const SolverOptions& opts = {});

// Robust constraint builders.

/// Own-channel signal cone: eps*||w|| <= Re(h w) - sqrt_a * t with Im(h w) = 0.
void add_own_channel_soc(ConicProgram& p, const CRowVector& h, double eps, double sqrt_a, const LinExpr& t,
                         const ComplexExprMatrix& w, const std::string& tag = {});

/// Robust bound ||(h + D) X - offset|| <= e for all ||D|| <= eps, as the S-lemma LMI
/// with multiplier lambda. X is N x J, offset is 1 x J (may be empty).
void add_s_lemma_lmi(ConicProgram& p, const CRowVector& h, const ComplexExprMatrix& x, double eps, const LinExpr& e,
                     const LinExpr& lambda, const ComplexExprMatrix* offset = nullptr, const std::string& tag = {});

/// ||vec(X)|| <= bound as a single SOC.
void add_frobenius_bound(ConicProgram& p, const ComplexExprMatrix& x, const LinExpr& bound,
                         const std::string& tag = {});

/// Row vector h times expression matrix X.
ComplexExprMatrix row_times(const CRowVector& h, const ComplexExprMatrix& x);

/// Evaluate a complex matrix variable into a numeric matrix.
CMatrix value_of(const SolveReport& r, const ComplexExprMatrix& x);

}  // namespace robustbf
