#pragma once

// Brute-force references used by the tests. Nothing here calls into the library's
// closed forms; the only shared pieces are the data types.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "robustbf/types.hpp"

namespace oracle {

using robustbf::cplx;
using robustbf::CMatrix;
using robustbf::CRowVector;
using robustbf::CVector;

inline CRowVector random_row(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  CRowVector v(n);
  for (int i = 0; i < n; ++i) {
    const double re = g(rng);
    const double im = g(rng);
    v[i] = {re, im};
  }
  return v;
}

inline CMatrix random_matrix(std::mt19937_64& rng, int r, int c) {
  CMatrix m(r, c);
  for (int j = 0; j < c; ++j) m.col(j) = random_row(rng, r).transpose();
  return m;
}

inline CRowVector on_sphere(std::mt19937_64& rng, int n, double radius) {
  CRowVector v = random_row(rng, n);
  return v * (radius / v.norm());
}

// Value and gradient (d/d conj(D), so the real ascent direction is the returned row).
struct Objective {
  std::function<double(const CRowVector&)> value;
  std::function<CRowVector(const CRowVector&)> gradient;
};

inline CRowVector project(const CRowVector& d, double eps) {
  const double n = d.norm();
  return n > eps ? CRowVector(d * (eps / n)) : d;
}

// Projected gradient ascent (sign = +1) or descent (sign = -1) with step adaptation.
inline double refine(const Objective& f, CRowVector d, double eps, double sign, int steps) {
  double best = f.value(d);
  double t = 0.1 * std::max(eps, 1e-12);
  for (int i = 0; i < steps && eps > 0; ++i) {
    CRowVector g = f.gradient(d);
    const double gn = g.norm();
    if (gn == 0.0) break;
    CRowVector trial = project(d + (sign * t / gn) * g, eps);
    const double v = f.value(trial);
    if (sign * (v - best) > 0) {
      best = v;
      d = trial;
      t *= 1.5;
    } else {
      t *= 0.5;
      if (t < 1e-15 * eps) break;
    }
  }
  return best;
}

// Extremum of f over the ball ||D|| <= eps: random boundary/interior samples, then
// refinement from the best few.
inline double ball_search(const Objective& f, int n, double eps, double sign, std::mt19937_64& rng,
                          int samples = 20000, int starts = 8, int steps = 3000) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::pair<double, CRowVector>> pts;
  pts.reserve(samples + 1);
  pts.emplace_back(f.value(CRowVector::Zero(n)), CRowVector::Zero(n));
  for (int s = 0; s < samples; ++s) {
    const double r = u(rng) < 0.8 ? eps : eps * std::pow(u(rng), 1.0 / (2.0 * n));
    CRowVector d = on_sphere(rng, n, r);
    pts.emplace_back(f.value(d), d);
  }
  std::partial_sort(pts.begin(), pts.begin() + std::min<int>(starts, pts.size()), pts.end(),
                    [&](const auto& a, const auto& b) { return sign * a.first > sign * b.first; });
  double best = pts.front().first;
  for (int i = 0; i < starts && i < static_cast<int>(pts.size()); ++i) {
    const double v = refine(f, pts[i].second, eps, sign, steps);
    if (sign * (v - best) > 0) best = v;
  }
  return best;
}

// |(h + D) w|^2
inline Objective gain(const CRowVector& h, const CVector& w) {
  return {[=](const CRowVector& d) { return std::norm(((h + d) * w)(0)); },
          [=](const CRowVector& d) -> CRowVector { return ((h + d) * w)(0) * w.adjoint(); }};
}

// ||(h + D) A - o||^2
inline Objective residual(const CRowVector& h, const CMatrix& a, const CRowVector& o) {
  return {[=](const CRowVector& d) { return ((h + d) * a - o).squaredNorm(); },
          [=](const CRowVector& d) -> CRowVector { return ((h + d) * a - o) * a.adjoint(); }};
}

}  // namespace oracle
