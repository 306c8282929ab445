#pragma once

// Independent reference implementations used only by tests. Everything here
// is written against the mathematical statement of the problems, not against
// the library code, so agreement is evidence rather than tautology.

#include <cmath>
#include <vector>

#include "esvd/numerics.hpp"
#include "esvd/rng.hpp"

namespace oracle {

using esvd::Mat;
using esvd::Vec;

// Root in [0, s] of x - s + a x^3 = 0 (a >= 0) by plain bisection.
inline double cubic_unit(double s, double a) {
  if (s <= 0.0) return 0.0;
  double lo = 0.0, hi = s;
  for (int i = 0; i < 60; ++i) {  // 2^-60 of the bracket: below double ulp
    const double mid = 0.5 * (lo + hi);
    (mid - s + a * mid * mid * mid <= 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Euclidean projection onto { x >= 0, sum x^p <= c } for p in {2, 4}.
// p = 2 is the textbook ball projection (radial scaling); p = 4 solves the
// KKT system x' - x + 2 m x'^3 = 0 with the multiplier m >= 0 bisected until
// the constraint holds with equality.
inline Vec project_budget(Vec x, double c, int p) {
  x = x.cwiseMax(0.0);
  const auto power_sum = [p](const Vec& v) {
    return p == 2 ? v.squaredNorm() : v.array().pow(4).sum();
  };
  if (power_sum(x) <= c) return x;
  if (p == 2) return std::sqrt(c / x.squaredNorm()) * x;
  const auto shrink = [&x](double m) {
    Vec out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = cubic_unit(x[i], 2.0 * m);
    return out;
  };
  double hi = 1.0;
  while (power_sum(shrink(hi)) > c) hi *= 2.0;
  double lo = 0.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (power_sum(shrink(mid)) > c ? lo : hi) = mid;
  }
  return shrink(0.5 * (lo + hi));
}

inline double objective(const Vec& sigma, const Vec& k, const Vec& x) {
  return (k.array() * (x - sigma).array().square()).sum();
}

// Accelerated projected gradient (FISTA with gradient-mapping restart) on
// sum_i k_i (x_i - s_i)^2 over the budget set. Stops once the fixed-point
// residual of the plain projected step vanishes numerically.
inline Vec shrinkage_reference(const Vec& sigma, const Vec& k, double c, int p,
                               int iters = 200000) {
  Vec x = project_budget(sigma, c, p);
  Vec x_prev = x;
  const double L = 2.0 * k.maxCoeff() + 1e-12;
  double t = 1.0;
  for (int it = 0; it < iters; ++it) {
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const Vec y = x + ((t - 1.0) / t_next) * (x - x_prev);
    const Vec next = project_budget(y - 2.0 * k.cwiseProduct(y - sigma) / L, c, p);
    t = (y - next).dot(next - x) > 0 ? 1.0 : t_next;  // momentum fights progress
    x_prev = x;
    x = next;
    if (it % 25 == 24) {
      const Vec px = project_budget(x - 2.0 * k.cwiseProduct(x - sigma) / L, c, p);
      if ((px - x).lpNorm<Eigen::Infinity>() <=
          1e-13 * std::max(1.0, x.lpNorm<Eigen::Infinity>()))
        return px;
    }
  }
  return x;
}

// Two-sample KS by brute force over a dense grid plus all sample points.
inline double ks_grid(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pts;
  pts.insert(pts.end(), a.begin(), a.end());
  pts.insert(pts.end(), b.begin(), b.end());
  double lo = pts[0], hi = pts[0];
  for (double v : pts) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (int g = 0; g <= 2000; ++g)
    pts.push_back(lo + (hi - lo) * static_cast<double>(g) / 2000.0);
  double best = 0.0;
  for (double t : pts) {
    double fa = 0, fb = 0;
    for (double v : a) fa += v <= t ? 1.0 : 0.0;
    for (double v : b) fb += v <= t ? 1.0 : 0.0;
    best = std::max(best, std::abs(fa / static_cast<double>(a.size()) -
                                   fb / static_cast<double>(b.size())));
  }
  return best;
}

// Random matrix helpers for property tests.
inline Mat gaussian(Eigen::Index r, Eigen::Index c, esvd::Rng& rng) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

}  // namespace oracle
