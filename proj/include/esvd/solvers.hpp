#pragma once

#include "esvd/numerics.hpp"

namespace esvd {

// Solution of one constrained singular-value shrinkage problem
//   min sum_i k_i (s'_i - s_i)^2   s.t.  sum_i (s'_i)^p <= c   (p = 2 or 4).
struct ShrinkageSolution {
  Vec sigma;                // adjusted spectrum, 0 <= sigma_i <= input sigma_i
  double gamma = 0.0;       // KKT multiplier; 0 iff constraint inactive
  Vec k;                    // curvature coefficients used
  bool constraint_active = false;
  double objective = 0.0;   // sum_i k_i (s*_i - s_i)^2
  double constraint_residual = 0.0;  // sum (s*_i)^p - c (<= 0 when inactive)
};

// k_i = || X S^{-T} v_i ||^2 for each right singular vector v_i (columns of V).
Vec curvature_coefficients(const Mat& X, const Mat& S_inv, const Mat& V);

// Quadratic budget (p = 2): active solution s*_i = s_i k_i / (k_i + gamma),
// gamma solving sum (s*_i)^2 = c. k_i = 0 components are set to 0.
ShrinkageSolution solve_quadratic_budget(const Vec& sigma, const Vec& k, double c);

// Quartic budget (p = 4): each s*_i is the unique root in [0, s_i] of the
// stationarity cubic 2 k s' - 2 k s + 4 gamma s'^3 = 0, with gamma solving
// sum (s*_i)^4 = c.
ShrinkageSolution solve_quartic_budget(const Vec& sigma, const Vec& k, double c);

// The stationarity cubic's root in [0, sigma]:
//  - cubic_root_bisect: safeguarded bisection (implementation of record);
//  - cubic_root_closed_form: the Cardano expression, cross-checked in tests.
double cubic_root_bisect(double sigma, double k, double gamma);
double cubic_root_closed_form(double sigma, double k, double gamma);

}  // namespace esvd
