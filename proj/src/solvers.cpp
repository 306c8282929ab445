#include "esvd/solvers.hpp"

#include <cmath>

namespace esvd {

Vec curvature_coefficients(const Mat& X, const Mat& S_inv, const Mat& V) {
  if (X.cols() != S_inv.cols() || S_inv.rows() != V.rows())
    throw ShapeError("curvature coefficients: dimension mismatch");
  // k_i = v_i^T S^{-1} X^T X S^{-T} v_i = || X S^{-T} v_i ||^2, evaluated in
  // the norm form to keep k_i >= 0 exactly.
  const Mat T = X * S_inv.transpose();
  Vec k(V.cols());
  for (Eigen::Index i = 0; i < V.cols(); ++i) k[i] = (T * V.col(i)).squaredNorm();
  return k;
}

namespace {

// Shared inactive-budget path: the objective is 0 at sigma' = sigma, so the
// no-op is optimal whenever it is feasible.
bool budget_inactive(const Vec& sigma, const Vec& k, double c, double power,
                     ShrinkageSolution& out) {
  const double current = sigma.array().pow(power).sum();
  if (current <= c) {
    out.sigma = sigma;
    out.gamma = 0.0;
    out.k = k;
    out.constraint_active = false;
    out.objective = 0.0;
    out.constraint_residual = current - c;
    return true;
  }
  return false;
}

void finalize(const Vec& sigma, double c, double power, ShrinkageSolution& out) {
  out.constraint_active = true;
  out.objective = (out.k.array() * (out.sigma - sigma).array().square()).sum();
  out.constraint_residual = out.sigma.array().pow(power).sum() - c;
}

}  // namespace

ShrinkageSolution solve_quadratic_budget(const Vec& sigma, const Vec& k, double c) {
  if (sigma.size() != k.size()) throw ShapeError("quadratic budget: sigma/k length mismatch");
  if (!(c > 0)) throw InputError("quadratic budget: c must be positive");
  if ((k.array() < 0).any()) throw InputError("quadratic budget: k must be nonnegative");
  ShrinkageSolution out;
  if (budget_inactive(sigma, k, c, 2.0, out)) return out;

  const auto shrunk = [&](double gamma) {
    Vec s(sigma.size());
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
      s[i] = k[i] > 0 ? sigma[i] * k[i] / (k[i] + gamma) : 0.0;
    return s;
  };
  const auto excess = [&](double gamma) { return shrunk(gamma).squaredNorm() - c; };

  // Verified upper bound: with kmax = max k_i, sigma_i* <= sigma_i * kmax/(kmax+gamma),
  // so gamma_hi = kmax (sqrt(sum sigma^2 / c) - 1) forces the budget. Doubling
  // guards the all-k-zero corner.
  const double kmax = k.maxCoeff();
  double hi = std::max(kmax * (std::sqrt(sigma.squaredNorm() / c) - 1.0), 1.0);
  int grow = 0;
  while (excess(hi) > 0 && grow++ < 200) hi *= 2;
  if (excess(hi) > 0) throw SolverError("quadratic budget: bracket growth failed");

  out.gamma = solve_monotone_scalar(excess, 0.0, hi, 1e-15 * std::max(1.0, c), 200);
  out.sigma = shrunk(out.gamma);
  out.k = k;
  finalize(sigma, c, 2.0, out);
  return out;
}

double cubic_root_bisect(double sigma, double k, double gamma) {
  // Unique nonnegative root of f(t) = 2kt - 2k sigma + 4 gamma t^3 in [0, sigma].
  if (!(sigma > 0) || k <= 0) return 0.0;
  if (gamma <= 0) return sigma;
  double lo = 0.0, hi = sigma;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = 2 * k * mid - 2 * k * sigma + 4 * gamma * mid * mid * mid;
    if (f <= 0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-16 * std::max(1.0, sigma)) break;
  }
  return 0.5 * (lo + hi);
}

double cubic_root_closed_form(double sigma, double k, double gamma) {
  if (!(sigma > 0) || k <= 0) return 0.0;
  if (gamma <= 0) return sigma;
  const double inner = 2 * gamma * gamma * gamma * k * k * k +
                       27 * std::pow(gamma, 4) * k * k * sigma * sigma;
  const double A = 9 * gamma * gamma * k * sigma + std::sqrt(3.0) * std::sqrt(inner);
  if (!std::isfinite(A) || A <= 0) return cubic_root_bisect(sigma, k, gamma);
  const double Ac = std::cbrt(A);
  const double root = Ac / (std::pow(6.0, 2.0 / 3.0) * gamma) - k / (std::cbrt(6.0) * Ac);
  if (!std::isfinite(root)) return cubic_root_bisect(sigma, k, gamma);
  return std::min(std::max(root, 0.0), sigma);
}

ShrinkageSolution solve_quartic_budget(const Vec& sigma, const Vec& k, double c) {
  if (sigma.size() != k.size()) throw ShapeError("quartic budget: sigma/k length mismatch");
  if (!(c > 0)) throw InputError("quartic budget: c must be positive");
  if ((k.array() < 0).any()) throw InputError("quartic budget: k must be nonnegative");
  ShrinkageSolution out;
  if (budget_inactive(sigma, k, c, 4.0, out)) return out;

  const auto shrunk = [&](double gamma) {
    Vec s(sigma.size());
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
      s[i] = cubic_root_bisect(sigma[i], k[i], gamma);
    return s;
  };
  const auto excess = [&](double gamma) { return shrunk(gamma).array().pow(4).sum() - c; };

  double hi = 1.0;
  int grow = 0;
  while (excess(hi) > 0 && grow++ < 400) hi *= 2;
  if (excess(hi) > 0) throw SolverError("quartic budget: bracket growth failed");

  out.gamma = solve_monotone_scalar(excess, 0.0, hi, 1e-15 * std::max(1.0, c), 200);
  out.sigma = shrunk(out.gamma);
  out.k = k;
  finalize(sigma, c, 4.0, out);
  return out;
}

}  // namespace esvd
