#pragma once

#include <Eigen/Dense>
#include <functional>

#include "esvd/errors.hpp"

namespace esvd {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Relative threshold for numerical rank decisions (SVD truncation,
// pseudo-inverse, eigenvalue keep-masks).
inline constexpr double kRankTol = 1e-10;

// Eigendecomposition of a symmetric matrix, eigenvalues sorted by |lambda|
// descending. Input is symmetrized as (M + M^T)/2 before factorization.
struct SymEig {
  Mat Q;       // columns are eigenvectors, same order as lambda
  Vec lambda;  // descending by absolute value
};
SymEig sym_eig(const Mat& M);

// Thin SVD truncated at rank r = #{sigma_i > kRankTol * sigma_1}.
struct ThinSvd {
  Mat U;
  Vec sigma;  // non-increasing, all > kRankTol * sigma_1
  Mat V;
  Eigen::Index rank() const { return sigma.size(); }
};
ThinSvd thin_svd(const Mat& A);

// Lower-triangular L with L L^T = A. Throws PositiveDefinitenessError.
Mat cholesky(const Mat& A);

// Moore-Penrose pseudo-inverse via SVD truncation at kRankTol.
Mat pinv(const Mat& A);

// Root of a continuous strictly monotone f on [lo, hi] by safeguarded
// bisection. Requires a sign change (or an exact zero) at the endpoints;
// throws BracketError otherwise. Converges in <= max_iter iterations to
// |f(x)| <= tol or bracket width <= tol * max(1, |x|).
double solve_monotone_scalar(const std::function<double(double)>& f, double lo, double hi,
                             double tol = 1e-12, int max_iter = 200);

inline void require_finite(const Mat& A, const char* what) {
  if (!A.allFinite()) throw InputError(std::string(what) + ": non-finite entries");
}

}  // namespace esvd
