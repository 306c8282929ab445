#pragma once

#include "esvd/numerics.hpp"

namespace esvd {

// Transform tying a weight matrix's singular spectrum to the group mean gap:
// S S^T = (m1 - m2)^T (m1 - m2) + eps * I, lower triangular and invertible.
struct FirstMomentTransform {
  Mat S;      // n x n lower triangular
  Mat S_inv;  // exact triangular inverse
  double eps;
};
FirstMomentTransform build_first_moment_transform(const Eigen::RowVectorXd& m1,
                                                  const Eigen::RowVectorXd& m2, double eps);

// Difference of unbiased per-group covariance estimates:
// M = X1c^T X1c / (N1-1) - X2c^T X2c / (N2-1), with Xac centered per group.
Mat build_covariance_gap(const Mat& X1, const Mat& X2);

// Transform tying the spectrum to the covariance gap: S = Q |Lambda|^{1/2}
// from the eigendecomposition of M, so S S^T = |M|. Rank-deficient M yields a
// rank-deficient S handled through its pseudo-inverse.
struct SecondMomentTransform {
  Mat M;
  Mat S;
  Mat S_pinv;
  Vec lambda;          // descending by |lambda|
  Eigen::Index rank;   // #{|lambda_i| > kRankTol * max|lambda|}
};
SecondMomentTransform build_second_moment_transform(const Mat& M);

// Squared Frobenius gap of the per-group output means: ||(m1 - m2) W^T||^2.
double mean_gap_squared(const Eigen::RowVectorXd& m1, const Eigen::RowVectorXd& m2, const Mat& W);

// Squared Frobenius gap of the per-group output covariances: ||W M W^T||_F^2.
double covariance_gap_squared(const Mat& X1, const Mat& X2, const Mat& W);

}  // namespace esvd
