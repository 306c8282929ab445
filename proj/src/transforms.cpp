#include "esvd/transforms.hpp"

#include <cmath>

namespace esvd {

FirstMomentTransform build_first_moment_transform(const Eigen::RowVectorXd& m1,
                                                  const Eigen::RowVectorXd& m2, double eps) {
  if (m1.size() != m2.size()) throw ShapeError("first moment transform: mean length mismatch");
  if (!(eps > 0)) throw InputError("first moment transform: eps must be positive");
  const Eigen::RowVectorXd gap = m1 - m2;
  const Eigen::Index n = gap.size();
  Mat A = gap.transpose() * gap;
  A.diagonal().array() += eps;

  FirstMomentTransform out;
  out.eps = eps;
  out.S = cholesky(A);
  // Exact triangular inverse by back-substitution.
  out.S_inv = out.S.triangularView<Eigen::Lower>().solve(Mat::Identity(n, n));
  return out;
}

Mat build_covariance_gap(const Mat& X1, const Mat& X2) {
  if (X1.cols() != X2.cols()) throw ShapeError("covariance gap: column mismatch");
  if (X1.rows() < 2 || X2.rows() < 2)
    throw GroupSizeError("covariance gap: need at least 2 samples per group");
  const Mat C1 = (X1.rowwise() - X1.colwise().mean()).transpose() *
                 (X1.rowwise() - X1.colwise().mean()) / double(X1.rows() - 1);
  const Mat C2 = (X2.rowwise() - X2.colwise().mean()).transpose() *
                 (X2.rowwise() - X2.colwise().mean()) / double(X2.rows() - 1);
  Mat M = C1 - C2;
  return 0.5 * (M + M.transpose());
}

SecondMomentTransform build_second_moment_transform(const Mat& M) {
  SecondMomentTransform out;
  out.M = 0.5 * (M + M.transpose());
  const SymEig eig = sym_eig(out.M);
  out.lambda = eig.lambda;

  const Eigen::Index n = M.rows();
  const double lmax = eig.lambda.size() > 0 ? std::abs(eig.lambda[0]) : 0.0;
  out.rank = 0;
  while (out.rank < n && std::abs(eig.lambda[out.rank]) > kRankTol * lmax) ++out.rank;

  // S = Q |Lambda|^{1/2} with near-null columns zeroed; the pseudo-inverse
  // inverts only the kept columns.
  Vec root_abs = Vec::Zero(n);
  for (Eigen::Index i = 0; i < out.rank; ++i) root_abs[i] = std::sqrt(std::abs(eig.lambda[i]));
  out.S = eig.Q * root_abs.asDiagonal();

  Vec inv = Vec::Zero(n);
  for (Eigen::Index i = 0; i < out.rank; ++i) inv[i] = 1.0 / root_abs[i];
  out.S_pinv = inv.asDiagonal() * eig.Q.transpose();
  return out;
}

double mean_gap_squared(const Eigen::RowVectorXd& m1, const Eigen::RowVectorXd& m2, const Mat& W) {
  if (m1.size() != m2.size() || m1.size() != W.cols())
    throw ShapeError("mean gap: dimension mismatch");
  return ((m1 - m2) * W.transpose()).squaredNorm();
}

double covariance_gap_squared(const Mat& X1, const Mat& X2, const Mat& W) {
  if (X1.cols() != W.cols()) throw ShapeError("covariance gap: dimension mismatch");
  const Mat M = build_covariance_gap(X1, X2);
  return (W * M * W.transpose()).squaredNorm();
}

}  // namespace esvd
