#include "esvd/numerics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace esvd {

SymEig sym_eig(const Mat& M) {
  require_finite(M, "sym_eig");
  if (M.rows() != M.cols()) throw ShapeError("sym_eig: matrix not square");
  const Mat sym = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  if (es.info() != Eigen::Success) throw NumericError("sym_eig: eigensolver failed");

  const Vec lam = es.eigenvalues();  // ascending
  std::vector<Eigen::Index> order(static_cast<std::size_t>(lam.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(lam[a]) > std::abs(lam[b]);
  });

  SymEig out;
  out.lambda.resize(lam.size());
  out.Q.resize(M.rows(), M.cols());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    out.lambda[i] = lam[order[static_cast<std::size_t>(i)]];
    out.Q.col(i) = es.eigenvectors().col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

ThinSvd thin_svd(const Mat& A) {
  require_finite(A, "thin_svd");
  Eigen::BDCSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& s = svd.singularValues();
  Eigen::Index r = 0;
  if (s.size() > 0 && s[0] > 0) {
    const double cut = kRankTol * s[0];
    while (r < s.size() && s[r] > cut) ++r;
  }
  ThinSvd out;
  out.U = svd.matrixU().leftCols(r);
  out.sigma = s.head(r);
  out.V = svd.matrixV().leftCols(r);
  return out;
}

Mat cholesky(const Mat& A) {
  require_finite(A, "cholesky");
  if (A.rows() != A.cols()) throw ShapeError("cholesky: matrix not square");
  const double scale = std::max(1.0, A.norm());
  if ((A - A.transpose()).norm() > 1e-10 * scale)
    throw InputError("cholesky: matrix not symmetric");
  Eigen::LLT<Mat> llt(A);
  if (llt.info() != Eigen::Success)
    throw PositiveDefinitenessError("cholesky: matrix not positive definite");
  return llt.matrixL();
}

Mat pinv(const Mat& A) {
  const ThinSvd svd = thin_svd(A);
  if (svd.rank() == 0) return Mat::Zero(A.cols(), A.rows());
  return svd.V * svd.sigma.cwiseInverse().asDiagonal() * svd.U.transpose();
}

double solve_monotone_scalar(const std::function<double(double)>& f, double lo, double hi,
                             double tol, int max_iter) {
  if (!(lo <= hi)) throw BracketError("solve_monotone_scalar: empty bracket");
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (std::signbit(flo) == std::signbit(fhi))
    throw BracketError("solve_monotone_scalar: no sign change on bracket");

  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < max_iter; ++it) {
    mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (std::abs(fm) <= tol || hi - lo <= tol * std::max(1.0, std::abs(mid))) return mid;
    if (std::signbit(fm) == std::signbit(flo)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return mid;
}

}  // namespace esvd
