#include "esvd/eval.hpp"

#include <algorithm>
#include <cmath>

namespace esvd {

double mse(const Vec& predictions, const Vec& targets) {
  if (predictions.size() != targets.size()) throw ShapeError("mse: length mismatch");
  if (predictions.size() == 0) throw ShapeError("mse: empty input");
  return (predictions - targets).squaredNorm() / static_cast<double>(predictions.size());
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw GroupSizeError("ks: empty group");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < a.size() && j < b.size()) {
    // Advance past ties in both samples before comparing CDFs, so the
    // statistic is evaluated just after each pooled value.
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == t) ++i;
    while (j < b.size() && b[j] == t) ++j;
    best = std::max(best, std::abs(double(i) / na - double(j) / nb));
  }
  // One sample exhausted: the other's CDF still has to climb to 1, and the
  // largest remaining gap occurs right where the merge stopped.
  if (i < a.size()) best = std::max(best, std::abs(double(i) / na - 1.0));
  if (j < b.size()) best = std::max(best, std::abs(1.0 - double(j) / nb));
  return best;
}

double ks_distance_binned(const std::vector<double>& a, const std::vector<double>& b, int bins) {
  if (a.empty() || b.empty()) throw GroupSizeError("ks: empty group");
  if (bins < 2) throw UsageError("ks: need at least 2 bins");
  double lo = a[0], hi = a[0];
  for (double v : a) lo = std::min(lo, v), hi = std::max(hi, v);
  for (double v : b) lo = std::min(lo, v), hi = std::max(hi, v);
  if (hi <= lo) return 0.0;
  std::vector<double> ca(static_cast<std::size_t>(bins), 0.0), cb(ca);
  const auto bin_of = [&](double v) {
    const int bi = static_cast<int>((v - lo) / (hi - lo) * bins);
    return static_cast<std::size_t>(std::clamp(bi, 0, bins - 1));
  };
  for (double v : a) ca[bin_of(v)] += 1.0 / static_cast<double>(a.size());
  for (double v : b) cb[bin_of(v)] += 1.0 / static_cast<double>(b.size());
  double fa = 0, fb = 0, best = 0;
  for (int i = 0; i < bins; ++i) {
    fa += ca[static_cast<std::size_t>(i)];
    fb += cb[static_cast<std::size_t>(i)];
    best = std::max(best, std::abs(fa - fb));
  }
  return best;
}

GroupDensities density_export(const Vec& predictions, const Vec& group, int bins) {
  if (bins < 2) throw UsageError("density export: need at least 2 bins");
  if (predictions.size() != group.size()) throw ShapeError("density export: length mismatch");
  double lo = predictions.minCoeff(), hi = predictions.maxCoeff();
  if (hi <= lo) {  // degenerate range: single bin carries all mass
    lo -= 0.5;
    hi += 0.5;
    bins = 1;
  }
  GroupDensities out;
  out.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i)
    out.edges[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / bins;
  // The interpolation can round the endpoints inward; the edges must cover
  // the full data range exactly.
  out.edges.front() = lo;
  out.edges.back() = hi;
  out.mass1.assign(static_cast<std::size_t>(bins), 0.0);
  out.mass2.assign(static_cast<std::size_t>(bins), 0.0);
  double n1 = 0, n2 = 0;
  for (Eigen::Index i = 0; i < group.size(); ++i) (group[i] == 1.0 ? n1 : n2) += 1;
  if (n1 == 0 || n2 == 0) throw GroupSizeError("density export: empty group");
  for (Eigen::Index i = 0; i < predictions.size(); ++i) {
    const int bi = static_cast<int>((predictions[i] - lo) / (hi - lo) * bins);
    const std::size_t b = static_cast<std::size_t>(std::clamp(bi, 0, bins - 1));
    if (group[i] == 1.0)
      out.mass1[b] += 1.0 / n1;
    else
      out.mass2[b] += 1.0 / n2;
  }
  return out;
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

Vec select_rows(const Vec& v, const std::vector<std::size_t>& idx) {
  Vec out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(idx[i])];
  return out;
}

Mat select_rows(const Mat& m, const std::vector<std::size_t>& idx) {
  Mat out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

}  // namespace esvd
