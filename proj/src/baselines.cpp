#include "esvd/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace esvd {

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
  if (sorted_.empty()) throw GroupSizeError("empirical cdf: empty sample");
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::cdf(double v) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), v);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double EmpiricalCdf::quantile(double p) const {
  // Generalized inverse: smallest sample value whose CDF reaches p.
  const double n = static_cast<double>(sorted_.size());
  const double r = std::ceil(p * n) - 1.0;
  const auto i = static_cast<std::size_t>(std::clamp(r, 0.0, n - 1.0));
  return sorted_[i];
}

double QuantileMatcher::map(double value, int group) const {
  const EmpiricalCdf& own = group == 1 ? cdf1 : cdf2;
  const double p = own.cdf(value);
  if (single_term) {  // cross-group-only variant
    const EmpiricalCdf& other = group == 1 ? cdf2 : cdf1;
    const double w = group == 1 ? p2 : p1;
    return w * other.quantile(p);
  }
  return p1 * cdf1.quantile(p) + p2 * cdf2.quantile(p);
}

Vec QuantileMatcher::apply(const Vec& predictions, const Vec& groups) const {
  if (predictions.size() != groups.size()) throw ShapeError("quantile match: length mismatch");
  Vec out(predictions.size());
  for (Eigen::Index i = 0; i < predictions.size(); ++i)
    out[i] = map(predictions[i], groups[i] == 1.0 ? 1 : 2);
  return out;
}

QuantileMatcher fit_quantile_matcher(const Vec& calib_pred, const Vec& calib_group,
                                     bool single_term) {
  if (calib_pred.size() != calib_group.size())
    throw ShapeError("quantile match: length mismatch");
  std::vector<double> s1, s2;
  for (Eigen::Index i = 0; i < calib_pred.size(); ++i)
    (calib_group[i] == 1.0 ? s1 : s2).push_back(calib_pred[i]);
  if (s1.empty() || s2.empty()) throw GroupSizeError("quantile match: empty group");
  QuantileMatcher qm;
  qm.p1 = static_cast<double>(s1.size()) / static_cast<double>(calib_pred.size());
  qm.p2 = 1.0 - qm.p1;
  qm.cdf1 = EmpiricalCdf(std::move(s1));
  qm.cdf2 = EmpiricalCdf(std::move(s2));
  qm.single_term = single_term;
  return qm;
}

namespace {

// Step-quantile representation of a binned distribution: value values[i] on
// the cumulative interval (levels[i-1], levels[i]].
struct StepQuantile {
  std::vector<double> levels;  // strictly increasing, last = 1
  std::vector<double> values;
};

StepQuantile step_quantile(const std::vector<double>& mass, const std::vector<double>& value) {
  StepQuantile q;
  double c = 0;
  for (std::size_t b = 0; b < mass.size(); ++b) {
    if (mass[b] <= 0) continue;
    c += mass[b];
    q.levels.push_back(c);
    q.values.push_back(value[b]);
  }
  if (!q.levels.empty()) q.levels.back() = 1.0;  // guard rounding
  return q;
}

double eval_step(const StepQuantile& q, double p) {
  const auto it = std::lower_bound(q.levels.begin(), q.levels.end(), p);
  const std::size_t i = std::min(static_cast<std::size_t>(it - q.levels.begin()),
                                 q.values.size() - 1);
  return q.values[i];
}

}  // namespace

double BarycenterTransport::map(double value, int group) const {
  if (identity) return value;
  const double clamped = std::clamp(value, lo, hi);
  int b = static_cast<int>((clamped - lo) / (hi - lo) * bins);
  b = std::clamp(b, 0, bins - 1);
  return (group == 1 ? map1 : map2)[static_cast<std::size_t>(b)];
}

Vec BarycenterTransport::apply(const Vec& predictions, const Vec& groups) const {
  if (predictions.size() != groups.size()) throw ShapeError("barycenter: length mismatch");
  Vec out(predictions.size());
  for (Eigen::Index i = 0; i < predictions.size(); ++i)
    out[i] = map(predictions[i], groups[i] == 1.0 ? 1 : 2);
  return out;
}

BarycenterTransport fit_barycenter_transport(const Vec& calib_pred, const Vec& calib_group,
                                             int bins) {
  if (bins < 2) throw UsageError("barycenter: need at least 2 bins");
  if (calib_pred.size() != calib_group.size()) throw ShapeError("barycenter: length mismatch");

  BarycenterTransport t;
  t.lo = calib_pred.minCoeff();
  t.hi = calib_pred.maxCoeff();
  t.bins = bins;
  if (t.hi <= t.lo) {  // all predictions equal: nothing to transport
    t.identity = true;
    return t;
  }

  std::vector<double> h1(static_cast<std::size_t>(bins), 0.0), h2(h1), centers(h1);
  for (int b = 0; b < bins; ++b)
    centers[static_cast<std::size_t>(b)] = t.lo + (t.hi - t.lo) * (b + 0.5) / bins;
  double n1 = 0, n2 = 0;
  for (Eigen::Index i = 0; i < calib_pred.size(); ++i) {
    const int b = std::clamp(
        static_cast<int>((calib_pred[i] - t.lo) / (t.hi - t.lo) * bins), 0, bins - 1);
    if (calib_group[i] == 1.0) {
      h1[static_cast<std::size_t>(b)] += 1;
      n1 += 1;
    } else {
      h2[static_cast<std::size_t>(b)] += 1;
      n2 += 1;
    }
  }
  if (n1 == 0 || n2 == 0) throw GroupSizeError("barycenter: empty group");
  for (auto& m : h1) m /= n1;
  for (auto& m : h2) m /= n2;
  const double w1 = n1 / (n1 + n2), w2 = n2 / (n1 + n2);

  // Barycenter quantile: Q(p) = w1 Q1(p) + w2 Q2(p), a step function whose
  // breakpoints are the union of both groups' cumulative levels.
  const StepQuantile q1 = step_quantile(h1, centers), q2 = step_quantile(h2, centers);
  std::vector<double> union_levels;
  union_levels.reserve(q1.levels.size() + q2.levels.size());
  std::merge(q1.levels.begin(), q1.levels.end(), q2.levels.begin(), q2.levels.end(),
             std::back_inserter(union_levels));
  union_levels.erase(std::unique(union_levels.begin(), union_levels.end()),
                     union_levels.end());
  const auto q_bar = [&](double p) { return w1 * eval_step(q1, p) + w2 * eval_step(q2, p); };

  // Monotone transport with barycentric projection: bin b of group a, holding
  // the CDF interval (c_prev, c], maps to the mass-weighted average of Q over
  // that interval. Empty bins take Q at their cumulative level.
  const auto build_map = [&](const std::vector<double>& h) {
    std::vector<double> m(static_cast<std::size_t>(bins));
    double c_prev = 0;
    for (std::size_t b = 0; b < m.size(); ++b) {
      const double c = c_prev + h[b];
      if (h[b] <= 0) {
        m[b] = q_bar(std::min(std::max(c, 1e-15), 1.0));
        continue;
      }
      double integral = 0, p_prev = c_prev;
      for (double u : union_levels) {
        if (u <= c_prev) continue;
        const double p = std::min(u, c);
        integral += (p - p_prev) * q_bar(p);
        p_prev = p;
        if (u >= c) break;
      }
      if (p_prev < c) integral += (c - p_prev) * q_bar(c);
      m[b] = integral / h[b];
      c_prev = c;
    }
    return m;
  };
  t.map1 = build_map(h1);
  t.map2 = build_map(h2);
  return t;
}

Vec AttributePredictor::predict(const Mat& X) const {
  Vec out(X.rows());
  if (kind == "logistic") {
    if (X.cols() + 1 != w.size()) throw ShapeError("attribute predictor: width mismatch");
    const Vec z = X * w.head(X.cols()) + Vec::Constant(X.rows(), w[X.cols()]);
    for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = z[i] > 0 ? 2.0 : 1.0;
  } else {
    const Vec z = net.predict(X);
    for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = z[i] > 0 ? 2.0 : 1.0;
  }
  return out;
}

AttributePredictor fit_attribute_predictor(const Mat& X, const Vec& group,
                                           const std::string& kind, std::uint64_t seed,
                                           int epochs) {
  const bool has1 = (group.array() == 1.0).any(), has2 = (group.array() == 2.0).any();
  if (!has1 || !has2) throw GroupSizeError("attribute predictor: single-class data");

  AttributePredictor ap;
  ap.kind = kind;
  if (kind == "logistic") {
    // Full-batch gradient descent on BCE; step from the Hessian bound
    // (1/4N) Xa^T Xa of the augmented design, guaranteeing descent.
    const Eigen::Index n = X.cols();
    Mat Xa(X.rows(), n + 1);
    Xa.leftCols(n) = X;
    Xa.col(n).setOnes();
    const Vec target = (group.array() - 1.0).matrix();  // {0,1}
    const double N = static_cast<double>(X.rows());
    Eigen::SelfAdjointEigenSolver<Mat> es(Xa.transpose() * Xa / (4.0 * N));
    const double lmax = es.eigenvalues().maxCoeff();
    const double step = lmax > 0 ? 0.9 / lmax : 1.0;
    Vec w = Vec::Zero(n + 1);
    for (int e = 0; e < epochs; ++e) {
      Vec s(X.rows());
      const Vec z = Xa * w;
      for (Eigen::Index i = 0; i < z.size(); ++i)
        s[i] = z[i] >= 0 ? 1.0 / (1.0 + std::exp(-z[i]))
                         : std::exp(z[i]) / (1.0 + std::exp(z[i]));
      w -= step * (Xa.transpose() * (s - target)) / N;
    }
    ap.w = w;
  } else if (kind == "mlp-sigmoid") {
    Rng rng(seed);
    std::vector<Eigen::Index> widths = {X.cols(), 256, 256, 256, 256, 1};
    ap.net = Mlp(widths, rng);
    const Vec target = ((group.array() - 1.5) * 2.0).matrix();  // {-1, +1}
    TrainConfig tc;
    tc.epochs = std::max(1, epochs / 10);
    tc.seed = seed;
    train(ap.net, X, target, tc);
  } else {
    throw UsageError("attribute predictor: unknown kind " + kind);
  }
  return ap;
}

}  // namespace esvd
