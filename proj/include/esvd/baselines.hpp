#pragma once

#include <vector>

#include "esvd/model.hpp"
#include "esvd/numerics.hpp"

namespace esvd {

// Right-continuous empirical CDF with generalized-inverse quantiles.
class EmpiricalCdf {
 public:
  EmpiricalCdf() = default;
  explicit EmpiricalCdf(std::vector<double> samples);

  double cdf(double v) const;       // P(X <= v), right-continuous
  double quantile(double p) const;  // inf{ v : F(v) >= p }
  std::size_t size() const { return sorted_.size(); }
  const std::vector<double>& sorted() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

// Quantile-matching post-processor: maps a prediction for group a to the
// barycenter via sum_a' p_a' * Q_a'(F_a(v)). The "as-printed" variant keeps
// only the cross-group term Q_{other}(F_a(v)).
struct QuantileMatcher {
  EmpiricalCdf cdf1, cdf2;
  double p1 = 0.5, p2 = 0.5;  // group weights, empirical frequencies
  bool single_term = false;

  double map(double value, int group) const;
  Vec apply(const Vec& predictions, const Vec& groups) const;
};
QuantileMatcher fit_quantile_matcher(const Vec& calib_pred, const Vec& calib_group,
                                     bool single_term = false);

// Discretized barycenter transport: B uniform bins over the calibration
// prediction range; per-group histogram quantiles averaged (weighted) into
// barycenter quantiles; each group's bin value maps to the mass-weighted
// barycenter image of its CDF interval. Out-of-range inputs clamp to edge
// bins; a degenerate range yields the identity transport.
struct BarycenterTransport {
  double lo = 0, hi = 0;
  int bins = 0;
  bool identity = false;
  std::vector<double> map1, map2;  // per-bin transported values

  double map(double value, int group) const;
  Vec apply(const Vec& predictions, const Vec& groups) const;
};
BarycenterTransport fit_barycenter_transport(const Vec& calib_pred, const Vec& calib_group,
                                             int bins);

// Inference-time sensitive-attribute predictor.
struct AttributePredictor {
  // kind "logistic": linear logit with bias, batch gradient descent on BCE.
  // kind "mlp-sigmoid": MLP trained on +/-1 targets, sign threshold at eval.
  std::string kind = "logistic";
  Vec w;            // logistic weights (last entry = bias)
  Mlp net;          // mlp-sigmoid variant
  Vec predict(const Mat& X) const;  // labels in {1, 2}
};
AttributePredictor fit_attribute_predictor(const Mat& X, const Vec& group,
                                           const std::string& kind, std::uint64_t seed,
                                           int epochs = 200);

}  // namespace esvd
