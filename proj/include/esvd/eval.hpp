#pragma once

#include <vector>

#include "esvd/numerics.hpp"

namespace esvd {

// Mean squared error, (1/N) sum (pred - target)^2.
double mse(const Vec& predictions, const Vec& targets);

// Exact two-sample Kolmogorov-Smirnov statistic via sorted merge (tie-aware):
// sup_t |F1(t) - F2(t)| over the pooled sample.
double ks_distance(std::vector<double> a, std::vector<double> b);

// KS on binned densities over the pooled range (figure-parity mode).
double ks_distance_binned(const std::vector<double>& a, const std::vector<double>& b, int bins);

// Shared-edge normalized histograms per group (masses sum to 1 per group).
struct GroupDensities {
  std::vector<double> edges;  // bins + 1 edges spanning the pooled range
  std::vector<double> mass1;
  std::vector<double> mass2;
};
GroupDensities density_export(const Vec& predictions, const Vec& group, int bins);

std::vector<double> to_std(const Vec& v);
Vec select_rows(const Vec& v, const std::vector<std::size_t>& idx);
Mat select_rows(const Mat& m, const std::vector<std::size_t>& idx);

}  // namespace esvd
