#pragma once

#include <map>
#include <string>
#include <vector>

#include "esvd/numerics.hpp"
#include "esvd/rng.hpp"

namespace esvd {

struct CsvSchema {
  std::vector<std::string> feature_columns;
  std::string target_column;
  std::string group_column;
  // Raw group values mapped to labels 1 and 2; rows with other values dropped.
  std::string group_value1;
  std::string group_value2;
  // Non-numeric feature columns encoded 0/1 by first-seen category (binary only).
  std::vector<std::string> categorical_features;
};

struct GroupedDataset {
  Mat X;
  Vec y;
  Vec group;  // entries in {1, 2}
  std::vector<std::string> feature_names;
  std::size_t dropped_rows = 0;  // rows removed for missing/unmapped values

  Eigen::Index n() const { return X.cols(); }
  Eigen::Index N() const { return X.rows(); }
};

GroupedDataset load_csv(const std::string& path, const CsvSchema& schema);

struct SplitIndices {
  std::vector<std::size_t> train, val, test;
  std::uint64_t seed = 0;
};

// Deterministic 70/15/15 shuffle-split: |train| = floor(0.7 N),
// |val| = floor(0.15 N), test takes the remainder.
SplitIndices split(std::size_t N, std::uint64_t seed);

// Per-feature z-score statistics from the training split only.
struct Normalization {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd std;  // zero-variance features get std 1 (left centered)
};
Normalization fit_normalization(const Mat& X, const std::vector<std::size_t>& train_idx);
Mat apply_normalization(const Mat& X, const Normalization& nz);

// Rows of X (already restricted to some index set) partitioned by group label.
void partition_by_group(const Mat& X, const Vec& group, Mat& X1, Mat& X2);

// Synthetic benchmark: two n-dimensional Gaussian groups with distinct means
// and covariances. The disparity is confined to one latent direction (mean
// shift `mean_gap`, scale `scale2`), hidden by a random rotation; the target
// is dominated by the group-identical directions with a small `target_leak`
// weight on the disparity coordinate, so a near-accurate fair predictor
// exists while an unconstrained net exploits the leak.
struct SyntheticConfig {
  std::size_t N = 3000;
  Eigen::Index n = 8;
  double mean_gap = 3.0;    // group-2 shift along the hidden disparity axis
  double scale2 = 1.3;      // group-2 scale along that axis
  double target_leak = 0.25;  // weight of the disparity coordinate in y
  double noise = 0.1;
};
GroupedDataset make_synthetic(const SyntheticConfig& cfg, std::uint64_t seed);

}  // namespace esvd
