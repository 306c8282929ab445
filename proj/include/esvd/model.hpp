#pragma once

#include <vector>

#include "esvd/numerics.hpp"
#include "esvd/rng.hpp"

namespace esvd {

struct TrainConfig {
  int epochs = 20;
  double learning_rate = 1e-3;
  double lr_decay = 0.8;  // multiplicative, per epoch
  int batch_size = 256;
  std::uint64_t seed = 0;
  // Adam moment decay rates and epsilon (conventional defaults).
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
};

// Bias-free MLP: layer l maps X -> relu(X W_l^T) for l < L, identity output.
// Scalar regression: the last weight matrix has one row.
class Mlp {
 public:
  Mlp() = default;
  // widths = {n_in, h_1, ..., h_{L-1}, 1}; weights ~ U(-a, a), a = 1/sqrt(fan_in)
  Mlp(const std::vector<Eigen::Index>& widths, Rng& rng);

  Eigen::Index num_layers() const { return static_cast<Eigen::Index>(W.size()); }
  Eigen::Index input_dim() const { return W.empty() ? 0 : W.front().cols(); }

  // Predictions as a column vector.
  Vec predict(const Mat& X) const;

  // Forward pass capturing the input of every layer: captured[l] is X^{[l]}
  // (captured[0] = X). Returns predictions.
  Vec forward_captured(const Mat& X, std::vector<Mat>& captured) const;

  std::vector<Mat> W;
};

// Mini-batch Adam on the MSE loss. Returns per-epoch training MSE.
std::vector<double> train(Mlp& model, const Mat& X, const Vec& y, const TrainConfig& cfg);

// Analytical MSE gradients for every layer (used by train and the
// finite-difference check). loss = (1/N) || predict(X) - y ||^2.
std::vector<Mat> mse_gradients(const Mlp& model, const Mat& X, const Vec& y);

// Exact least-squares weights for the final layer given its input matrix:
// argmin_w || X_L w - y ||^2, with a ridge fallback when X_L is rank-deficient.
Mat least_squares_refit(const Mat& X_L, const Vec& y);

// Full-batch gradient descent on the final layer only, step chosen as
// 0.9 / lambda_max((2/N) X_L^T X_L) for guaranteed descent on the quadratic.
void fine_tune_last_layer(Mlp& model, const Mat& X, const Vec& y, int epochs = 50);

}  // namespace esvd
