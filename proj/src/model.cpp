#include "esvd/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace esvd {

Mlp::Mlp(const std::vector<Eigen::Index>& widths, Rng& rng) {
  if (widths.size() < 2) throw UsageError("mlp: need at least input and output widths");
  if (widths.back() != 1) throw UsageError("mlp: scalar regression requires output width 1");
  W.reserve(widths.size() - 1);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const Eigen::Index fan_in = widths[l], fan_out = widths[l + 1];
    const double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Mat m(fan_out, fan_in);
    for (Eigen::Index i = 0; i < fan_out; ++i)
      for (Eigen::Index j = 0; j < fan_in; ++j) m(i, j) = rng.uniform(-a, a);
    W.push_back(std::move(m));
  }
}

Vec Mlp::forward_captured(const Mat& X, std::vector<Mat>& captured) const {
  if (W.empty()) throw ShapeError("mlp: empty model");
  if (X.cols() != input_dim()) throw ShapeError("mlp: input width mismatch");
  captured.clear();
  captured.reserve(W.size());
  Mat h = X;
  for (std::size_t l = 0; l + 1 < W.size(); ++l) {
    captured.push_back(h);
    h = (h * W[l].transpose()).cwiseMax(0.0);
  }
  captured.push_back(h);
  return h * W.back().transpose().col(0);
}

Vec Mlp::predict(const Mat& X) const {
  if (W.empty()) throw ShapeError("mlp: empty model");
  if (X.cols() != input_dim()) throw ShapeError("mlp: input width mismatch");
  Mat h = X;
  for (std::size_t l = 0; l + 1 < W.size(); ++l) h = (h * W[l].transpose()).cwiseMax(0.0);
  return h * W.back().transpose().col(0);
}

std::vector<Mat> mse_gradients(const Mlp& model, const Mat& X, const Vec& y) {
  const std::size_t L = model.W.size();
  std::vector<Mat> captured;
  const Vec pred = model.forward_captured(X, captured);
  const double N = static_cast<double>(X.rows());

  std::vector<Mat> grads(L);
  Mat delta = (2.0 / N) * (pred - y);  // N x 1
  for (std::size_t l = L; l-- > 0;) {
    grads[l] = delta.transpose() * captured[l];
    if (l > 0) {
      // captured[l] = relu(Z_{l-1}); the mask captured[l] > 0 is relu'(Z).
      delta = (delta * model.W[l]).cwiseProduct(
          (captured[l].array() > 0.0).cast<double>().matrix());
    }
  }
  return grads;
}

std::vector<double> train(Mlp& model, const Mat& X, const Vec& y, const TrainConfig& cfg) {
  if (X.rows() != y.size()) throw ShapeError("train: X/y row mismatch");
  if (cfg.epochs < 1) throw UsageError("train: epochs must be >= 1");
  const std::size_t L = model.W.size();
  const std::size_t N = static_cast<std::size_t>(X.rows());
  const std::size_t batch = std::min<std::size_t>(std::max(cfg.batch_size, 1), N);

  std::vector<Mat> m(L), v(L);
  for (std::size_t l = 0; l < L; ++l) {
    m[l] = Mat::Zero(model.W[l].rows(), model.W[l].cols());
    v[l] = Mat::Zero(model.W[l].rows(), model.W[l].cols());
  }

  Rng shuffle_rng(cfg.seed + 0x5DEECE66DULL);
  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(cfg.epochs));
  long t = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.learning_rate * std::pow(cfg.lr_decay, epoch);
    const std::vector<std::size_t> order = shuffle_rng.permutation(N);
    for (std::size_t start = 0; start < N; start += batch) {
      const std::size_t sz = std::min(batch, N - start);
      Mat Xb(sz, X.cols());
      Vec yb(sz);
      for (std::size_t i = 0; i < sz; ++i) {
        Xb.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(order[start + i]));
        yb[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(order[start + i])];
      }
      const std::vector<Mat> g = mse_gradients(model, Xb, yb);
      ++t;
      const double bc1 = 1.0 - std::pow(cfg.beta1, t);
      const double bc2 = 1.0 - std::pow(cfg.beta2, t);
      for (std::size_t l = 0; l < L; ++l) {
        m[l] = cfg.beta1 * m[l] + (1.0 - cfg.beta1) * g[l];
        v[l] = cfg.beta2 * v[l] + (1.0 - cfg.beta2) * g[l].cwiseProduct(g[l]);
        model.W[l] -=
            lr * ((m[l] / bc1).array() / ((v[l] / bc2).array().sqrt() + cfg.adam_eps)).matrix();
      }
    }
    const Vec pred = model.predict(X);
    const double loss = (pred - y).squaredNorm() / static_cast<double>(N);
    if (!std::isfinite(loss)) throw DivergenceError("train: non-finite loss");
    trace.push_back(loss);
  }
  return trace;
}

Mat least_squares_refit(const Mat& X_L, const Vec& y) {
  if (X_L.rows() != y.size()) throw ShapeError("least squares: X/y row mismatch");
  const ThinSvd svd = thin_svd(X_L);
  Vec w;
  if (svd.rank() == X_L.cols()) {
    w = svd.V * svd.sigma.cwiseInverse().asDiagonal() * (svd.U.transpose() * y);
  } else {
    // Ridge fallback for rank-deficient activations.
    const Mat G = X_L.transpose() * X_L;
    const double lambda = 1e-8 * G.trace() / static_cast<double>(X_L.cols());
    Mat Greg = G;
    Greg.diagonal().array() += std::max(lambda, 1e-300);
    w = Greg.ldlt().solve(X_L.transpose() * y);
  }
  return w.transpose();
}

void fine_tune_last_layer(Mlp& model, const Mat& X, const Vec& y, int epochs) {
  std::vector<Mat> captured;
  model.forward_captured(X, captured);
  const Mat& X_L = captured.back();
  const double N = static_cast<double>(X.rows());

  const Mat H = (2.0 / N) * (X_L.transpose() * X_L);  // loss Hessian
  const SymEig eig = sym_eig(H);
  const double lmax = eig.lambda.size() > 0 ? std::abs(eig.lambda[0]) : 0.0;
  if (lmax <= 0) return;  // all activations zero: gradient is zero too
  const double step = 0.9 / lmax;

  Vec w = model.W.back().row(0).transpose();
  for (int e = 0; e < epochs; ++e) {
    const Vec grad = (2.0 / N) * (X_L.transpose() * (X_L * w - y));
    w -= step * grad;
  }
  if (!w.allFinite()) throw DivergenceError("fine tune: non-finite weights");
  model.W.back().row(0) = w.transpose();
}

}  // namespace esvd
