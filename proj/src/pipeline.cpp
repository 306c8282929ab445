#include "esvd/pipeline.hpp"

#include <cmath>

namespace esvd {

RefitMode parse_refit_mode(const std::string& name) {
  if (name == "algorithm1") return RefitMode::none;
  if (name == "algorithm2-least-squares") return RefitMode::least_squares;
  if (name == "algorithm2-fine-tune") return RefitMode::fine_tune;
  throw UsageError("unknown post-processing mode: " + name);
}

std::string refit_mode_name(RefitMode mode) {
  switch (mode) {
    case RefitMode::none: return "algorithm1";
    case RefitMode::least_squares: return "algorithm2-least-squares";
    case RefitMode::fine_tune: return "algorithm2-fine-tune";
  }
  return "?";
}

namespace {

void split_rows(const Mat& X, const Vec& group, Mat& X1, Mat& X2) {
  const Eigen::Index n1 = (group.array() == 1.0).count();
  const Eigen::Index n2 = X.rows() - n1;
  X1.resize(n1, X.cols());
  X2.resize(n2, X.cols());
  Eigen::Index i1 = 0, i2 = 0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    if (group[i] == 1.0)
      X1.row(i1++) = X.row(i);
    else
      X2.row(i2++) = X.row(i);
  }
}

}  // namespace

LayerAdjustReport adjust_layer(Mlp& model, int layer, const Mat& X_train, const Vec& group,
                               double ce_tilde, double cv_tilde, double eps_e) {
  const Eigen::Index L = model.num_layers();
  if (layer < 0 || layer >= L - 1)
    throw UsageError("adjust_layer: layer must index a non-final layer");
  if (!(ce_tilde > 0) || !(cv_tilde > 0))
    throw UsageError("adjust_layer: budget ratios must be positive");

  std::vector<Mat> captured;
  model.forward_captured(X_train, captured);
  const Mat& Xl = captured[static_cast<std::size_t>(layer)];

  Mat X1, X2;
  split_rows(Xl, group, X1, X2);
  if (X1.rows() < 2 || X2.rows() < 2)
    throw GroupSizeError("adjust_layer: need at least 2 samples per group");

  LayerAdjustReport rep;
  rep.layer = layer;
  const Eigen::RowVectorXd m1 = X1.colwise().mean();
  const Eigen::RowVectorXd m2 = X2.colwise().mean();
  const Mat& W0 = model.W[static_cast<std::size_t>(layer)];
  rep.mean_gap_before = mean_gap_squared(m1, m2, W0);
  rep.cov_gap_before = covariance_gap_squared(X1, X2, W0);

  // Stage 1: covariance matching. W -> (sum sigma* u v^T) S_v^+ from the SVD
  // of W S_v, with the quartic budget c_v = sum sigma^4 / cv_tilde.
  Mat W = W0;
  const Mat M = build_covariance_gap(X1, X2);
  const SecondMomentTransform sv = build_second_moment_transform(M);
  if (sv.rank == 0) {
    rep.second_moment_skipped = true;  // no covariance disparity to match
  } else {
    const ThinSvd svd = thin_svd(W * sv.S);
    const Vec k = curvature_coefficients(Xl, sv.S_pinv, svd.V);
    rep.c_v = svd.sigma.array().pow(4).sum() / cv_tilde;
    rep.second_moment = solve_quartic_budget(svd.sigma, k, rep.c_v);
    W = svd.U * rep.second_moment.sigma.asDiagonal() * svd.V.transpose() * sv.S_pinv;
  }

  // Stage 2: mean matching on the stage-1 result, quadratic budget from the
  // spectrum of W S_e. A zero mean gap is already fair: skipped, since the
  // transform degenerates to a multiple of I and the budget would only
  // shrink predictions.
  const double gap = (m1 - m2).norm();
  if (gap > 1e-12 * std::max({1.0, m1.norm(), m2.norm()})) {
    const FirstMomentTransform se = build_first_moment_transform(m1, m2, eps_e);
    const ThinSvd svd = thin_svd(W * se.S);
    const Vec k = curvature_coefficients(Xl, se.S_inv, svd.V);
    rep.c_e = svd.sigma.squaredNorm() / ce_tilde;
    rep.first_moment = solve_quadratic_budget(svd.sigma, k, rep.c_e);
    W = svd.U * rep.first_moment.sigma.asDiagonal() * svd.V.transpose() * se.S_inv;
  }

  model.W[static_cast<std::size_t>(layer)] = W;
  rep.mean_gap_after = mean_gap_squared(m1, m2, W);
  rep.cov_gap_after = covariance_gap_squared(X1, X2, W);
  return rep;
}

LayerAdjustReport postprocess(Mlp& model, const Mat& X_train, const Vec& y_train,
                              const Vec& group_train, const FairnessConfig& cfg) {
  const Eigen::Index L = model.num_layers();
  // cfg.layer is 1-based to match W^{[l]} numbering; -1 selects L-1.
  int layer0;
  if (cfg.layer == -1) {
    layer0 = static_cast<int>(L) - 2;
  } else {
    if (cfg.layer < 1 || cfg.layer >= L)
      throw UsageError("postprocess: layer must be in [1, L-1]");
    layer0 = cfg.layer - 1;
  }

  LayerAdjustReport rep =
      adjust_layer(model, layer0, X_train, group_train, cfg.ce_tilde, cfg.cv_tilde, cfg.eps_e);

  if (cfg.mode == RefitMode::least_squares) {
    std::vector<Mat> captured;
    model.forward_captured(X_train, captured);
    model.W.back() = least_squares_refit(captured.back(), y_train);
  } else if (cfg.mode == RefitMode::fine_tune) {
    fine_tune_last_layer(model, X_train, y_train, cfg.fine_tune_epochs);
  }
  return rep;
}

}  // namespace esvd
