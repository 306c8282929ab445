#pragma once

#include <optional>
#include <string>

#include "esvd/model.hpp"
#include "esvd/solvers.hpp"
#include "esvd/transforms.hpp"

namespace esvd {

enum class RefitMode { none, least_squares, fine_tune };

RefitMode parse_refit_mode(const std::string& name);  // "algorithm1", "algorithm2-least-squares", "algorithm2-fine-tune"
std::string refit_mode_name(RefitMode mode);

struct FairnessConfig {
  double ce_tilde = 15.0;   // quadratic budget: c_e = sum sigma^2 / ce_tilde
  double cv_tilde = 150.0;  // quartic budget:   c_v = sum sigma^4 / cv_tilde
  double eps_e = 1e-5;
  int layer = -1;           // target layer; -1 = second-to-last
  RefitMode mode = RefitMode::fine_tune;
  int fine_tune_epochs = 50;
};

// Diagnostics from one layer rewrite (both shrinkage stages).
struct LayerAdjustReport {
  int layer = 0;
  double mean_gap_before = 0, mean_gap_after = 0;        // d_e^2 at the layer
  double cov_gap_before = 0, cov_gap_after = 0;          // d_v^2 at the layer
  ShrinkageSolution second_moment;  // empty sigma when the stage was skipped
  ShrinkageSolution first_moment;
  bool second_moment_skipped = false;  // M numerically zero
  double c_e = 0, c_v = 0;  // resolved absolute budgets
};

// One-layer rewrite: covariance-matching shrinkage of W through S_v, then
// mean-matching shrinkage of the result through S_e. Budgets are resolved
// from the spectra at each stage: c_v from svd(W S_v), c_e from svd(W_v S_e).
LayerAdjustReport adjust_layer(Mlp& model, int layer, const Mat& X_train, const Vec& group,
                               double ce_tilde, double cv_tilde, double eps_e);

// Full post-processing: adjust_layer at cfg.layer, then refit the final layer
// on recaptured activations per cfg.mode.
LayerAdjustReport postprocess(Mlp& model, const Mat& X_train, const Vec& y_train,
                              const Vec& group_train, const FairnessConfig& cfg);

}  // namespace esvd
