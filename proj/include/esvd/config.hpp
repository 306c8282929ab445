#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "esvd/dataset.hpp"
#include "esvd/model.hpp"
#include "esvd/pipeline.hpp"

namespace esvd {

// One experiment manifest: JSON file, individual keys overridable from the CLI.
struct RunConfig {
  // data: either a CSV (path + schema) or the synthetic benchmark
  std::string dataset = "synthetic";  // "synthetic" or "csv"
  std::string csv_path;
  CsvSchema schema;
  SyntheticConfig synthetic;

  std::vector<Eigen::Index> hidden_widths = {256, 256, 256, 256};
  TrainConfig train;
  FairnessConfig fairness;

  // baselines
  int bins = 36;
  std::string attribute_predictor = "logistic";  // or "mlp-sigmoid"
  bool quantile_single_term = false;             // cross-group-only variant
  int attribute_epochs = 200;

  // evaluation
  std::string ks_mode = "exact";  // or "binned"
  int export_bins = 36;

  std::vector<std::uint64_t> seeds = {0};
  std::string out_dir = "out";

  // guard: warn when N^2 n^2 cost of the layer rewrite exceeds this
  double cost_warn_threshold = 4e12;
};

RunConfig load_config(const std::string& path);
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);

// FNV-1a 64 over the canonical (sorted-key) serialization.
std::string config_hash(const RunConfig& cfg);

void validate(const RunConfig& cfg);

}  // namespace esvd
