#include "esvd/config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include "esvd/report.hpp"

namespace esvd {

using nlohmann::json;

namespace {

template <typename T>
void read_key(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void check_known_keys(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw UsageError("unknown config key '" + key + "' in " + where);
}

}  // namespace

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  check_known_keys(j, {"dataset", "csv_path", "schema", "synthetic", "hidden_widths", "train",
                       "fairness", "bins", "attribute_predictor", "attribute_epochs",
                       "quantile_single_term", "ks_mode", "export_bins", "seeds", "out_dir",
                       "cost_warn_threshold"},
                   "config");
  read_key(j, "dataset", cfg.dataset);
  read_key(j, "csv_path", cfg.csv_path);
  if (j.contains("schema")) {
    const json& s = j.at("schema");
    check_known_keys(s, {"features", "target", "group", "group_values", "categorical"}, "schema");
    read_key(s, "features", cfg.schema.feature_columns);
    read_key(s, "target", cfg.schema.target_column);
    read_key(s, "group", cfg.schema.group_column);
    if (s.contains("group_values")) {
      const auto gv = s.at("group_values").get<std::vector<std::string>>();
      if (gv.size() != 2) throw UsageError("schema.group_values must list exactly two values");
      cfg.schema.group_value1 = gv[0];
      cfg.schema.group_value2 = gv[1];
    }
    read_key(s, "categorical", cfg.schema.categorical_features);
  }
  if (j.contains("synthetic")) {
    const json& s = j.at("synthetic");
    check_known_keys(s, {"N", "n", "mean_gap", "scale2", "target_leak", "noise"}, "synthetic");
    read_key(s, "N", cfg.synthetic.N);
    long n = cfg.synthetic.n;
    read_key(s, "n", n);
    cfg.synthetic.n = n;
    read_key(s, "mean_gap", cfg.synthetic.mean_gap);
    read_key(s, "scale2", cfg.synthetic.scale2);
    read_key(s, "target_leak", cfg.synthetic.target_leak);
    read_key(s, "noise", cfg.synthetic.noise);
  }
  if (j.contains("hidden_widths")) {
    const auto w = j.at("hidden_widths").get<std::vector<long>>();
    cfg.hidden_widths.assign(w.begin(), w.end());
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    check_known_keys(t, {"epochs", "learning_rate", "lr_decay", "batch_size"}, "train");
    read_key(t, "epochs", cfg.train.epochs);
    read_key(t, "learning_rate", cfg.train.learning_rate);
    read_key(t, "lr_decay", cfg.train.lr_decay);
    read_key(t, "batch_size", cfg.train.batch_size);
  }
  if (j.contains("fairness")) {
    const json& f = j.at("fairness");
    check_known_keys(f, {"ce_tilde", "cv_tilde", "eps_e", "layer", "mode", "fine_tune_epochs"},
                     "fairness");
    read_key(f, "ce_tilde", cfg.fairness.ce_tilde);
    read_key(f, "cv_tilde", cfg.fairness.cv_tilde);
    read_key(f, "eps_e", cfg.fairness.eps_e);
    read_key(f, "layer", cfg.fairness.layer);
    if (f.contains("mode")) cfg.fairness.mode = parse_refit_mode(f.at("mode").get<std::string>());
    read_key(f, "fine_tune_epochs", cfg.fairness.fine_tune_epochs);
  }
  read_key(j, "bins", cfg.bins);
  read_key(j, "attribute_predictor", cfg.attribute_predictor);
  read_key(j, "attribute_epochs", cfg.attribute_epochs);
  read_key(j, "quantile_single_term", cfg.quantile_single_term);
  read_key(j, "ks_mode", cfg.ks_mode);
  read_key(j, "export_bins", cfg.export_bins);
  read_key(j, "seeds", cfg.seeds);
  read_key(j, "out_dir", cfg.out_dir);
  read_key(j, "cost_warn_threshold", cfg.cost_warn_threshold);
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw UsageError("config parse error in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

json config_to_json(const RunConfig& cfg) {
  json j;
  j["dataset"] = cfg.dataset;
  j["csv_path"] = cfg.csv_path;
  j["schema"]["features"] = cfg.schema.feature_columns;
  j["schema"]["target"] = cfg.schema.target_column;
  j["schema"]["group"] = cfg.schema.group_column;
  j["schema"]["group_values"] = {cfg.schema.group_value1, cfg.schema.group_value2};
  j["schema"]["categorical"] = cfg.schema.categorical_features;
  j["synthetic"] = {{"N", cfg.synthetic.N},
                    {"n", cfg.synthetic.n},
                    {"mean_gap", cfg.synthetic.mean_gap},
                    {"scale2", cfg.synthetic.scale2},
                    {"target_leak", cfg.synthetic.target_leak},
                    {"noise", cfg.synthetic.noise}};
  j["hidden_widths"] = std::vector<long>(cfg.hidden_widths.begin(), cfg.hidden_widths.end());
  j["train"] = {{"epochs", cfg.train.epochs},
                {"learning_rate", cfg.train.learning_rate},
                {"lr_decay", cfg.train.lr_decay},
                {"batch_size", cfg.train.batch_size}};
  j["fairness"] = {{"ce_tilde", cfg.fairness.ce_tilde},
                   {"cv_tilde", cfg.fairness.cv_tilde},
                   {"eps_e", cfg.fairness.eps_e},
                   {"layer", cfg.fairness.layer},
                   {"mode", refit_mode_name(cfg.fairness.mode)},
                   {"fine_tune_epochs", cfg.fairness.fine_tune_epochs}};
  j["bins"] = cfg.bins;
  j["attribute_predictor"] = cfg.attribute_predictor;
  j["attribute_epochs"] = cfg.attribute_epochs;
  j["quantile_single_term"] = cfg.quantile_single_term;
  j["ks_mode"] = cfg.ks_mode;
  j["export_bins"] = cfg.export_bins;
  j["seeds"] = cfg.seeds;
  j["out_dir"] = cfg.out_dir;
  j["cost_warn_threshold"] = cfg.cost_warn_threshold;
  return j;
}

std::string config_hash(const RunConfig& cfg) {
  // The hash identifies the experiment, not where its artifacts land.
  json j = config_to_json(cfg);
  j.erase("out_dir");
  const std::uint64_t h = fnv1a64(canonical_json(j));
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

void validate(const RunConfig& cfg) {
  if (cfg.dataset != "synthetic" && cfg.dataset != "csv")
    throw UsageError("dataset must be 'synthetic' or 'csv'");
  if (cfg.dataset == "csv") {
    if (cfg.csv_path.empty()) throw UsageError("csv dataset requires csv_path");
    if (cfg.schema.feature_columns.empty() || cfg.schema.target_column.empty() ||
        cfg.schema.group_column.empty() || cfg.schema.group_value1.empty())
      throw UsageError("csv dataset requires a full schema (features/target/group/group_values)");
  }
  if (cfg.train.epochs < 1) throw UsageError("train.epochs must be >= 1");
  if (!(cfg.train.learning_rate > 0)) throw UsageError("train.learning_rate must be positive");
  if (!(cfg.train.lr_decay > 0 && cfg.train.lr_decay <= 1))
    throw UsageError("train.lr_decay must be in (0, 1]");
  if (cfg.train.batch_size < 1) throw UsageError("train.batch_size must be >= 1");
  if (!(cfg.fairness.ce_tilde > 0) || !(cfg.fairness.cv_tilde > 0))
    throw UsageError("fairness budget ratios must be positive");
  if (!(cfg.fairness.eps_e > 0)) throw UsageError("fairness.eps_e must be positive");
  if (cfg.fairness.fine_tune_epochs < 1) throw UsageError("fine_tune_epochs must be >= 1");
  if (cfg.hidden_widths.empty()) throw UsageError("hidden_widths must be non-empty");
  for (const auto w : cfg.hidden_widths)
    if (w < 1) throw UsageError("hidden widths must be positive");
  if (cfg.bins < 2) throw UsageError("bins must be >= 2");
  if (cfg.export_bins < 2) throw UsageError("export_bins must be >= 2");
  if (cfg.attribute_predictor != "logistic" && cfg.attribute_predictor != "mlp-sigmoid")
    throw UsageError("attribute_predictor must be 'logistic' or 'mlp-sigmoid'");
  if (cfg.attribute_epochs < 1) throw UsageError("attribute_epochs must be >= 1");
  if (cfg.ks_mode != "exact" && cfg.ks_mode != "binned")
    throw UsageError("ks_mode must be 'exact' or 'binned'");
  if (cfg.seeds.empty()) throw UsageError("seeds must be non-empty");
  if (cfg.out_dir.empty()) throw UsageError("out_dir must be non-empty");
}

}  // namespace esvd
