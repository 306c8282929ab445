#include "esvd/commands.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "esvd/baselines.hpp"
#include "esvd/eval.hpp"
#include "esvd/report.hpp"

namespace esvd {

using nlohmann::json;

int log_level() {
  const char* v = std::getenv("ESVD_LOG");
  if (!v) return 0;
  try {
    return std::stoi(v);
  } catch (...) {
    return 0;
  }
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[info] " << msg << "\n";
}

void log_warn(const std::string& msg) { std::cerr << "[warn] " << msg << "\n"; }

namespace {

constexpr std::uint64_t kInitSeedSalt = 0xA076'1D64'78BD'642FULL;

struct Prepared {
  GroupedDataset ds;
  SplitIndices idx;
  Mat Xtr, Xva, Xte;
  Vec ytr, yva, yte, gtr, gva, gte;
};

Prepared prepare(const RunConfig& cfg, std::uint64_t seed) {
  Prepared p;
  if (cfg.dataset == "synthetic")
    p.ds = make_synthetic(cfg.synthetic, seed);
  else
    p.ds = load_csv(cfg.csv_path, cfg.schema);
  p.idx = split(static_cast<std::size_t>(p.ds.N()), seed);

  const Normalization nz = fit_normalization(p.ds.X, p.idx.train);
  const Mat Xn = apply_normalization(p.ds.X, nz);
  p.Xtr = select_rows(Xn, p.idx.train);
  p.Xva = select_rows(Xn, p.idx.val);
  p.Xte = select_rows(Xn, p.idx.test);
  p.ytr = select_rows(p.ds.y, p.idx.train);
  p.yva = select_rows(p.ds.y, p.idx.val);
  p.yte = select_rows(p.ds.y, p.idx.test);
  p.gtr = select_rows(p.ds.group, p.idx.train);
  p.gva = select_rows(p.ds.group, p.idx.val);
  p.gte = select_rows(p.ds.group, p.idx.test);

  const Eigen::Index n1 = (p.gtr.array() == 1.0).count();
  if (n1 < 2 || p.Xtr.rows() - n1 < 2)
    throw GroupSizeError("training split needs at least 2 samples per group");
  return p;
}

Mlp train_model(const RunConfig& cfg, std::uint64_t seed, const Prepared& p,
                std::vector<double>* trace = nullptr) {
  std::vector<Eigen::Index> widths;
  widths.push_back(p.Xtr.cols());
  widths.insert(widths.end(), cfg.hidden_widths.begin(), cfg.hidden_widths.end());
  widths.push_back(1);
  Rng init_rng(seed ^ kInitSeedSalt);
  Mlp model(widths, init_rng);
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  std::vector<double> t = train(model, p.Xtr, p.ytr, tc);
  if (trace) *trace = std::move(t);
  return model;
}

double ks_by_mode(const RunConfig& cfg, const Vec& pred, const Vec& group) {
  std::vector<double> s1, s2;
  for (Eigen::Index i = 0; i < pred.size(); ++i)
    (group[i] == 1.0 ? s1 : s2).push_back(pred[i]);
  if (cfg.ks_mode == "binned") return ks_distance_binned(s1, s2, cfg.bins);
  return ks_distance(std::move(s1), std::move(s2));
}

json metrics_json(const RunConfig& cfg, const Mlp& model, const Prepared& p) {
  const Vec pr_tr = model.predict(p.Xtr), pr_va = model.predict(p.Xva),
            pr_te = model.predict(p.Xte);
  json m;
  m["train_mse"] = mse(pr_tr, p.ytr);
  m["val_mse"] = mse(pr_va, p.yva);
  m["test_mse"] = mse(pr_te, p.yte);
  m["test_ks"] = ks_by_mode(cfg, pr_te, p.gte);
  m["train_ks"] = ks_by_mode(cfg, pr_tr, p.gtr);
  return m;
}

std::string seed_path(const RunConfig& cfg, const std::string& stem, std::uint64_t seed,
                      const std::string& ext = ".json") {
  return cfg.out_dir + "/" + stem + "_seed" + std::to_string(seed) + ext;
}

void ensure_out_dir(const RunConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw DataError("cannot create output directory: " + cfg.out_dir);
}

// Load the trained model for this seed if a previous `train` saved one;
// otherwise train it now (and save, so later commands agree byte-for-byte).
Mlp obtain_model(const RunConfig& cfg, std::uint64_t seed, const Prepared& p,
                 const std::string& hash) {
  const std::string path = seed_path(cfg, "model", seed);
  if (std::filesystem::exists(path)) {
    log_info("loading model " + path);
    return load_model(path);
  }
  Mlp model = train_model(cfg, seed, p);
  save_model(path, model, hash, seed);
  return model;
}

json shrinkage_json(const ShrinkageSolution& s) {
  json j;
  j["gamma"] = s.gamma;
  j["constraint_active"] = s.constraint_active;
  j["objective"] = s.objective;
  j["constraint_residual"] = s.constraint_residual;
  j["sigma"] = to_std(s.sigma);
  j["k"] = to_std(s.k);
  return j;
}

json layer_report_json(const LayerAdjustReport& r) {
  json j;
  j["layer"] = r.layer + 1;  // report in W^{[l]} numbering
  j["mean_gap_before"] = r.mean_gap_before;
  j["mean_gap_after"] = r.mean_gap_after;
  j["cov_gap_before"] = r.cov_gap_before;
  j["cov_gap_after"] = r.cov_gap_after;
  j["second_moment_skipped"] = r.second_moment_skipped;
  j["c_e"] = r.c_e;
  j["c_v"] = r.c_v;
  if (!r.second_moment_skipped) j["second_moment"] = shrinkage_json(r.second_moment);
  j["first_moment"] = shrinkage_json(r.first_moment);
  return j;
}

void warn_cost(const RunConfig& cfg, const Prepared& p, const Mlp& model) {
  const Eigen::Index L = model.num_layers();
  const int layer0 = cfg.fairness.layer == -1 ? static_cast<int>(L) - 2 : cfg.fairness.layer - 1;
  if (layer0 < 0 || layer0 >= L) return;
  const double n_l = static_cast<double>(model.W[static_cast<std::size_t>(layer0)].cols());
  const double N = static_cast<double>(p.Xtr.rows());
  const double cost = N * N * n_l * n_l;
  if (cost > cfg.cost_warn_threshold)
    log_warn("layer rewrite cost estimate N^2 n^2 = " + std::to_string(cost) +
             " exceeds threshold " + std::to_string(cfg.cost_warn_threshold));
}

json postprocess_one(const RunConfig& cfg, std::uint64_t seed, const std::string& hash,
                     Mlp* out_model = nullptr) {
  const Prepared p = prepare(cfg, seed);
  Mlp model = obtain_model(cfg, seed, p, hash);
  warn_cost(cfg, p, model);

  json rep;
  rep["seed"] = seed;
  rep["config_hash"] = hash;
  rep["mode"] = refit_mode_name(cfg.fairness.mode);
  rep["before"] = metrics_json(cfg, model, p);
  const LayerAdjustReport lr = postprocess(model, p.Xtr, p.ytr, p.gtr, cfg.fairness);
  rep["after"] = metrics_json(cfg, model, p);
  rep["adjustment"] = layer_report_json(lr);
  if (out_model) *out_model = std::move(model);
  return rep;
}

}  // namespace

int cmd_train(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  const std::string hash = config_hash(cfg);
  for (const std::uint64_t seed : cfg.seeds) {
    const Prepared p = prepare(cfg, seed);
    std::vector<double> trace;
    const Mlp model = train_model(cfg, seed, p, &trace);
    save_model(seed_path(cfg, "model", seed), model, hash, seed);

    json rep;
    rep["seed"] = seed;
    rep["config_hash"] = hash;
    rep["loss_trace"] = trace;
    rep["metrics"] = metrics_json(cfg, model, p);
    rep["dropped_rows"] = p.ds.dropped_rows;
    write_report(seed_path(cfg, "train", seed), rep);
    log_info("trained seed " + std::to_string(seed));
  }
  return 0;
}

int cmd_postprocess(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  const std::string hash = config_hash(cfg);
  for (const std::uint64_t seed : cfg.seeds) {
    Mlp adjusted;
    const json rep = postprocess_one(cfg, seed, hash, &adjusted);
    save_model(seed_path(cfg, "post_model", seed), adjusted, hash, seed);
    write_report(seed_path(cfg, "postprocess", seed), rep);
  }
  return 0;
}

int cmd_baseline(const RunConfig& cfg, const std::string& method) {
  if (method != "quantile" && method != "barycenter")
    throw UsageError("baseline method must be 'quantile' or 'barycenter'");
  ensure_out_dir(cfg);
  const std::string hash = config_hash(cfg);
  for (const std::uint64_t seed : cfg.seeds) {
    const Prepared p = prepare(cfg, seed);
    const Mlp model = obtain_model(cfg, seed, p, hash);

    // Distributional objects fit on calibration (training) predictions with
    // true attributes; test-time attributes come from the predictor.
    const Vec pred_tr = model.predict(p.Xtr);
    const Vec pred_te = model.predict(p.Xte);
    const AttributePredictor ap = fit_attribute_predictor(
        p.Xtr, p.gtr, cfg.attribute_predictor, seed ^ kInitSeedSalt, cfg.attribute_epochs);
    const Vec ahat = ap.predict(p.Xte);
    double attr_acc = 0;
    for (Eigen::Index i = 0; i < ahat.size(); ++i) attr_acc += ahat[i] == p.gte[i] ? 1.0 : 0.0;
    attr_acc /= static_cast<double>(ahat.size());

    Vec fair;
    if (method == "quantile") {
      const QuantileMatcher qm = fit_quantile_matcher(pred_tr, p.gtr, cfg.quantile_single_term);
      fair = qm.apply(pred_te, ahat);
    } else {
      const BarycenterTransport bt = fit_barycenter_transport(pred_tr, p.gtr, cfg.bins);
      fair = bt.apply(pred_te, ahat);
    }

    json rep;
    rep["seed"] = seed;
    rep["config_hash"] = hash;
    rep["method"] = method;
    rep["attribute_accuracy"] = attr_acc;
    rep["before"] = {{"test_mse", mse(pred_te, p.yte)}, {"test_ks", ks_by_mode(cfg, pred_te, p.gte)}};
    rep["after"] = {{"test_mse", mse(fair, p.yte)}, {"test_ks", ks_by_mode(cfg, fair, p.gte)}};
    write_report(seed_path(cfg, "baseline_" + method, seed), rep);
  }
  return 0;
}

int cmd_evaluate(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  const std::string hash = config_hash(cfg);
  for (const std::uint64_t seed : cfg.seeds) {
    const Prepared p = prepare(cfg, seed);
    const std::string post_path = seed_path(cfg, "post_model", seed);
    std::string which = "model";
    Mlp model;
    if (std::filesystem::exists(post_path)) {
      model = load_model(post_path);
      which = "post_model";
    } else {
      model = obtain_model(cfg, seed, p, hash);
    }
    const Vec pred = model.predict(p.Xte);

    json rep;
    rep["seed"] = seed;
    rep["config_hash"] = hash;
    rep["evaluated_model"] = which;
    rep["test_mse"] = mse(pred, p.yte);
    rep["test_ks"] = ks_by_mode(cfg, pred, p.gte);

    const GroupDensities gd = density_export(pred, p.gte, cfg.export_bins);
    rep["density_edges"] = gd.edges;
    rep["density_group1"] = gd.mass1;
    rep["density_group2"] = gd.mass2;
    write_report(seed_path(cfg, "evaluate", seed), rep);

    std::ostringstream csv;
    csv << "bin_left,bin_right,group1_mass,group2_mass\n";
    csv.precision(17);
    for (std::size_t b = 0; b + 1 < gd.edges.size(); ++b)
      csv << gd.edges[b] << "," << gd.edges[b + 1] << "," << gd.mass1[b] << "," << gd.mass2[b]
          << "\n";
    write_text_atomic(seed_path(cfg, "densities", seed, ".csv"), csv.str());
  }
  return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::vector<double>& ce_grid,
              const std::vector<double>& cv_grid) {
  ensure_out_dir(cfg);
  const std::string hash = config_hash(cfg);
  const std::vector<double> ces = ce_grid.empty()
                                      ? std::vector<double>{cfg.fairness.ce_tilde}
                                      : ce_grid;
  const std::vector<double> cvs = cv_grid.empty()
                                      ? std::vector<double>{cfg.fairness.cv_tilde}
                                      : cv_grid;

  struct Cell {
    double ce, cv;
    json result;
  };
  std::vector<Cell> cells;
  for (const double ce : ces)
    for (const double cv : cvs) cells.push_back({ce, cv, {}});

  // Cells are independent; failures become error rows instead of aborting.
  const auto run_cell = [&cfg, &hash](double ce, double cv) -> json {
    json cell;
    cell["ce_tilde"] = ce;
    cell["cv_tilde"] = cv;
    try {
      std::vector<double> mses, kss;
      json per_seed = json::array();
      for (const std::uint64_t seed : cfg.seeds) {
        RunConfig c = cfg;
        c.fairness.ce_tilde = ce;
        c.fairness.cv_tilde = cv;
        const Prepared p = prepare(c, seed);
        Mlp model = train_model(c, seed, p);
        postprocess(model, p.Xtr, p.ytr, p.gtr, c.fairness);
        const Vec pred = model.predict(p.Xte);
        const double m = mse(pred, p.yte);
        const double k = ks_by_mode(c, pred, p.gte);
        mses.push_back(m);
        kss.push_back(k);
        per_seed.push_back({{"seed", seed}, {"test_mse", m}, {"test_ks", k}});
      }
      const auto mean = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
      };
      const auto stdev = [&mean](const std::vector<double>& v) {
        if (v.size() < 2) return 0.0;
        const double m = mean(v);
        double s = 0;
        for (double x : v) s += (x - m) * (x - m);
        return std::sqrt(s / static_cast<double>(v.size() - 1));
      };
      cell["mse_mean"] = mean(mses);
      cell["mse_std"] = stdev(mses);
      cell["ks_mean"] = mean(kss);
      cell["ks_std"] = stdev(kss);
      cell["per_seed"] = std::move(per_seed);
    } catch (const std::exception& e) {
      cell["error"] = e.what();
    }
    return cell;
  };

  // Parallel cells, single-threaded aggregation after the join.
  std::vector<std::future<json>> futures;
  futures.reserve(cells.size());
  for (const Cell& c : cells)
    futures.push_back(std::async(std::launch::async, run_cell, c.ce, c.cv));
  json rows = json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) rows.push_back(futures[i].get());

  json rep;
  rep["config_hash"] = hash;
  rep["seeds"] = cfg.seeds;
  rep["cells"] = rows;
  write_report(cfg.out_dir + "/sweep.json", rep);

  std::ostringstream csv;
  csv << "ce_tilde,cv_tilde,mse_mean,mse_std,ks_mean,ks_std,error\n";
  csv.precision(17);
  for (const json& r : rows) {
    csv << r["ce_tilde"].get<double>() << "," << r["cv_tilde"].get<double>() << ",";
    if (r.contains("error"))
      csv << ",,,," << "\"" << r["error"].get<std::string>() << "\"";
    else
      csv << r["mse_mean"].get<double>() << "," << r["mse_std"].get<double>() << ","
          << r["ks_mean"].get<double>() << "," << r["ks_std"].get<double>() << ",";
    csv << "\n";
  }
  write_text_atomic(cfg.out_dir + "/sweep.csv", csv.str());
  return 0;
}

}  // namespace esvd
