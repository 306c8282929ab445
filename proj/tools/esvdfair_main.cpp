#include <CLI11.hpp>

#include <charconv>
#include <iostream>
#include <string>
#include <vector>

#include "esvd/commands.hpp"
#include "esvd/errors.hpp"

namespace {

std::vector<double> parse_double_list(const std::string& s, const std::string& flag) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = std::min(s.find(',', pos), s.size());
    const std::string tok = s.substr(pos, comma - pos);
    if (tok.empty()) throw esvd::UsageError(flag + ": empty value in list '" + s + "'");
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw esvd::UsageError(flag + ": cannot parse '" + tok + "' as a number");
    }
    pos = comma + 1;
  }
  return out;
}

// "a..b" inclusive, or a single seed.
std::vector<std::uint64_t> parse_seed_range(const std::string& s) {
  const std::size_t dots = s.find("..");
  const auto parse_one = [&s](const std::string& tok) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
      throw esvd::UsageError("--seeds: cannot parse '" + tok + "' in '" + s + "'");
    return v;
  };
  if (dots == std::string::npos) return {parse_one(s)};
  const std::uint64_t a = parse_one(s.substr(0, dots));
  const std::uint64_t b = parse_one(s.substr(dots + 2));
  if (b < a) throw esvd::UsageError("--seeds: range end before start in '" + s + "'");
  if (b - a > 10000) throw esvd::UsageError("--seeds: range too large in '" + s + "'");
  std::vector<std::uint64_t> out;
  for (std::uint64_t v = a; v <= b; ++v) out.push_back(v);
  return out;
}

struct Overrides {
  std::string config_path, seeds, out, method, ks_mode, ce, cv;
  std::int64_t seed = -1;
  int layer = 0, bins = 0;
  bool has_layer = false, has_bins = false;
};

void add_common(CLI::App* sub, Overrides& ov) {
  sub->add_option("--config", ov.config_path, "JSON config file");
  sub->add_option("--seed", ov.seed, "single seed (overrides config seeds)");
  sub->add_option("--seeds", ov.seeds, "seed range a..b or single seed");
  sub->add_option("--out", ov.out, "output directory");
  sub->add_option("--layer", ov.layer, "layer to adjust (1-based; -1 = second-to-last)")
      ->trigger_on_parse()
      ->each([&ov](const std::string&) { ov.has_layer = true; });
  sub->add_option("--ce-tilde", ov.ce, "mean-budget ratio (comma list for sweep)");
  sub->add_option("--cv-tilde", ov.cv, "covariance-budget ratio (comma list for sweep)");
  sub->add_option("--ks-mode", ov.ks_mode, "exact or binned")
      ->check(CLI::IsMember({"exact", "binned"}));
  sub->add_option("--bins", ov.bins, "histogram bins")->each([&ov](const std::string&) {
    ov.has_bins = true;
  });
}

// Returns single value of a possibly-list flag; lists are only valid for sweep.
double single_value(const std::string& s, const std::string& flag) {
  const std::vector<double> v = parse_double_list(s, flag);
  if (v.size() != 1) throw esvd::UsageError(flag + ": expected one value, got a list");
  return v[0];
}

esvd::RunConfig resolve(const Overrides& ov, bool sweep, std::vector<double>& ce_grid,
                        std::vector<double>& cv_grid) {
  esvd::RunConfig cfg =
      ov.config_path.empty() ? esvd::RunConfig{} : esvd::load_config(ov.config_path);
  if (ov.seed >= 0) cfg.seeds = {static_cast<std::uint64_t>(ov.seed)};
  if (!ov.seeds.empty()) cfg.seeds = parse_seed_range(ov.seeds);
  if (!ov.out.empty()) cfg.out_dir = ov.out;
  if (ov.has_layer) cfg.fairness.layer = ov.layer;
  if (!ov.ks_mode.empty()) cfg.ks_mode = ov.ks_mode;
  if (ov.has_bins) {
    cfg.bins = ov.bins;
    cfg.export_bins = ov.bins;
  }
  if (!ov.ce.empty()) {
    if (sweep)
      ce_grid = parse_double_list(ov.ce, "--ce-tilde");
    else
      cfg.fairness.ce_tilde = single_value(ov.ce, "--ce-tilde");
  }
  if (!ov.cv.empty()) {
    if (sweep)
      cv_grid = parse_double_list(ov.cv, "--cv-tilde");
    else
      cfg.fairness.cv_tilde = single_value(ov.cv, "--cv-tilde");
  }
  esvd::validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fair regression post-processing via singular-value shrinkage"};
  app.require_subcommand(1);

  Overrides ov;
  std::string method = "quantile";
  CLI::App* train = app.add_subcommand("train", "train the regressor");
  CLI::App* post = app.add_subcommand("postprocess", "adjust a layer and refit the output");
  CLI::App* base = app.add_subcommand("baseline", "distribution-matching baseline");
  base->add_option("--method", method, "quantile or barycenter")
      ->check(CLI::IsMember({"quantile", "barycenter"}));
  CLI::App* eval = app.add_subcommand("evaluate", "metrics and density export");
  CLI::App* sweep = app.add_subcommand("sweep", "budget-ratio grid");
  for (CLI::App* sub : {train, post, base, eval, sweep}) add_common(sub, ov);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // bad usage is exit 1; --help stays 0
  }

  try {
    std::vector<double> ce_grid, cv_grid;
    const bool is_sweep = sweep->parsed();
    const esvd::RunConfig cfg = resolve(ov, is_sweep, ce_grid, cv_grid);
    if (train->parsed()) return esvd::cmd_train(cfg);
    if (post->parsed()) return esvd::cmd_postprocess(cfg);
    if (base->parsed()) return esvd::cmd_baseline(cfg, method);
    if (eval->parsed()) return esvd::cmd_evaluate(cfg);
    if (is_sweep) return esvd::cmd_sweep(cfg, ce_grid, cv_grid);
  } catch (const esvd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
