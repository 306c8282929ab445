// Acceptance gate: ten end-to-end checks, one [PASS]/[FAIL]/[SKIP] line each.
// Usage: acceptance <path-to-cli-binary> [data-dir]
// Exit code = number of failed checks.

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "esvd/baselines.hpp"
#include "esvd/eval.hpp"
#include "esvd/pipeline.hpp"
#include "esvd/report.hpp"
#include "esvd/transforms.hpp"
#include "oracle.hpp"

using namespace esvd;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string g_cli;
fs::path g_tmp;
int g_failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << id << " " << name << ": " << detail << "\n";
  if (!pass) ++g_failures;
}

void report_skip(int id, const std::string& name, const std::string& why) {
  std::cout << "[SKIP] " << id << " " << name << ": " << why << "\n";
}

int run_cli(const std::string& args) {
  const std::string cmd = "\"" + g_cli + "\" " + args + " > " + (g_tmp / "cli.log").string() +
                          " 2>&1";
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WEXITSTATUS(rc);
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  json j;
  in >> j;
  return j;
}

Eigen::RowVectorXd random_row(Eigen::Index n, Rng& rng) {
  Eigen::RowVectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

// --- 1: the mean-gap identity ties d_e^2 exactly to the transformed spectrum.
void criterion_1() {
  Timer t;
  Rng rng(101);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.index(15));
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.index(16));
    const double eps = std::pow(10.0, rng.uniform(-8.0, 0.0));
    const auto m1 = random_row(n, rng), m2 = random_row(n, rng);
    const Mat W = oracle::gaussian(m, n, rng);

    const FirstMomentTransform tr = build_first_moment_transform(m1, m2, eps);
    const Vec sigma = thin_svd(W * tr.S).sigma;
    const double de2 = mean_gap_squared(m1, m2, W);
    const double identity = sigma.squaredNorm() - eps * W.squaredNorm();
    worst = std::max(worst, std::abs(de2 - identity) / std::max(1.0, de2));
  }
  const bool ok = worst <= 1e-8 && t.seconds() < 5.0;
  report(1, "mean-gap spectrum identity", ok,
         "worst rel err " + fmt(worst) + " (tol 1e-8), " + fmt(t.seconds()) + "s (limit 5s)");
}

// --- 2: covariance-gap bound, its equality case, and the |M| dominance lemma.
void criterion_2() {
  Timer t;
  Rng rng(202);
  double worst_bound = 0, worst_eq = 0, worst_lemma = 0;
  for (int i = 0; i < 100; ++i) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.index(7));
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.index(6));
    const Eigen::Index N1 = 20 + static_cast<Eigen::Index>(rng.index(40));
    const Eigen::Index N2 = 20 + static_cast<Eigen::Index>(rng.index(40));
    const Mat W = oracle::gaussian(m, n, rng);
    const Mat X1 = oracle::gaussian(N1, n, rng);
    const Mat X2 = (1.0 + rng.uniform()) * oracle::gaussian(N2, n, rng);

    const Mat M = build_covariance_gap(X1, X2);
    const SecondMomentTransform tr = build_second_moment_transform(M);
    const Vec sigma = thin_svd(W * tr.S).sigma;
    const double dv2 = covariance_gap_squared(X1, X2, W);
    const double cap = sigma.array().pow(4).sum();
    worst_bound = std::max(worst_bound, (dv2 - cap) / std::max(1.0, dv2));

    // Lemma: replacing M by |M| can only increase the weighted Frobenius norm.
    const SymEig e = sym_eig(M);
    const Mat absM = e.Q * e.lambda.cwiseAbs().asDiagonal() * e.Q.transpose();
    const double lhs = (W * M * W.transpose()).squaredNorm();
    const double rhs = (W * absM * W.transpose()).squaredNorm();
    worst_lemma = std::max(worst_lemma, (lhs - rhs) / std::max(1.0, rhs));

    // Equality case: constant rows in group 2 make its covariance vanish, so
    // the gap matrix is PSD and the bound is tight.
    const Mat X2c = Eigen::VectorXd::Ones(N2) * random_row(n, rng);
    const Mat Mp = build_covariance_gap(X1, X2c);
    const SecondMomentTransform trp = build_second_moment_transform(Mp);
    const Vec sp = thin_svd(W * trp.S).sigma;
    const double dv2p = covariance_gap_squared(X1, X2c, W);
    const double capp = sp.array().pow(4).sum();
    worst_eq = std::max(worst_eq, std::abs(dv2p - capp) / dv2p);
  }
  const bool ok = worst_bound <= 1e-9 && worst_eq <= 1e-8 && worst_lemma <= 1e-9 &&
                  t.seconds() < 10.0;
  report(2, "covariance-gap bound and equality", ok,
         "bound excess " + fmt(worst_bound) + ", equality rel err " + fmt(worst_eq) +
             " (tol 1e-8), lemma excess " + fmt(worst_lemma) + ", " + fmt(t.seconds()) +
             "s (limit 10s)");
}

// --- 3: both shrinkage solvers against an independent projected-gradient solver.
void criterion_3() {
  Timer t;
  Rng rng(303);
  double worst_obj = 0, worst_kkt = 0, worst_con = 0;
  for (const int p : {2, 4}) {
    for (int i = 0; i < 20; ++i) {
      const Eigen::Index r = 2 + static_cast<Eigen::Index>(rng.index(5));
      Vec sigma(r), k(r);
      for (Eigen::Index q = 0; q < r; ++q) {
        sigma[q] = std::pow(10.0, rng.uniform(-1.0, 1.0));
        k[q] = std::pow(10.0, rng.uniform(-2.0, 2.0));
      }
      const double total = p == 2 ? sigma.squaredNorm() : sigma.array().pow(4).sum();
      const double c = total * rng.uniform(0.05, 0.8);

      const ShrinkageSolution sol =
          p == 2 ? solve_quadratic_budget(sigma, k, c) : solve_quartic_budget(sigma, k, c);
      const Vec ref = oracle::shrinkage_reference(sigma, k, c, p);

      const double obj = oracle::objective(sigma, k, sol.sigma);
      const double obj_ref = oracle::objective(sigma, k, ref);
      worst_obj = std::max(worst_obj, std::abs(obj - obj_ref) / std::max(1.0, obj_ref));

      const double scale = std::max(1.0, (2.0 * k.array() * sigma.array()).maxCoeff());
      for (Eigen::Index q = 0; q < r; ++q) {
        const double grad_pen = p == 2 ? 2.0 * sol.gamma * sol.sigma[q]
                                       : 4.0 * sol.gamma * std::pow(sol.sigma[q], 3);
        const double st = 2.0 * k[q] * (sol.sigma[q] - sigma[q]) + grad_pen;
        worst_kkt = std::max(worst_kkt, std::abs(st) / scale);
      }
      const double achieved =
          p == 2 ? sol.sigma.squaredNorm() : sol.sigma.array().pow(4).sum();
      worst_con = std::max(worst_con, std::abs(achieved - c) / c);
    }
  }
  const bool ok =
      worst_obj <= 1e-6 && worst_kkt <= 1e-9 && worst_con <= 1e-8 && t.seconds() < 60.0;
  report(3, "shrinkage solvers vs convex oracle", ok,
         "objective rel gap " + fmt(worst_obj) + " (tol 1e-6), KKT " + fmt(worst_kkt) +
             " (tol 1e-9), constraint " + fmt(worst_con) + ", " + fmt(t.seconds()) +
             "s (limit 60s)");
}

// --- 4: the stationarity cubic's closed form against bisection.
void criterion_4() {
  Timer t;
  Rng rng(404);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const double s = std::pow(10.0, rng.uniform(-3.0, 1.0));
    const double k = std::pow(10.0, rng.uniform(-3.0, 3.0));
    const double g = std::pow(10.0, rng.uniform(-3.0, 3.0));
    worst = std::max(worst,
                     std::abs(cubic_root_closed_form(s, k, g) - cubic_root_bisect(s, k, g)));
  }
  report(4, "cubic closed form vs bisection", worst <= 1e-9,
         "worst |diff| " + fmt(worst) + " (tol 1e-9) over 1000 triples, " + fmt(t.seconds()) +
             "s");
}

// --- 5: full post-processing on the synthetic benchmark through the CLI.
void criterion_5() {
  Timer t;
  const fs::path out = g_tmp / "c5";
  double de_red = 0, dv_red = 0, ks_red = 0;
  bool ran = true;
  for (int seed = 0; seed < 5; ++seed) {
    const int rc = run_cli("postprocess --seed " + std::to_string(seed) + " --ce-tilde 50 "
                           "--cv-tilde 150 --out " + out.string());
    if (rc != 0) {
      ran = false;
      break;
    }
    const json r = read_json(out / ("postprocess_seed" + std::to_string(seed) + ".json"));
    const json& adj = r["adjustment"];
    de_red += 1.0 - adj["mean_gap_after"].get<double>() / adj["mean_gap_before"].get<double>();
    dv_red += 1.0 - adj["cov_gap_after"].get<double>() / adj["cov_gap_before"].get<double>();
    ks_red += 1.0 - r["after"]["test_ks"].get<double>() / r["before"]["test_ks"].get<double>();
  }
  de_red /= 5;
  dv_red /= 5;
  ks_red /= 5;
  const bool ok = ran && de_red >= 0.90 && dv_red >= 0.90 && ks_red >= 0.50 &&
                  t.seconds() < 120.0;
  report(5, "synthetic end-to-end moment matching", ok,
         std::string(ran ? "" : "CLI run failed; ") + "mean reductions over 5 seeds: d_e^2 " +
             fmt(de_red * 100) + "% (need 90%), d_v^2 " + fmt(dv_red * 100) +
             "% (need 90%), test KS " + fmt(ks_red * 100) + "% (need 50%), " +
             fmt(t.seconds()) + "s (limit 120s)");
}

// --- 6: tabular benchmark reproduction, skipped visibly when the CSV is absent.
void criterion_6(const std::string& data_dir) {
  const fs::path csv = fs::path(data_dir) / "law_school.csv";
  if (!fs::exists(csv)) {
    report_skip(6, "tabular benchmark reproduction",
                "dataset not found at " + csv.string() +
                    " -- place the public Law School Success CSV there to enable this check");
    return;
  }
  Timer t;
  const fs::path out = g_tmp / "c6";
  const fs::path cfg_path = g_tmp / "law.json";
  {
    json cfg;
    cfg["dataset"] = "csv";
    cfg["csv_path"] = csv.string();
    cfg["schema"]["features"] = {"dnn_bar_pass_prediction", "gender", "lsat", "pass_bar"};
    cfg["schema"]["target"] = "ugpa";
    cfg["schema"]["group"] = "race";
    cfg["schema"]["group_values"] = {"White", "Black"};
    cfg["schema"]["categorical"] = {"gender"};
    cfg["fairness"] = {{"ce_tilde", 15.0}, {"cv_tilde", 150.0}};
    std::ofstream(cfg_path) << cfg.dump();
  }
  double pre_ks = 0, pre_mse = 0, post_ks = 0, post_mse = 0;
  bool ran = true;
  for (int seed = 0; seed < 10 && ran; ++seed) {
    const int rc = run_cli("postprocess --config " + cfg_path.string() + " --seed " +
                           std::to_string(seed) + " --out " + out.string());
    if (rc != 0) {
      ran = false;
      break;
    }
    const json r = read_json(out / ("postprocess_seed" + std::to_string(seed) + ".json"));
    pre_ks += r["before"]["test_ks"].get<double>() / 10;
    pre_mse += r["before"]["test_mse"].get<double>() / 10;
    post_ks += r["after"]["test_ks"].get<double>() / 10;
    post_mse += r["after"]["test_mse"].get<double>() / 10;
  }
  const bool ok = ran && post_ks <= 0.30 && post_mse <= 0.11 && pre_ks >= 0.30 &&
                  pre_mse <= 0.07 && t.seconds() < 900.0;
  report(6, "tabular benchmark reproduction", ok,
         std::string(ran ? "" : "CLI run failed; ") + "10-seed means: adjusted KS " +
             fmt(post_ks) + " (need <=0.30) MSE " + fmt(post_mse) +
             " (need <=0.11); unadjusted KS " + fmt(pre_ks) + " (need >=0.30) MSE " +
             fmt(pre_mse) + " (need <=0.07), " + fmt(t.seconds()) + "s (limit 900s)");
}

// One budget-ratio grid: KS means must fall and MSE means must rise with the
// ratio, allowing one adjacent inversion within a standard deviation.
bool check_grid(const json& cells, std::string& detail) {
  std::vector<double> ks, ks_sd, ms, ms_sd;
  for (const json& c : cells) {
    if (c.contains("error")) {
      detail += " cell error: " + c["error"].get<std::string>();
      return false;
    }
    ks.push_back(c["ks_mean"].get<double>());
    ks_sd.push_back(c["ks_std"].get<double>());
    ms.push_back(c["mse_mean"].get<double>());
    ms_sd.push_back(c["mse_std"].get<double>());
  }
  int bad = 0;
  for (std::size_t i = 0; i + 1 < ks.size(); ++i) {
    if (ks[i + 1] > ks[i] && ks[i + 1] - ks[i] > std::max(ks_sd[i], ks_sd[i + 1])) return false;
    if (ks[i + 1] > ks[i]) ++bad;
    if (ms[i + 1] < ms[i] && ms[i] - ms[i + 1] > std::max(ms_sd[i], ms_sd[i + 1])) return false;
    if (ms[i + 1] < ms[i]) ++bad;
  }
  std::ostringstream os;
  os.precision(3);
  os << " ks [";
  for (double v : ks) os << v << " ";
  os << "] mse [";
  for (double v : ms) os << v << " ";
  os << "] inversions " << bad;
  detail += os.str();
  return bad <= 1;
}

// --- 7: budget-ratio sweeps move fairness and accuracy monotonically.
void criterion_7(const std::string& data_dir) {
  Timer t;
  const bool have_csv = fs::exists(fs::path(data_dir) / "law_school.csv");
  std::string base = "sweep --seeds 0..2 ";
  if (have_csv) base += "--config " + (g_tmp / "law.json").string() + " ";

  std::string detail = have_csv ? "tabular data;" : "synthetic benchmark;";
  bool ok = true;
  const fs::path out_v = g_tmp / "c7v";
  if (run_cli(base + "--ce-tilde 15 --cv-tilde 5,10,50,100,150 --out " + out_v.string()) != 0)
    ok = false;
  else {
    detail += " covariance grid:";
    ok &= check_grid(read_json(out_v / "sweep.json")["cells"], detail);
  }
  const fs::path out_e = g_tmp / "c7e";
  if (ok && run_cli(base + "--ce-tilde 1.5,2,5,15,50 --cv-tilde 150 --out " + out_e.string()) != 0)
    ok = false;
  else if (ok) {
    detail += " | mean grid:";
    ok &= check_grid(read_json(out_e / "sweep.json")["cells"], detail);
  }
  report(7, "budget sweep monotonicity", ok, detail + ", " + fmt(t.seconds()) + "s");
}

// --- 8: distribution-matching baselines reach their discretization floors.
void criterion_8() {
  Timer t;
  Rng rng(808);
  const Eigen::Index N1 = 700, N2 = 500;
  Vec pred(N1 + N2), group(N1 + N2);
  for (Eigen::Index i = 0; i < N1; ++i) {
    pred[i] = rng.normal();
    group[i] = 1.0;
  }
  for (Eigen::Index i = 0; i < N2; ++i) {
    pred[N1 + i] = 1.4 * rng.normal() + 1.8;
    group[N1 + i] = 2.0;
  }
  const auto split_groups = [&](const Vec& v, std::vector<double>& a, std::vector<double>& b) {
    a.clear();
    b.clear();
    for (Eigen::Index i = 0; i < v.size(); ++i) (group[i] == 1.0 ? a : b).push_back(v[i]);
  };

  const QuantileMatcher qm = fit_quantile_matcher(pred, group, false);
  std::vector<double> q1, q2;
  split_groups(qm.apply(pred, group), q1, q2);
  const double ks_q = ks_distance(q1, q2);
  const double tol_q = 2.0 / static_cast<double>(std::min(N1, N2)) + 1e-9;

  const int B = 36;
  const BarycenterTransport bt = fit_barycenter_transport(pred, group, B);
  std::vector<double> b1, b2;
  split_groups(bt.apply(pred, group), b1, b2);
  const double ks_b = ks_distance_binned(b1, b2, B);
  // Mass-rounding slack: binned transport cannot resolve finer than the
  // largest single-bin calibration mass of either group.
  std::vector<double> r1, r2;
  split_groups(pred, r1, r2);
  double max_bin_mass = 0;
  {
    const double lo = pred.minCoeff(), hi = pred.maxCoeff();
    std::vector<double> h1(B, 0.0), h2(B, 0.0);
    for (double v : r1) h1[std::min<int>(static_cast<int>((v - lo) / (hi - lo) * B), B - 1)] +=
        1.0 / static_cast<double>(r1.size());
    for (double v : r2) h2[std::min<int>(static_cast<int>((v - lo) / (hi - lo) * B), B - 1)] +=
        1.0 / static_cast<double>(r2.size());
    for (int b = 0; b < B; ++b) max_bin_mass = std::max({max_bin_mass, h1[b], h2[b]});
  }
  const double tol_b = 1.0 / B + max_bin_mass + 1e-9;

  const bool ok = ks_q <= tol_q && ks_b <= tol_b;
  report(8, "baseline calibration floors", ok,
         "quantile-matched KS " + fmt(ks_q) + " (tol " + fmt(tol_q) + "), barycenter binned KS " +
             fmt(ks_b) + " (tol " + fmt(tol_b) + "), " + fmt(t.seconds()) + "s");
}

// --- 9: byte-identical reports for identical command, config, and seed.
void criterion_9() {
  Timer t;
  const fs::path cfg_path = g_tmp / "tiny.json";
  {
    json cfg;
    cfg["dataset"] = "synthetic";
    cfg["synthetic"] = {{"N", 120}, {"n", 4}};
    cfg["hidden_widths"] = {16, 16};
    cfg["train"] = {{"epochs", 2}};
    cfg["fairness"] = {{"fine_tune_epochs", 5}};
    cfg["attribute_epochs"] = 50;
    cfg["seeds"] = {0};
    std::ofstream(cfg_path) << cfg.dump();
  }
  const std::vector<std::string> commands = {"train", "postprocess", "baseline --method quantile",
                                             "baseline --method barycenter", "evaluate",
                                             "sweep --ce-tilde 5 --cv-tilde 10"};
  bool ok = true;
  std::string detail;
  int compared = 0;
  for (const fs::path dir : {g_tmp / "c9a", g_tmp / "c9b"})
    for (const std::string& cmd : commands)
      if (run_cli(cmd + " --config " + cfg_path.string() + " --out " + dir.string()) != 0) {
        ok = false;
        detail = "command failed: " + cmd;
      }
  if (ok)
    for (const auto& entry : fs::directory_iterator(g_tmp / "c9a")) {
      const fs::path other = g_tmp / "c9b" / entry.path().filename();
      if (!fs::exists(other)) {
        ok = false;
        detail = "missing artifact " + entry.path().filename().string();
        break;
      }
      if (entry.path().extension() == ".json") {
        json a = read_json(entry.path()), b = read_json(other);
        a.erase("meta");
        b.erase("meta");
        if (canonical_json(a) != canonical_json(b)) {
          ok = false;
          detail = "reports differ: " + entry.path().filename().string();
          break;
        }
      } else {
        std::ifstream fa(entry.path()), fb(other);
        const std::string sa((std::istreambuf_iterator<char>(fa)), {});
        const std::string sb((std::istreambuf_iterator<char>(fb)), {});
        if (sa != sb) {
          ok = false;
          detail = "artifacts differ: " + entry.path().filename().string();
          break;
        }
      }
      ++compared;
    }
  if (ok) detail = std::to_string(compared) + " artifacts byte-identical across reruns";
  report(9, "deterministic reports", ok, detail + ", " + fmt(t.seconds()) + "s");
}

// --- 10: analytical gradients against central finite differences.
void criterion_10() {
  Timer t;
  Rng rng(1010);
  Rng init(42);
  Mlp model({6, 8, 7, 1}, init);
  const Mat X = oracle::gaussian(40, 6, rng);
  Vec y(40);
  for (int i = 0; i < 40; ++i) y[i] = rng.normal();

  const std::vector<Mat> grads = mse_gradients(model, X, y);
  const auto loss = [&](const Mlp& m) {
    return (m.predict(X) - y).squaredNorm() / static_cast<double>(X.rows());
  };
  const double h = 1e-6;
  double worst = 0;
  for (int d = 0; d < 50; ++d) {
    const std::size_t l = rng.index(model.W.size());
    const Eigen::Index i = static_cast<Eigen::Index>(rng.index(model.W[l].rows()));
    const Eigen::Index j = static_cast<Eigen::Index>(rng.index(model.W[l].cols()));
    Mlp mp = model, mm = model;
    mp.W[l](i, j) += h;
    mm.W[l](i, j) -= h;
    const double fd = (loss(mp) - loss(mm)) / (2 * h);
    const double an = grads[l](i, j);
    worst = std::max(worst, std::abs(fd - an) / std::max(1e-8, std::abs(fd) + std::abs(an)));
  }
  report(10, "gradient finite-difference check", worst <= 1e-5,
         "worst rel err " + fmt(worst) + " (tol 1e-5) over 50 directions, " + fmt(t.seconds()) +
             "s");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <cli-binary> [data-dir]\n";
    return 64;
  }
  g_cli = argv[1];
  const std::string data_dir = argc > 2 ? argv[2] : "data";
  g_tmp = fs::temp_directory_path() / "esvd_acceptance";
  fs::remove_all(g_tmp);
  fs::create_directories(g_tmp);

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6(data_dir);
  criterion_7(data_dir);
  criterion_8();
  criterion_9();
  criterion_10();

  std::cout << (g_failures == 0 ? "ALL CHECKS PASSED" : std::to_string(g_failures) + " CHECK(S) FAILED")
            << "\n";
  return g_failures;
}
