#include "esvd/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <Eigen/QR>

namespace esvd {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

}  // namespace

GroupedDataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV file: " + path);

  std::string header_line;
  if (!std::getline(in, header_line)) throw SchemaError("empty CSV file: " + path);
  if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();
  const std::vector<std::string> header = split_line(header_line);

  const auto column_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (trim(header[i]) == name) return static_cast<long>(i);
    throw SchemaError("missing column '" + name + "' in " + path);
  };

  std::vector<long> feat_idx;
  std::vector<bool> feat_categorical;
  for (const auto& f : schema.feature_columns) {
    feat_idx.push_back(column_index(f));
    feat_categorical.push_back(std::find(schema.categorical_features.begin(),
                                         schema.categorical_features.end(),
                                         f) != schema.categorical_features.end());
  }
  const long target_idx = column_index(schema.target_column);
  const long group_idx = column_index(schema.group_column);

  // First-seen category of each categorical feature encodes as 0, the other
  // as 1; more than two distinct values is a schema violation.
  std::vector<std::map<std::string, double>> cat_codes(feat_idx.size());

  std::vector<std::vector<double>> rows;
  std::vector<double> targets, groups;
  std::size_t dropped = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    const auto field_at = [&](long i) -> std::string {
      return i < static_cast<long>(fields.size()) ? trim(fields[static_cast<std::size_t>(i)])
                                                  : std::string();
    };

    const std::string gv = field_at(group_idx);
    double g;
    if (gv == schema.group_value1)
      g = 1.0;
    else if (gv == schema.group_value2)
      g = 2.0;
    else {
      ++dropped;
      continue;
    }

    double target;
    if (!parse_double(field_at(target_idx), target)) {
      ++dropped;
      continue;
    }

    std::vector<double> row(feat_idx.size());
    bool ok = true;
    for (std::size_t j = 0; j < feat_idx.size(); ++j) {
      const std::string v = field_at(feat_idx[j]);
      if (v.empty()) {
        ok = false;
        break;
      }
      if (feat_categorical[j]) {
        auto& codes = cat_codes[j];
        auto it = codes.find(v);
        if (it == codes.end()) {
          if (codes.size() >= 2)
            throw SchemaError("categorical feature '" + schema.feature_columns[j] +
                              "' has more than two values");
          it = codes.emplace(v, static_cast<double>(codes.size())).first;
        }
        row[j] = it->second;
      } else if (!parse_double(v, row[j])) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      ++dropped;
      continue;
    }
    rows.push_back(std::move(row));
    targets.push_back(target);
    groups.push_back(g);
  }

  GroupedDataset ds;
  ds.feature_names = schema.feature_columns;
  ds.dropped_rows = dropped;
  const Eigen::Index N = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index n = static_cast<Eigen::Index>(feat_idx.size());
  ds.X.resize(N, n);
  ds.y.resize(N);
  ds.group.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < n; ++j)
      ds.X(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    ds.y[i] = targets[static_cast<std::size_t>(i)];
    ds.group[i] = groups[static_cast<std::size_t>(i)];
  }
  const Eigen::Index n1 = (ds.group.array() == 1.0).count();
  if (n1 < 2 || N - n1 < 2)
    throw GroupSizeError("dataset needs at least 2 samples per group (got " +
                         std::to_string(n1) + " / " + std::to_string(N - n1) + ")");
  return ds;
}

SplitIndices split(std::size_t N, std::uint64_t seed) {
  if (N < 20) throw DataError("split: need at least 20 samples");
  Rng rng(seed);
  const std::vector<std::size_t> perm = rng.permutation(N);
  const std::size_t ntr = static_cast<std::size_t>(0.70 * static_cast<double>(N));
  const std::size_t nva = static_cast<std::size_t>(0.15 * static_cast<double>(N));
  SplitIndices s;
  s.seed = seed;
  s.train.assign(perm.begin(), perm.begin() + static_cast<long>(ntr));
  s.val.assign(perm.begin() + static_cast<long>(ntr), perm.begin() + static_cast<long>(ntr + nva));
  s.test.assign(perm.begin() + static_cast<long>(ntr + nva), perm.end());
  return s;
}

Normalization fit_normalization(const Mat& X, const std::vector<std::size_t>& train_idx) {
  if (train_idx.empty()) throw DataError("normalization: empty training split");
  Normalization nz;
  nz.mean = Eigen::RowVectorXd::Zero(X.cols());
  for (std::size_t i : train_idx) nz.mean += X.row(static_cast<Eigen::Index>(i));
  nz.mean /= static_cast<double>(train_idx.size());
  Eigen::RowVectorXd var = Eigen::RowVectorXd::Zero(X.cols());
  for (std::size_t i : train_idx) {
    const Eigen::RowVectorXd d = X.row(static_cast<Eigen::Index>(i)) - nz.mean;
    var += d.cwiseProduct(d);
  }
  var /= static_cast<double>(train_idx.size());
  nz.std = var.cwiseSqrt();
  for (Eigen::Index j = 0; j < nz.std.size(); ++j)
    if (nz.std[j] <= 0) nz.std[j] = 1.0;  // constant feature: just center it
  return nz;
}

Mat apply_normalization(const Mat& X, const Normalization& nz) {
  if (X.cols() != nz.mean.size()) throw ShapeError("normalization: width mismatch");
  return (X.rowwise() - nz.mean).array().rowwise() / nz.std.array();
}

void partition_by_group(const Mat& X, const Vec& group, Mat& X1, Mat& X2) {
  if (X.rows() != group.size()) throw ShapeError("partition: length mismatch");
  const Eigen::Index n1 = (group.array() == 1.0).count();
  const Eigen::Index n2 = X.rows() - n1;
  if (n1 == 0 || n2 == 0) throw GroupSizeError("partition: empty group");
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

GroupedDataset make_synthetic(const SyntheticConfig& cfg, std::uint64_t seed) {
  if (cfg.N < 20) throw DataError("synthetic: need at least 20 samples");
  if (cfg.n < 2) throw DataError("synthetic: need at least 2 features");
  Rng rng(seed);
  const Eigen::Index N = static_cast<Eigen::Index>(cfg.N);
  const Eigen::Index n = cfg.n;
  const Eigen::Index N1 = N / 2;

  // Latent coordinates: groups differ only along coordinate 0 (mean shift and
  // scale), the remaining coordinates are identically distributed.
  Mat Z(N, n);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < n; ++j) Z(i, j) = rng.normal();
  for (Eigen::Index i = N1; i < N; ++i) Z(i, 0) = cfg.scale2 * Z(i, 0) + cfg.mean_gap;

  // Random rotation hides the disparity axis from the feature basis.
  Mat G(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) G(i, j) = rng.normal();
  const Mat R = Eigen::HouseholderQR<Mat>(G).householderQ();

  // Target: dominant fair component on the group-identical coordinates plus a
  // small leak through the disparity coordinate.
  Vec v(n - 1);
  for (Eigen::Index j = 0; j < n - 1; ++j) v[j] = rng.normal();
  v.normalize();
  Vec y(N);
  for (Eigen::Index i = 0; i < N; ++i)
    y[i] = cfg.target_leak * Z(i, 0) + Z.row(i).tail(n - 1).dot(v) + cfg.noise * rng.normal();

  GroupedDataset ds;
  ds.X = Z * R.transpose();
  ds.y = y;
  ds.group.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) ds.group[i] = i < N1 ? 1.0 : 2.0;
  for (Eigen::Index j = 0; j < n; ++j) ds.feature_names.push_back("x" + std::to_string(j));

  const std::vector<std::size_t> perm = rng.permutation(static_cast<std::size_t>(N));
  Mat Xp(N, n);
  Vec yp(N), gp(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto s = static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]);
    Xp.row(i) = ds.X.row(s);
    yp[i] = ds.y[s];
    gp[i] = ds.group[s];
  }
  ds.X = std::move(Xp);
  ds.y = std::move(yp);
  ds.group = std::move(gp);
  return ds;
}

}  // namespace esvd
