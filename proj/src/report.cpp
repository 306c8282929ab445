#include "esvd/report.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace esvd {

using nlohmann::json;

std::string canonical_json(const json& j) {
  // nlohmann::json keeps object keys sorted and emits shortest round-trip
  // doubles, so dump() is already canonical.
  return j.dump(2) + "\n";
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + tmp);
    out << content;
    if (!out.flush()) throw DataError("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw DataError("atomic rename failed: " + path);
}

void write_report(const std::string& path, json body) {
  json meta;
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  meta["timestamp"] = std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
  body["meta"] = meta;
  write_text_atomic(path, canonical_json(body));
}

json model_to_json(const Mlp& model) {
  json layers = json::array();
  for (const Mat& W : model.W) {
    json layer;
    layer["rows"] = W.rows();
    layer["cols"] = W.cols();
    json data = json::array();
    for (Eigen::Index i = 0; i < W.rows(); ++i)
      for (Eigen::Index j = 0; j < W.cols(); ++j) data.push_back(W(i, j));
    layer["data"] = std::move(data);
    layers.push_back(std::move(layer));
  }
  json j;
  j["layers"] = std::move(layers);
  return j;
}

Mlp model_from_json(const json& j) {
  Mlp model;
  for (const json& layer : j.at("layers")) {
    const Eigen::Index rows = layer.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = layer.at("cols").get<Eigen::Index>();
    const auto& data = layer.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows * cols)
      throw DataError("model file: layer data size mismatch");
    Mat W(rows, cols);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j2 = 0; j2 < cols; ++j2) W(i, j2) = data[static_cast<std::size_t>(k++)];
    model.W.push_back(std::move(W));
  }
  if (model.W.empty()) throw DataError("model file: no layers");
  return model;
}

void save_model(const std::string& path, const Mlp& model, const std::string& cfg_hash,
                std::uint64_t seed) {
  json j = model_to_json(model);
  j["config_hash"] = cfg_hash;
  j["seed"] = seed;
  write_text_atomic(path, canonical_json(j));
}

Mlp load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw DataError("model file parse error: " + std::string(e.what()));
  }
  return model_from_json(j);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace esvd
