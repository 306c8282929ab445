#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "esvd/model.hpp"

namespace esvd {

// Canonical JSON: sorted keys, shortest round-trip doubles. The volatile
// timestamp lives under a separate "meta" field so reports are comparable.
std::string canonical_json(const nlohmann::json& j);

// Atomic write: temp file in the target directory, then rename.
void write_text_atomic(const std::string& path, const std::string& content);

// Report = {"meta": {"timestamp": ...}, ...body}; body fully deterministic.
void write_report(const std::string& path, nlohmann::json body);

nlohmann::json model_to_json(const Mlp& model);
Mlp model_from_json(const nlohmann::json& j);
void save_model(const std::string& path, const Mlp& model, const std::string& cfg_hash,
                std::uint64_t seed);
Mlp load_model(const std::string& path);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace esvd
