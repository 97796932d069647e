#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "abode/model.hpp"

namespace abode::io {

inline constexpr char kModelMagic[] = "ABODE1";

struct ModelFile {
  model::ModelParams params;
  std::uint64_t seed = 0;
  /// Free-form settings stored next to the model (training config and so on).
  nlohmann::json extra = nlohmann::json::object();
};

nlohmann::json to_json(const model::ModelConfig& config);
model::ModelConfig model_config_from_json(const nlohmann::json& j);

/// "ABODE1", 8-byte little-endian header length, JSON header, then every
/// tensor as little-endian 64-bit reals in header order.
std::string encode_model(const ModelFile& file);
ModelFile decode_model(const std::string& bytes);

void save_model(const std::filesystem::path& path, const ModelFile& file);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace abode::io
