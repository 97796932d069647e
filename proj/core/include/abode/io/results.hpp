#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "abode/metrics.hpp"
#include "abode/train.hpp"

namespace abode::io {

/// A design tagged with the id of the sample it was generated for.
struct NamedDesign {
  std::string id;
  metrics::DesignResult design;
};

nlohmann::json to_json(const NamedDesign& design);
NamedDesign design_from_json(const nlohmann::json& j);
/// JSON-Lines, one design per line.
void write_designs(const std::filesystem::path& path, const std::vector<NamedDesign>& designs);
std::vector<NamedDesign> read_designs(const std::filesystem::path& path);

nlohmann::json to_json(const metrics::EvalReport& report);
/// Per-epoch means; wall-clock time is left out so reruns compare byte for byte.
nlohmann::json to_json(const train::TrainHistory& history);

/// JSON text with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace abode::io
