#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include <nlohmann/json.hpp>

#include "abode/complex.hpp"

namespace abode::io {

inline constexpr int kDatasetVersion = 1;

nlohmann::json to_json(const Segment& segment);
Segment segment_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FeaturizedComplex& sample);
/// Throws IoError on a version mismatch or a schema violation. Unknown keys
/// (for example precomputed cluster labels) are ignored.
FeaturizedComplex complex_from_json(const nlohmann::json& j);

/// JSON-Lines, one sample per line.
void write_dataset(std::ostream& out, const std::vector<FeaturizedComplex>& samples);
void write_dataset(const std::filesystem::path& path, const std::vector<FeaturizedComplex>& samples);
void append_dataset(const std::filesystem::path& path, const std::vector<FeaturizedComplex>& samples);
/// Errors name the offending line number.
std::vector<FeaturizedComplex> read_dataset(std::istream& in, const std::string& name = "<stream>");
std::vector<FeaturizedComplex> read_dataset(const std::filesystem::path& path);

}  // namespace abode::io
