#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "abode/complex.hpp"
#include "abode/io/pdb.hpp"

namespace abode::io {

/// One design task over a structure file. CDR bounds are residue numbers in
/// file numbering, inclusive; insertion-coded residues between them count.
struct TaskSpec {
  std::string id;
  std::filesystem::path structure;
  std::string antibody_chain;
  int cdr_first = 0;
  int cdr_last = 0;
  std::vector<std::string> antigen_chains;
  std::optional<double> epitope_cutoff;
  TaskMode mode = TaskMode::Conditional;

  void validate() const;
};

/// Accepts one task object, an array of tasks, or {"tasks": [...]}. Relative
/// structure paths resolve against `base_dir`. Unknown keys are rejected.
std::vector<TaskSpec> parse_tasks(const nlohmann::json& doc, const std::filesystem::path& base_dir);
std::vector<TaskSpec> load_tasks(const std::filesystem::path& path);
nlohmann::json to_json(const TaskSpec& task);

/// Builds the design sample for `task` from parsed chains. In fixed-backbone
/// mode the whole antibody chain becomes the designed segment.
FeaturizedComplex extract_complex(const Structure& structure, const TaskSpec& task);

}  // namespace abode::io
