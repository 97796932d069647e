#pragma once

#include <string>
#include <vector>

#include "abode/geometry.hpp"

namespace abode {

/// A run of residues with sequence letters and backbone coordinates.
/// `chain` holds a chain ordinal per residue (0 for single-chain segments).
struct Segment {
  std::string sequence;
  geometry::BackboneCoords coords;
  std::vector<int> chain;
  std::vector<char> icode;

  std::size_t size() const { return sequence.size(); }
  bool empty() const { return sequence.empty(); }
  void push_back(char letter, const geometry::Vec3& n, const geometry::Vec3& ca, const geometry::Vec3& c,
                 int res_seq, int chain_ordinal = 0, char insertion = ' ');
  /// Throws GraphError when lengths of the parallel vectors disagree.
  void check() const;
};

enum class TaskMode { Unconditional, Conditional, FixedBackbone };

const char* mode_name(TaskMode mode);
/// Accepts "unconditional", "conditional", "fixed_backbone".
TaskMode parse_mode(const std::string& name);

struct Provenance {
  std::string source;
  std::string antibody_chain;
  std::vector<std::string> antigen_chains;
  int cdr_first = 0;
  int cdr_last = 0;
};

/// One design sample. For co-design the `cdr` segment is generated, `prefix`
/// and `suffix` are the antibody residues around it and `antigen` conditions it.
/// For fixed-backbone samples `cdr` holds the whole chain and the rest is empty.
struct FeaturizedComplex {
  std::string id;
  TaskMode mode = TaskMode::Conditional;
  Segment cdr;
  Segment prefix;
  Segment suffix;
  Segment antigen;
  Provenance provenance;
};

}  // namespace abode
