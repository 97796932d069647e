#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "abode/complex.hpp"
#include "abode/geometry.hpp"

namespace abode::io {

struct Residue {
  char letter = 'A';
  int res_seq = 0;
  char icode = ' ';
  std::array<geometry::Vec3, geometry::kTracks> atoms;
};

struct Chain {
  std::string id;
  std::vector<Residue> residues;  // sorted by (res_seq, icode)
};

struct Structure {
  std::string source;
  std::vector<Chain> chains;  // in order of first appearance
  std::vector<std::string> warnings;

  const Chain* find(std::string_view id) const;
};

/// Reads N, CA and C of standard residues from ATOM/HETATM records.
/// Residues with a missing backbone atom or a nonstandard name are dropped
/// and reported in `warnings`.
Structure parse_structure(const std::filesystem::path& path);
Structure parse_structure_text(std::string_view text, std::string source = "<memory>");

/// Segment with the residues of one chain (chain ordinal 0).
Segment to_segment(const Chain& chain, int chain_ordinal = 0);

struct PdbChain {
  std::string id;
  Segment segment;
};
/// Fixed-column ATOM records for N, CA and C of every residue, then END.
void write_pdb(std::ostream& out, const std::vector<PdbChain>& chains);
void write_pdb(const std::filesystem::path& path, const std::vector<PdbChain>& chains);

}  // namespace abode::io
