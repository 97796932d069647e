#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "abode/complex.hpp"
#include "abode/rng.hpp"

namespace abode::synthetic {

/// Backbone with ideal bond lengths and angles and random helix- or strand-like
/// phi/psi, first N at `origin`. Sequence letters are uniform over the alphabet.
Segment random_chain(Rng& rng, std::size_t length, const geometry::Vec3& origin, int chain_ordinal = 0,
                     int first_res_seq = 1);

struct ComplexShape {
  std::size_t prefix = 6;
  std::size_t cdr = 8;
  std::size_t suffix = 4;
  std::size_t antigen = 6;
};

/// Antibody chain split into prefix / CDR / suffix plus an antigen chain placed
/// next to the CDR without clashes.
FeaturizedComplex random_complex(std::uint64_t seed, const ComplexShape& shape = {});

/// `count` complexes from consecutive derived seeds.
std::vector<FeaturizedComplex> random_complexes(std::uint64_t seed, std::size_t count, const ComplexShape& shape = {});

}  // namespace abode::synthetic
