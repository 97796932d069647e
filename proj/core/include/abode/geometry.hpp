#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "abode/ad/array.hpp"
#include "abode/ad/tape.hpp"

namespace abode::geometry {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Backbone atom tracks, in state order.
enum class Track : std::size_t { N = 0, CA = 1, C = 2 };
inline constexpr std::size_t kTracks = 3;
/// r, alpha, gamma for each of the three tracks.
inline constexpr std::size_t kFeatureDim = 9;

/// Column of (track, kind) in a 9-wide feature row; kind 0 = r, 1 = alpha, 2 = gamma.
constexpr std::size_t feature_column(Track track, std::size_t kind) {
  return static_cast<std::size_t>(track) * 3 + kind;
}

/// Cartesian N, CA, C positions (Å) per residue, in chain order.
struct BackboneCoords {
  std::vector<std::array<Vec3, kTracks>> atoms;
  /// Residue index along the chain (file numbering or 0-based).
  std::vector<int> index;

  std::size_t size() const { return atoms.size(); }
  const Vec3& at(std::size_t residue, Track track) const { return atoms[residue][static_cast<std::size_t>(track)]; }
  std::vector<Vec3> track(Track t) const;
  void push_back(const Vec3& n, const Vec3& ca, const Vec3& c, int residue_index);
};

enum class GammaMode {
  /// Signed torsion of four consecutive track atoms.
  Dihedral,
  /// Angle between u_i and u_i x u_{i-1}; identically pi/2 on any non-degenerate chain.
  Literal,
};

/// Internal coordinates per residue: for track p, r = |x_{i+1}-x_i|, alpha the
/// angle between u_i and u_{i-1}, gamma per GammaMode. Entries that need a
/// missing neighbour are zero and flagged invalid in `mask`.
struct SpatialFeatures {
  ad::Array values;  // L x 9
  ad::Array mask;    // L x 9, 1 = valid
  std::size_t size() const { return values.rows(); }
  bool valid(std::size_t residue, std::size_t column) const { return mask(residue, column) != 0.0; }
};

SpatialFeatures spatial_features(const BackboneCoords& coords, GammaMode mode = GammaMode::Dihedral);

/// Tape form. `tracks[p]` is an L x 3 position matrix for track p; the result is
/// L x 9. Validity follows from L alone, see spatial_feature_mask.
ad::Var spatial_features(std::span<const ad::Var, kTracks> tracks, GammaMode mode);
ad::Array spatial_feature_mask(std::size_t length, GammaMode mode);

/// Placement view: row k describes how residue first+k is placed from its three
/// predecessors, i.e. (r_{k-1}, alpha_{k-1}, gamma_{k-2}) of the chain features.
struct PlacementFeatures {
  ad::Array values;  // count x 9
  ad::Array mask;
};
PlacementFeatures placement_features(const SpatialFeatures& features, std::size_t first, std::size_t count);

/// Three seed positions per track (rows = tracks N, CA, C).
struct SeedFrame {
  std::array<Vec3, kTracks> a;
  std::array<Vec3, kTracks> b;
  std::array<Vec3, kTracks> c;
};

/// Seeds from the last three residues of `coords` (requires at least three).
SeedFrame seeds_from_chain(const BackboneCoords& coords);
/// Canonical seeds near the origin, used when no flanking residues are known.
SeedFrame canonical_seeds();

/// Places residues one after another from placement features (count x 9) by
/// natural extension from the three preceding atoms of each track. Returns one
/// count x 3 matrix per track.
std::array<ad::Var, kTracks> reconstruct_cartesian(ad::Var placement, const SeedFrame& seeds);
BackboneCoords reconstruct_cartesian(const ad::Array& placement, const SeedFrame& seeds);

/// Reconstructs a whole chain from its own SpatialFeatures, seeded with its
/// first three residues.
BackboneCoords reconstruct_chain(const SpatialFeatures& features, const SeedFrame& first_three);

/// Local frame at CA of residue i: columns [b, n, b x n] with b the negative
/// bisector of (x_{i-1}-x_i, x_{i+1}-x_i) and n the plane normal. Throws
/// GeometryError at chain ends or for a collinear neighbourhood.
Mat3 orientation_frame(const BackboneCoords& coords, std::size_t i);
std::optional<Mat3> try_orientation_frame(const Vec3& prev, const Vec3& cur, const Vec3& next);

/// Frames for many residues at once on the tape. Inputs are m x 3; each output
/// column block is m x 3 (rows = residues). `valid` gets 1 for well-defined frames.
struct FrameColumns {
  ad::Var b;
  ad::Var n;
  ad::Var c;
};
FrameColumns orientation_frames(ad::Var prev, ad::Var cur, ad::Var next, ad::Array* valid);

/// Unit rows; zero rows stay zero.
ad::Var normalize_rows(ad::Var v);

/// Minimum RMSD over rigid motions, optimal rotation from the SVD of the
/// cross-covariance with the reflection fixed.
double kabsch_rmsd(std::span<const Vec3> p, std::span<const Vec3> q);

/// Optimal rotation R and translation t with R p + t ≈ q.
struct Superposition {
  Mat3 rotation;
  Vec3 translation;
  double rmsd;
};
Superposition kabsch(std::span<const Vec3> p, std::span<const Vec3> q);

/// Applies x -> R x + t to every atom.
BackboneCoords transformed(const BackboneCoords& coords, const Mat3& rotation, const Vec3& translation);

ad::Array to_array(std::span<const Vec3> points);
std::vector<Vec3> to_points(const ad::Array& rows3);

}  // namespace abode::geometry
