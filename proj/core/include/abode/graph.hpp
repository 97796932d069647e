#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "abode/ad/tape.hpp"
#include "abode/complex.hpp"
#include "abode/geometry.hpp"

namespace abode::graph {

using geometry::Vec3;

inline constexpr std::size_t kLabelDim = 20;
inline constexpr std::size_t kStateDim = 29;
inline constexpr std::size_t kEdgeDim = 60;
inline constexpr std::size_t kRbfCount = 16;
inline constexpr double kRbfMax = 20.0;
/// Column offsets inside an edge-feature row.
inline constexpr std::size_t kEdgeDelta = 0;
inline constexpr std::size_t kEdgeSeparation = 29;
inline constexpr std::size_t kEdgeRbf = 30;
inline constexpr std::size_t kEdgeDirection = 46;
inline constexpr std::size_t kEdgeOrientation = 49;
inline constexpr std::size_t kEdgeType = 58;

inline constexpr int kInternal = 1;
inline constexpr int kExternal = 2;

/// Fixed-backbone neighbourhood size.
inline constexpr std::size_t kFixedBackboneNeighbours = 30;
/// Framework-encoder neighbourhood size.
inline constexpr std::size_t kFrameworkNeighbours = 5;

/// Seeds before the generated span and, when known, the residue right after it.
struct Anchors {
  geometry::SeedFrame seeds;
  std::optional<std::array<Vec3, geometry::kTracks>> right;
};

/// Precomputed gather/scatter lists for one edge set. Edge e runs src[e] -> dst[e];
/// dst is the receiving node.
struct EdgeIndex {
  std::size_t nodes = 0;
  ad::IndexList src;
  ad::IndexList dst;
  ad::IndexList internal;
  ad::IndexList internal_dst;
  ad::IndexList external;
  ad::IndexList external_dst;
  /// Constant separation column (E x 1) and type one-hot (E x 2).
  ad::Array separation;
  ad::Array type_onehot;
  std::size_t size() const { return src ? src->size() : 0; }
};

/// Static graph over framework residues for the conditioning encoder.
struct FrameworkGraph {
  ad::Array states;  // f x 29: one-hot label + placement features
  ad::Array ca;      // f x 3
  std::vector<std::size_t> src, dst;
  std::vector<int> position;
  std::vector<std::size_t> frame_prev, frame_next;
  EdgeIndex index;
  std::size_t size() const { return states.rows(); }
};

/// Antibody (generated) nodes come first, then antigen nodes.
struct ComplexGraph {
  std::size_t num_antibody = 0;
  std::size_t num_antigen = 0;
  std::vector<std::size_t> src;
  std::vector<std::size_t> dst;
  std::vector<int> type;
  /// Chain-local index and chain ordinal per node (antibody chain = 0).
  std::vector<int> position;
  std::vector<int> chain;

  Anchors anchors;
  bool canonical_anchors = false;

  geometry::BackboneCoords antigen_coords;
  ad::Array antigen_state;  // n x 29

  /// Fixed-backbone graphs keep their coordinates; the generated nodes' s block never moves.
  bool frozen = false;
  geometry::BackboneCoords frozen_coords;

  /// Frame neighbours as rows of the CA pool [antibody, antigen, left anchor, right anchor].
  /// A node without a neighbour points at itself, which yields an invalid frame.
  std::vector<std::size_t> frame_prev;
  std::vector<std::size_t> frame_next;

  std::optional<FrameworkGraph> framework;
  EdgeIndex index;

  std::size_t num_nodes() const { return num_antibody + num_antigen; }
  std::size_t num_edges() const { return src.size(); }
  std::size_t pool_size() const { return num_nodes() + 2; }
};

/// Graph over m generated residues and an optional antigen (empty => unconditional).
/// Without anchors the canonical seed frame is used, which is only allowed when
/// the antigen is empty.
ComplexGraph build_graph(std::size_t m, const Segment& antigen, const std::optional<Anchors>& anchors);

struct GraphOptions {
  TaskMode mode = TaskMode::Conditional;
  /// Keep antigen residues whose CA is within this distance of a flank CA.
  std::optional<double> epitope_cutoff;
  bool framework = false;
};

/// Builds the graph for a featurized sample according to its mode.
ComplexGraph build_graph(const FeaturizedComplex& sample, const GraphOptions& options);

/// Sequence-design graph over a frozen chain: every node receives edges from its
/// k nearest CA neighbours, all internal.
ComplexGraph build_fixed_backbone_graph(const Segment& chain, std::size_t k = kFixedBackboneNeighbours);

FrameworkGraph build_framework_graph(const Segment& framework, std::size_t k = kFrameworkNeighbours);

/// Anchors from the residues around the span. Returns nullopt with an empty prefix.
/// With fewer than three prefix residues the seeds are padded with the other
/// backbone atoms of the earliest prefix residue.
std::optional<Anchors> anchors_from(const Segment& prefix, const Segment& suffix);

/// Antigen residues with CA within `cutoff` of the flank CAs.
Segment epitope(const Segment& antigen, const Segment& prefix, const Segment& suffix, double cutoff);

/// Drops antigen nodes and external edges.
ComplexGraph without_antigen(const ComplexGraph& graph);
/// Relabels every edge as internal.
ComplexGraph with_internal_edges(const ComplexGraph& graph);
/// Rigid motion of every stored coordinate.
ComplexGraph transformed(const ComplexGraph& graph, const geometry::Mat3& rotation, const Vec3& translation);

/// Replaces the label block of max(1, round(fraction n)) antigen residues (0 when
/// fraction is 0) by the uniform all-zero logits. Deterministic in `seed`.
ComplexGraph mask_antigen(const ComplexGraph& graph, double fraction, std::uint64_t seed);
std::size_t masked_count(std::size_t n, double fraction);

/// Starting coordinates of the generated span: per track, linear interpolation
/// between the last seed and the right anchor.
geometry::BackboneCoords interpolated_coords(const ComplexGraph& graph);

/// z(0): zero logits and the placement features of the interpolated span
/// (fixed-backbone graphs use their frozen coordinates).
ad::Array init_state(const ComplexGraph& graph);

/// Placement features (m x 9) of `coords` seeded by `seeds`.
ad::Array placement_state(const geometry::SeedFrame& seeds, const geometry::BackboneCoords& coords);

/// Ground-truth labels and placement features of a sample's generated span.
struct Truth {
  std::vector<std::size_t> labels;
  ad::Array placement;  // m x 9
  ad::Array mask;       // m x 9
  geometry::BackboneCoords coords;
};
Truth truth_of(const FeaturizedComplex& sample, const ComplexGraph& graph);

/// Cartesian positions and frames of every node on the tape.
struct GraphGeometry {
  std::array<ad::Var, geometry::kTracks> antibody;  // m x 3 per track
  ad::Var ca_nodes;                                 // (m + n) x 3
  geometry::FrameColumns frames;                    // (m + n) rows
  ad::Array frame_valid;                            // (m + n) x 1
};

/// Reconstructs the generated span from the s block of `z_antibody` (m x 29).
GraphGeometry graph_geometry(ad::Tape& tape, const ComplexGraph& graph, ad::Var z_antibody);

/// Edge features (E x 60) for a generic node set. `z_nodes` is N x 29, `ca` N x 3.
ad::Var edge_feature_block(ad::Var z_nodes, ad::Var ca, const geometry::FrameColumns& frames,
                           const ad::Array& frame_valid, const EdgeIndex& index);

/// All node states (antibody rows from z, antigen rows static) on the tape.
ad::Var node_states(ad::Tape& tape, const ComplexGraph& graph, ad::Var z_antibody);

/// Tape form of every edge feature of the graph.
ad::Var edge_features(ad::Tape& tape, const ComplexGraph& graph, ad::Var z_antibody, const GraphGeometry& geo);

/// Plain forms: the E x 60 matrix and the row of edge i <- j.
ad::Array edge_feature_matrix(const ComplexGraph& graph, const ad::Array& z_antibody);
ad::Array edge_features(const ComplexGraph& graph, std::size_t i, std::size_t j, const ad::Array& z_antibody);

/// Rebuilds the EdgeIndex of a graph after editing src/dst/type.
void reindex(ComplexGraph& graph);
EdgeIndex make_edge_index(std::size_t nodes, const std::vector<std::size_t>& src, const std::vector<std::size_t>& dst,
                          const std::vector<int>& type, const std::vector<int>& position, const std::vector<int>& chain);

/// Indices of the k nearest points (ties by index) to each point, excluding itself.
std::vector<std::vector<std::size_t>> nearest_neighbours(std::span<const Vec3> points, std::size_t k);

}  // namespace abode::graph
