#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "abode/alphabet.hpp"
#include "abode/error.hpp"
#include "abode/graph.hpp"
#include "abode/rng.hpp"
#include "abode/synthetic.hpp"
#include "oracles.hpp"

namespace {

using namespace abode;
using namespace abode::graph;
using ad::Array;

Segment line_segment(std::size_t n, const Vec3& start, const Vec3& step, int ordinal = 0) {
  Segment s;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 ca = start + static_cast<double>(i) * step;
    s.push_back("ACDEFGHIKLMNPQRSTVWY"[i % 20], ca + Vec3(0.5, 0.8, 0.0), ca, ca + Vec3(-0.4, 0.6, 0.7),
                static_cast<int>(i) + 1, ordinal);
  }
  return s;
}

Anchors simple_anchors(const Vec3& left, const Vec3& right) {
  Anchors a;
  for (std::size_t p = 0; p < 3; ++p) {
    a.seeds.a[p] = left + Vec3(-2.0, 1.0, 0.0);
    a.seeds.b[p] = left + Vec3(-1.0, 0.0, 0.5);
    a.seeds.c[p] = left;
  }
  a.right = std::array<Vec3, 3>{right, right, right};
  return a;
}

TEST(BuildGraph, CompleteEdgeCounts) {
  const Segment antigen = line_segment(2, {10, 0, 0}, {3.8, 0, 0});
  const ComplexGraph g = build_graph(3, antigen, simple_anchors({0, 0, 0}, {4, 0, 0}));
  int internal = 0, external = 0;
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    EXPECT_NE(g.src[e], g.dst[e]);
    EXPECT_LT(g.dst[e], 3u);  // every edge delivers into the antibody span
    if (g.type[e] == kInternal) {
      ++internal;
      EXPECT_LT(g.src[e], 3u);
    } else {
      ++external;
      EXPECT_GE(g.src[e], 3u);
    }
  }
  EXPECT_EQ(internal, 6);
  EXPECT_EQ(external, 6);
}

TEST(BuildGraph, SingleNodeUnconditional) {
  const ComplexGraph g = build_graph(1, Segment{}, std::nullopt);
  EXPECT_EQ(g.num_edges(), 0u);
  EXPECT_TRUE(g.canonical_anchors);
  EXPECT_EQ(init_state(g).rows(), 1u);
}

TEST(BuildGraph, EmptySpanAndMissingAnchors) {
  EXPECT_THROW(build_graph(0, Segment{}, std::nullopt), GraphError);
  EXPECT_THROW(build_graph(2, line_segment(2, {0, 0, 0}, {1, 0, 0}), std::nullopt), GraphError);
}

TEST(BuildGraph, AntigenRemovalLeavesAntibodyPart) {
  const FeaturizedComplex sample = synthetic::random_complex(5);
  GraphOptions unc;
  unc.mode = TaskMode::Unconditional;
  const ComplexGraph a = without_antigen(build_graph(sample, {}));
  const ComplexGraph b = build_graph(sample, unc);
  EXPECT_EQ(a.src, b.src);
  EXPECT_EQ(a.dst, b.dst);
  EXPECT_EQ(a.type, b.type);
  EXPECT_EQ(a.num_antigen, 0u);
}

TEST(EdgeFeatures, LayoutAndRanges) {
  const FeaturizedComplex sample = synthetic::random_complex(6);
  const ComplexGraph g = build_graph(sample, {});
  Array z = init_state(g);
  const Array f = edge_feature_matrix(g, z);
  ASSERT_EQ(f.rows(), g.num_edges());
  ASSERT_EQ(f.cols(), kEdgeDim);
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    EXPECT_EQ(f(e, kEdgeType) + f(e, kEdgeType + 1), 1.0);
    EXPECT_EQ(f(e, kEdgeType), g.type[e] == kInternal ? 1.0 : 0.0);
    for (std::size_t k = 0; k < kRbfCount; ++k) {
      EXPECT_GT(f(e, kEdgeRbf + k), 0.0);
      EXPECT_LE(f(e, kEdgeRbf + k), 1.0);
    }
    double dir = 0.0;
    for (std::size_t k = 0; k < 3; ++k) dir += f(e, kEdgeDirection + k) * f(e, kEdgeDirection + k);
    EXPECT_TRUE(std::abs(dir - 1.0) < 1e-12 || dir == 0.0);
    if (g.type[e] == kExternal) EXPECT_EQ(f(e, kEdgeSeparation), 0.0);
  }
  // delta block is z_j - z_i
  const std::size_t e = 0;
  const Array row = edge_features(g, g.dst[e], g.src[e], z);
  for (std::size_t c = 0; c < kEdgeDim; ++c) EXPECT_EQ(row(0, c), f(e, c));
}

TEST(EdgeFeatures, RbfPeaksAtDistance) {
  // antibody residue and antigen residue exactly 5 A apart along x
  const ComplexGraph g = build_graph(1, line_segment(1, {5, 0, 0}, {1, 0, 0}),
                                     simple_anchors({-10, 0, 0}, {10, 0, 0}));
  Array z = init_state(g);
  const Array f = edge_feature_matrix(g, z);
  ASSERT_EQ(f.rows(), 1u);
  const double spacing = kRbfMax / (kRbfCount - 1);
  for (std::size_t k = 0; k < kRbfCount; ++k) {
    const double mu = k * spacing;
    EXPECT_NEAR(f(0, kEdgeRbf + k), std::exp(-(5.0 - mu) * (5.0 - mu) / (spacing * spacing)), 1e-12);
  }
}

TEST(EdgeFeatures, SelfLoopRejected) {
  const ComplexGraph g = build_graph(synthetic::random_complex(7), {});
  EXPECT_THROW(edge_features(g, 1, 1, init_state(g)), GraphError);
}

TEST(EdgeFeatures, CoincidentPointsGiveZeroDirection) {
  // the interpolated CA of the only antibody node sits exactly on the antigen CA
  const ComplexGraph g = build_graph(1, line_segment(1, {1, 0, 0}, {1, 0, 0}), simple_anchors({0, 0, 0}, {2, 0, 0}));
  const Array f = edge_feature_matrix(g, init_state(g));
  ASSERT_EQ(f.rows(), 1u);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(f(0, kEdgeDirection + k), 0.0);
  EXPECT_EQ(f(0, kEdgeRbf), 1.0);
}

TEST(EdgeFeatures, InvariantUnderRigidMotion) {
  Rng rng(9);
  for (int k = 0; k < 10; ++k) {
    const ComplexGraph g = build_graph(synthetic::random_complex(50 + k), {});
    const ComplexGraph m = transformed(g, oracle::random_rotation(rng), oracle::random_vector(rng, 15.0));
    const Array z = init_state(g);
    const Array a = edge_feature_matrix(g, z);
    const Array b = edge_feature_matrix(m, z);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
  }
}

TEST(InitState, UniformLogitsAndInterpolation) {
  ComplexGraph g = build_graph(3, Segment{}, simple_anchors({0, 0, 0}, {4, 0, 0}));
  const Array z = init_state(g);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t c = 0; c < kLabelDim; ++c) EXPECT_EQ(z(i, c), 0.0);
  const auto coords = interpolated_coords(g);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_LT((coords.at(j, geometry::Track::CA) - Vec3(j + 1.0, 0, 0)).norm(), 1e-15);
  const ComplexGraph one = build_graph(1, Segment{}, simple_anchors({0, 0, 0}, {4, 0, 0}));
  EXPECT_LT((interpolated_coords(one).at(0, geometry::Track::CA) - Vec3(2, 0, 0)).norm(), 1e-15);
  EXPECT_EQ(init_state(g), z);
}

TEST(Mask, CountsFollowTheMinimumRule) {
  EXPECT_EQ(masked_count(5, 0.1), 1u);
  EXPECT_EQ(masked_count(20, 0.1), 2u);
  EXPECT_EQ(masked_count(5, 0.0), 0u);
  EXPECT_EQ(masked_count(4, 1.0), 4u);
  EXPECT_THROW(masked_count(4, 1.5), ConfigError);
}

TEST(Mask, ZeroesLabelBlocksOnly) {
  const Segment antigen = line_segment(5, {10, 0, 0}, {3.8, 0.3, 0});
  const ComplexGraph g = build_graph(2, antigen, simple_anchors({0, 0, 0}, {4, 0, 0}));
  const ComplexGraph m = mask_antigen(g, 0.1, 42);
  int masked = 0;
  for (std::size_t j = 0; j < 5; ++j) {
    double labels = 0.0;
    for (std::size_t c = 0; c < kLabelDim; ++c) labels += m.antigen_state(j, c);
    if (labels == 0.0) ++masked;
    for (std::size_t c = kLabelDim; c < kStateDim; ++c) EXPECT_EQ(m.antigen_state(j, c), g.antigen_state(j, c));
  }
  EXPECT_EQ(masked, 1);
  EXPECT_EQ(mask_antigen(g, 0.1, 42).antigen_state, m.antigen_state);
  EXPECT_EQ(mask_antigen(g, 0.0, 42).antigen_state, g.antigen_state);
}

TEST(Epitope, CutoffSelectsNearbyResidues) {
  const Segment prefix = line_segment(3, {-7.6, 0, 0}, {3.8, 0, 0});  // last CA at origin
  const Segment suffix = line_segment(2, {20, 0, 0}, {3.8, 0, 0});
  const Segment antigen = line_segment(4, {0, 5, 0}, {0, 3, 0});  // CA distances 5, 8, 11, 14
  EXPECT_EQ(epitope(antigen, prefix, suffix, 8.0).size(), 2u);  // boundary included
  EXPECT_EQ(epitope(antigen, prefix, suffix, 0.0).size(), 0u);
  EXPECT_EQ(epitope(antigen, prefix, suffix, 1e9).size(), 4u);
}

TEST(FixedBackbone, NeighbourSaturation) {
  Rng rng(31);
  const Segment chain = synthetic::random_chain(rng, 31, Vec3::Zero());
  const ComplexGraph g = build_fixed_backbone_graph(chain);
  std::vector<int> incoming(31, 0);
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    ++incoming[g.dst[e]];
    EXPECT_EQ(g.type[e], kInternal);
  }
  for (int c : incoming) EXPECT_EQ(c, 30);
  EXPECT_TRUE(g.frozen);
}

TEST(NearestNeighbours, TiesByIndex) {
  const std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}, {-1, 0, 0}, {0, 2, 0}};
  const auto nn = nearest_neighbours(pts, 2);
  EXPECT_EQ(nn[0], (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(nn[3].size(), 2u);
}

TEST(Framework, GraphShape) {
  Rng rng(2);
  const Segment fw = synthetic::random_chain(rng, 9, Vec3::Zero());
  const FrameworkGraph f = build_framework_graph(fw);
  EXPECT_EQ(f.size(), 9u);
  EXPECT_EQ(f.src.size(), 9u * kFrameworkNeighbours);
}

TEST(Truth, LabelsAndPlacement) {
  const FeaturizedComplex sample = synthetic::random_complex(12);
  const ComplexGraph g = build_graph(sample, {});
  const Truth t = truth_of(sample, g);
  ASSERT_EQ(t.labels.size(), sample.cdr.size());
  for (std::size_t i = 0; i < t.labels.size(); ++i) EXPECT_EQ(kAlphabet[t.labels[i]], sample.cdr.sequence[i]);
  // placing the true features from the seeds gives back the true CDR
  const auto rebuilt = geometry::reconstruct_cartesian(t.placement, g.anchors.seeds);
  for (std::size_t i = 0; i < rebuilt.size(); ++i)
    EXPECT_LT((rebuilt.at(i, geometry::Track::CA) - sample.cdr.coords.at(i, geometry::Track::CA)).norm(), 1e-9);
}

}  // namespace
