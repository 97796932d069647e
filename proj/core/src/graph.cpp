#include "abode/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "abode/alphabet.hpp"
#include "abode/error.hpp"
#include "abode/rng.hpp"

namespace abode::graph {

using ad::Array;
using ad::Tape;
using ad::Var;
using geometry::BackboneCoords;
using geometry::kTracks;

namespace {

constexpr double kRbfSpacing = kRbfMax / static_cast<double>(kRbfCount - 1);
constexpr double kStepLength = 3.8;

// Placement features of each chain run of a segment, rows aligned with residues.
Array segment_placement(const Segment& seg) {
  const std::size_t n = seg.size();
  Array out(n, geometry::kFeatureDim);
  std::size_t begin = 0;
  while (begin < n) {
    std::size_t end = begin + 1;
    while (end < n && seg.chain[end] == seg.chain[begin]) ++end;
    if (end - begin >= 2) {
      BackboneCoords run;
      for (std::size_t i = begin; i < end; ++i) run.atoms.push_back(seg.coords.atoms[i]), run.index.push_back(0);
      const auto feats = geometry::spatial_features(run);
      const auto placed = geometry::placement_features(feats, 0, end - begin);
      for (std::size_t i = begin; i < end; ++i)
        for (std::size_t c = 0; c < geometry::kFeatureDim; ++c) out(i, c) = placed.values(i - begin, c);
    }
    begin = end;
  }
  return out;
}

// One-hot labels followed by placement features.
Array static_states(const Segment& seg) {
  const Array placed = segment_placement(seg);
  Array out(seg.size(), kStateDim);
  for (std::size_t i = 0; i < seg.size(); ++i) {
    out(i, checked_residue_index(seg.sequence[i])) = 1.0;
    for (std::size_t c = 0; c < geometry::kFeatureDim; ++c) out(i, kLabelDim + c) = placed(i, c);
  }
  return out;
}

std::vector<int> chain_positions(const Segment& seg) {
  std::vector<int> pos(seg.size());
  int k = 0;
  for (std::size_t i = 0; i < seg.size(); ++i) {
    if (i > 0 && seg.chain[i] != seg.chain[i - 1]) k = 0;
    pos[i] = k++;
  }
  return pos;
}

Array ca_rows(const BackboneCoords& coords) {
  Array out(coords.size(), 3);
  for (std::size_t i = 0; i < coords.size(); ++i)
    for (std::size_t d = 0; d < 3; ++d) out(i, d) = coords.at(i, geometry::Track::CA)[d];
  return out;
}

Vec3 rotate(const geometry::Mat3& r, const Vec3& t, const Vec3& x) { return r * x + t; }

void check_edge_lists(const ComplexGraph& g) {
  if (g.src.size() != g.dst.size() || g.src.size() != g.type.size()) throw GraphError("edge lists disagree in length");
}

}  // namespace

EdgeIndex make_edge_index(std::size_t nodes, const std::vector<std::size_t>& src, const std::vector<std::size_t>& dst,
                          const std::vector<int>& type, const std::vector<int>& position, const std::vector<int>& chain) {
  const std::size_t e = src.size();
  EdgeIndex idx;
  idx.nodes = nodes;
  std::vector<std::size_t> internal, internal_dst, external, external_dst;
  idx.separation = Array(e, 1);
  idx.type_onehot = Array(e, 2);
  for (std::size_t k = 0; k < e; ++k) {
    if (src[k] >= nodes || dst[k] >= nodes) throw GraphError("edge endpoint out of range");
    if (src[k] == dst[k]) throw GraphError("self-loop at node " + std::to_string(src[k]));
    if (type[k] == kInternal) {
      internal.push_back(k);
      internal_dst.push_back(dst[k]);
      idx.type_onehot(k, 0) = 1.0;
    } else if (type[k] == kExternal) {
      external.push_back(k);
      external_dst.push_back(dst[k]);
      idx.type_onehot(k, 1) = 1.0;
    } else {
      throw GraphError("edge type must be 1 or 2, got " + std::to_string(type[k]));
    }
    if (chain[src[k]] == chain[dst[k]]) idx.separation(k, 0) = (position[dst[k]] - position[src[k]]) / 100.0;
  }
  idx.src = ad::make_index(src);
  idx.dst = ad::make_index(dst);
  idx.internal = ad::make_index(std::move(internal));
  idx.internal_dst = ad::make_index(std::move(internal_dst));
  idx.external = ad::make_index(std::move(external));
  idx.external_dst = ad::make_index(std::move(external_dst));
  return idx;
}

void reindex(ComplexGraph& graph) {
  check_edge_lists(graph);
  graph.index = make_edge_index(graph.num_nodes(), graph.src, graph.dst, graph.type, graph.position, graph.chain);
}

std::vector<std::vector<std::size_t>> nearest_neighbours(std::span<const Vec3> points, std::size_t k) {
  const std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> out(n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    order.erase(order.begin() + static_cast<std::ptrdiff_t>(i));
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return (points[a] - points[i]).squaredNorm() < (points[b] - points[i]).squaredNorm();
    });
    order.resize(std::min(k, order.size()));
    out[i] = order;
    order.resize(n);
  }
  return out;
}

std::optional<Anchors> anchors_from(const Segment& prefix, const Segment& suffix) {
  if (prefix.empty()) return std::nullopt;
  const std::size_t len = prefix.size();
  const std::size_t first = len >= 3 ? len - 3 : 0;
  const auto& earliest = prefix.coords.atoms[first];
  Anchors a;
  for (std::size_t p = 0; p < kTracks; ++p) {
    std::vector<Vec3> pts;
    for (std::size_t i = first; i < len; ++i) pts.push_back(prefix.coords.atoms[i][p]);
    if (pts.size() < 3) pts.insert(pts.begin(), earliest[(p + 2) % kTracks]);
    if (pts.size() < 3) pts.insert(pts.begin(), earliest[(p + 1) % kTracks]);
    a.seeds.a[p] = pts[0];
    a.seeds.b[p] = pts[1];
    a.seeds.c[p] = pts[2];
  }
  if (!suffix.empty()) a.right = suffix.coords.atoms[0];
  return a;
}

Segment epitope(const Segment& antigen, const Segment& prefix, const Segment& suffix, double cutoff) {
  std::vector<Vec3> flanks;
  if (!prefix.empty()) flanks.push_back(prefix.coords.at(prefix.size() - 1, geometry::Track::CA));
  if (!suffix.empty()) flanks.push_back(suffix.coords.at(0, geometry::Track::CA));
  Segment out;
  for (std::size_t i = 0; i < antigen.size(); ++i) {
    const Vec3& ca = antigen.coords.at(i, geometry::Track::CA);
    bool keep = false;
    for (const Vec3& f : flanks) keep = keep || (ca - f).norm() <= cutoff;
    if (!keep) continue;
    const auto& at = antigen.coords.atoms[i];
    out.push_back(antigen.sequence[i], at[0], at[1], at[2], antigen.coords.index[i], antigen.chain[i],
                  antigen.icode[i]);
  }
  return out;
}

ComplexGraph build_graph(std::size_t m, const Segment& antigen, const std::optional<Anchors>& anchors) {
  if (m == 0) throw GraphError("antibody span is empty");
  antigen.check();
  const std::size_t n = antigen.size();
  if (!anchors && n > 0) throw GraphError("conditional graph needs flank anchors");

  ComplexGraph g;
  g.num_antibody = m;
  g.num_antigen = n;
  if (anchors) {
    g.anchors = *anchors;
  } else {
    g.anchors.seeds = geometry::canonical_seeds();
    g.canonical_anchors = true;
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      g.src.push_back(j);
      g.dst.push_back(i);
      g.type.push_back(kInternal);
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      g.src.push_back(m + j);
      g.dst.push_back(i);
      g.type.push_back(kExternal);
    }
  }
  g.position.resize(m + n);
  g.chain.resize(m + n);
  for (std::size_t i = 0; i < m; ++i) g.position[i] = static_cast<int>(i);
  const auto antigen_pos = chain_positions(antigen);
  for (std::size_t j = 0; j < n; ++j) {
    g.position[m + j] = antigen_pos[j];
    g.chain[m + j] = antigen.chain[j] + 1;
  }

  g.antigen_coords = antigen.coords;
  g.antigen_state = n > 0 ? static_states(antigen) : Array(0, kStateDim);

  const std::size_t left = m + n;
  const std::size_t right = m + n + 1;
  g.frame_prev.resize(m + n);
  g.frame_next.resize(m + n);
  for (std::size_t i = 0; i < m; ++i) {
    g.frame_prev[i] = i == 0 ? left : i - 1;
    g.frame_next[i] = i + 1 < m ? i + 1 : (g.anchors.right ? right : i);
  }
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t node = m + j;
    const bool has_prev = j > 0 && antigen.chain[j - 1] == antigen.chain[j];
    const bool has_next = j + 1 < n && antigen.chain[j + 1] == antigen.chain[j];
    g.frame_prev[node] = has_prev ? node - 1 : node;
    g.frame_next[node] = has_next ? node + 1 : node;
  }
  reindex(g);
  return g;
}

ComplexGraph build_fixed_backbone_graph(const Segment& chain, std::size_t k) {
  chain.check();
  const std::size_t m = chain.size();
  if (m < 2) throw GeometryError("fixed-backbone design needs at least 2 residues, got " + std::to_string(m));
  ComplexGraph g;
  g.num_antibody = m;
  g.frozen = true;
  g.frozen_coords = chain.coords;
  g.anchors.seeds = geometry::canonical_seeds();
  g.canonical_anchors = true;
  g.antigen_state = Array(0, kStateDim);
  const auto ca = chain.coords.track(geometry::Track::CA);
  const auto nbrs = nearest_neighbours(ca, k);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j : nbrs[i]) {
      g.src.push_back(j);
      g.dst.push_back(i);
      g.type.push_back(kInternal);
    }
  }
  g.position = chain_positions(chain);
  g.chain = chain.chain;
  g.frame_prev.resize(m);
  g.frame_next.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    g.frame_prev[i] = i > 0 && chain.chain[i - 1] == chain.chain[i] ? i - 1 : i;
    g.frame_next[i] = i + 1 < m && chain.chain[i + 1] == chain.chain[i] ? i + 1 : i;
  }
  reindex(g);
  return g;
}

FrameworkGraph build_framework_graph(const Segment& framework, std::size_t k) {
  framework.check();
  FrameworkGraph fw;
  const std::size_t f = framework.size();
  fw.states = static_states(framework);
  fw.ca = ca_rows(framework.coords);
  fw.position = chain_positions(framework);
  const auto ca = framework.coords.track(geometry::Track::CA);
  const auto nbrs = nearest_neighbours(ca, k);
  std::vector<int> type;
  for (std::size_t i = 0; i < f; ++i) {
    for (std::size_t j : nbrs[i]) {
      fw.src.push_back(j);
      fw.dst.push_back(i);
      type.push_back(kInternal);
    }
  }
  fw.frame_prev.resize(f);
  fw.frame_next.resize(f);
  for (std::size_t i = 0; i < f; ++i) {
    fw.frame_prev[i] = i > 0 && framework.chain[i - 1] == framework.chain[i] ? i - 1 : i;
    fw.frame_next[i] = i + 1 < f && framework.chain[i + 1] == framework.chain[i] ? i + 1 : i;
  }
  fw.index = make_edge_index(f, fw.src, fw.dst, type, fw.position, framework.chain);
  return fw;
}

ComplexGraph build_graph(const FeaturizedComplex& sample, const GraphOptions& options) {
  if (options.mode == TaskMode::FixedBackbone) return build_fixed_backbone_graph(sample.cdr);
  const auto anchors = anchors_from(sample.prefix, sample.suffix);
  Segment antigen;
  if (options.mode == TaskMode::Conditional) {
    if (!anchors || !anchors->right) throw GraphError("sample '" + sample.id + "': conditional mode needs both flanks");
    antigen = options.epitope_cutoff
                  ? epitope(sample.antigen, sample.prefix, sample.suffix, *options.epitope_cutoff)
                  : sample.antigen;
  }
  ComplexGraph g = build_graph(sample.cdr.size(), antigen, anchors);
  if (options.framework && !sample.prefix.empty()) g.framework = build_framework_graph(sample.prefix);
  return g;
}

ComplexGraph without_antigen(const ComplexGraph& graph) {
  ComplexGraph g = graph;
  const std::size_t m = graph.num_antibody;
  g.num_antigen = 0;
  g.antigen_coords = BackboneCoords{};
  g.antigen_state = Array(0, kStateDim);
  g.src.clear();
  g.dst.clear();
  g.type.clear();
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    if (graph.src[e] >= m || graph.dst[e] >= m) continue;
    g.src.push_back(graph.src[e]);
    g.dst.push_back(graph.dst[e]);
    g.type.push_back(graph.type[e]);
  }
  g.position.resize(m);
  g.chain.resize(m);
  g.frame_prev.resize(m);
  g.frame_next.resize(m);
  // Anchor rows of the CA pool move down by n.
  const std::size_t shift = graph.num_antigen;
  for (std::size_t i = 0; i < m; ++i) {
    if (graph.frame_prev[i] >= graph.num_nodes()) g.frame_prev[i] = graph.frame_prev[i] - shift;
    if (graph.frame_next[i] >= graph.num_nodes()) g.frame_next[i] = graph.frame_next[i] - shift;
  }
  reindex(g);
  return g;
}

ComplexGraph with_internal_edges(const ComplexGraph& graph) {
  ComplexGraph g = graph;
  std::fill(g.type.begin(), g.type.end(), kInternal);
  reindex(g);
  return g;
}

ComplexGraph transformed(const ComplexGraph& graph, const geometry::Mat3& rotation, const Vec3& translation) {
  ComplexGraph g = graph;
  for (auto* set : {&g.anchors.seeds.a, &g.anchors.seeds.b, &g.anchors.seeds.c})
    for (Vec3& x : *set) x = rotate(rotation, translation, x);
  if (g.anchors.right)
    for (Vec3& x : *g.anchors.right) x = rotate(rotation, translation, x);
  g.antigen_coords = geometry::transformed(graph.antigen_coords, rotation, translation);
  g.frozen_coords = geometry::transformed(graph.frozen_coords, rotation, translation);
  if (g.framework) {
    for (std::size_t i = 0; i < g.framework->ca.rows(); ++i) {
      const Vec3 x(g.framework->ca(i, 0), g.framework->ca(i, 1), g.framework->ca(i, 2));
      const Vec3 y = rotate(rotation, translation, x);
      for (std::size_t d = 0; d < 3; ++d) g.framework->ca(i, d) = y[d];
    }
  }
  return g;
}

std::size_t masked_count(std::size_t n, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("mask fraction must lie in [0, 1]");
  if (fraction == 0.0) return 0;
  const auto rounded = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  return std::min(n, std::max<std::size_t>(1, rounded));
}

ComplexGraph mask_antigen(const ComplexGraph& graph, double fraction, std::uint64_t seed) {
  const std::size_t n = graph.num_antigen;
  if (n == 0) throw GraphError("mask_antigen: graph has no antigen");
  const std::size_t count = masked_count(n, fraction);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) std::swap(order[i], order[i + rng.below(n - i)]);
  ComplexGraph g = graph;
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t c = 0; c < kLabelDim; ++c) g.antigen_state(order[i], c) = 0.0;
  return g;
}

BackboneCoords interpolated_coords(const ComplexGraph& graph) {
  const std::size_t m = graph.num_antibody;
  const auto& left = graph.anchors.seeds.c;
  std::array<Vec3, kTracks> right;
  if (graph.anchors.right) {
    right = *graph.anchors.right;
  } else {
    const Vec3 dir = (left[1] - graph.anchors.seeds.b[1]).normalized();
    for (std::size_t p = 0; p < kTracks; ++p) right[p] = left[p] + static_cast<double>(m + 1) * kStepLength * dir;
  }
  BackboneCoords out;
  for (std::size_t j = 0; j < m; ++j) {
    const double w = static_cast<double>(j + 1) / static_cast<double>(m + 1);
    std::array<Vec3, kTracks> atoms;
    for (std::size_t p = 0; p < kTracks; ++p) atoms[p] = left[p] + w * (right[p] - left[p]);
    out.atoms.push_back(atoms);
    out.index.push_back(static_cast<int>(j));
  }
  return out;
}

Array placement_state(const geometry::SeedFrame& seeds, const BackboneCoords& coords) {
  BackboneCoords chain;
  chain.atoms = {seeds.a, seeds.b, seeds.c};
  chain.index = {-3, -2, -1};
  for (std::size_t i = 0; i < coords.size(); ++i) chain.atoms.push_back(coords.atoms[i]), chain.index.push_back(0);
  const auto feats = geometry::spatial_features(chain);
  return geometry::placement_features(feats, 3, coords.size()).values;
}

Array init_state(const ComplexGraph& graph) {
  const std::size_t m = graph.num_antibody;
  Array z(m, kStateDim);
  Array s;
  if (graph.frozen) {
    const auto feats = geometry::spatial_features(graph.frozen_coords);
    s = geometry::placement_features(feats, 0, m).values;
  } else {
    s = placement_state(graph.anchors.seeds, interpolated_coords(graph));
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t c = 0; c < geometry::kFeatureDim; ++c) z(i, kLabelDim + c) = s(i, c);
  return z;
}

Truth truth_of(const FeaturizedComplex& sample, const ComplexGraph& graph) {
  const std::size_t m = sample.cdr.size();
  if (m != graph.num_antibody) throw GraphError("truth length differs from graph span");
  Truth t;
  for (char c : sample.cdr.sequence) t.labels.push_back(checked_residue_index(c));
  t.coords = sample.cdr.coords;
  if (graph.frozen) {
    const auto feats = geometry::spatial_features(sample.cdr.coords);
    const auto placed = geometry::placement_features(feats, 0, m);
    t.placement = placed.values;
    t.mask = placed.mask;
  } else {
    t.placement = placement_state(graph.anchors.seeds, sample.cdr.coords);
    t.mask = Array(m, geometry::kFeatureDim, 1.0);
  }
  return t;
}

GraphGeometry graph_geometry(Tape& tape, const ComplexGraph& graph, Var z_antibody) {
  const std::size_t m = graph.num_antibody;
  const std::size_t n = graph.num_antigen;
  if (z_antibody.rows() != m || z_antibody.cols() != kStateDim) {
    throw ShapeError("graph_geometry: state must be " + std::to_string(m) + " x 29");
  }
  GraphGeometry geo;
  if (graph.frozen) {
    for (std::size_t p = 0; p < kTracks; ++p)
      geo.antibody[p] = tape.constant(geometry::to_array(graph.frozen_coords.track(static_cast<geometry::Track>(p))));
  } else {
    geo.antibody = geometry::reconstruct_cartesian(ad::slice_cols(z_antibody, kLabelDim, geometry::kFeatureDim),
                                                   graph.anchors.seeds);
  }
  Array extras(2, 3);
  for (std::size_t d = 0; d < 3; ++d) {
    extras(0, d) = graph.anchors.seeds.c[1][d];
    if (graph.anchors.right) extras(1, d) = (*graph.anchors.right)[1][d];
  }
  std::vector<Var> parts{geo.antibody[1]};
  if (n > 0) parts.push_back(tape.constant(ca_rows(graph.antigen_coords)));
  parts.push_back(tape.constant(extras));
  const Var pool = ad::concat_rows(parts);
  geo.ca_nodes = ad::slice_rows(pool, 0, m + n);
  const Var prev = ad::gather_rows(pool, ad::make_index(graph.frame_prev));
  const Var next = ad::gather_rows(pool, ad::make_index(graph.frame_next));
  geo.frames = geometry::orientation_frames(prev, geo.ca_nodes, next, &geo.frame_valid);
  return geo;
}

Var edge_feature_block(Var z_nodes, Var ca, const geometry::FrameColumns& frames, const Array& frame_valid,
                       const EdgeIndex& index) {
  Tape& tape = *z_nodes.tape();
  const std::size_t e = index.size();
  if (e == 0) return tape.constant(Array(0, kEdgeDim));

  const Var delta = ad::gather_rows(z_nodes, index.src) - ad::gather_rows(z_nodes, index.dst);
  const Var v = ad::gather_rows(ca, index.src) - ad::gather_rows(ca, index.dst);
  const Var dist = ad::norm_rows(v);

  Array centres(e, kRbfCount);
  for (std::size_t r = 0; r < e; ++r)
    for (std::size_t k = 0; k < kRbfCount; ++k) centres(r, k) = static_cast<double>(k) * kRbfSpacing;
  const Var offset = ad::matmul(dist, tape.constant(Array(1, kRbfCount, 1.0))) - tape.constant(centres);
  const Var rbf = ad::exp(ad::scale(offset * offset, -1.0 / (kRbfSpacing * kRbfSpacing)));

  Array valid_i(e, 1), valid_ij(e, 1);
  for (std::size_t r = 0; r < e; ++r) {
    valid_i(r, 0) = frame_valid((*index.dst)[r], 0);
    valid_ij(r, 0) = valid_i(r, 0) * frame_valid((*index.src)[r], 0);
  }
  const std::array<Var, 3> oi = {ad::gather_rows(frames.b, index.dst), ad::gather_rows(frames.n, index.dst),
                                 ad::gather_rows(frames.c, index.dst)};
  const std::array<Var, 3> oj = {ad::gather_rows(frames.b, index.src), ad::gather_rows(frames.n, index.src),
                                 ad::gather_rows(frames.c, index.src)};
  const Var projected = ad::concat_cols({ad::row_sum(oi[0] * v), ad::row_sum(oi[1] * v), ad::row_sum(oi[2] * v)});
  const Var direction = ad::scale_rows(geometry::normalize_rows(projected), tape.constant(valid_i));

  std::vector<Var> dots;
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) dots.push_back(ad::row_sum(oi[a] * oj[b]));
  const Var orientation = ad::scale_rows(ad::concat_cols(dots), tape.constant(valid_ij));

  return ad::concat_cols({delta, tape.constant(index.separation), rbf, direction, orientation,
                          tape.constant(index.type_onehot)});
}

Var node_states(Tape& tape, const ComplexGraph& graph, Var z_antibody) {
  if (graph.num_antigen == 0) return z_antibody;
  return ad::concat_rows({z_antibody, tape.constant(graph.antigen_state)});
}

Var edge_features(Tape& tape, const ComplexGraph& graph, Var z_antibody, const GraphGeometry& geo) {
  return edge_feature_block(node_states(tape, graph, z_antibody), geo.ca_nodes, geo.frames, geo.frame_valid,
                            graph.index);
}

Array edge_feature_matrix(const ComplexGraph& graph, const Array& z_antibody) {
  Tape tape;
  const Var z = tape.constant(z_antibody);
  const GraphGeometry geo = graph_geometry(tape, graph, z);
  return edge_features(tape, graph, z, geo).value();
}

Array edge_features(const ComplexGraph& graph, std::size_t i, std::size_t j, const Array& z_antibody) {
  if (i == j) throw GraphError("edge_features: self-loops are not edges");
  std::size_t found = graph.num_edges();
  for (std::size_t e = 0; e < graph.num_edges(); ++e)
    if (graph.dst[e] == i && graph.src[e] == j) found = e;
  if (found == graph.num_edges()) {
    throw GraphError("edge_features: no edge " + std::to_string(j) + " -> " + std::to_string(i));
  }
  const Array all = edge_feature_matrix(graph, z_antibody);
  Array row(1, kEdgeDim);
  for (std::size_t c = 0; c < kEdgeDim; ++c) row(0, c) = all(found, c);
  return row;
}

}  // namespace abode::graph
