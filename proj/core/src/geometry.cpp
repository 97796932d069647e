#include "abode/geometry.hpp"

#include <cmath>
#include <string>

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "abode/error.hpp"

namespace abode::geometry {

using ad::Array;
using ad::Tape;
using ad::Var;

namespace {

constexpr double kDegenerate = 1e-8;
// sin of the bond angle below which a torsion is treated as undefined
constexpr double kCollinear = 1e-6;

Var zeros(Tape& tape, std::size_t rows, std::size_t cols) { return tape.constant(Array(rows, cols)); }

// [r, alpha, gamma] columns for one track, L x 3.
Var track_features(Var positions, GammaMode mode) {
  Tape& tape = *positions.tape();
  const std::size_t len = positions.rows();
  const Var u = ad::slice_rows(positions, 1, len - 1) - ad::slice_rows(positions, 0, len - 1);
  const Var r = ad::norm_rows(u);
  const Var r_col = ad::concat_rows({r, zeros(tape, 1, 1)});

  Var alpha_col = zeros(tape, len, 1);
  Var gamma_col = zeros(tape, len, 1);
  if (len >= 3) {
    const Var u_cur = ad::slice_rows(u, 1, len - 2);
    const Var u_prev = ad::slice_rows(u, 0, len - 2);
    const Var r_cur = ad::slice_rows(r, 1, len - 2);
    const Var r_prev = ad::slice_rows(r, 0, len - 2);
    const Var cosine = ad::row_sum(u_cur * u_prev) / (r_cur * r_prev);
    alpha_col = ad::concat_rows({zeros(tape, 1, 1), ad::acos_clamped(cosine), zeros(tape, 1, 1)});

    if (mode == GammaMode::Literal) {
      const Var normal = ad::cross3(u_cur, u_prev);
      const Var nn = ad::norm_rows(normal);
      Array fix(nn.rows(), 1);
      for (std::size_t i = 0; i < fix.size(); ++i) fix[i] = nn.value()[i] == 0.0 ? 1.0 : 0.0;
      const Var den = r_cur * (nn + tape.constant(fix));
      const Var literal = ad::acos_clamped(ad::row_sum(u_cur * normal) / den);
      gamma_col = ad::concat_rows({zeros(tape, 1, 1), literal, zeros(tape, 1, 1)});
    } else if (len >= 4) {
      const Var b1 = ad::slice_rows(u, 0, len - 3);
      const Var b2 = ad::slice_rows(u, 1, len - 3);
      const Var b3 = ad::slice_rows(u, 2, len - 3);
      const Var n1 = ad::cross3(b1, b2);
      const Var n2 = ad::cross3(b2, b3);
      // Collinear triples leave the torsion undefined; it is reported as 0 there.
      Array keep(len - 3, 1), unit(len - 3, 1);
      for (std::size_t i = 0; i + 3 < len; ++i) {
        const double r1 = r.value()[i], r2 = r.value()[i + 1], r3 = r.value()[i + 2];
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t d = 0; d < 3; ++d) {
          s1 += n1.value()(i, d) * n1.value()(i, d);
          s2 += n2.value()(i, d) * n2.value()(i, d);
        }
        const bool ok = std::sqrt(s1) > kCollinear * r1 * r2 && std::sqrt(s2) > kCollinear * r2 * r3;
        keep[i] = ok ? 1.0 : 0.0;
        unit[i] = ok ? 0.0 : 1.0;
      }
      const Var y = ad::slice_rows(r, 1, len - 3) * ad::row_sum(b1 * n2) * tape.constant(keep);
      const Var x = ad::row_sum(n1 * n2) * tape.constant(keep) + tape.constant(unit);
      gamma_col = ad::concat_rows({zeros(tape, 1, 1), ad::atan2(y, x), zeros(tape, 2, 1)});
    }
  }
  return ad::concat_cols({r_col, alpha_col, gamma_col});
}

Array rows_of(const std::array<Vec3, kTracks>& points) {
  Array out(kTracks, 3);
  for (std::size_t p = 0; p < kTracks; ++p)
    for (std::size_t d = 0; d < 3; ++d) out(p, d) = points[p][d];
  return out;
}

// 9 x 3 matrix selecting the given kind (0 = r, 1 = alpha, 2 = gamma) of every track.
Array kind_selector(std::size_t kind) {
  Array sel(kFeatureDim, kTracks);
  for (std::size_t p = 0; p < kTracks; ++p) sel(p * 3 + kind, p) = 1.0;
  return sel;
}

}  // namespace

std::vector<Vec3> BackboneCoords::track(Track t) const {
  std::vector<Vec3> out;
  out.reserve(atoms.size());
  for (const auto& residue : atoms) out.push_back(residue[static_cast<std::size_t>(t)]);
  return out;
}

void BackboneCoords::push_back(const Vec3& n, const Vec3& ca, const Vec3& c, int residue_index) {
  atoms.push_back({n, ca, c});
  index.push_back(residue_index);
}

Array spatial_feature_mask(std::size_t length, GammaMode mode) {
  Array mask(length, kFeatureDim);
  for (std::size_t i = 0; i < length; ++i) {
    const bool r_ok = i + 1 < length;
    const bool alpha_ok = i >= 1 && i + 1 < length;
    const bool gamma_ok = mode == GammaMode::Literal ? alpha_ok : (i >= 1 && i + 2 < length);
    for (std::size_t p = 0; p < kTracks; ++p) {
      mask(i, p * 3 + 0) = r_ok ? 1.0 : 0.0;
      mask(i, p * 3 + 1) = alpha_ok ? 1.0 : 0.0;
      mask(i, p * 3 + 2) = gamma_ok ? 1.0 : 0.0;
    }
  }
  return mask;
}

Var spatial_features(std::span<const Var, kTracks> tracks, GammaMode mode) {
  const std::size_t len = tracks[0].rows();
  if (len < 2) throw GeometryError("spatial_features needs at least 2 residues, got " + std::to_string(len));
  return ad::concat_cols({track_features(tracks[0], mode), track_features(tracks[1], mode),
                          track_features(tracks[2], mode)});
}

SpatialFeatures spatial_features(const BackboneCoords& coords, GammaMode mode) {
  const std::size_t len = coords.size();
  if (len < 2) throw GeometryError("spatial_features needs at least 2 residues, got " + std::to_string(len));
  for (std::size_t i = 0; i + 1 < len; ++i) {
    for (std::size_t p = 0; p < kTracks; ++p) {
      const Vec3& a = coords.atoms[i][p];
      const Vec3& b = coords.atoms[i + 1][p];
      if (!a.allFinite() || !b.allFinite()) throw GeometryError("non-finite backbone coordinate");
      if ((b - a).norm() == 0.0) {
        throw GeometryError("coincident consecutive atoms at residues " + std::to_string(i) + " and " +
                            std::to_string(i + 1));
      }
    }
  }
  Tape tape;
  std::array<Var, kTracks> tracks;
  for (std::size_t p = 0; p < kTracks; ++p) tracks[p] = tape.constant(to_array(coords.track(static_cast<Track>(p))));
  SpatialFeatures out;
  out.values = spatial_features(std::span<const Var, kTracks>(tracks), mode).value();
  out.mask = spatial_feature_mask(len, mode);
  for (std::size_t i = 0; i < out.values.size(); ++i)
    if (out.mask[i] == 0.0) out.values[i] = 0.0;
  return out;
}

PlacementFeatures placement_features(const SpatialFeatures& features, std::size_t first, std::size_t count) {
  if (first + count > features.size()) throw GeometryError("placement_features: range outside the chain");
  PlacementFeatures out{Array(count, kFeatureDim), Array(count, kFeatureDim)};
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t pos = first + k;
    for (std::size_t p = 0; p < kTracks; ++p) {
      for (std::size_t kind = 0; kind < 3; ++kind) {
        const std::size_t lag = kind == 2 ? 2 : 1;
        if (pos < lag) continue;
        const std::size_t col = p * 3 + kind;
        out.mask(k, col) = features.mask(pos - lag, col);
        out.values(k, col) = features.values(pos - lag, col) * out.mask(k, col);
      }
    }
  }
  return out;
}

SeedFrame seeds_from_chain(const BackboneCoords& coords) {
  const std::size_t len = coords.size();
  if (len < 3) throw GeometryError("seed frame needs three residues");
  return SeedFrame{coords.atoms[len - 3], coords.atoms[len - 2], coords.atoms[len - 1]};
}

SeedFrame canonical_seeds() {
  // A short ideal zig-zag with the last residue's CA at the origin.
  SeedFrame s;
  const std::array<Vec3, kTracks> offsets = {Vec3(-0.55, 1.34, 0.0), Vec3(0.0, 0.0, 0.0), Vec3(1.52, 0.0, 0.0)};
  const std::array<Vec3, 3> ca = {Vec3(-6.6, -1.9, 0.9), Vec3(-3.4, 0.2, 0.0), Vec3(0.0, 0.0, 0.0)};
  for (std::size_t p = 0; p < kTracks; ++p) {
    s.a[p] = ca[0] + offsets[p];
    s.b[p] = ca[1] + offsets[p];
    s.c[p] = ca[2] + offsets[p];
  }
  return s;
}

Var normalize_rows(Var v) {
  Tape& tape = *v.tape();
  const Var n = ad::norm_rows(v);
  Array fix(n.rows(), 1);
  for (std::size_t i = 0; i < fix.size(); ++i) fix[i] = n.value()[i] == 0.0 ? 1.0 : 0.0;
  const Var inv = tape.constant(Array(n.rows(), 1, 1.0)) / (n + tape.constant(fix));
  return ad::scale_rows(v, inv);
}

std::array<Var, kTracks> reconstruct_cartesian(Var placement, const SeedFrame& seeds) {
  Tape& tape = *placement.tape();
  const std::size_t count = placement.rows();
  if (placement.cols() != kFeatureDim) throw ShapeError("reconstruct_cartesian: placement must be n x 9");
  for (const auto* set : {&seeds.a, &seeds.b, &seeds.c})
    for (const Vec3& x : *set)
      if (!x.allFinite()) throw GeometryError("reconstruct_cartesian: non-finite anchor");

  const Var radius = ad::matmul(placement, tape.constant(kind_selector(0)));
  const Var alpha = ad::matmul(placement, tape.constant(kind_selector(1)));
  const Var gamma = ad::matmul(placement, tape.constant(kind_selector(2)));
  const Var sin_alpha = radius * ad::sin(alpha);
  // Per-step coefficients along (bc, n x bc, n); tracks become rows after transposing.
  const Var along = ad::transpose(radius * ad::cos(alpha));
  const Var in_plane = ad::transpose(sin_alpha * ad::cos(gamma));
  const Var normal = ad::transpose(sin_alpha * ad::sin(gamma));

  Var a = tape.constant(rows_of(seeds.a));
  Var b = tape.constant(rows_of(seeds.b));
  Var c = tape.constant(rows_of(seeds.c));
  std::vector<Var> placed;
  placed.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const Var bc = normalize_rows(c - b);
    const Var n = normalize_rows(ad::cross3(b - a, bc));
    const Var m = ad::cross3(n, bc);
    const Var d = c + ad::scale_rows(bc, ad::slice_cols(along, k, 1)) +
                  ad::scale_rows(m, ad::slice_cols(in_plane, k, 1)) +
                  ad::scale_rows(n, ad::slice_cols(normal, k, 1));
    placed.push_back(d);
    a = b;
    b = c;
    c = d;
  }
  std::array<Var, kTracks> out;
  if (count == 0) {
    for (auto& t : out) t = tape.constant(Array(0, 3));
    return out;
  }
  const Var all = ad::concat_rows(placed);
  for (std::size_t p = 0; p < kTracks; ++p) {
    std::vector<std::size_t> idx(count);
    for (std::size_t k = 0; k < count; ++k) idx[k] = k * kTracks + p;
    out[p] = ad::gather_rows(all, ad::make_index(std::move(idx)));
  }
  return out;
}

BackboneCoords reconstruct_cartesian(const Array& placement, const SeedFrame& seeds) {
  Tape tape;
  const auto tracks = reconstruct_cartesian(tape.constant(placement), seeds);
  BackboneCoords out;
  for (std::size_t k = 0; k < placement.rows(); ++k) {
    std::array<Vec3, kTracks> atoms;
    for (std::size_t p = 0; p < kTracks; ++p) {
      const Array& v = tracks[p].value();
      atoms[p] = Vec3(v(k, 0), v(k, 1), v(k, 2));
    }
    out.atoms.push_back(atoms);
    out.index.push_back(static_cast<int>(k));
  }
  return out;
}

BackboneCoords reconstruct_chain(const SpatialFeatures& features, const SeedFrame& first_three) {
  const std::size_t len = features.size();
  if (len < 3) throw GeometryError("reconstruct_chain needs at least three residues");
  const PlacementFeatures rest = placement_features(features, 3, len - 3);
  for (double m : rest.mask.values())
    if (m == 0.0) throw GeometryError("reconstruct_chain: invalid feature inside the span");
  BackboneCoords out;
  out.push_back(first_three.a[0], first_three.a[1], first_three.a[2], 0);
  out.push_back(first_three.b[0], first_three.b[1], first_three.b[2], 1);
  out.push_back(first_three.c[0], first_three.c[1], first_three.c[2], 2);
  const BackboneCoords tail = reconstruct_cartesian(rest.values, first_three);
  for (std::size_t k = 0; k < tail.size(); ++k) {
    out.atoms.push_back(tail.atoms[k]);
    out.index.push_back(static_cast<int>(k + 3));
  }
  return out;
}

std::optional<Mat3> try_orientation_frame(const Vec3& prev, const Vec3& cur, const Vec3& next) {
  const Vec3 d1 = cur - prev;
  const Vec3 d2 = next - cur;
  if (d1.norm() == 0.0 || d2.norm() == 0.0) return std::nullopt;
  const Vec3 u1 = d1.normalized();
  const Vec3 u2 = d2.normalized();
  const Vec3 bis = u1 - u2;
  const Vec3 nrm = u1.cross(u2);
  if (bis.norm() < kDegenerate || nrm.norm() < kDegenerate) return std::nullopt;
  const Vec3 b = bis.normalized();
  const Vec3 n = nrm.normalized();
  Mat3 o;
  o.col(0) = b;
  o.col(1) = n;
  o.col(2) = b.cross(n);
  return o;
}

Mat3 orientation_frame(const BackboneCoords& coords, std::size_t i) {
  if (i == 0 || i + 1 >= coords.size()) {
    throw GeometryError("orientation_frame: residue " + std::to_string(i) + " lacks a neighbour");
  }
  const auto frame = try_orientation_frame(coords.at(i - 1, Track::CA), coords.at(i, Track::CA),
                                           coords.at(i + 1, Track::CA));
  if (!frame) throw GeometryError("orientation_frame: collinear neighbourhood at residue " + std::to_string(i));
  return *frame;
}

FrameColumns orientation_frames(Var prev, Var cur, Var next, Array* valid) {
  const Var d1 = cur - prev;
  const Var d2 = next - cur;
  const Var u1 = normalize_rows(d1);
  const Var u2 = normalize_rows(d2);
  const Var bis = u1 - u2;
  const Var nrm = ad::cross3(u1, u2);
  FrameColumns f;
  f.b = normalize_rows(bis);
  f.n = normalize_rows(nrm);
  f.c = ad::cross3(f.b, f.n);
  if (valid != nullptr) {
    const std::size_t m = cur.rows();
    *valid = Array(m, 1);
    for (std::size_t i = 0; i < m; ++i) {
      double nb = 0.0, nn = 0.0, n1 = 0.0, n2 = 0.0;
      for (std::size_t d = 0; d < 3; ++d) {
        nb += bis.value()(i, d) * bis.value()(i, d);
        nn += nrm.value()(i, d) * nrm.value()(i, d);
        n1 += d1.value()(i, d) * d1.value()(i, d);
        n2 += d2.value()(i, d) * d2.value()(i, d);
      }
      const bool ok = n1 > 0.0 && n2 > 0.0 && std::sqrt(nb) >= kDegenerate && std::sqrt(nn) >= kDegenerate;
      (*valid)(i, 0) = ok ? 1.0 : 0.0;
    }
  }
  return f;
}

Superposition kabsch(std::span<const Vec3> p, std::span<const Vec3> q) {
  if (p.size() != q.size()) {
    throw GeometryError("kabsch: point sets differ in size (" + std::to_string(p.size()) + " vs " +
                        std::to_string(q.size()) + ")");
  }
  if (p.empty()) throw GeometryError("kabsch: empty point sets");
  const double n = static_cast<double>(p.size());
  Vec3 cp = Vec3::Zero(), cq = Vec3::Zero();
  for (std::size_t i = 0; i < p.size(); ++i) {
    cp += p[i];
    cq += q[i];
  }
  cp /= n;
  cq /= n;
  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < p.size(); ++i) h += (p[i] - cp) * (q[i] - cq).transpose();
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  Mat3 fix = Mat3::Identity();
  if ((v * u.transpose()).determinant() < 0.0) fix(2, 2) = -1.0;
  Superposition s;
  s.rotation = v * fix * u.transpose();
  s.translation = cq - s.rotation * cp;
  double sq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sq += (s.rotation * p[i] + s.translation - q[i]).squaredNorm();
  s.rmsd = std::sqrt(sq / n);
  return s;
}

double kabsch_rmsd(std::span<const Vec3> p, std::span<const Vec3> q) { return kabsch(p, q).rmsd; }

BackboneCoords transformed(const BackboneCoords& coords, const Mat3& rotation, const Vec3& translation) {
  BackboneCoords out = coords;
  for (auto& residue : out.atoms)
    for (auto& x : residue) x = rotation * x + translation;
  return out;
}

Array to_array(std::span<const Vec3> points) {
  Array out(points.size(), 3);
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t d = 0; d < 3; ++d) out(i, d) = points[i][d];
  return out;
}

std::vector<Vec3> to_points(const Array& rows3) {
  if (rows3.cols() != 3) throw ShapeError("to_points: expected n x 3");
  std::vector<Vec3> out(rows3.rows());
  for (std::size_t i = 0; i < rows3.rows(); ++i) out[i] = Vec3(rows3(i, 0), rows3(i, 1), rows3(i, 2));
  return out;
}

}  // namespace abode::geometry
