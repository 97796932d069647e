#include "abode/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "abode/alphabet.hpp"
#include "abode/error.hpp"

namespace abode::synthetic {

using geometry::Vec3;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kNCa = 1.458;
constexpr double kCaC = 1.525;
constexpr double kCN = 1.329;

Vec3 place(const Vec3& a, const Vec3& b, const Vec3& c, double bond, double angle, double torsion) {
  const Vec3 bc = (c - b).normalized();
  const Vec3 n = (b - a).cross(bc).normalized();
  const Vec3 m = n.cross(bc);
  const Vec3 d(-bond * std::cos(angle), bond * std::sin(angle) * std::cos(torsion),
               bond * std::sin(angle) * std::sin(torsion));
  return c + d.x() * bc + d.y() * m + d.z() * n;
}

}  // namespace

Segment random_chain(Rng& rng, std::size_t length, const Vec3& origin, int chain_ordinal, int first_res_seq) {
  Segment seg;
  if (length == 0) return seg;
  const bool helix = rng.uniform() < 0.5;
  Vec3 n = origin;
  Vec3 ca = origin + Vec3(kNCa, 0.0, 0.0);
  Vec3 c = ca + kCaC * Vec3(-std::cos(111.2 * kDeg), std::sin(111.2 * kDeg), 0.0);
  for (std::size_t i = 0; i < length; ++i) {
    if (i > 0) {
      const double phi = (helix ? -63.0 : -120.0) + rng.uniform(-15.0, 15.0);
      const double psi = (helix ? -42.0 : 130.0) + rng.uniform(-15.0, 15.0);
      const Vec3 n_next = place(n, ca, c, kCN, 116.2 * kDeg, psi * kDeg);
      const Vec3 ca_next = place(ca, c, n_next, kNCa, 121.7 * kDeg, 180.0 * kDeg);
      const Vec3 c_next = place(c, n_next, ca_next, kCaC, 111.2 * kDeg, phi * kDeg);
      n = n_next;
      ca = ca_next;
      c = c_next;
    }
    seg.push_back(kAlphabet[rng.below(kAlphabet.size())], n, ca, c, first_res_seq + static_cast<int>(i),
                  chain_ordinal);
  }
  return seg;
}

FeaturizedComplex random_complex(std::uint64_t seed, const ComplexShape& shape) {
  if (shape.cdr == 0) throw ConfigError("random_complex: CDR length must be positive");
  Rng rng(seed);
  const std::size_t total = shape.prefix + shape.cdr + shape.suffix;
  const Segment chain = random_chain(rng, total, Vec3::Zero(), 0, 1);

  FeaturizedComplex out;
  out.id = "synthetic_" + std::to_string(seed);
  out.mode = shape.antigen > 0 ? TaskMode::Conditional : TaskMode::Unconditional;
  for (std::size_t i = 0; i < total; ++i) {
    Segment& target = i < shape.prefix ? out.prefix : (i < shape.prefix + shape.cdr ? out.cdr : out.suffix);
    const auto& at = chain.coords.atoms[i];
    target.push_back(chain.sequence[i], at[0], at[1], at[2], chain.coords.index[i], 0);
  }
  out.provenance.source = "synthetic";
  out.provenance.antibody_chain = "H";
  out.provenance.cdr_first = static_cast<int>(shape.prefix) + 1;
  out.provenance.cdr_last = static_cast<int>(shape.prefix + shape.cdr);

  if (shape.antigen > 0) {
    out.provenance.antigen_chains = {"A"};
    Vec3 centre = Vec3::Zero();
    for (const auto& at : out.cdr.coords.atoms) centre += at[1];
    centre /= static_cast<double>(shape.cdr);
    for (int attempt = 0; attempt < 1000; ++attempt) {
      Vec3 dir(rng.normal(), rng.normal(), rng.normal());
      dir.normalize();
      Segment antigen = random_chain(rng, shape.antigen, centre + 9.0 * dir, 0, 1);
      double closest = 1e9;
      for (const auto& a : antigen.coords.atoms)
        for (const auto* seg : {&out.prefix, &out.cdr, &out.suffix})
          for (const auto& b : seg->coords.atoms) closest = std::min(closest, (a[1] - b[1]).norm());
      if (closest > 4.0) {
        out.antigen = std::move(antigen);
        break;
      }
    }
    if (out.antigen.empty()) throw GeometryError("random_complex: could not place the antigen");
  }
  return out;
}

std::vector<FeaturizedComplex> random_complexes(std::uint64_t seed, std::size_t count, const ComplexShape& shape) {
  std::vector<FeaturizedComplex> out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(random_complex(derive_seed(seed, k), shape));
  return out;
}

}  // namespace abode::synthetic
