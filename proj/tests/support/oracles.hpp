#pragma once

// Reference computations used by the tests. They deliberately avoid the code
// paths they check: no SVD, no series expansions, no tape.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Geometry>

#include "abode/geometry.hpp"
#include "abode/rng.hpp"

namespace abode::oracle {

using geometry::Mat3;
using geometry::Vec3;

/// Uniformly distributed rotation from a normalized Gaussian quaternion.
inline Mat3 random_rotation(Rng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  return q.toRotationMatrix();
}

inline Vec3 random_vector(Rng& rng, double scale) {
  return {scale * rng.normal(), scale * rng.normal(), scale * rng.normal()};
}

inline std::vector<Vec3> random_points(Rng& rng, std::size_t n, double scale) {
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_vector(rng, scale));
  return out;
}

/// I0(x) = (1/pi) * integral over [0, pi] of exp(x cos t), composite trapezoid.
/// The integrand is smooth and periodic, so the rule converges geometrically.
inline double bessel_i0_quadrature(double x, int panels = 4000) {
  const double h = std::numbers::pi / panels;
  double s = 0.5 * (std::exp(x) + std::exp(-x));
  for (int k = 1; k < panels; ++k) s += std::exp(x * std::cos(k * h));
  return s * h / std::numbers::pi;
}

inline double centered_rmsd_after(const std::vector<Vec3>& p, const std::vector<Vec3>& q, const Mat3& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (r * p[i] - q[i]).squaredNorm();
  return std::sqrt(s / static_cast<double>(p.size()));
}

inline Mat3 zyz(double a, double b, double c) {
  return (Eigen::AngleAxisd(a, Vec3::UnitZ()) * Eigen::AngleAxisd(b, Vec3::UnitY()) *
          Eigen::AngleAxisd(c, Vec3::UnitZ()))
      .toRotationMatrix();
}

/// Minimum RMSD over rotations found by exhaustive search: a coarse ZYZ Euler
/// grid, then repeated local grid refinement around the best candidates.
inline double brute_force_rmsd(std::span<const Vec3> p_in, std::span<const Vec3> q_in) {
  std::vector<Vec3> p(p_in.begin(), p_in.end());
  std::vector<Vec3> q(q_in.begin(), q_in.end());
  Vec3 cp = Vec3::Zero();
  Vec3 cq = Vec3::Zero();
  for (std::size_t i = 0; i < p.size(); ++i) {
    cp += p[i];
    cq += q[i];
  }
  cp /= static_cast<double>(p.size());
  cq /= static_cast<double>(q.size());
  for (auto& v : p) v -= cp;
  for (auto& v : q) v -= cq;

  using Angles = std::array<double, 3>;
  std::vector<std::pair<double, Angles>> coarse;
  const int n = 24;
  const double step = 2.0 * std::numbers::pi / n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= n / 2; ++j)
      for (int k = 0; k < n; ++k) {
        const Angles a{i * step, j * step, k * step};
        coarse.push_back({centered_rmsd_after(p, q, zyz(a[0], a[1], a[2])), a});
      }
  std::partial_sort(coarse.begin(), coarse.begin() + 16, coarse.end(),
                    [](const auto& x, const auto& y) { return x.first < y.first; });

  double best = std::numeric_limits<double>::infinity();
  for (int c = 0; c < 16; ++c) {
    auto [value, angles] = coarse[static_cast<std::size_t>(c)];
    double h = step;
    while (h > 1e-7) {
      bool moved = true;
      while (moved) {
        moved = false;
        for (int di = -2; di <= 2; ++di)
          for (int dj = -2; dj <= 2; ++dj)
            for (int dk = -2; dk <= 2; ++dk) {
              const Angles a{angles[0] + di * h * 0.5, angles[1] + dj * h * 0.5, angles[2] + dk * h * 0.5};
              const double v = centered_rmsd_after(p, q, zyz(a[0], a[1], a[2]));
              if (v < value - 1e-15) {
                value = v;
                angles = a;
                moved = true;
              }
            }
      }
      h *= 0.5;
    }
    best = std::min(best, value);
  }
  return best;
}

/// Bond angle at b between a and c, in radians, from the law of cosines.
inline double angle_by_cosines(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double ab = (a - b).norm();
  const double cb = (c - b).norm();
  const double ac = (a - c).norm();
  return std::acos(std::clamp((ab * ab + cb * cb - ac * ac) / (2.0 * ab * cb), -1.0, 1.0));
}

/// Signed torsion a-b-c-d: right-handed angle from n1 = b1 x b2 to n2 = b2 x b3 about b2.
inline double torsion(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const Vec3 b1 = b - a;
  const Vec3 b2 = c - b;
  const Vec3 b3 = d - c;
  const Vec3 n1 = b1.cross(b2);
  const Vec3 n2 = b2.cross(b3);
  return std::atan2(n1.cross(n2).dot(b2.normalized()), n1.dot(n2));
}

}  // namespace abode::oracle
