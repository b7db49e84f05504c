#pragma once

#include <cmath>
#include <vector>

#include "declo/core/geometry.hpp"
#include "declo/core/neighbor_index.hpp"

namespace declo {

/// Orthonormal basis of the tangent plane at f. First axis is the global
/// axis least aligned with f, projected; second axis completes it.
struct TangentBasis {
  Vec3 e1, e2;
};

inline TangentBasis tangent_basis(const UnitVec3& f) {
  int least = 0;
  f.vec().cwiseAbs().minCoeff(&least);
  const Vec3 e = Vec3::Unit(least);
  const Vec3 e1 = (e - e.dot(f.vec()) * f.vec()).normalized();
  return TangentBasis{e1, f.vec().cross(e1)};
}

/// Log map at `base`: tangent-plane coordinates whose magnitude is the
/// geodesic angle to p.
inline Eigen::Vector2d riemann_log(const UnitVec3& base, const UnitVec3& p) {
  const double dot = base.dot(p);
  if (dot <= -1.0 + 1e-9) throw std::runtime_error("antipodal point");
  const Vec3 perp = p.vec() - dot * base.vec();
  const double s = perp.norm();
  if (s == 0.0) return Eigen::Vector2d::Zero();
  const double angle = std::atan2(s, dot);
  const TangentBasis tb = tangent_basis(base);
  const Vec3 dir = perp / s;
  return angle * Eigen::Vector2d(dir.dot(tb.e1), dir.dot(tb.e2));
}

/// Exp map at `base`: walks the geodesic with initial direction v for arc
/// length |v|. Requires |v| < pi.
inline UnitVec3 riemann_exp(const UnitVec3& base, const Eigen::Vector2d& v) {
  const double angle = v.norm();
  if (angle >= kPi) throw std::invalid_argument("tangent vector too long");
  if (angle == 0.0) return base;
  const TangentBasis tb = tangent_basis(base);
  const Vec3 dir = (v.x() * tb.e1 + v.y() * tb.e2) / angle;
  return UnitVec3(std::cos(angle) * base.vec() + std::sin(angle) * dir);
}

/// Near-uniform direction grid (Fibonacci spiral).
inline std::vector<UnitVec3> fibonacci_sphere_grid(int n) {
  if (n < 1) throw std::invalid_argument("grid size must be >= 1");
  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  std::vector<UnitVec3> grid;
  grid.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * i;
    grid.push_back(UnitVec3(Vec3(r * std::cos(phi), r * std::sin(phi), z)));
  }
  return grid;
}

/// A density mode on the sphere and the number of normals in its window.
struct ModeSeed {
  UnitVec3 center;
  int support_count = 0;
};

/// Gaussian mean shift over directions. Seeds start on a Fibonacci grid;
/// each iteration gathers the normals in the conical window around the
/// seed (forward cone only), averages their tangent-plane coordinates with
/// kernel weight exp(-c |m|^2), c = (2/theta_window)^2, and steps to the
/// exponential of the shift. Converged modes closer than half a window are
/// merged, keeping the better-supported one.
inline std::vector<ModeSeed> mean_shift_modes(
    const std::vector<UnitVec3>& normals, double theta_window, int grid_n,
    int max_iter, double eps,
    std::vector<std::vector<UnitVec3>>* seed_traces = nullptr) {
  if (theta_window <= 0.0 || theta_window >= kPi / 2.0)
    throw std::invalid_argument("theta_window must be in (0, pi/2)");
  if (grid_n < 1) throw std::invalid_argument("grid size must be >= 1");
  if (normals.empty()) return {};

  std::vector<Vec3> raw(normals.size());
  for (std::size_t i = 0; i < normals.size(); ++i) raw[i] = normals[i].vec();
  const NeighborIndex index(raw);

  const double sin_half = std::sin(theta_window / 2.0);
  // Chord radius covering the cap of angle theta_window/2, slightly inflated;
  // the exact window test runs on the gathered candidates.
  const double chord = 2.0 * std::sin(theta_window / 4.0) * (1.0 + 1e-9) + 1e-12;
  const double c = (2.0 / theta_window) * (2.0 / theta_window);

  auto window_members = [&](const UnitVec3& f) {
    std::vector<int> members;
    for (int id : index.radius(f.vec(), chord)) {
      const UnitVec3& n = normals[id];
      if (n.cross(f).norm() < sin_half && n.dot(f) > 0.0) members.push_back(id);
    }
    return members;  // index-sorted: summation order is fixed
  };

  std::vector<ModeSeed> candidates;
  for (const UnitVec3& seed : fibonacci_sphere_grid(grid_n)) {
    UnitVec3 f = seed;
    bool alive = true;
    std::vector<UnitVec3> trace{f};
    for (int it = 0; it < max_iter; ++it) {
      const std::vector<int> members = window_members(f);
      if (members.empty()) {
        alive = false;
        break;
      }
      Eigen::Vector2d shift_num = Eigen::Vector2d::Zero();
      double shift_den = 0.0;
      for (int id : members) {
        const Eigen::Vector2d m = riemann_log(f, normals[id]);
        const double w = std::exp(-c * m.squaredNorm());
        shift_num += w * m;
        shift_den += w;
      }
      const Eigen::Vector2d shift = shift_num / shift_den;
      f = riemann_exp(f, shift);
      trace.push_back(f);
      if (shift.norm() < eps) break;
    }
    if (!alive) continue;
    if (seed_traces) seed_traces->push_back(std::move(trace));
    const std::vector<int> members = window_members(f);
    if (members.empty()) continue;
    candidates.push_back(ModeSeed{f, static_cast<int>(members.size())});
  }

  // Merge near-duplicate modes, larger support wins.
  std::vector<int> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return candidates[a].support_count > candidates[b].support_count;
  });
  std::vector<ModeSeed> modes;
  for (int i : order) {
    bool duplicate = false;
    for (const ModeSeed& m : modes)
      if (candidates[i].center.angle_to(m.center) < theta_window / 2.0) {
        duplicate = true;
        break;
      }
    if (!duplicate) modes.push_back(candidates[i]);
  }
  return modes;
}

}  // namespace declo
