#pragma once

// Shared generators and independent oracles for the test suites. Everything
// here stays off the library code paths it is used to check.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "declo/core/geometry.hpp"

namespace testsup {

// Deterministic uniform source, independent of the library RNG.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed ^ 0x6A09E667F3BCC909ull) { next(); }
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double uniform() {  // [0, 1)
    return static_cast<double>(next() >> 11) / 9007199254740992.0;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
  declo::Vec3 vec3(double lo, double hi) {
    return declo::Vec3(uniform(lo, hi), uniform(lo, hi), uniform(lo, hi));
  }
  declo::Vec3 unit3() {
    while (true) {
      const declo::Vec3 v = vec3(-1.0, 1.0);
      const double n = v.norm();
      if (n > 1e-3 && n <= 1.0) return v / n;
    }
  }
  double gaussian() {
    const double u1 = (static_cast<double>(next() >> 11) + 1.0) / 9007199254740993.0;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * declo::kPi * u2);
  }
};

inline declo::Rotation3 random_rotation(Rng& rng, double max_angle = declo::kPi * 0.9) {
  return declo::Rotation3::from_axis_angle(rng.unit3() * rng.uniform(0.0, max_angle));
}

inline declo::RigidTransform random_transform(Rng& rng, double max_angle = declo::kPi * 0.9,
                                              double span = 10.0) {
  return declo::RigidTransform(random_rotation(rng, max_angle), rng.vec3(-span, span));
}

// Oracle: homogeneous 4x4 multiplication.
inline declo::Mat4 mat4_product(const declo::RigidTransform& a,
                                const declo::RigidTransform& b) {
  return a.matrix() * b.matrix();
}

// Oracle: full scan for the k nearest points, ties by smaller index.
inline std::vector<std::pair<double, int>> brute_force_knn(
    const std::vector<declo::Vec3>& pts, const declo::Vec3& q, int k) {
  std::vector<std::pair<double, int>> all(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    all[i] = {(pts[i] - q).norm(), static_cast<int>(i)};
  std::sort(all.begin(), all.end());
  all.resize(std::min<std::size_t>(k, all.size()));
  return all;
}

// Oracle: full scan for all points within r.
inline std::vector<int> brute_force_radius(const std::vector<declo::Vec3>& pts,
                                           const declo::Vec3& q, double r) {
  std::vector<int> out;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if ((pts[i] - q).norm() <= r) out.push_back(static_cast<int>(i));
  return out;
}

}  // namespace testsup
