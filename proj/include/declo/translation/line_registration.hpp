#pragma once

#include <vector>

#include "declo/core/geometry.hpp"
#include "declo/core/neighbor_index.hpp"
#include "declo/translation/line_cloud.hpp"

namespace declo {

struct ClosestPoints {
  Vec3 on_source, on_target;
  bool parallel = false;
};

/// Closest points between the infinite lines through two segments.
/// Near-parallel pairs fall back to projecting the source base point onto
/// the target line.
inline ClosestPoints closest_points_between_lines(const LineSegment3& ls,
                                                  const LineSegment3& lt) {
  const Vec3 us = ls.direction();
  const Vec3 ut = lt.direction();
  if (us.squaredNorm() == 0.0 || ut.squaredNorm() == 0.0)
    throw std::invalid_argument("zero-length line");

  const double a = us.dot(us);
  const double b = us.dot(ut);
  const double c = ut.dot(ut);
  const Vec3 w = ls.p0 - lt.p0;
  const double d = us.dot(w);
  const double e = ut.dot(w);

  const double denom = a * c - b * b;
  ClosestPoints out;
  double t_sc, t_tc;
  if (denom < 1e-12 * a * c) {
    out.parallel = true;
    t_sc = 0.0;
    t_tc = e / c;
  } else {
    t_sc = (b * e - c * d) / denom;
    t_tc = (a * e - b * d) / denom;
  }
  out.on_source = ls.p0 + t_sc * us;
  out.on_target = lt.p0 + t_tc * ut;
  return out;
}

struct TranslationParams {
  int bins = 360;
  int lines_per_cell = 8;
  double keep_fraction = 0.4;
  std::uint64_t rng_seed = 0;
  int reg_max_iter = 100;
  double reg_tol = 1e-4;  // meters, per-step movement
};

/// Pure-translation alignment of two line clouds. Each iteration matches
/// source centers to the nearest target center (index built once; only the
/// queries move), gates pairs at the mean center distance, resamples each
/// surviving pair to the closest points between the lines, and steps by the
/// centroid difference of those closest points.
inline Vec3 register_line_clouds(const LineCloud& source, const LineCloud& target,
                                 int max_iter, double tol) {
  if (source.size() == 0 || target.size() == 0)
    throw std::runtime_error("no line correspondences");
  const NeighborIndex target_index(target.centers);

  Vec3 translation = Vec3::Zero();
  for (int it = 0; it < max_iter; ++it) {
    std::vector<int> match(source.size());
    std::vector<double> dist(source.size());
    for (std::size_t i = 0; i < source.size(); ++i) {
      const Neighbor nn = target_index.knn(source.centers[i] + translation, 1)[0];
      match[i] = nn.index;
      dist[i] = nn.distance;
    }
    double mean_dist = 0.0;
    for (double d : dist) mean_dist += d;
    mean_dist /= static_cast<double>(dist.size());

    Vec3 centroid_src = Vec3::Zero(), centroid_tgt = Vec3::Zero();
    std::size_t kept = 0;
    for (std::size_t i = 0; i < source.size(); ++i) {
      if (dist[i] > mean_dist) continue;
      LineSegment3 moved = source.segments[i];
      moved.p0 += translation;
      moved.p1 += translation;
      const ClosestPoints cp =
          closest_points_between_lines(moved, target.segments[match[i]]);
      centroid_src += cp.on_source;
      centroid_tgt += cp.on_target;
      ++kept;
    }
    if (kept == 0) throw std::runtime_error("no line correspondences");

    const Vec3 step = (centroid_tgt - centroid_src) / static_cast<double>(kept);
    translation += step;
    if (step.norm() < tol) break;
  }
  return translation;
}

struct LineCloudSizes {
  std::size_t source_lines = 0;
  std::size_t target_lines = 0;
};

/// Frame-to-frame translation after unrotating the current scan, so the
/// remaining motion between the two line clouds is translation only.
/// Returns the translation of the prev->curr map p_curr = R * p_prev + t.
inline Vec3 estimate_translation(const Scan& prev, const Scan& curr,
                                 const Rotation3& rotation,
                                 const TranslationParams& params,
                                 LineCloudSizes* sizes = nullptr) {
  Scan unrotated;
  unrotated.points.reserve(curr.points.size());
  const Rotation3 inv = rotation.inverse();
  for (const Vec3& p : curr.points) unrotated.points.push_back(inv * p);
  unrotated.ring = curr.ring;
  unrotated.frame_id = curr.frame_id;

  const LineCloud lines_prev = generate_line_cloud(
      prev, params.bins, params.lines_per_cell, params.keep_fraction, params.rng_seed);
  const LineCloud lines_curr =
      generate_line_cloud(unrotated, params.bins, params.lines_per_cell,
                          params.keep_fraction, params.rng_seed);
  if (sizes) *sizes = LineCloudSizes{lines_prev.size(), lines_curr.size()};

  const Vec3 tau = register_line_clouds(lines_prev, lines_curr,
                                        params.reg_max_iter, params.reg_tol);
  return rotation * tau;
}

}  // namespace declo
