#pragma once

#include <map>
#include <tuple>
#include <vector>

#include "declo/core/geometry.hpp"
#include "declo/core/neighbor_index.hpp"

namespace declo {

enum class PatternProvenance { sor_retained, meanshift_mode };

/// Retained density pattern of normal directions on the unit sphere.
struct SpherePattern {
  std::vector<UnitVec3> points;
  PatternProvenance provenance = PatternProvenance::sor_retained;
};

/// One pass of statistical outlier removal on directions. Keeps points whose
/// mean distance to their k nearest neighbors is at most mean + alpha * std
/// of that statistic over the set. One-sided: dense points always survive.
inline std::vector<UnitVec3> statistical_outlier_removal(
    const std::vector<UnitVec3>& points, int k, double alpha) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (alpha <= 0.0) throw std::invalid_argument("alpha must be > 0");
  if (points.size() <= static_cast<std::size_t>(k)) return points;

  std::vector<Vec3> raw(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) raw[i] = points[i].vec();
  const NeighborIndex index(raw);

  std::vector<double> mean_dist(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto nbrs = index.knn(raw[i], k + 1);
    double sum = 0.0;
    int used = 0;
    for (const Neighbor& n : nbrs) {
      if (n.index == static_cast<int>(i)) continue;  // skip self
      sum += n.distance;
      if (++used == k) break;
    }
    mean_dist[i] = used > 0 ? sum / used : 0.0;
  }

  double mu = 0.0;
  for (double d : mean_dist) mu += d;
  mu /= static_cast<double>(mean_dist.size());
  double var = 0.0;
  for (double d : mean_dist) var += (d - mu) * (d - mu);
  const double sigma = std::sqrt(var / static_cast<double>(mean_dist.size()));

  const double cutoff = mu + alpha * sigma;
  std::vector<UnitVec3> kept;
  kept.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    if (mean_dist[i] <= cutoff) kept.push_back(points[i]);
  return kept;
}

struct SorPass {
  int k = 20;
  double alpha = 1.0;
};

/// Applies the removal schedule pass by pass, stopping before any pass that
/// would shrink the set below min_retain.
inline SpherePattern iterative_sor(const std::vector<UnitVec3>& points,
                                   const std::vector<SorPass>& schedule,
                                   std::size_t min_retain) {
  if (schedule.empty()) throw std::invalid_argument("empty SOR schedule");
  SpherePattern pattern;
  pattern.points = points;
  pattern.provenance = PatternProvenance::sor_retained;
  for (const SorPass& pass : schedule) {
    auto next = statistical_outlier_removal(pattern.points, pass.k, pass.alpha);
    if (next.size() < min_retain) break;
    pattern.points = std::move(next);
  }
  return pattern;
}

/// Uniform downsampling on the sphere: a voxel grid over the embedding space,
/// each occupied voxel replaced by its renormalized centroid.
inline std::vector<UnitVec3> voxel_downsample_sphere(
    const std::vector<UnitVec3>& points, double voxel_size) {
  if (voxel_size <= 0.0) throw std::invalid_argument("voxel size must be > 0");
  std::map<std::tuple<int, int, int>, std::pair<Vec3, int>> cells;
  for (const UnitVec3& p : points) {
    const auto key = std::make_tuple(
        static_cast<int>(std::floor(p.x() / voxel_size)),
        static_cast<int>(std::floor(p.y() / voxel_size)),
        static_cast<int>(std::floor(p.z() / voxel_size)));
    auto& cell = cells[key];
    cell.first += p.vec();
    cell.second += 1;
  }
  std::vector<UnitVec3> out;
  out.reserve(cells.size());
  for (const auto& [key, cell] : cells) {
    const Vec3 centroid = cell.first / cell.second;
    if (centroid.norm() > 1e-12) out.push_back(UnitVec3(centroid));
  }
  return out;
}

}  // namespace declo
