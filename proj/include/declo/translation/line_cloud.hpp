#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "declo/core/geometry.hpp"
#include "declo/ingest/kitti_io.hpp"

namespace declo {

/// Ground-plane polar conversion; z is ignored.
struct Polar {
  double r = 0.0;          // meters
  double theta_deg = 0.0;  // [0, 360)
};

inline Polar to_polar(const Vec3& p) {
  if (p.x() == 0.0 && p.y() == 0.0)
    throw std::runtime_error("degenerate polar point");
  Polar out;
  out.r = std::hypot(p.x(), p.y());
  double deg = rad2deg(std::atan2(p.y(), p.x()));
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg -= 360.0;
  out.theta_deg = deg;
  return out;
}

struct PolarCell {
  int ring = 0;
  int bin = 0;
};

struct LineSegment3 {
  Vec3 p0, p1;
  PolarCell cell;

  Vec3 direction() const { return p1 - p0; }
  Vec3 midpoint() const { return 0.5 * (p0 + p1); }
};

struct LineCloud {
  std::vector<LineSegment3> segments;
  std::vector<Vec3> centers;  // cached midpoints, parallel to segments

  std::size_t size() const { return segments.size(); }
};

namespace detail {

// Deterministic per-cell random stream (no library distributions, so the
// draws are identical everywhere).
struct SplitMix64 {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  std::uint64_t bounded(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<__uint128_t>(next()) * n) >> 64);
  }
};

inline SplitMix64 cell_rng(std::uint64_t seed, int ring, int bin) {
  SplitMix64 mix{seed ^ (static_cast<std::uint64_t>(ring) << 32) ^
                 (static_cast<std::uint64_t>(bin) + 0x51ED270B1A2F9E35ull)};
  mix.next();
  return mix;
}

}  // namespace detail

/// Resamples a scan into short segments: points are bucketed into polar
/// (ring, azimuth-bin) cells, random candidate lines connect each cell to
/// the next ring in the same bin, and only the shortest fraction per cell
/// survives, so segments stay on real surfaces instead of bridging gaps.
inline LineCloud generate_line_cloud(const Scan& scan, int bins,
                                     int lines_per_cell, double keep_fraction,
                                     std::uint64_t rng_seed) {
  if (bins < 1) throw std::invalid_argument("bins must be >= 1");
  if (lines_per_cell < 1) throw std::invalid_argument("lines_per_cell must be >= 1");
  if (keep_fraction <= 0.0 || keep_fraction > 1.0)
    throw std::invalid_argument("keep_fraction must be in (0, 1]");

  int max_ring = 0;
  for (int r : scan.ring) max_ring = std::max(max_ring, r);

  // Bucket point ids by (ring, bin); points on the vertical axis are skipped.
  const double bin_width = 360.0 / bins;
  std::vector<std::vector<int>> cells(static_cast<std::size_t>(max_ring + 1) * bins);
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const Vec3& p = scan.points[i];
    if (p.x() == 0.0 && p.y() == 0.0) continue;
    int bin = static_cast<int>(to_polar(p).theta_deg / bin_width);
    bin = std::min(bin, bins - 1);
    cells[static_cast<std::size_t>(scan.ring[i]) * bins + bin].push_back(
        static_cast<int>(i));
  }

  LineCloud cloud;
  for (int ring = 0; ring < max_ring; ++ring) {
    for (int bin = 0; bin < bins; ++bin) {
      const auto& lower = cells[static_cast<std::size_t>(ring) * bins + bin];
      const auto& upper = cells[static_cast<std::size_t>(ring + 1) * bins + bin];
      if (lower.empty() || upper.empty()) continue;

      auto rng = detail::cell_rng(rng_seed, ring, bin);
      std::vector<LineSegment3> candidates;
      candidates.reserve(lines_per_cell);
      for (int c = 0; c < lines_per_cell; ++c) {
        const Vec3& a = scan.points[lower[rng.bounded(lower.size())]];
        const Vec3& b = scan.points[upper[rng.bounded(upper.size())]];
        if (a == b) continue;  // zero-length line
        candidates.push_back(LineSegment3{a, b, PolarCell{ring, bin}});
      }
      if (candidates.empty()) continue;

      std::stable_sort(candidates.begin(), candidates.end(),
                       [](const LineSegment3& x, const LineSegment3& y) {
                         return x.direction().squaredNorm() <
                                y.direction().squaredNorm();
                       });
      const std::size_t keep = static_cast<std::size_t>(
          std::ceil(keep_fraction * static_cast<double>(candidates.size())));
      for (std::size_t c = 0; c < keep && c < candidates.size(); ++c)
        cloud.segments.push_back(candidates[c]);
    }
  }

  cloud.centers.reserve(cloud.segments.size());
  for (const LineSegment3& s : cloud.segments) cloud.centers.push_back(s.midpoint());
  return cloud;
}

}  // namespace declo
