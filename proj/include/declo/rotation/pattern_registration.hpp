#pragma once

#include <set>
#include <vector>

#include "declo/core/geometry.hpp"
#include "declo/core/neighbor_index.hpp"
#include "declo/normals/normal_estimation.hpp"
#include "declo/rotation/mean_shift.hpp"
#include "declo/rotation/sphere_pattern.hpp"

namespace declo {

struct RotationParams {
  std::vector<SorPass> sor_schedule = {{50, 1.0}, {30, 1.0}, {20, 0.8}};
  int sor_min_retain = 100;
  int sparse_threshold = 100;   // below this, fall back to mode seeking
  double theta_window = deg2rad(20.0);
  int grid_n = 64;
  int ms_max_iter = 50;
  double ms_eps = 1e-4;         // radians
  double gather_radius = 0.17;  // chord length around each mode
  double sphere_voxel = 0.05;   // chord length
  int reg_max_iter = 100;
  double reg_tol = 1e-5;        // radians, incremental angle
};

/// Iterative closest-direction alignment of two sphere patterns.
/// Correspondences are target-to-source nearest neighbors against a KD-tree
/// over the source set; each step solves orthogonal Procrustes via SVD with
/// a determinant guard. Returns the rotation taking source directions to
/// target directions.
inline Rotation3 register_patterns(const SpherePattern& source,
                                   const SpherePattern& target,
                                   const Rotation3& init, int max_iter,
                                   double tol) {
  if (source.points.size() < 3 || target.points.size() < 3)
    throw std::runtime_error("pattern too sparse");

  std::vector<Vec3> src(source.points.size());
  for (std::size_t i = 0; i < src.size(); ++i) src[i] = source.points[i].vec();
  const NeighborIndex src_index(src);

  Rotation3 rotation = init;
  for (int it = 0; it < max_iter; ++it) {
    // Querying with unrotated targets against the static source tree is
    // equivalent to rotating the source: distances are rotation invariant.
    const Rotation3 inv = rotation.inverse();
    Mat3 h = Mat3::Zero();
    for (const UnitVec3& t : target.points) {
      const Vec3 back = inv * t.vec();
      const int i = src_index.knn(back, 1)[0].index;
      h += (rotation * src[i]) * t.vec().transpose();
    }

    Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec3 sv = svd.singularValues();
    if (sv[1] <= 1e-12 * sv[0]) throw std::runtime_error("degenerate pattern");

    Mat3 d = Mat3::Identity();
    d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
    const Rotation3 step =
        Rotation3::from_matrix(svd.matrixV() * d * svd.matrixU().transpose());

    rotation = step * rotation;
    if (step.angle() < tol) break;
  }
  return rotation;
}

/// Pattern of one frame: iterative outlier removal, with a mode-seeking
/// fallback when too few points survive (sparse scenes): modes, ball-query
/// gathering around each mode, another removal pass, then uniform voxel
/// downsampling on the sphere.
inline SpherePattern extract_sphere_pattern(const NormalCloud& nc,
                                            const RotationParams& params) {
  const std::vector<UnitVec3> pts = to_sphere(nc);
  SpherePattern pattern =
      iterative_sor(pts, params.sor_schedule, params.sor_min_retain);
  if (pattern.points.size() >= static_cast<std::size_t>(params.sparse_threshold))
    return pattern;

  const std::vector<ModeSeed> modes = mean_shift_modes(
      pts, params.theta_window, params.grid_n, params.ms_max_iter, params.ms_eps);
  if (modes.empty()) return pattern;

  std::vector<Vec3> raw(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) raw[i] = pts[i].vec();
  const NeighborIndex index(raw);

  std::set<int> gathered;
  for (const ModeSeed& mode : modes)
    for (int id : index.radius(mode.center.vec(), params.gather_radius))
      gathered.insert(id);

  std::vector<UnitVec3> picked;
  picked.reserve(gathered.size());
  for (int id : gathered) picked.push_back(pts[id]);

  const SpherePattern cleaned =
      iterative_sor(picked, params.sor_schedule, params.sor_min_retain);
  SpherePattern out;
  out.points = voxel_downsample_sphere(cleaned.points, params.sphere_voxel);
  out.provenance = PatternProvenance::meanshift_mode;
  return out;
}

struct RotationEstimate {
  Rotation3 rotation;
  bool fallback = false;  // prediction used because registration was impossible
  std::size_t prev_pattern_size = 0;
  std::size_t curr_pattern_size = 0;
};

/// Frame-to-frame rotation from the normal patterns alone. Returns the
/// rotation mapping prev-frame directions to curr-frame directions; on an
/// unrecoverable pattern the prediction is returned with the fallback flag.
inline RotationEstimate estimate_rotation(const NormalCloud& prev,
                                          const NormalCloud& curr,
                                          const Rotation3& predicted,
                                          const RotationParams& params) {
  if (prev.size() == 0 || curr.size() == 0)
    throw std::invalid_argument("empty normal cloud");

  RotationEstimate est;
  est.rotation = predicted;

  const SpherePattern pat_prev = extract_sphere_pattern(prev, params);
  const SpherePattern pat_curr = extract_sphere_pattern(curr, params);
  est.prev_pattern_size = pat_prev.points.size();
  est.curr_pattern_size = pat_curr.points.size();

  try {
    est.rotation = register_patterns(pat_prev, pat_curr, predicted,
                                     params.reg_max_iter, params.reg_tol);
  } catch (const std::runtime_error&) {
    est.fallback = true;
  }
  return est;
}

}  // namespace declo
