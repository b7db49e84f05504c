#pragma once

#include <vector>

#include "declo/core/geometry.hpp"
#include "declo/ingest/kitti_io.hpp"

namespace declo {

/// Segment-averaged drift, KITTI style. `segments == 0` means the
/// trajectory never reaches the shortest evaluation length; that is a
/// distinct outcome, not a zero error.
struct KittiError {
  double trans_percent = 0.0;   // translation drift, % of segment length
  double rot_deg_per_m = 0.0;   // rotation drift, degrees per meter
  int segments = 0;
};

inline KittiError evaluate_kitti(const Trajectory& gt, const Trajectory& est) {
  if (gt.size() != est.size()) throw std::invalid_argument("trajectory length mismatch");
  if (gt.size() < 2) throw std::invalid_argument("need at least 2 poses");

  std::vector<double> dist(gt.size(), 0.0);
  for (std::size_t i = 1; i < gt.size(); ++i)
    dist[i] = dist[i - 1] + (gt[i].translation - gt[i - 1].translation).norm();

  static constexpr double kLengths[] = {100, 200, 300, 400, 500, 600, 700, 800};

  KittiError err;
  double t_sum = 0.0, r_sum = 0.0;
  for (std::size_t first = 0; first < gt.size(); ++first) {
    for (double len : kLengths) {
      std::size_t last = first;
      while (last < gt.size() && dist[last] <= dist[first] + len) ++last;
      if (last >= gt.size()) break;  // longer segments will not fit either

      const RigidTransform delta_gt = compose(gt[first].inverse(), gt[last]);
      const RigidTransform delta_est = compose(est[first].inverse(), est[last]);
      const RigidTransform error = compose(delta_est.inverse(), delta_gt);
      t_sum += error.translation.norm() / len;
      r_sum += rad2deg(error.rotation.angle()) / len;
      ++err.segments;
    }
  }
  if (err.segments > 0) {
    err.trans_percent = 100.0 * t_sum / err.segments;
    err.rot_deg_per_m = r_sum / err.segments;
  }
  return err;
}

}  // namespace declo
