#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "declo/graph/linear_prediction.hpp"
#include "declo/graph/pose_graph.hpp"
#include "declo/normals/normal_estimation.hpp"
#include "declo/pipeline/config.hpp"
#include "declo/rotation/pattern_registration.hpp"
#include "declo/translation/line_registration.hpp"

namespace declo {

/// Per-pair outcome and diagnostics. `relative` is the pose increment:
/// pose_curr = pose_prev * relative.
struct FrameResult {
  int frame_id = 0;
  RigidTransform relative;
  bool rotation_fallback = false;
  bool translation_fallback = false;
  bool sparse_pattern = false;  // mode-seeking path was needed
  std::size_t pattern_prev = 0, pattern_curr = 0;
  std::size_t lines_prev = 0, lines_curr = 0;
  double ms_normals = 0.0, ms_rotation = 0.0, ms_translation = 0.0;
  double ms_total = 0.0;

  bool fallback() const { return rotation_fallback || translation_fallback; }
};

struct SequenceResult {
  Trajectory trajectory;
  std::vector<FrameResult> frames;
};

namespace detail {

inline double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                   t0)
      .count();
}

inline NormalCloud scan_normals(const Scan& scan, const Config& cfg) {
  const NeighborIndex index(scan.points);
  NormalCloud nc = estimate_normals(scan, cfg.normals_k, &index);
  if (cfg.bilateral)
    nc = bilateral_filter_normals(nc, index, cfg.bilateral_sigma_s,
                                  cfg.bilateral_sigma_n);
  return nc;
}

}  // namespace detail

/// One step of the pipeline: normals -> rotation (prediction as the
/// initialization) -> unrotation -> translation. Stage failures fall back
/// to the prediction and are flagged.
inline FrameResult process_pair(const Scan& prev, const Scan& curr,
                                const std::vector<RigidTransform>& history,
                                const Config& cfg) {
  if (prev.points.empty() || curr.points.empty())
    throw std::invalid_argument("empty scan");

  const auto t_start = std::chrono::steady_clock::now();
  FrameResult fr;
  fr.frame_id = curr.frame_id;

  // Prediction is a pose increment; registration works on the point map
  // (its inverse).
  const RigidTransform predicted = linear_predict(history, cfg.prediction_n);
  const RigidTransform predicted_map = predicted.inverse();

  Rotation3 rot_map = predicted_map.rotation;
  Vec3 trans_map = predicted_map.translation;

  try {
    const auto t_normals = std::chrono::steady_clock::now();
    const NormalCloud nc_prev = detail::scan_normals(prev, cfg);
    const NormalCloud nc_curr = detail::scan_normals(curr, cfg);
    fr.ms_normals = detail::ms_since(t_normals);

    const auto t_rot = std::chrono::steady_clock::now();
    const SpherePattern pat_prev = extract_sphere_pattern(nc_prev, cfg.rotation);
    const SpherePattern pat_curr = extract_sphere_pattern(nc_curr, cfg.rotation);
    fr.pattern_prev = pat_prev.points.size();
    fr.pattern_curr = pat_curr.points.size();
    fr.sparse_pattern = pat_prev.provenance == PatternProvenance::meanshift_mode ||
                        pat_curr.provenance == PatternProvenance::meanshift_mode;
    try {
      rot_map = register_patterns(pat_prev, pat_curr, predicted_map.rotation,
                                  cfg.rotation.reg_max_iter, cfg.rotation.reg_tol);
    } catch (const std::runtime_error&) {
      fr.rotation_fallback = true;
    }
    fr.ms_rotation = detail::ms_since(t_rot);

    const auto t_trans = std::chrono::steady_clock::now();
    TranslationParams tp = cfg.translation;
    tp.rng_seed = cfg.rng_seed;
    try {
      LineCloudSizes sizes;
      trans_map = estimate_translation(prev, curr, rot_map, tp, &sizes);
      fr.lines_prev = sizes.source_lines;
      fr.lines_curr = sizes.target_lines;
    } catch (const std::runtime_error&) {
      fr.translation_fallback = true;
    }
    fr.ms_translation = detail::ms_since(t_trans);
  } catch (const std::runtime_error&) {
    // normals unavailable (e.g. scan smaller than k): prediction only
    fr.rotation_fallback = true;
    fr.translation_fallback = true;
  }

  fr.relative = RigidTransform(rot_map, trans_map).inverse();
  fr.ms_total = detail::ms_since(t_start);
  return fr;
}

/// Runs consecutive pairs, builds the pose graph (sequential edges, plus
/// frame-skipping constraints measured by a second registration pass), and
/// optimizes once at the end. Trajectory poses come from the graph nodes.
inline SequenceResult run_sequence(const std::vector<Scan>& scans, const Config& cfg) {
  if (scans.size() < 2) throw std::invalid_argument("need at least 2 scans");
  cfg.validate();

  Mat6 info = Mat6::Identity();
  info.topLeftCorner<3, 3>() *= cfg.rot_info_scale;

  PoseGraph graph;
  std::vector<RigidTransform> history;
  SequenceResult result;

  for (std::size_t i = 1; i < scans.size(); ++i) {
    FrameResult fr = process_pair(scans[i - 1], scans[i], history, cfg);
    graph.add_sequential_edge(static_cast<int>(i), fr.relative, info);
    history.push_back(fr.relative);
    result.frames.push_back(fr);
  }

  if (cfg.skip_edges) {
    for (std::size_t a = 0; a + 2 < scans.size(); ++a) {
      const RigidTransform chained =
          compose(result.frames[a].relative, result.frames[a + 1].relative);
      const FrameResult skip =
          process_pair(scans[a], scans[a + 2], {chained}, cfg);
      // Overlap gate: keep the edge only if registration ran cleanly.
      if (!skip.fallback() && !skip.sparse_pattern)
        graph.add_skip_edge(static_cast<int>(a), static_cast<int>(a + 2),
                            skip.relative, info);
    }
  }

  if (cfg.graph_optimize) graph.optimize(cfg.lm_max_iter, cfg.lm_tol);

  result.trajectory = graph.poses();
  return result;
}

/// Directory variant: loads NNNNNN.bin scans, aborts naming the offending
/// frame on a bad file.
inline SequenceResult run_sequence(const std::string& scan_dir, const Config& cfg) {
  const std::vector<std::string> files = list_scan_files(scan_dir);
  std::vector<Scan> scans;
  scans.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    try {
      scans.push_back(read_scan_binary(files[i], cfg.ring_count));
      scans.back().frame_id = static_cast<int>(i);
    } catch (const std::exception& e) {
      throw std::runtime_error("frame " + std::to_string(i) + ": " + e.what());
    }
  }
  return run_sequence(scans, cfg);
}

/// Diagnostics table, one row per processed pair.
inline void write_diagnostics_csv(const std::vector<FrameResult>& frames,
                                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv: " + path);
  out << "frame,rot_deg,trans_m,fallback,pattern_prev,pattern_curr,"
         "lines_prev,lines_curr,ms_total\n";
  char buf[64];
  for (const FrameResult& fr : frames) {
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%d,%zu,%zu,%zu,%zu,%.3f\n",
                  fr.frame_id, rad2deg(fr.relative.rotation.angle()),
                  fr.relative.translation.norm(), fr.fallback() ? 1 : 0,
                  fr.pattern_prev, fr.pattern_curr, fr.lines_prev, fr.lines_curr,
                  fr.ms_total);
    out << buf;
  }
}

}  // namespace declo
