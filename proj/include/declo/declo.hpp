#pragma once

// Decoupled LiDAR odometry: rotation from normal patterns on the unit
// sphere, translation from line-cloud registration of the unrotated scans,
// linear motion prediction and pose-graph refinement.

#include "declo/core/geometry.hpp"
#include "declo/core/neighbor_index.hpp"
#include "declo/graph/linear_prediction.hpp"
#include "declo/graph/pose_graph.hpp"
#include "declo/graph/twist.hpp"
#include "declo/ingest/kitti_io.hpp"
#include "declo/normals/normal_estimation.hpp"
#include "declo/pipeline/config.hpp"
#include "declo/pipeline/evaluate.hpp"
#include "declo/pipeline/pipeline.hpp"
#include "declo/pipeline/synthetic.hpp"
#include "declo/rotation/mean_shift.hpp"
#include "declo/rotation/pattern_registration.hpp"
#include "declo/rotation/sphere_pattern.hpp"
#include "declo/translation/line_cloud.hpp"
#include "declo/translation/line_registration.hpp"
