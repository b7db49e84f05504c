#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "declo/core/geometry.hpp"
#include "declo/ingest/kitti_io.hpp"
#include "declo/translation/line_cloud.hpp"  // SplitMix64

namespace declo {

/// Vertical rectangular wall from (x0,y0) to (x1,y1), spanning [z0, z1].
struct WallSpec {
  double x0, y0, x1, y1, z0, z1;
};

/// Vertical cylinder (side surface only).
struct CylinderSpec {
  double cx, cy, radius, z0, z1;
};

struct SensorModel {
  int ring_count = 64;
  int rays_per_ring = 360;
  double elev_min = deg2rad(-24.8);
  double elev_max = deg2rad(2.0);
  double max_range = 120.0;
  double noise_sigma = 0.01;  // meters along the ray
};

/// Scene geometry plus sensor model for the ray-cast scan generator.
struct SyntheticScene {
  std::vector<double> grounds;  // horizontal planes, world z
  std::vector<WallSpec> walls;
  std::vector<CylinderSpec> cylinders;
  SensorModel sensor;
  // per-frame motion for trajectory generation (sensor-frame step)
  RigidTransform step;

  std::size_t surface_count() const {
    return grounds.size() + walls.size() + cylinders.size();
  }
};

/// Ground plane, two perpendicular walls, one cylinder. Sized so a ~100 m
/// drive keeps all structures in view.
inline SyntheticScene default_scene() {
  SyntheticScene scene;
  scene.grounds.push_back(-1.7);
  scene.walls.push_back(WallSpec{-80.0, 45.0, 120.0, 45.0, -2.0, 6.0});
  scene.walls.push_back(WallSpec{45.0, -80.0, 45.0, 120.0, -2.0, 6.0});
  scene.cylinders.push_back(CylinderSpec{-20.0, 10.0, 2.0, -2.0, 5.0});
  return scene;
}

/// Poses [I, step, step^2, ...] for a constant per-frame motion.
inline Trajectory make_trajectory(const RigidTransform& step, int frames) {
  Trajectory traj;
  traj.reserve(frames);
  RigidTransform pose;
  for (int i = 0; i < frames; ++i) {
    traj.push_back(pose);
    pose = compose(pose, step);
  }
  return traj;
}

namespace detail {

inline double gaussian(SplitMix64& rng) {
  // Box-Muller; library normal distributions are not reproducible across
  // implementations.
  const double u1 =
      (static_cast<double>(rng.next() >> 11) + 1.0) / 9007199254740993.0;
  const double u2 = static_cast<double>(rng.next() >> 11) / 9007199254740992.0;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

inline void consider(double t, double best_cap, std::optional<double>& best) {
  if (t > 1e-6 && t < best_cap && (!best || t < *best)) best = t;
}

// Nearest ray-scene intersection distance, if any.
inline std::optional<double> ray_hit(const SyntheticScene& scene, const Vec3& origin,
                                     const Vec3& dir) {
  std::optional<double> best;
  const double cap = scene.sensor.max_range;

  for (double gz : scene.grounds) {
    if (dir.z() == 0.0) continue;
    consider((gz - origin.z()) / dir.z(), cap, best);
  }

  for (const WallSpec& w : scene.walls) {
    const double ex = w.x1 - w.x0, ey = w.y1 - w.y0;
    const double len2 = ex * ex + ey * ey;
    if (len2 == 0.0) continue;
    // plane normal (in the ground plane)
    const double nx = -ey, ny = ex;
    const double denom = nx * dir.x() + ny * dir.y();
    if (denom == 0.0) continue;
    const double t = (nx * (w.x0 - origin.x()) + ny * (w.y0 - origin.y())) / denom;
    if (t <= 1e-6 || t >= cap) continue;
    const Vec3 hit = origin + t * dir;
    const double s = ((hit.x() - w.x0) * ex + (hit.y() - w.y0) * ey) / len2;
    if (s < 0.0 || s > 1.0 || hit.z() < w.z0 || hit.z() > w.z1) continue;
    consider(t, cap, best);
  }

  for (const CylinderSpec& c : scene.cylinders) {
    const double ox = origin.x() - c.cx, oy = origin.y() - c.cy;
    const double a = dir.x() * dir.x() + dir.y() * dir.y();
    if (a == 0.0) continue;
    const double b = 2.0 * (ox * dir.x() + oy * dir.y());
    const double q = ox * ox + oy * oy - c.radius * c.radius;
    const double disc = b * b - 4.0 * a * q;
    if (disc < 0.0) continue;
    const double sq = std::sqrt(disc);
    for (const double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
      if (t <= 1e-6 || t >= cap) continue;
      const double z = origin.z() + t * dir.z();
      if (z < c.z0 || z > c.z1) continue;
      consider(t, cap, best);
    }
  }
  return best;
}

}  // namespace detail

/// Ray-cast LiDAR simulation: rays at ring elevations x azimuth steps, the
/// nearest surface hit kept, Gaussian range noise added. Points land in the
/// sensor frame; ring indices are exact by construction.
inline std::vector<Scan> synth_sequence(const SyntheticScene& scene,
                                        const Trajectory& trajectory,
                                        std::uint64_t seed = 0) {
  if (trajectory.empty()) throw std::invalid_argument("empty trajectory");
  if (scene.surface_count() == 0) throw std::invalid_argument("scene has no surfaces");
  if (scene.sensor.noise_sigma < 0.0) throw std::invalid_argument("negative noise");
  if (scene.sensor.ring_count < 1 || scene.sensor.rays_per_ring < 1)
    throw std::invalid_argument("bad sensor model");

  const SensorModel& sm = scene.sensor;
  std::vector<Scan> scans;
  scans.reserve(trajectory.size());

  for (std::size_t f = 0; f < trajectory.size(); ++f) {
    const RigidTransform& pose = trajectory[f];
    detail::SplitMix64 rng{seed ^ (0xA24BAED4963EE407ull + f)};
    rng.next();

    Scan scan;
    scan.frame_id = static_cast<int>(f);
    for (int ring = 0; ring < sm.ring_count; ++ring) {
      const double elev =
          sm.ring_count == 1
              ? sm.elev_min
              : sm.elev_min + (sm.elev_max - sm.elev_min) * ring / (sm.ring_count - 1);
      const double ce = std::cos(elev), se = std::sin(elev);
      for (int a = 0; a < sm.rays_per_ring; ++a) {
        const double az = 2.0 * kPi * a / sm.rays_per_ring;
        const Vec3 dir_sensor(ce * std::cos(az), ce * std::sin(az), se);
        const Vec3 dir_world = pose.rotation * dir_sensor;
        const auto hit = detail::ray_hit(scene, pose.translation, dir_world);
        if (!hit) continue;
        double range = *hit;
        if (sm.noise_sigma > 0.0) {
          range += sm.noise_sigma * detail::gaussian(rng);
          if (range <= 1e-3) continue;
        }
        scan.points.push_back(range * dir_sensor);
        scan.ring.push_back(ring);
        scan.intensity.push_back(0.0f);
      }
    }
    scans.push_back(std::move(scan));
  }
  return scans;
}

/// Scene spec file: `key = value` lines with # comments. Repeatable surface
/// keys: `ground = z`, `wall = x0 y0 x1 y1 z0 z1`,
/// `cylinder = cx cy r z0 z1`. Sensor keys: rings, rays, elev_min_deg,
/// elev_max_deg, max_range, noise. Motion keys: step_translation = x y z,
/// step_rotation_deg = rx ry rz.
inline SyntheticScene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene file: " + path);

  SyntheticScene scene;
  Vec3 step_t = Vec3::Zero(), step_r = Vec3::Zero();
  std::string line;
  int lineno = 0;
  auto bad = [&](const std::string& why) {
    return std::runtime_error("scene line " + std::to_string(lineno) + ": " + why);
  };

  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos) throw bad("not key = value");
    std::istringstream key_ss(line.substr(0, eq)), val_ss(line.substr(eq + 1));
    std::string key;
    key_ss >> key;

    auto nums = [&](int n) {
      std::vector<double> v(n);
      for (int i = 0; i < n; ++i)
        if (!(val_ss >> v[i])) throw bad("expected " + std::to_string(n) + " numbers");
      double extra;
      if (val_ss >> extra) throw bad("too many values");
      return v;
    };

    if (key == "ground") scene.grounds.push_back(nums(1)[0]);
    else if (key == "wall") {
      const auto v = nums(6);
      scene.walls.push_back(WallSpec{v[0], v[1], v[2], v[3], v[4], v[5]});
    } else if (key == "cylinder") {
      const auto v = nums(5);
      scene.cylinders.push_back(CylinderSpec{v[0], v[1], v[2], v[3], v[4]});
    } else if (key == "rings") scene.sensor.ring_count = static_cast<int>(nums(1)[0]);
    else if (key == "rays") scene.sensor.rays_per_ring = static_cast<int>(nums(1)[0]);
    else if (key == "elev_min_deg") scene.sensor.elev_min = deg2rad(nums(1)[0]);
    else if (key == "elev_max_deg") scene.sensor.elev_max = deg2rad(nums(1)[0]);
    else if (key == "max_range") scene.sensor.max_range = nums(1)[0];
    else if (key == "noise") scene.sensor.noise_sigma = nums(1)[0];
    else if (key == "step_translation") {
      const auto v = nums(3);
      step_t = Vec3(v[0], v[1], v[2]);
    } else if (key == "step_rotation_deg") {
      const auto v = nums(3);
      step_r = Vec3(deg2rad(v[0]), deg2rad(v[1]), deg2rad(v[2]));
    } else throw bad("unknown scene key: " + key);
  }
  scene.step = RigidTransform(Rotation3::from_axis_angle(step_r), step_t);
  if (scene.surface_count() == 0) throw std::runtime_error("scene has no surfaces");
  return scene;
}

}  // namespace declo
