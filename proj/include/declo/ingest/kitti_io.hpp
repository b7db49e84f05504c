#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "declo/core/geometry.hpp"

namespace declo {

/// One LiDAR frame: points in the sensor frame plus per-point ring index
/// and intensity.
struct Scan {
  std::vector<Vec3> points;
  std::vector<int> ring;          // same length as points
  std::vector<float> intensity;   // same length as points
  int frame_id = 0;
  int dropped = 0;                // non-finite returns discarded at decode
};

/// Absolute poses over time; pose 0 is the odometry origin.
using Trajectory = std::vector<RigidTransform>;

/// Per-point ring indices from equal vertical-angle intervals.
/// Monotone: a larger elevation never maps to a smaller ring.
inline std::vector<int> assign_rings(const std::vector<Vec3>& points, int ring_count) {
  if (ring_count < 2) throw std::invalid_argument("ring_count must be >= 2");
  std::vector<int> rings(points.size(), 0);
  if (points.empty()) return rings;

  std::vector<double> phi(points.size());
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3& p = points[i];
    phi[i] = std::atan2(p.z(), std::hypot(p.x(), p.y()));
    lo = std::min(lo, phi[i]);
    hi = std::max(hi, phi[i]);
  }
  const double range = hi - lo;
  if (range <= 0.0) return rings;  // coplanar in elevation: everything ring 0

  for (std::size_t i = 0; i < points.size(); ++i) {
    int r = static_cast<int>((phi[i] - lo) / range * ring_count);
    rings[i] = std::min(r, ring_count - 1);
  }
  return rings;
}

/// Reads a packed float32 x,y,z,reflectance scan file. Non-finite returns are
/// dropped and counted.
inline Scan read_scan_binary(const std::string& path, int ring_count = 64) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("cannot open scan file: " + path);
  const std::streamoff size = in.tellg();
  if (size % 16 != 0) throw std::runtime_error("truncated scan");
  in.seekg(0);

  std::vector<char> buf(static_cast<std::size_t>(size));
  in.read(buf.data(), size);
  if (!in) throw std::runtime_error("read failed: " + path);

  Scan scan;
  const std::size_t n = buf.size() / 16;
  scan.points.reserve(n);
  scan.intensity.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    float f[4];
    std::memcpy(f, buf.data() + i * 16, 16);
    if (!std::isfinite(f[0]) || !std::isfinite(f[1]) || !std::isfinite(f[2]) ||
        !std::isfinite(f[3])) {
      ++scan.dropped;
      continue;
    }
    scan.points.emplace_back(f[0], f[1], f[2]);
    scan.intensity.push_back(f[3]);
  }
  scan.ring = assign_rings(scan.points, ring_count);
  return scan;
}

/// Inverse of read_scan_binary for finite-valued scans (bit-exact re-encode).
inline void write_scan_binary(const Scan& scan, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write scan file: " + path);
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const float f[4] = {static_cast<float>(scan.points[i].x()),
                        static_cast<float>(scan.points[i].y()),
                        static_cast<float>(scan.points[i].z()),
                        i < scan.intensity.size() ? scan.intensity[i] : 0.0f};
    out.write(reinterpret_cast<const char*>(f), 16);
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

/// One pose per line: row-major 3x4 [R | t], 12 space-separated values.
inline void write_poses(const Trajectory& traj, const std::string& path) {
  if (traj.empty()) throw std::invalid_argument("empty trajectory");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write pose file: " + path);
  char buf[32];
  for (const RigidTransform& pose : traj) {
    const Mat3& r = pose.rotation.matrix();
    const Vec3& t = pose.translation;
    const double row[12] = {r(0, 0), r(0, 1), r(0, 2), t.x(),
                            r(1, 0), r(1, 1), r(1, 2), t.y(),
                            r(2, 0), r(2, 1), r(2, 2), t.z()};
    for (int i = 0; i < 12; ++i) {
      std::snprintf(buf, sizeof(buf), "%.12g", row[i]);
      out << buf << (i == 11 ? '\n' : ' ');
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline Trajectory read_poses(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pose file: " + path);
  Trajectory traj;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    double v[12];
    for (int i = 0; i < 12; ++i)
      if (!(ss >> v[i]))
        throw std::runtime_error("malformed pose line " + std::to_string(lineno));
    std::string rest;
    if (ss >> rest)
      throw std::runtime_error("malformed pose line " + std::to_string(lineno));
    Mat3 r;
    r << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
    // Ground-truth files carry limited precision; snap to the nearest rotation.
    traj.push_back(RigidTransform(Rotation3::project(r), Vec3(v[3], v[7], v[11])));
  }
  return traj;
}

/// Zero-padded NNNNNN.bin files of a scan directory, in frame order.
inline std::vector<std::string> list_scan_files(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir);
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".bin")
      files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace declo
