#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "declo/ingest/kitti_io.hpp"
#include "test_support.hpp"

using namespace declo;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "declo_ingest_test";
  fs::create_directories(dir);
  return dir / name;
}

void write_bytes(const fs::path& p, const std::vector<float>& floats) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(floats.data()),
            static_cast<std::streamsize>(floats.size() * sizeof(float)));
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::vector<char>((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("scan decode: single point") {
  const auto p = temp_file("one.bin");
  write_bytes(p, {1.0f, 2.0f, 3.0f, 0.5f});
  const Scan scan = read_scan_binary(p.string());
  REQUIRE(scan.points.size() == 1);
  CHECK(scan.points[0] == Vec3(1, 2, 3));
  CHECK(scan.intensity[0] == 0.5f);
  CHECK(scan.dropped == 0);
}

TEST_CASE("scan decode: empty file is an empty scan") {
  const auto p = temp_file("empty.bin");
  write_bytes(p, {});
  const Scan scan = read_scan_binary(p.string());
  CHECK(scan.points.empty());
  CHECK(scan.ring.empty());
}

TEST_CASE("scan decode: bad size and non-finite points") {
  const auto p = temp_file("truncated.bin");
  {
    std::ofstream out(p, std::ios::binary);
    const char junk[10] = {};
    out.write(junk, sizeof(junk));
  }
  CHECK_THROWS_WITH(read_scan_binary(p.string()), "truncated scan");

  const auto q = temp_file("nans.bin");
  const float nan = std::numeric_limits<float>::quiet_NaN();
  write_bytes(q, {1, 0, 0, 0, nan, 0, 0, 0, 0, 1, 0, 0});
  const Scan scan = read_scan_binary(q.string());
  CHECK(scan.points.size() == 2);
  CHECK(scan.dropped == 1);
}

TEST_CASE("scan re-encode is bit-exact for finite files") {
  testsup::Rng rng(21);
  std::vector<float> floats;
  for (int i = 0; i < 64 * 4; ++i)
    floats.push_back(static_cast<float>(rng.uniform(-80.0, 80.0)));
  const auto p = temp_file("roundtrip.bin");
  write_bytes(p, floats);

  const Scan scan = read_scan_binary(p.string());
  const auto q = temp_file("roundtrip_out.bin");
  write_scan_binary(scan, q.string());
  CHECK(slurp(p) == slurp(q));
}

TEST_CASE("assign_rings: boundary points and equal angles") {
  std::vector<Vec3> pts;
  // elevations from -24 to +2 degrees
  for (int i = 0; i < 10; ++i) {
    const double phi = deg2rad(-24.0 + 26.0 * i / 9.0);
    pts.emplace_back(std::cos(phi), 0.0, std::sin(phi));
  }
  const auto rings = assign_rings(pts, 64);
  CHECK(rings.front() == 0);
  CHECK(rings.back() == 63);

  const std::vector<Vec3> same_phi = {{1, 0, 1}, {0, 2, 2}, {3, 0, 0}, {0, 1, 0}};
  const auto r2 = assign_rings(same_phi, 32);
  CHECK(r2[0] == r2[1]);  // identical elevation angle
  CHECK(r2[2] == r2[3]);

  CHECK_THROWS_AS(assign_rings(pts, 1), std::invalid_argument);
}

TEST_CASE("assign_rings: uniform elevations give a flat histogram") {
  const double lo = deg2rad(-24.0), hi = deg2rad(2.0);
  std::vector<Vec3> pts;
  for (int i = 0; i < 640; ++i) {
    const double phi = lo + (hi - lo) * i / 639.0;
    pts.emplace_back(std::cos(phi), 0.0, std::sin(phi));
  }
  const auto rings = assign_rings(pts, 64);

  std::vector<int> hist(64, 0);
  for (int r : rings) {
    REQUIRE(r >= 0);
    REQUIRE(r < 64);
    ++hist[r];
  }
  for (int h : hist) CHECK(h == 10);

  // monotone: larger elevation never gets a smaller ring
  for (std::size_t i = 1; i < rings.size(); ++i) CHECK(rings[i] >= rings[i - 1]);
}

TEST_CASE("assign_rings: coplanar input and permutation equivariance") {
  const std::vector<Vec3> flat = {{1, 0, 0}, {0, 2, 0}, {-3, 1, 0}};
  CHECK(assign_rings(flat, 64) == std::vector<int>{0, 0, 0});

  testsup::Rng rng(22);
  std::vector<Vec3> pts(200);
  for (Vec3& p : pts) p = rng.vec3(-30, 30);
  const auto base = assign_rings(pts, 16);

  std::vector<int> perm(pts.size());
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = perm.size(); i > 1; --i)
    std::swap(perm[i - 1], perm[rng.uniform_int(static_cast<int>(i))]);

  std::vector<Vec3> shuffled(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) shuffled[i] = pts[perm[i]];
  const auto shuffled_rings = assign_rings(shuffled, 16);
  for (std::size_t i = 0; i < pts.size(); ++i)
    CHECK(shuffled_rings[i] == base[perm[i]]);
}

TEST_CASE("pose file: identity and pure translation lines") {
  const auto p = temp_file("poses.txt");
  Trajectory traj{RigidTransform::identity(),
                  RigidTransform(Rotation3::identity(), Vec3(1, 2, 3))};
  write_poses(traj, p.string());

  std::ifstream in(p);
  std::string line1, line2;
  std::getline(in, line1);
  std::getline(in, line2);
  CHECK(line1 == "1 0 0 0 0 1 0 0 0 0 1 0");
  CHECK(line2 == "1 0 0 1 0 1 0 2 0 0 1 3");
}

TEST_CASE("pose file round trip within 1e-6 on random trajectories") {
  testsup::Rng rng(23);
  Trajectory traj;
  traj.push_back(RigidTransform::identity());
  for (int i = 0; i < 100; ++i)
    traj.push_back(testsup::random_transform(rng, kPi * 0.9, 500.0));

  const auto p = temp_file("random_poses.txt");
  write_poses(traj, p.string());
  const Trajectory back = read_poses(p.string());

  REQUIRE(back.size() == traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    CHECK((back[i].translation - traj[i].translation).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((back[i].rotation.matrix() - traj[i].rotation.matrix()).cwiseAbs().maxCoeff() <
          1e-6);
  }
}

TEST_CASE("pose file: trailing whitespace tolerated, bad token count rejected") {
  const auto p = temp_file("tolerant.txt");
  {
    std::ofstream out(p);
    out << "1 0 0 0 0 1 0 0 0 0 1 0   \n\n";
  }
  CHECK(read_poses(p.string()).size() == 1);

  const auto q = temp_file("malformed.txt");
  {
    std::ofstream out(q);
    out << "1 0 0 0 0 1 0 0 0 0 1 0\n";
    out << "1 0 0 0 0 1 0 0 0 0 1\n";  // 11 tokens
  }
  CHECK_THROWS_WITH(read_poses(q.string()), "malformed pose line 2");
}

TEST_CASE("write_poses rejects an empty trajectory") {
  CHECK_THROWS_AS(write_poses({}, temp_file("nope.txt").string()),
                  std::invalid_argument);
}
