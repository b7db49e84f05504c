#include <catch2/catch_amalgamated.hpp>

#include "declo/normals/normal_estimation.hpp"
#include "declo/rotation/mean_shift.hpp"
#include "declo/rotation/pattern_registration.hpp"
#include "declo/rotation/sphere_pattern.hpp"
#include "test_support.hpp"

using namespace declo;

namespace {

// von Mises-Fisher samples around mu (tangent-normal decomposition).
std::vector<UnitVec3> vmf_samples(testsup::Rng& rng, const UnitVec3& mu,
                                  double kappa, int n) {
  const TangentBasis tb = tangent_basis(mu);
  std::vector<UnitVec3> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    const double w =
        1.0 + std::log(u + (1.0 - u) * std::exp(-2.0 * kappa)) / kappa;
    const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    out.push_back(UnitVec3(w * mu.vec() + s * std::cos(phi) * tb.e1 +
                           s * std::sin(phi) * tb.e2));
  }
  return out;
}

std::vector<UnitVec3> cap_samples(testsup::Rng& rng, const UnitVec3& center,
                                  double radius_rad, int n) {
  const TangentBasis tb = tangent_basis(center);
  std::vector<UnitVec3> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double r = radius_rad * std::sqrt(rng.uniform());
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    out.push_back(riemann_exp(
        center, Eigen::Vector2d(r * std::cos(phi), r * std::sin(phi))));
  }
  return out;
}

UnitVec3 mean_direction(const std::vector<UnitVec3>& dirs) {
  Vec3 sum = Vec3::Zero();
  for (const UnitVec3& d : dirs) sum += d.vec();
  return UnitVec3(sum);
}

std::vector<UnitVec3> rotate_all(const Rotation3& r, const std::vector<UnitVec3>& in) {
  std::vector<UnitVec3> out;
  out.reserve(in.size());
  for (const UnitVec3& d : in) out.push_back(r * d);
  return out;
}

// Small structured scene as raw points: ground plane plus two walls.
std::vector<Vec3> scene_points(testsup::Rng& rng, double jitter = 0.0) {
  std::vector<Vec3> pts;
  for (double x = -10; x <= 10; x += 0.5)
    for (double y = -10; y <= 10; y += 0.5)
      pts.emplace_back(x + jitter * rng.gaussian(), y + jitter * rng.gaussian(),
                       -1.5 + jitter * rng.gaussian());
  for (double x = -10; x <= 10; x += 0.3)
    for (double z = -1.0; z <= 3.0; z += 0.3)
      pts.emplace_back(x + jitter * rng.gaussian(), 8.0 + jitter * rng.gaussian(),
                       z + jitter * rng.gaussian());
  for (double y = -10; y <= 10; y += 0.3)
    for (double z = -1.0; z <= 3.0; z += 0.3)
      pts.emplace_back(9.0 + jitter * rng.gaussian(), y + jitter * rng.gaussian(),
                       z + jitter * rng.gaussian());
  return pts;
}

NormalCloud normals_of(const std::vector<Vec3>& pts) {
  Scan s;
  s.points = pts;
  s.ring.assign(pts.size(), 0);
  return estimate_normals(s, 20);
}

}  // namespace

TEST_CASE("SOR keeps a dense cap and rejects scattered points") {
  testsup::Rng rng(41);
  const UnitVec3 center(1, 2, 0.5);
  std::vector<UnitVec3> pts = cap_samples(rng, center, deg2rad(5.0), 200);
  for (int i = 0; i < 20; ++i) pts.push_back(UnitVec3(rng.unit3()));

  const auto kept = statistical_outlier_removal(pts, 10, 1.0);

  int cap_kept = 0, noise_kept = 0;
  for (const UnitVec3& p : kept) {
    bool in_cap = p.angle_to(center) < deg2rad(5.0) + 1e-9;
    (in_cap ? cap_kept : noise_kept)++;
  }
  CHECK(cap_kept == 200);
  CHECK(noise_kept <= 2);  // >= 90% of the scattered points removed
}

TEST_CASE("SOR trivial cases") {
  std::vector<UnitVec3> same(25, UnitVec3(0, 0, 1));
  CHECK(statistical_outlier_removal(same, 5, 1.0).size() == 25);

  testsup::Rng rng(42);
  const auto cluster = cap_samples(rng, UnitVec3(0, 1, 0), deg2rad(3.0), 100);
  CHECK(statistical_outlier_removal(cluster, 10, 2.0).size() == 100);

  // too few points: unchanged
  std::vector<UnitVec3> tiny = {UnitVec3(1, 0, 0), UnitVec3(0, 1, 0)};
  CHECK(statistical_outlier_removal(tiny, 5, 1.0).size() == 2);
}

TEST_CASE("iterative SOR: permissive pass, shrinkage, retain floor") {
  testsup::Rng rng(43);
  std::vector<UnitVec3> pts = cap_samples(rng, UnitVec3(0, 0, 1), deg2rad(6.0), 300);
  for (int i = 0; i < 60; ++i) pts.push_back(UnitVec3(rng.unit3()));

  // one permissive pass changes nothing
  const SpherePattern permissive = iterative_sor(pts, {{10, 10.0}}, 0);
  CHECK(permissive.points.size() == pts.size());

  // monotone shrinkage, each stage a subset of the previous
  auto contains = [](const std::vector<UnitVec3>& set, const UnitVec3& p) {
    for (const UnitVec3& q : set)
      if (q.vec() == p.vec()) return true;
    return false;
  };
  const SpherePattern first = iterative_sor(pts, {{20, 1.0}}, 0);
  const SpherePattern second = iterative_sor(pts, {{20, 1.0}, {15, 0.8}}, 0);
  CHECK(second.points.size() <= first.points.size());
  for (const UnitVec3& p : second.points) CHECK(contains(first.points, p));

  // the floor stops further passes
  const SpherePattern floored =
      iterative_sor(pts, {{20, 1.0}, {15, 0.1}, {10, 0.1}}, 250);
  CHECK(floored.points.size() >= 250);

  CHECK_THROWS_AS(iterative_sor(pts, {}, 10), std::invalid_argument);
}

TEST_CASE("tangent maps: trivial values") {
  const UnitVec3 base(0, 0, 1);
  CHECK(riemann_log(base, base).norm() == 0.0);

  // 90 degrees along the first tangent axis (x for a z base)
  const Eigen::Vector2d quarter = riemann_log(base, UnitVec3(1, 0, 0));
  CHECK(std::abs(quarter.x() - kPi / 2.0) < 1e-12);
  CHECK(std::abs(quarter.y()) < 1e-12);

  const UnitVec3 back = riemann_exp(base, Eigen::Vector2d(kPi / 2.0, 0.0));
  CHECK((back.vec() - Vec3(1, 0, 0)).norm() < 1e-12);

  CHECK_THROWS_WITH(riemann_log(base, UnitVec3(0, 0, -1)), "antipodal point");
  CHECK_THROWS_AS(riemann_exp(base, Eigen::Vector2d(kPi, 0)), std::invalid_argument);
}

TEST_CASE("tangent maps: round trip and arc length on random pairs") {
  testsup::Rng rng(44);
  for (int i = 0; i < 1000; ++i) {
    const UnitVec3 base(rng.unit3());
    const UnitVec3 p(rng.unit3());
    if (base.dot(p) <= -1.0 + 1e-6) continue;

    const Eigen::Vector2d v = riemann_log(base, p);
    CHECK(std::abs(v.norm() - std::acos(std::clamp(base.dot(p), -1.0, 1.0))) < 1e-9);
    CHECK(riemann_exp(base, v).angle_to(p) < 1e-9);
  }
}

TEST_CASE("mean shift: point mass collapses to a single mode") {
  const UnitVec3 d(0.3, -0.5, 0.8);
  std::vector<UnitVec3> normals(137, d);
  const auto modes = mean_shift_modes(normals, deg2rad(20.0), 1000, 50, 1e-6);
  REQUIRE(modes.size() == 1);
  CHECK(modes[0].center.angle_to(d) < 1e-9);
  CHECK(modes[0].support_count == 137);
}

TEST_CASE("mean shift: two vMF clusters give two modes near the cluster means") {
  testsup::Rng rng(45);
  const UnitVec3 mu1(1, 0, 0), mu2(0, 1, 0);
  auto normals = vmf_samples(rng, mu1, 200.0, 500);
  const auto second = vmf_samples(rng, mu2, 200.0, 500);
  normals.insert(normals.end(), second.begin(), second.end());

  const UnitVec3 oracle1 =
      mean_direction(std::vector<UnitVec3>(normals.begin(), normals.begin() + 500));
  const UnitVec3 oracle2 =
      mean_direction(std::vector<UnitVec3>(normals.begin() + 500, normals.end()));

  const auto modes = mean_shift_modes(normals, deg2rad(20.0), 256, 100, 1e-6);
  REQUIRE(modes.size() == 2);
  const double to1 = std::min(modes[0].center.angle_to(oracle1),
                              modes[1].center.angle_to(oracle1));
  const double to2 = std::min(modes[0].center.angle_to(oracle2),
                              modes[1].center.angle_to(oracle2));
  CHECK(rad2deg(to1) < 2.0);
  CHECK(rad2deg(to2) < 2.0);
}

TEST_CASE("mean shift: uniform directions give near-equal support") {
  testsup::Rng rng(46);
  std::vector<UnitVec3> normals;
  for (int i = 0; i < 2000; ++i) normals.push_back(UnitVec3(rng.unit3()));

  const auto modes = mean_shift_modes(normals, deg2rad(20.0), 64, 20, 1e-4);
  REQUIRE(modes.size() >= 3);
  std::vector<int> support;
  for (const ModeSeed& m : modes) support.push_back(m.support_count);
  std::sort(support.begin(), support.end());
  const int median = support[support.size() / 2];
  CHECK(support.back() <= 3 * median);
}

TEST_CASE("mean shift ascends the window kernel density") {
  testsup::Rng rng(47);
  const auto normals = vmf_samples(rng, UnitVec3(0, 0, 1), 100.0, 800);

  const double theta_window = deg2rad(40.0);
  const double c = (2.0 / theta_window) * (2.0 / theta_window);
  const double sin_half = std::sin(theta_window / 2.0);
  auto density = [&](const UnitVec3& f) {
    double sum = 0.0;
    for (const UnitVec3& n : normals)
      if (n.cross(f).norm() < sin_half && n.dot(f) > 0.0)
        sum += std::exp(-c * riemann_log(f, n).squaredNorm());
    return sum;
  };

  std::vector<std::vector<UnitVec3>> traces;
  mean_shift_modes(normals, theta_window, 32, 30, 1e-7, &traces);
  REQUIRE(!traces.empty());
  for (const auto& trace : traces) {
    for (std::size_t i = 1; i < trace.size(); ++i) {
      const double before = density(trace[i - 1]);
      const double after = density(trace[i]);
      CHECK(after >= before - 1e-9 * std::max(1.0, before));
    }
  }
}

TEST_CASE("register_patterns: exact copies align to identity") {
  testsup::Rng rng(48);
  SpherePattern pat;
  pat.points = cap_samples(rng, UnitVec3(1, 0.2, 0.3), deg2rad(8.0), 150);
  const Rotation3 r =
      register_patterns(pat, pat, Rotation3::identity(), 50, 1e-7);
  CHECK(rad2deg(r.angle()) < 1e-9);
}

TEST_CASE("register_patterns: recovers a 5 degree z-rotation of a cap") {
  testsup::Rng rng(49);
  SpherePattern source;
  source.points = cap_samples(rng, UnitVec3(1, 0, 0.1), deg2rad(5.0), 200);
  SpherePattern target;
  const Rotation3 truth = Rotation3::rot_z(deg2rad(5.0));
  target.points = rotate_all(truth, source.points);

  const Rotation3 est =
      register_patterns(source, target, Rotation3::identity(), 100, 1e-8);
  CHECK(rad2deg(rotation_distance(est, truth)) < 0.05);
}

TEST_CASE("register_patterns: rotated pattern with per-point noise, coarse init") {
  testsup::Rng rng(50);
  const Rotation3 truth = Rotation3::from_axis_angle(Vec3(0.02, -0.04, 0.06));

  SpherePattern source, target;
  const UnitVec3 centers[3] = {UnitVec3(0, 0, 1), UnitVec3(1, 0, 0), UnitVec3(0, 1, 0)};
  for (const UnitVec3& c : centers) {
    const auto cluster = vmf_samples(rng, c, 500.0, 300);
    source.points.insert(source.points.end(), cluster.begin(), cluster.end());
  }
  // target = rotated source, each point perturbed by vMF noise
  for (const UnitVec3& p : source.points)
    target.points.push_back(vmf_samples(rng, truth * p, 500.0, 1)[0]);

  const Rotation3 init = Rotation3::from_axis_angle(Vec3(0.02, -0.04, 0.06) +
                                                    0.05 * rng.unit3());
  const Rotation3 est = register_patterns(source, target, init, 100, 1e-8);
  CHECK(rad2deg(rotation_distance(est, truth)) < 0.5);
}

TEST_CASE("register_patterns output is always a proper rotation") {
  testsup::Rng rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    SpherePattern a, b;
    for (int i = 0; i < 40; ++i) {
      a.points.push_back(UnitVec3(rng.unit3()));
      b.points.push_back(UnitVec3(rng.unit3()));
    }
    const Rotation3 r = register_patterns(a, b, Rotation3::identity(), 10, 1e-6);
    const Mat3 m = r.matrix();
    CHECK((m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(m.determinant() - 1.0) < 1e-9);
  }
}

TEST_CASE("register_patterns errors: sparse and degenerate input") {
  SpherePattern two;
  two.points = {UnitVec3(1, 0, 0), UnitVec3(0, 1, 0)};
  SpherePattern big;
  testsup::Rng rng(52);
  big.points = cap_samples(rng, UnitVec3(0, 0, 1), deg2rad(5.0), 10);
  CHECK_THROWS_WITH(register_patterns(two, big, Rotation3::identity(), 10, 1e-6),
                    "pattern too sparse");

  // one identical direction everywhere: rank-1 cross covariance
  SpherePattern degenerate;
  degenerate.points.assign(10, UnitVec3(0, 0, 1));
  CHECK_THROWS_WITH(
      register_patterns(degenerate, degenerate, Rotation3::identity(), 10, 1e-6),
      "degenerate pattern");
}

TEST_CASE("estimate_rotation: identical frames give identity") {
  testsup::Rng rng(53);
  const auto pts = scene_points(rng, 0.01);
  const NormalCloud nc = normals_of(pts);

  RotationParams params;
  const RotationEstimate est =
      estimate_rotation(nc, nc, Rotation3::identity(), params);
  CHECK_FALSE(est.fallback);
  CHECK(rad2deg(est.rotation.angle()) < 0.05);
}

TEST_CASE("estimate_rotation: recovers a small yaw, with and without translation") {
  testsup::Rng rng(54);
  const auto prev_pts = scene_points(rng, 0.01);
  const Rotation3 truth = Rotation3::rot_z(deg2rad(2.0));

  std::vector<Vec3> rotated(prev_pts.size());
  for (std::size_t i = 0; i < prev_pts.size(); ++i) rotated[i] = truth * prev_pts[i];
  std::vector<Vec3> rotated_shifted(prev_pts.size());
  const Vec3 shift(1.0, 0.2, 0.0);
  for (std::size_t i = 0; i < prev_pts.size(); ++i)
    rotated_shifted[i] = rotated[i] + shift;

  const NormalCloud nc_prev = normals_of(prev_pts);
  const NormalCloud nc_rot = normals_of(rotated);
  const NormalCloud nc_rot_shift = normals_of(rotated_shifted);

  RotationParams params;
  const RotationEstimate a =
      estimate_rotation(nc_prev, nc_rot, Rotation3::identity(), params);
  const RotationEstimate b =
      estimate_rotation(nc_prev, nc_rot_shift, Rotation3::identity(), params);

  CHECK_FALSE(a.fallback);
  CHECK_FALSE(b.fallback);
  CHECK(rad2deg(rotation_distance(a.rotation, truth)) < 0.1);
  CHECK(rad2deg(rotation_distance(b.rotation, truth)) < 0.1);
  // translation independence of the estimate itself
  CHECK(rad2deg(rotation_distance(a.rotation, b.rotation)) < 0.05);
}

TEST_CASE("estimate_rotation falls back to the prediction when unrecoverable") {
  testsup::Rng rng(55);
  // a single tight cluster leaves a free spin: degenerate registration
  NormalCloud nc;
  nc.normals = vmf_samples(rng, UnitVec3(0, 0, 1), 1e7, 150);
  nc.source_points.assign(150, Vec3(0, 0, -1));
  nc.curvature.assign(150, 0.0);

  RotationParams params;
  params.sor_min_retain = 0;
  const Rotation3 predicted = Rotation3::rot_z(0.05);
  const RotationEstimate est = estimate_rotation(nc, nc, predicted, params);
  CHECK(est.fallback);
  CHECK(rotation_distance(est.rotation, predicted) == 0.0);
}

TEST_CASE("sparse scenes go through the mode-seeking path") {
  testsup::Rng rng(56);
  NormalCloud prev, curr;
  const Rotation3 truth = Rotation3::rot_z(deg2rad(3.0));
  const UnitVec3 centers[3] = {UnitVec3(0, 0, 1), UnitVec3(1, 0, 0), UnitVec3(0, 1, 0)};
  for (const UnitVec3& c : centers) {
    for (const UnitVec3& p : vmf_samples(rng, c, 300.0, 250))
      prev.normals.push_back(p);
    for (const UnitVec3& p : vmf_samples(rng, truth * c, 300.0, 250))
      curr.normals.push_back(p);
  }
  // background scatter
  for (int i = 0; i < 80; ++i) {
    prev.normals.push_back(UnitVec3(rng.unit3()));
    curr.normals.push_back(UnitVec3(rng.unit3()));
  }
  prev.source_points.assign(prev.normals.size(), Vec3::Zero());
  prev.curvature.assign(prev.normals.size(), 0.0);
  curr.source_points.assign(curr.normals.size(), Vec3::Zero());
  curr.curvature.assign(curr.normals.size(), 0.0);

  RotationParams params;
  params.sparse_threshold = 100000;  // force the fallback branch
  params.grid_n = 256;

  const SpherePattern pat = extract_sphere_pattern(prev, params);
  CHECK(pat.provenance == PatternProvenance::meanshift_mode);
  CHECK(pat.points.size() >= 3);

  const RotationEstimate est =
      estimate_rotation(prev, curr, Rotation3::identity(), params);
  CHECK_FALSE(est.fallback);
  CHECK(rad2deg(rotation_distance(est.rotation, truth)) < 1.0);
}
