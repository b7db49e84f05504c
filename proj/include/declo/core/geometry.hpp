#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace declo {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

/// Direction on the unit sphere. Construction normalizes; a zero or
/// non-finite input is rejected.
class UnitVec3 {
 public:
  UnitVec3() : v_(1.0, 0.0, 0.0) {}

  explicit UnitVec3(const Vec3& v) {
    const double n = v.norm();
    if (!std::isfinite(n) || n == 0.0)
      throw std::invalid_argument("cannot normalize zero or non-finite vector");
    v_ = v / n;
  }

  UnitVec3(double x, double y, double z) : UnitVec3(Vec3(x, y, z)) {}

  const Vec3& vec() const { return v_; }
  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }

  double dot(const UnitVec3& o) const { return v_.dot(o.v_); }
  Vec3 cross(const UnitVec3& o) const { return v_.cross(o.v_); }
  UnitVec3 negated() const { return UnitVec3(Vec3(-v_), trusted_tag{}); }

  /// Angle to another direction, stable near 0 and pi.
  double angle_to(const UnitVec3& o) const {
    return std::atan2(v_.cross(o.v_).norm(), v_.dot(o.v_));
  }

 private:
  struct trusted_tag {};
  UnitVec3(const Vec3& v, trusted_tag) : v_(v) {}
  Vec3 v_;
};

/// Proper rotation (orthonormal, det +1). Stored as a 3x3 matrix;
/// axis-angle conversions go through Eigen's AngleAxis.
class Rotation3 {
 public:
  Rotation3() : m_(Mat3::Identity()) {}

  static Rotation3 identity() { return Rotation3(); }

  /// Validates orthonormality and det within 1e-9 per entry.
  static Rotation3 from_matrix(const Mat3& m) {
    const Mat3 err = m.transpose() * m - Mat3::Identity();
    if (err.cwiseAbs().maxCoeff() > 1e-9 || std::abs(m.determinant() - 1.0) > 1e-9)
      throw std::invalid_argument("matrix is not a proper rotation");
    return Rotation3(m, trusted_tag{});
  }

  /// Nearest proper rotation to an approximately orthonormal matrix
  /// (polar projection via SVD). Rejects matrices further than `tol`
  /// per entry from their projection.
  static Rotation3 project(const Mat3& m, double tol = 1e-3) {
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0.0) {
      Mat3 flip = Mat3::Identity();
      flip(2, 2) = -1.0;
      r = svd.matrixU() * flip * svd.matrixV().transpose();
    }
    if ((r - m).cwiseAbs().maxCoeff() > tol)
      throw std::invalid_argument("matrix is not close to a rotation");
    return Rotation3(r, trusted_tag{});
  }

  /// Axis-angle vector (axis scaled by angle in radians).
  static Rotation3 from_axis_angle(const Vec3& aa) {
    const double angle = aa.norm();
    if (angle == 0.0) return identity();
    return Rotation3(Eigen::AngleAxisd(angle, aa / angle).toRotationMatrix(),
                     trusted_tag{});
  }

  static Rotation3 rot_x(double rad) { return from_axis_angle(Vec3(rad, 0, 0)); }
  static Rotation3 rot_y(double rad) { return from_axis_angle(Vec3(0, rad, 0)); }
  static Rotation3 rot_z(double rad) { return from_axis_angle(Vec3(0, 0, rad)); }

  const Mat3& matrix() const { return m_; }

  Vec3 axis_angle() const {
    Eigen::AngleAxisd aa(m_);
    return aa.angle() * aa.axis();
  }

  /// Rotation angle in [0, pi].
  double angle() const { return Eigen::AngleAxisd(m_).angle(); }

  Rotation3 inverse() const { return Rotation3(m_.transpose(), trusted_tag{}); }

  Vec3 operator*(const Vec3& p) const { return m_ * p; }
  UnitVec3 operator*(const UnitVec3& d) const { return UnitVec3(m_ * d.vec()); }
  Rotation3 operator*(const Rotation3& o) const {
    return Rotation3(m_ * o.m_, trusted_tag{});
  }

 private:
  struct trusted_tag {};
  Rotation3(const Mat3& m, trusted_tag) : m_(m) {}
  Mat3 m_;
};

/// Angle between two rotations (geodesic distance on SO(3)), radians.
inline double rotation_distance(const Rotation3& a, const Rotation3& b) {
  return (a.inverse() * b).angle();
}

/// Rigid motion: rotate, then translate.
struct RigidTransform {
  Rotation3 rotation;
  Vec3 translation = Vec3::Zero();

  RigidTransform() = default;
  RigidTransform(const Rotation3& r, const Vec3& t) : rotation(r), translation(t) {}

  static RigidTransform identity() { return RigidTransform(); }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  RigidTransform inverse() const {
    const Rotation3 rinv = rotation.inverse();
    return RigidTransform(rinv, -(rinv * translation));
  }

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation.matrix();
    m.topRightCorner<3, 1>() = translation;
    return m;
  }
};

/// compose(a, b) applies b first, then a.
inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return RigidTransform(a.rotation * b.rotation,
                        a.rotation * b.translation + a.translation);
}

inline RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
  return compose(a, b);
}

}  // namespace declo
