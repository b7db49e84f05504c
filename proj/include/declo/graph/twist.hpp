#pragma once

#include "declo/core/geometry.hpp"

namespace declo {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Vector-space stand-in for a rigid transform: axis-angle rotation plus
/// translation. Used wherever transforms are averaged or perturbed.
struct Twist6 {
  Vec3 rotation = Vec3::Zero();     // axis-angle, |.| < pi
  Vec3 translation = Vec3::Zero();  // meters

  static Twist6 from_transform(const RigidTransform& t) {
    return Twist6{t.rotation.axis_angle(), t.translation};
  }

  RigidTransform to_transform() const {
    return RigidTransform(Rotation3::from_axis_angle(rotation), translation);
  }

  Vec6 vector() const {
    Vec6 v;
    v << rotation, translation;
    return v;
  }

  static Twist6 from_vector(const Vec6& v) {
    return Twist6{v.head<3>(), v.tail<3>()};
  }
};

}  // namespace declo
