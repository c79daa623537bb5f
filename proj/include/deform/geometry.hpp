#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace deform {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

/// n x 3 array of points, one point per row.
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

/// Rigid transform stored as (unit quaternion, translation): x -> R x + t.
struct RigidTransform {
  Quat rotation = Quat::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  Mat3 linear() const { return rotation.toRotationMatrix(); }
  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  /// Composition (*this) o other.
  RigidTransform operator*(const RigidTransform& other) const;
  RigidTransform inverse() const;

  /// Rotation by `q` about `pivot`.
  static RigidTransform about(const Quat& q, const Vec3& pivot);

  bool is_identity(double tol = 0.0) const;
};

/// Renormalizes to unit length and canonicalizes w >= 0.
Quat normalized(const Quat& q);

Quat axis_angle(const Vec3& axis, double radians);

/// Diagonal of the axis-aligned bounding box; 0 for empty input.
double bbox_diagonal(const Points& pts);

bool all_finite(const Points& pts);

}  // namespace deform
