#include "deform/geometry.hpp"

#include <cmath>

namespace deform {

RigidTransform RigidTransform::operator*(const RigidTransform& other) const {
  RigidTransform out;
  out.rotation = (rotation * other.rotation).normalized();
  out.translation = rotation * other.translation + translation;
  return out;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform out;
  out.rotation = rotation.conjugate();
  out.translation = -(out.rotation * translation);
  return out;
}

RigidTransform RigidTransform::about(const Quat& q, const Vec3& pivot) {
  RigidTransform out;
  out.rotation = q.normalized();
  out.translation = pivot - out.rotation * pivot;
  return out;
}

bool RigidTransform::is_identity(double tol) const {
  const double angle = std::abs(rotation.w()) >= 1.0 ? 0.0 : rotation.vec().norm();
  return angle <= tol && translation.norm() <= tol;
}

Quat normalized(const Quat& q) {
  Quat out = q.normalized();
  if (out.w() < 0.0) out.coeffs() = -out.coeffs();
  return out;
}

Quat axis_angle(const Vec3& axis, double radians) {
  return Quat(Eigen::AngleAxisd(radians, axis.normalized()));
}

double bbox_diagonal(const Points& pts) {
  if (pts.rows() == 0) return 0.0;
  return (pts.colwise().maxCoeff() - pts.colwise().minCoeff()).norm();
}

bool all_finite(const Points& pts) { return pts.allFinite(); }

}  // namespace deform
