#include "deform/kinematics.hpp"

#include <cmath>
#include <stdexcept>

namespace deform {

void apply_joint_rotation(Skeleton& skeleton, int joint, const Quat& rotation) {
  if (joint < 0 || joint >= skeleton.size()) throw std::out_of_range("joint index out of range");
  const Vec3 pivot = skeleton.transforms[joint].apply(skeleton.joints[joint].rest);
  const RigidTransform delta = RigidTransform::about(rotation, pivot);
  for (int k : skeleton.subtree(joint)) {
    skeleton.transforms[k] = delta * skeleton.transforms[k];
  }
}

void refit_translations(Skeleton& skeleton) {
  for (int j : skeleton.topological_order()) {
    const Vec3& a = skeleton.joints[j].rest;
    RigidTransform& t = skeleton.transforms[j];
    const int f = skeleton.joints[j].parent;
    if (f == kRoot) {
      t.translation = a - t.rotation * a;
    } else {
      const RigidTransform& tf = skeleton.transforms[f];
      t.translation = tf.rotation * a - t.rotation * a + tf.translation;
    }
  }
}

void set_rotations(Skeleton& skeleton, const std::vector<Quat>& rots) {
  if (rots.size() != skeleton.joints.size()) {
    throw std::invalid_argument("rotation count does not match joint count");
  }
  for (int j = 0; j < skeleton.size(); ++j) {
    // unit keys are stored as given so playback reproduces them bit for bit
    const double n = rots[j].norm();
    skeleton.transforms[j].rotation = std::abs(n - 1.0) <= 1e-14 ? rots[j] : rots[j].normalized();
  }
  refit_translations(skeleton);
}

std::vector<Quat> rotations(const Skeleton& skeleton) {
  std::vector<Quat> out;
  out.reserve(skeleton.transforms.size());
  for (const auto& t : skeleton.transforms) out.push_back(t.rotation);
  return out;
}

double hierarchy_error(const Skeleton& skeleton) {
  double worst = 0.0;
  for (int j = 0; j < skeleton.size(); ++j) {
    const Vec3& a = skeleton.joints[j].rest;
    const int f = skeleton.joints[j].parent;
    const Vec3 expected = f == kRoot ? a : skeleton.transforms[f].apply(a);
    worst = std::max(worst, (skeleton.transforms[j].apply(a) - expected).norm());
  }
  return worst;
}

}  // namespace deform
