#pragma once

#include <string>
#include <vector>

#include "deform/geometry.hpp"

namespace deform {

inline constexpr int kRoot = -1;

struct Joint {
  std::string name;
  int parent = kRoot;
  Vec3 rest = Vec3::Zero();  // rest articulation a_j
};

/// Joints plus one global transform per joint. The transform of joint j
/// acts on the sub-skeleton hanging below j.
struct Skeleton {
  std::vector<Joint> joints;
  std::vector<RigidTransform> transforms;

  int size() const { return static_cast<int>(joints.size()); }

  Points rest_positions() const;
  /// T_j a_j for every joint.
  Points current_positions() const;

  std::vector<int> roots() const;
  std::vector<std::vector<int>> children() const;
  /// Parents before children; ties by index. Throws ValidationError on cycles.
  std::vector<int> topological_order() const;
  /// Joint j and every joint below it, in topological order.
  std::vector<int> subtree(int j) const;

  void reset_transforms();
};

/// Parent links in range, acyclic, at least one root, one transform per joint.
void validate_skeleton(const Skeleton& skeleton);

}  // namespace deform
