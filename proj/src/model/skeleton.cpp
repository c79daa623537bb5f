#include "deform/skeleton.hpp"

#include <queue>

#include "deform/errors.hpp"

namespace deform {

Points Skeleton::rest_positions() const {
  Points out(size(), 3);
  for (int j = 0; j < size(); ++j) out.row(j) = joints[j].rest.transpose();
  return out;
}

Points Skeleton::current_positions() const {
  Points out(size(), 3);
  for (int j = 0; j < size(); ++j) out.row(j) = transforms[j].apply(joints[j].rest).transpose();
  return out;
}

std::vector<int> Skeleton::roots() const {
  std::vector<int> out;
  for (int j = 0; j < size(); ++j) {
    if (joints[j].parent == kRoot) out.push_back(j);
  }
  return out;
}

std::vector<std::vector<int>> Skeleton::children() const {
  std::vector<std::vector<int>> out(joints.size());
  for (int j = 0; j < size(); ++j) {
    const int p = joints[j].parent;
    if (p >= 0 && p < size()) out[p].push_back(j);
  }
  return out;
}

std::vector<int> Skeleton::topological_order() const {
  const auto kids = children();
  std::vector<int> order;
  order.reserve(joints.size());
  std::queue<int> pending;
  for (int r : roots()) pending.push(r);
  while (!pending.empty()) {
    const int j = pending.front();
    pending.pop();
    order.push_back(j);
    for (int c : kids[j]) pending.push(c);
  }
  if (order.size() != joints.size()) {
    throw ValidationError("skeleton: parent links contain a cycle");
  }
  return order;
}

std::vector<int> Skeleton::subtree(int j) const {
  const auto kids = children();
  std::vector<int> out{j};
  for (std::size_t k = 0; k < out.size(); ++k) {
    for (int c : kids[out[k]]) out.push_back(c);
  }
  return out;
}

void Skeleton::reset_transforms() {
  transforms.assign(joints.size(), RigidTransform::identity());
}

void validate_skeleton(const Skeleton& skeleton) {
  if (skeleton.joints.empty()) throw ValidationError("skeleton: no joints");
  if (skeleton.transforms.size() != skeleton.joints.size()) {
    throw ValidationError("skeleton: transform count does not match joint count");
  }
  for (int j = 0; j < skeleton.size(); ++j) {
    const int p = skeleton.joints[j].parent;
    if (p != kRoot && (p < 0 || p >= skeleton.size() || p == j)) {
      throw ValidationError("skeleton: joint " + std::to_string(j) + " has invalid parent " +
                            std::to_string(p));
    }
    if (!skeleton.joints[j].rest.allFinite()) {
      throw ValidationError("skeleton: joint " + std::to_string(j) + " has non-finite position");
    }
  }
  if (skeleton.roots().empty()) throw ValidationError("skeleton: no root joint");
  (void)skeleton.topological_order();
}

}  // namespace deform
