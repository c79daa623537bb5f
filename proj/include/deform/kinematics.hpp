#pragma once

#include <vector>

#include "deform/skeleton.hpp"

namespace deform {

/// Rotates joint j and its whole subtree by `rotation` about j's current
/// articulation T_j a_j. Ancestors are untouched.
void apply_joint_rotation(Skeleton& skeleton, int joint, const Quat& rotation);

/// Keeps every rotation and recomputes translations from the rest
/// articulations, roots first: a root keeps its articulation fixed
/// (t = a - R a), a child stays attached to its parent (T_j a_j = T_f a_j).
void refit_translations(Skeleton& skeleton);

/// Replaces all rotations, then refit_translations.
void set_rotations(Skeleton& skeleton, const std::vector<Quat>& rotations);

std::vector<Quat> rotations(const Skeleton& skeleton);

/// Largest violation of the attachment relations refit_translations enforces.
double hierarchy_error(const Skeleton& skeleton);

}  // namespace deform
