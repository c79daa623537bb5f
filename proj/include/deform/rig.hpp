#pragma once

#include <filesystem>

#include "deform/io.hpp"

namespace deform {

struct Rig {
  TriMesh skin;
  Skeleton skeleton;
  WeightMatrix weights;  // n x s, SkinWeights
  TriMesh cage;
};

/// Load-time tolerance on skinning weight row sums; rows are renormalized after.
inline constexpr double kWeightLoadTolerance = 1e-5;

/// Validates every invariant of the four structures and their pairing.
/// Renormalizes weight rows in place. Throws ValidationError.
void validate_rig(Rig& rig);

Rig load_rig(const std::filesystem::path& mesh_path, const std::filesystem::path& skeleton_path,
             const std::filesystem::path& weights_path, const std::filesystem::path& cage_path);

/// Rig manifest: header `deform-rig 1` then `mesh|skeleton|weights|cage <path>`
/// lines, paths relative to the manifest directory.
struct RigPaths {
  std::filesystem::path mesh, skeleton, weights, cage;
};
RigPaths read_rig_manifest(const std::filesystem::path& manifest);
Rig load_rig(const std::filesystem::path& manifest);

/// Writes the four files plus `<stem>.rig` into `dir`; returns the manifest path.
std::filesystem::path save_rig(const Rig& rig, const std::filesystem::path& dir,
                               const std::string& stem);

/// max_i |v_i - sum_k phi_ik c_k|. Throws ValidationError on dimension mismatch.
double validate_rest_consensus(const Rig& rig, const WeightMatrix& phi);

}  // namespace deform
