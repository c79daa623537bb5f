#pragma once

#include <Eigen/Core>

#include "deform/mec.hpp"
#include "deform/mesh.hpp"
#include "deform/skeleton.hpp"
#include "deform/weights.hpp"

namespace deform {

inline constexpr double kDefaultLocalizationExponent = 0.1;

/// Per-joint localization of skin vertices: L(j, i) = -1 + w^s + (1 - w)^s
/// with w the weight of vertex i on joint j. Zero in rigid regions, peaks at
/// w = 0.5 where weights blend.
struct JointLocalization {
  Eigen::MatrixXd values;  // joints x skin vertices
  double exponent = kDefaultLocalizationExponent;
};

double localization_value(double weight, double exponent);

/// Requires exponent in (0, 1); throws std::invalid_argument otherwise.
JointLocalization joint_localization(const WeightMatrix& skin_weights,
                                     double exponent = kDefaultLocalizationExponent);

struct JointCoordsOptions {
  double exponent = kDefaultLocalizationExponent;
  /// Masses below clamp_ratio * max mass are raised to it.
  double clamp_ratio = 1e-8;
  MecOptions mec;
};

/// Mass prior in cage space for one joint: mvc of the joint w.r.t. the skin,
/// localized, pulled through the cage coordinates, clamped positive and
/// normalized. Falls back to uniform when no mass is positive.
Eigen::VectorXd joint_mass_prior(const Vec3& joint, const TriMesh& skin,
                                 const Eigen::VectorXd& localization, const WeightMatrix& phi,
                                 double clamp_ratio);

/// Cage coordinates of every rest joint (s x c). Rows are positive, sum to 1
/// and reproduce the joint from the rest cage. Throws SolverError naming the
/// joint when the entropy projection fails.
WeightMatrix joint_coords(const Skeleton& skeleton, const TriMesh& skin,
                          const WeightMatrix& skin_weights, const WeightMatrix& phi,
                          const TriMesh& cage, const JointCoordsOptions& options = {});

}  // namespace deform
