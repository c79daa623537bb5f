#pragma once

#include <Eigen/Core>

#include "deform/mesh.hpp"
#include "deform/weights.hpp"

namespace deform {

/// Relative distance (times the cage bounding-box diagonal) under which a
/// point counts as lying on a cage vertex, edge or face.
inline constexpr double kSurfaceEpsilon = 1e-8;

/// Mean value coordinates of `point` with respect to a closed triangle mesh,
/// one entry per mesh vertex, summing to 1.
///
/// Points within `surface_eps` of the surface get the interpolating row of the
/// nearest simplex (indicator for a vertex, linear barycentrics for an edge or
/// face). Throws SolverError when the raw weights sum to zero.
Eigen::VectorXd mvc_weights(const Vec3& point, const TriMesh& cage, double surface_eps);
Eigen::VectorXd mvc_weights(const Vec3& point, const TriMesh& cage);

/// Row-wise mvc_weights; row i belongs to points.row(i).
WeightMatrix mvc_matrix(const Points& points, const TriMesh& cage);
inline WeightMatrix mvc_matrix(const TriMesh& mesh, const TriMesh& cage) {
  return mvc_matrix(mesh.vertices, cage);
}

}  // namespace deform
