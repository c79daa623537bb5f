#pragma once

#include <Eigen/Core>

#include "deform/geometry.hpp"

namespace deform {

/// Maximum-entropy projection: find b maximizing -sum b_k ln(b_k / m_k)
/// subject to sum b_k c_k = target and sum b_k = 1.
struct MecProblem {
  Eigen::VectorXd masses;  // strictly positive priors
  Points nodes;            // c_k
  Vec3 target = Vec3::Zero();
};

struct MecOptions {
  /// On the position residual, relative to the node bounding-box diagonal.
  double tolerance = 1e-10;
  int max_iterations = 100;
  int max_halvings = 30;
};

struct MecResult {
  Eigen::VectorXd weights;
  double residual = 0.0;  // |sum b_k c_k - target|, scene units
  int iterations = 0;
};

/// Damped Newton on the 3-dimensional convex dual. Throws SolverError (with
/// the final residual) on non-convergence or invalid masses.
MecResult mec_project(const MecProblem& problem, const MecOptions& options = {});

/// The primal objective -sum b_k ln(b_k / m_k) (0 ln 0 = 0).
double mec_objective(const Eigen::VectorXd& weights, const Eigen::VectorXd& masses);

}  // namespace deform
