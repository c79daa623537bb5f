#pragma once

#include <Eigen/Dense>

#include "deform/skeleton.hpp"

namespace deform {

/// 3s x 3s matrix relating translation offsets to joint offsets. Block row j:
/// a root maps dT_j; a child with father f maps dT_f - dT_j. Depends on the
/// skeleton topology only, so it is factorized once.
struct TopologyOperator {
  Eigen::MatrixXd matrix;
  Eigen::PartialPivLU<Eigen::MatrixXd> factorization;
};

/// Throws ValidationError if the skeleton is not a forest.
TopologyOperator build_b_topo(const Skeleton& skeleton);

/// 3s x 3s block diagonal from the current rotations: (I - R_j) for a root,
/// (R_j - R_f) for a child of f. With B_topo, A_R dA = B_topo dT.
Eigen::MatrixXd build_a_r(const Skeleton& skeleton);

/// M (x) I_3.
Eigen::MatrixXd kron_identity3(const Eigen::MatrixXd& m);

}  // namespace deform
