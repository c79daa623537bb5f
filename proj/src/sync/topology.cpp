#include "deform/topology.hpp"

#include <cassert>
#include <cmath>

namespace deform {

TopologyOperator build_b_topo(const Skeleton& skeleton) {
  validate_skeleton(skeleton);
  const int s = skeleton.size();
  TopologyOperator out;
  out.matrix = Eigen::MatrixXd::Zero(3 * s, 3 * s);
  for (int j = 0; j < s; ++j) {
    const int f = skeleton.joints[j].parent;
    if (f == kRoot) {
      out.matrix.block<3, 3>(3 * j, 3 * j).setIdentity();
    } else {
      out.matrix.block<3, 3>(3 * j, 3 * f).setIdentity();
      out.matrix.block<3, 3>(3 * j, 3 * j) = -Mat3::Identity();
    }
  }
  out.factorization.compute(out.matrix);
  // triangular in topological order with +-I diagonal blocks, so |det| = 1
  assert(std::abs(std::abs(out.factorization.determinant()) - 1.0) < 1e-9);
  return out;
}

Eigen::MatrixXd build_a_r(const Skeleton& skeleton) {
  const int s = skeleton.size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(3 * s, 3 * s);
  for (int j = 0; j < s; ++j) {
    const Mat3 rj = skeleton.transforms[j].linear();
    const int f = skeleton.joints[j].parent;
    out.block<3, 3>(3 * j, 3 * j) =
        f == kRoot ? Mat3(Mat3::Identity() - rj) : Mat3(rj - skeleton.transforms[f].linear());
  }
  return out;
}

Eigen::MatrixXd kron_identity3(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(3 * m.rows(), 3 * m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      if (v == 0.0) continue;
      for (int d = 0; d < 3; ++d) out(3 * r + d, 3 * c + d) = v;
    }
  }
  return out;
}

}  // namespace deform
