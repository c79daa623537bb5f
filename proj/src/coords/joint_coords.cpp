#include "deform/joint_coords.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "deform/errors.hpp"
#include "deform/mvc.hpp"

namespace deform {

double localization_value(double weight, double exponent) {
  const double w = std::clamp(weight, 0.0, 1.0);
  return std::max(0.0, -1.0 + std::pow(w, exponent) + std::pow(1.0 - w, exponent));
}

JointLocalization joint_localization(const WeightMatrix& skin_weights, double exponent) {
  if (!(exponent > 0.0 && exponent < 1.0)) {
    throw std::invalid_argument("localization exponent must lie in (0, 1)");
  }
  JointLocalization out;
  out.exponent = exponent;
  // zero weights localize to exactly 0, so only stored entries matter
  out.values = Eigen::MatrixXd::Zero(skin_weights.cols(), skin_weights.rows());
  for (int i = 0; i < skin_weights.values.outerSize(); ++i) {
    for (SparseRows::InnerIterator it(skin_weights.values, i); it; ++it) {
      out.values(it.col(), i) = localization_value(it.value(), exponent);
    }
  }
  return out;
}

Eigen::VectorXd joint_mass_prior(const Vec3& joint, const TriMesh& skin,
                                 const Eigen::VectorXd& localization, const WeightMatrix& phi,
                                 double clamp_ratio) {
  const Eigen::VectorXd mvc = mvc_weights(joint, skin);
  const Eigen::VectorXd localized = mvc.cwiseProduct(localization);
  Eigen::VectorXd masses = phi.values.transpose() * localized;
  const double top = masses.maxCoeff();
  if (!(top > 0.0)) return Eigen::VectorXd::Constant(masses.size(), 1.0 / masses.size());
  masses = masses.cwiseMax(clamp_ratio * top);
  return masses / masses.sum();
}

WeightMatrix joint_coords(const Skeleton& skeleton, const TriMesh& skin,
                          const WeightMatrix& skin_weights, const WeightMatrix& phi,
                          const TriMesh& cage, const JointCoordsOptions& options) {
  const JointLocalization loc = joint_localization(skin_weights, options.exponent);
  Eigen::MatrixXd psi(skeleton.size(), cage.vertex_count());
  for (int j = 0; j < skeleton.size(); ++j) {
    const Vec3& a = skeleton.joints[j].rest;
    MecProblem problem;
    problem.masses =
        joint_mass_prior(a, skin, loc.values.row(j).transpose(), phi, options.clamp_ratio);
    problem.nodes = cage.vertices;
    problem.target = a;
    try {
      psi.row(j) = mec_project(problem, options.mec).weights.transpose();
    } catch (const SolverError& e) {
      throw SolverError("joint coordinates: joint " + std::to_string(j) + " '" +
                            skeleton.joints[j].name + "': " + e.what(),
                        e.residual());
    }
  }
  WeightMatrix out = WeightMatrix::from_dense(psi, WeightRole::JointCoords);
  validate_weights(out, 1e-10);
  return out;
}

}  // namespace deform
