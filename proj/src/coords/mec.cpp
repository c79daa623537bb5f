#include "deform/mec.hpp"

#include <cmath>
#include <Eigen/Cholesky>

#include "deform/errors.hpp"

namespace deform {
namespace {

struct DualState {
  Eigen::VectorXd weights;
  double value = 0.0;  // log-partition F(lambda)
};

DualState evaluate(const Eigen::VectorXd& log_masses, const Eigen::MatrixX3d& offsets,
                   const Vec3& lambda) {
  Eigen::VectorXd z = log_masses + offsets * lambda;
  const double zmax = z.maxCoeff();
  Eigen::VectorXd e = (z.array() - zmax).exp();
  const double sum = e.sum();
  return {e / sum, zmax + std::log(sum)};
}

}  // namespace

double mec_objective(const Eigen::VectorXd& weights, const Eigen::VectorXd& masses) {
  double f = 0.0;
  for (Eigen::Index k = 0; k < weights.size(); ++k) {
    if (weights[k] > 0.0) f -= weights[k] * std::log(weights[k] / masses[k]);
  }
  return f;
}

MecResult mec_project(const MecProblem& problem, const MecOptions& options) {
  const Eigen::Index n = problem.masses.size();
  if (n == 0 || problem.nodes.rows() != n) {
    throw SolverError("maximum entropy projection: masses and nodes disagree in size");
  }
  if ((problem.masses.array() <= 0.0).any() || !problem.masses.allFinite()) {
    throw SolverError("maximum entropy projection: masses must be strictly positive");
  }

  double scale = bbox_diagonal(problem.nodes);
  if (scale <= 0.0) scale = 1.0;
  Eigen::MatrixX3d offsets = (problem.nodes.rowwise() - problem.target.transpose()) / scale;
  const Eigen::VectorXd log_masses = problem.masses.array().log();

  Vec3 lambda = Vec3::Zero();
  DualState state = evaluate(log_masses, offsets, lambda);
  MecResult result;
  for (int it = 0; it <= options.max_iterations; ++it) {
    const Vec3 grad = offsets.transpose() * state.weights;
    result.residual = grad.norm() * scale;
    result.iterations = it;
    if (grad.norm() <= options.tolerance) {
      result.weights = state.weights;
      return result;
    }
    if (it == options.max_iterations) break;

    const Eigen::MatrixX3d weighted = offsets.array().colwise() * state.weights.array();
    Mat3 hessian = offsets.transpose() * weighted - grad * grad.transpose();
    Eigen::LDLT<Mat3> ldlt(hessian);
    Vec3 step = ldlt.solve(-grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite() || grad.dot(step) >= 0.0) {
      const double mu = 1e-12 + 1e-8 * hessian.trace();
      step = (hessian + mu * Mat3::Identity()).ldlt().solve(-grad);
      if (!step.allFinite() || grad.dot(step) >= 0.0) step = -grad;
    }

    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h <= options.max_halvings; ++h, alpha *= 0.5) {
      DualState trial = evaluate(log_masses, offsets, lambda + alpha * step);
      // near the optimum F is flat to rounding; fall back to residual decrease
      const bool armijo = trial.value <= state.value + 1e-4 * alpha * grad.dot(step);
      const bool residual_drop =
          (offsets.transpose() * trial.weights).norm() < (1.0 - 1e-4 * alpha) * grad.norm();
      if (armijo || residual_drop) {
        lambda += alpha * step;
        state = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  throw SolverError("maximum entropy projection did not converge (target outside the node hull?)",
                    result.residual);
}

}  // namespace deform
