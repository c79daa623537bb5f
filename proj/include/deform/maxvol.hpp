#pragma once

#include <vector>

#include <Eigen/Dense>

#include "deform/geometry.hpp"
#include "deform/weights.hpp"

namespace deform {

struct MaxVolOptions {
  double tau = 0.01;
  int max_swaps = 500;
  /// Rank test: smallest singular value > rank_tolerance * largest.
  double rank_tolerance = 1e-10;
};

/// Square, invertible row subset of a tall coordinate matrix with (locally)
/// maximal |det|, factorized once.
struct MaxVolSelection {
  std::vector<int> indices;
  Eigen::MatrixXd submatrix;  // c x c, row k = phi.row(indices[k])
  Eigen::PartialPivLU<Eigen::MatrixXd> factorization;
  int swaps = 0;
  double log_abs_det = 0.0;

  int size() const { return static_cast<int>(indices.size()); }
};

/// Greedy dominant-row MaxVol seeded by column-pivoted QR. Deterministic;
/// candidate ties go to the lowest row index. Throws SolverError
/// "cage coordinates rank-deficient" when no invertible subset exists.
MaxVolSelection maxvol_select(const Eigen::MatrixXd& phi, const MaxVolOptions& options = {});
inline MaxVolSelection maxvol_select(const WeightMatrix& phi, const MaxVolOptions& options = {}) {
  return maxvol_select(phi.dense(), options);
}

/// Solves submatrix * X = rhs using the cached factorization.
Points solve_reduced(const MaxVolSelection& selection, const Points& rhs);

/// smallest / largest singular value of the submatrix.
double inverse_condition(const MaxVolSelection& selection);

}  // namespace deform
