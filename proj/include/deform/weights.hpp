#pragma once

#include <Eigen/SparseCore>

#include "deform/geometry.hpp"

namespace deform {

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class WeightRole { SkinWeights, CageCoords, JointCoords };

const char* to_string(WeightRole role);

/// Sparse row-stochastic matrix binding rows (skin vertices or joints) to
/// handles (joints or cage vertices).
struct WeightMatrix {
  SparseRows values;
  WeightRole role = WeightRole::SkinWeights;

  WeightMatrix() = default;
  WeightMatrix(SparseRows v, WeightRole r) : values(std::move(v)), role(r) {}
  static WeightMatrix from_dense(const Eigen::MatrixXd& dense, WeightRole role);

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(values); }

  /// Matrix times point array (rows x 3).
  Points apply(const Points& handles) const;

  /// Largest |row sum - 1|.
  double max_row_sum_error() const;
};

/// Throws ValidationError if a row sum deviates from 1 by more than `tol`
/// or, for SkinWeights/JointCoords, an entry is negative.
void validate_weights(const WeightMatrix& w, double tol);

/// Scales each row to sum to exactly 1 (rows summing to 0 are left as is).
void normalize_rows(WeightMatrix& w);

}  // namespace deform
