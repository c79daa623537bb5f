#include "deform/weights.hpp"

#include <cmath>
#include <string>

#include "deform/errors.hpp"

namespace deform {

const char* to_string(WeightRole role) {
  switch (role) {
    case WeightRole::SkinWeights: return "skin weights";
    case WeightRole::CageCoords: return "cage coordinates";
    case WeightRole::JointCoords: return "joint coordinates";
  }
  return "weights";
}

WeightMatrix WeightMatrix::from_dense(const Eigen::MatrixXd& dense, WeightRole role) {
  return WeightMatrix(dense.sparseView(0.0, 0.0), role);
}

Points WeightMatrix::apply(const Points& handles) const {
  Points out = values * handles;
  return out;
}

double WeightMatrix::max_row_sum_error() const {
  double worst = 0.0;
  for (int r = 0; r < values.outerSize(); ++r) {
    double sum = 0.0;
    for (SparseRows::InnerIterator it(values, r); it; ++it) sum += it.value();
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

void validate_weights(const WeightMatrix& w, double tol) {
  const bool nonneg = w.role != WeightRole::CageCoords;
  const char* row_kind = w.role == WeightRole::JointCoords ? "joint" : "vertex";
  for (int r = 0; r < w.values.outerSize(); ++r) {
    double sum = 0.0;
    for (SparseRows::InnerIterator it(w.values, r); it; ++it) {
      if (!std::isfinite(it.value())) {
        throw ValidationError(std::string(to_string(w.role)) + ": non-finite entry at " +
                              row_kind + " " + std::to_string(r));
      }
      if (nonneg && it.value() < 0.0) {
        throw ValidationError(std::string(to_string(w.role)) + ": negative entry at " + row_kind +
                              " " + std::to_string(r) + ", handle " + std::to_string(it.col()));
      }
      sum += it.value();
    }
    if (std::abs(sum - 1.0) > tol) {
      throw ValidationError(std::string(to_string(w.role)) + ": " + row_kind + " " +
                            std::to_string(r) + " weights sum to " + std::to_string(sum) +
                            " (expected 1)");
    }
  }
}

void normalize_rows(WeightMatrix& w) {
  for (int r = 0; r < w.values.outerSize(); ++r) {
    double sum = 0.0;
    for (SparseRows::InnerIterator it(w.values, r); it; ++it) sum += it.value();
    if (sum == 0.0) continue;
    for (SparseRows::InnerIterator it(w.values, r); it; ++it) it.valueRef() /= sum;
  }
}

}  // namespace deform
