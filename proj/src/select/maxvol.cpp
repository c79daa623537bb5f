#include "deform/maxvol.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "deform/errors.hpp"

namespace deform {
namespace {

double rcond_svd(const Eigen::MatrixXd& m) {
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return 0.0;
  return sv[sv.size() - 1] / sv[0];
}

}  // namespace

MaxVolSelection maxvol_select(const Eigen::MatrixXd& phi, const MaxVolOptions& options) {
  const Eigen::Index n = phi.rows();
  const Eigen::Index c = phi.cols();
  if (n < c) throw SolverError("maxvol: fewer rows than columns");

  MaxVolSelection sel;
  if (c == 0) return sel;

  // Rows picked by column-pivoted QR of phi^T seed the search.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi.transpose());
  const auto& perm = qr.colsPermutation().indices();
  sel.indices.assign(perm.data(), perm.data() + c);

  auto gather = [&] {
    Eigen::MatrixXd sub(c, c);
    for (Eigen::Index k = 0; k < c; ++k) sub.row(k) = phi.row(sel.indices[k]);
    return sub;
  };

  Eigen::MatrixXd sub = gather();
  if (rcond_svd(sub) <= options.rank_tolerance) {
    throw SolverError("cage coordinates rank-deficient");
  }

  // B = phi * sub^{-1}, from sub^T B^T = phi^T. Selected rows of B are unit vectors.
  auto coefficients = [&](const Eigen::MatrixXd& s) -> Eigen::MatrixXd {
    return Eigen::PartialPivLU<Eigen::MatrixXd>(s.transpose()).solve(phi.transpose()).transpose();
  };
  Eigen::MatrixXd coeffs = coefficients(sub);
  const double threshold = 1.0 + options.tau;
  while (sel.swaps < options.max_swaps) {
    Eigen::Index best_row = -1;
    Eigen::Index best_col = -1;
    double best = threshold;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < c; ++j) {
        const double v = std::abs(coeffs(i, j));
        if (v > best) {
          best = v;
          best_row = i;
          best_col = j;
        }
      }
    }
    if (best_row < 0) break;

    // Rank-one update of B for replacing selected row best_col by best_row.
    const Eigen::VectorXd col = coeffs.col(best_col);
    Eigen::RowVectorXd row = coeffs.row(best_row);
    row[best_col] -= 1.0;
    coeffs.noalias() -= col * row / coeffs(best_row, best_col);
    sel.indices[best_col] = static_cast<int>(best_row);
    ++sel.swaps;

    if (sel.swaps % 25 == 0) {
      coeffs = coefficients(gather());
    }
  }

  sel.submatrix = gather();
  if (rcond_svd(sel.submatrix) <= options.rank_tolerance) {
    throw SolverError("cage coordinates rank-deficient");
  }
  sel.factorization.compute(sel.submatrix);
  const Eigen::MatrixXd& lu = sel.factorization.matrixLU();
  sel.log_abs_det = lu.diagonal().array().abs().log().sum();
  return sel;
}

Points solve_reduced(const MaxVolSelection& selection, const Points& rhs) {
  if (rhs.rows() != selection.size()) {
    throw std::invalid_argument("reduced solve: right-hand side has wrong row count");
  }
  Eigen::MatrixX3d x = selection.factorization.solve(Eigen::MatrixX3d(rhs));
  return Points(x);
}

double inverse_condition(const MaxVolSelection& selection) {
  return rcond_svd(selection.submatrix);
}

}  // namespace deform
