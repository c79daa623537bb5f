#include "deform/skinning.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace deform {
namespace {

using CompactRow = std::vector<std::pair<int, double>>;

CompactRow compact_row(const SparseRows& weights, int row) {
  CompactRow out;
  for (SparseRows::InnerIterator it(weights, row); it; ++it) {
    if (it.value() != 0.0) out.emplace_back(static_cast<int>(it.col()), it.value());
  }
  return out;
}

double lookup(const CompactRow& row, int col) {
  for (const auto& [c, w] : row) {
    if (c == col) return w;
  }
  return 0.0;
}

double similarity(const CompactRow& p, const CompactRow& v, double inv_sigma2) {
  double s = 0.0;
  for (const auto& [j, wpj] : p) {
    const double wvj = lookup(v, j);
    if (wvj == 0.0) continue;
    for (const auto& [k, wpk] : p) {
      if (k == j) continue;
      const double wvk = lookup(v, k);
      if (wvk == 0.0) continue;
      const double diff = wpj * wvk - wpk * wvj;
      s += wpj * wpk * wvj * wvk * std::exp(-diff * diff * inv_sigma2);
    }
  }
  return s;
}

}  // namespace

double cor_similarity(const SparseRows& weights, int p, int v, double sigma) {
  return similarity(compact_row(weights, p), compact_row(weights, v), 1.0 / (sigma * sigma));
}

CoRData cor_precompute(const Points& rest, const std::vector<Triangle>& triangles,
                       const WeightMatrix& weights, const WeightMatrix* phi, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("cor sigma must be positive");
  const Eigen::Index n = rest.rows();
  const double inv_sigma2 = 1.0 / (sigma * sigma);
  const Eigen::VectorXd area = vertex_areas(rest, triangles);

  std::vector<CompactRow> rows(static_cast<std::size_t>(n));
  // Single-bone vertices have zero similarity to every vertex.
  std::vector<int> blended;
  for (Eigen::Index i = 0; i < n; ++i) {
    rows[i] = compact_row(weights.values, static_cast<int>(i));
    if (rows[i].size() >= 2) blended.push_back(static_cast<int>(i));
  }

  CoRData out;
  out.sigma = sigma;
  out.cors = rest;
  Eigen::MatrixXd phi_dense;
  Eigen::MatrixXd phi_blended;
  if (phi) {
    phi_dense = phi->dense();
    out.lambda = phi_dense;
    phi_blended.resize(static_cast<Eigen::Index>(blended.size()), phi_dense.cols());
    for (std::size_t b = 0; b < blended.size(); ++b) phi_blended.row(b) = phi_dense.row(blended[b]);
  }

  const Eigen::Index m = static_cast<Eigen::Index>(blended.size());
  constexpr Eigen::Index kBlock = 256;
  for (Eigen::Index start = 0; start < m; start += kBlock) {
    const Eigen::Index count = std::min(kBlock, m - start);
    Eigen::MatrixXd mass(count, m);
    for (Eigen::Index r = 0; r < count; ++r) {
      const auto& p = rows[blended[start + r]];
      for (Eigen::Index x = 0; x < m; ++x) {
        mass(r, x) = similarity(p, rows[blended[x]], inv_sigma2) * area[blended[x]];
      }
    }
    for (Eigen::Index r = 0; r < count; ++r) {
      const int i = blended[start + r];
      const double total = mass.row(r).sum();
      if (!(total > 0.0)) continue;  // isolated profile: keep p_i = v_i
      mass.row(r) /= total;
      Vec3 p = Vec3::Zero();
      for (Eigen::Index x = 0; x < m; ++x) p += mass(r, x) * Vec3(rest.row(blended[x]));
      out.cors.row(i) = p.transpose();
      if (phi) out.lambda.row(i) = mass.row(r) * phi_blended;
    }
  }
  return out;
}

Points cor_skin(const Points& rest, const WeightMatrix& weights, const Transforms& transforms,
                const CoRData& cor) {
  if (cor.cors.rows() != rest.rows()) {
    throw std::invalid_argument("cor data does not match the rest mesh");
  }
  const auto rot = rotation_matrices(transforms);
  Points out(rest.rows(), 3);
  for (Eigen::Index i = 0; i < rest.rows(); ++i) {
    const int row = static_cast<int>(i);
    const Vec3 v = rest.row(i);
    const auto q = blend_rotation(weights.values, row, transforms);
    if (!q) {
      out.row(i) = lbs_vertex(v, weights.values, row, transforms, rot);
      continue;
    }
    const Mat3 r = q->toRotationMatrix();
    const Vec3 p = cor.cors.row(i);
    const Vec3 moved = lbs_vertex(p, weights.values, row, transforms, rot);
    out.row(i) = r * v + (moved - r * p);
  }
  return out;
}

void reposition_cors(CoRData& cor, const Points& rest_cage) {
  if (cor.lambda.cols() != rest_cage.rows()) {
    throw std::invalid_argument("cor repositioning matrix does not match the cage");
  }
  cor.cors = cor.lambda * rest_cage;
}

}  // namespace deform
