#include "deform/mvc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "deform/errors.hpp"

namespace deform {
namespace {

// Closest point on triangle abc to p, returned as barycentrics (Ericson, RTCD 5.1.5).
Vec3 closest_barycentric(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return {1.0, 0.0, 0.0};
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return {0.0, 1.0, 0.0};
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return {1.0 - v, v, 0.0};
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return {0.0, 0.0, 1.0};
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return {1.0 - w, 0.0, w};
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return {0.0, 1.0 - w, w};
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return {1.0 - v - w, v, w};
}

}  // namespace

Eigen::VectorXd mvc_weights(const Vec3& point, const TriMesh& cage, double surface_eps) {
  const int nv = cage.vertex_count();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(nv);
  Eigen::VectorXd dist(nv);
  Points unit(nv, 3);

  for (int k = 0; k < nv; ++k) {
    const Vec3 d = Vec3(cage.vertices.row(k)) - point;
    dist[k] = d.norm();
    if (dist[k] <= surface_eps) {
      w[k] = 1.0;
      return w;
    }
    unit.row(k) = (d / dist[k]).transpose();
  }

  for (const auto& tri : cage.triangles) {
    const Vec3 a = cage.vertices.row(tri[0]);
    const Vec3 b = cage.vertices.row(tri[1]);
    const Vec3 c = cage.vertices.row(tri[2]);
    const Vec3 bary = closest_barycentric(point, a, b, c);
    const Vec3 closest = bary[0] * a + bary[1] * b + bary[2] * c;
    if ((closest - point).norm() <= surface_eps) {
      for (int e = 0; e < 3; ++e) w[tri[e]] += bary[e];
      return w;
    }
  }

  constexpr double kAngleEps = 1e-12;
  for (const auto& tri : cage.triangles) {
    std::array<Vec3, 3> u;
    std::array<double, 3> d;
    for (int e = 0; e < 3; ++e) {
      u[e] = unit.row(tri[e]);
      d[e] = dist[tri[e]];
    }
    std::array<double, 3> theta;
    double h = 0.0;
    for (int e = 0; e < 3; ++e) {
      const double l = (u[(e + 1) % 3] - u[(e + 2) % 3]).norm();
      theta[e] = 2.0 * std::asin(std::min(1.0, 0.5 * l));
      h += 0.5 * theta[e];
    }
    if (std::numbers::pi - h < kAngleEps) {
      // point lies inside this triangle; surface_eps should have caught it
      w.setZero();
      for (int e = 0; e < 3; ++e) {
        w[tri[e]] = std::sin(theta[e]) * d[(e + 2) % 3] * d[(e + 1) % 3];
      }
      return w / w.sum();
    }
    const double det = u[0].dot(u[1].cross(u[2]));
    const double sign = det < 0.0 ? -1.0 : 1.0;
    std::array<double, 3> cs;
    std::array<double, 3> ss;
    bool coplanar = false;
    for (int e = 0; e < 3; ++e) {
      const int ep = (e + 1) % 3;
      const int em = (e + 2) % 3;
      cs[e] = 2.0 * std::sin(h) * std::sin(h - theta[e]) /
                  (std::sin(theta[ep]) * std::sin(theta[em])) -
              1.0;
      ss[e] = sign * std::sqrt(std::max(0.0, 1.0 - cs[e] * cs[e]));
      if (std::abs(ss[e]) <= kAngleEps) coplanar = true;
    }
    if (coplanar) continue;  // point in the triangle's plane, outside it
    for (int e = 0; e < 3; ++e) {
      const int ep = (e + 1) % 3;
      const int em = (e + 2) % 3;
      w[tri[e]] += (theta[e] - cs[ep] * theta[em] - cs[em] * theta[ep]) /
                   (d[e] * std::sin(theta[ep]) * ss[em]);
    }
  }

  const double total = w.sum();
  if (!std::isfinite(total) || std::abs(total) < 1e-300) {
    throw SolverError("mean value coordinates: weights sum to zero");
  }
  return w / total;
}

Eigen::VectorXd mvc_weights(const Vec3& point, const TriMesh& cage) {
  return mvc_weights(point, cage, kSurfaceEpsilon * bbox_diagonal(cage.vertices));
}

WeightMatrix mvc_matrix(const Points& points, const TriMesh& cage) {
  const double eps = kSurfaceEpsilon * bbox_diagonal(cage.vertices);
  Eigen::MatrixXd phi(points.rows(), cage.vertex_count());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    phi.row(i) = mvc_weights(Vec3(points.row(i)), cage, eps).transpose();
  }
  WeightMatrix out = WeightMatrix::from_dense(phi, WeightRole::CageCoords);
  validate_weights(out, 1e-8);
  return out;
}

}  // namespace deform
