#include "deform/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include "deform/errors.hpp"

namespace deform {

void validate_mesh(const TriMesh& mesh, const char* what) {
  if (!mesh.vertices.allFinite()) {
    throw ValidationError(std::string(what) + ": non-finite vertex coordinate");
  }
  const int n = mesh.vertex_count();
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int idx : tri) {
      if (idx < 0 || idx >= n) {
        throw ValidationError(std::string(what) + ": triangle " + std::to_string(t) +
                              " references vertex " + std::to_string(idx) +
                              " out of range [0," + std::to_string(n) + ")");
      }
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      throw ValidationError(std::string(what) + ": triangle " + std::to_string(t) +
                            " is degenerate (repeated vertex)");
    }
  }
}

void validate_closed_manifold(const TriMesh& mesh, const char* what) {
  validate_mesh(mesh, what);
  if (mesh.triangles.empty()) {
    throw ValidationError(std::string(what) + ": cage has no triangles");
  }
  // directed edge -> use count
  std::map<std::pair<int, int>, int> directed;
  for (const auto& tri : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      ++directed[{tri[e], tri[(e + 1) % 3]}];
    }
  }
  for (const auto& [edge, count] : directed) {
    const auto it = directed.find({edge.second, edge.first});
    const int opposite = it == directed.end() ? 0 : it->second;
    if (count + opposite < 2) {
      throw ValidationError(std::string(what) + ": cage not closed (boundary edge " +
                            std::to_string(edge.first) + "-" + std::to_string(edge.second) + ")");
    }
    if (count + opposite > 2) {
      throw ValidationError(std::string(what) + ": cage not manifold (edge " +
                            std::to_string(edge.first) + "-" + std::to_string(edge.second) +
                            " shared by more than two triangles)");
    }
    if (count != 1) {
      throw ValidationError(std::string(what) + ": cage not consistently oriented (edge " +
                            std::to_string(edge.first) + "-" + std::to_string(edge.second) + ")");
    }
  }
}

std::vector<Triangle> fan_triangulate(const std::vector<std::vector<int>>& polygons) {
  std::vector<Triangle> out;
  for (const auto& poly : polygons) {
    for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
      out.push_back({poly[0], poly[k], poly[k + 1]});
    }
  }
  return out;
}

Eigen::VectorXd vertex_areas(const Points& vertices, const std::vector<Triangle>& triangles) {
  Eigen::VectorXd area = Eigen::VectorXd::Zero(vertices.rows());
  for (const auto& tri : triangles) {
    const Vec3 a = vertices.row(tri[0]);
    const Vec3 b = vertices.row(tri[1]);
    const Vec3 c = vertices.row(tri[2]);
    const double third = 0.5 * (b - a).cross(c - a).norm() / 3.0;
    for (int idx : tri) area[idx] += third;
  }
  return area;
}

double min_triangle_angle(const Points& vertices, const std::vector<Triangle>& triangles) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& tri : triangles) {
    for (int k = 0; k < 3; ++k) {
      const Vec3 p = vertices.row(tri[k]);
      const Vec3 u = Vec3(vertices.row(tri[(k + 1) % 3])) - p;
      const Vec3 v = Vec3(vertices.row(tri[(k + 2) % 3])) - p;
      best = std::min(best, std::atan2(u.cross(v).norm(), u.dot(v)));
    }
  }
  return best;
}

}  // namespace deform
