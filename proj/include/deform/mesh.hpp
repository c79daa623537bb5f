#pragma once

#include <array>
#include <vector>

#include "deform/geometry.hpp"

namespace deform {

using Triangle = std::array<int, 3>;

struct TriMesh {
  Points vertices;
  std::vector<Triangle> triangles;

  int vertex_count() const { return static_cast<int>(vertices.rows()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
};

/// Throws ValidationError on out-of-range or repeated triangle indices or
/// non-finite coordinates. `what` names the mesh in the message.
void validate_mesh(const TriMesh& mesh, const char* what);

/// Additionally requires every edge shared by exactly two triangles with
/// opposite orientation (closed, consistently oriented 2-manifold).
void validate_closed_manifold(const TriMesh& mesh, const char* what);

/// Splits polygon faces into triangle fans.
std::vector<Triangle> fan_triangulate(const std::vector<std::vector<int>>& polygons);

/// One third of the incident triangle areas per vertex.
Eigen::VectorXd vertex_areas(const Points& vertices, const std::vector<Triangle>& triangles);

/// Smallest interior angle over all triangles, in radians.
double min_triangle_angle(const Points& vertices, const std::vector<Triangle>& triangles);

}  // namespace deform
