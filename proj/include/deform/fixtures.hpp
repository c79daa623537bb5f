#pragma once

#include <string>
#include <vector>

#include "deform/rig.hpp"

// Procedural meshes and rigs used by the bundled data, tests and benchmarks.
namespace deform::fixtures {

/// Closed capped tube from `from` to `to`: `rings` vertex rings of
/// `segments` vertices plus one center vertex per cap. Outward oriented.
TriMesh tube(const Vec3& from, const Vec3& to, double radius, int rings, int segments);

/// Surface of the box [lo, hi] sampled on an (nx+1) x (ny+1) x (nz+1)
/// lattice, triangulated and outward oriented.
TriMesh box_cage(const Vec3& lo, const Vec3& hi, int nx, int ny, int nz);

TriMesh tetrahedron(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);
TriMesh octahedron(double radius);
/// 12-triangle cube whose face diagonals form an inscribed tetrahedron.
TriMesh cube(double half);

/// Appends `b` to `a` (indices shifted).
TriMesh merge(const TriMesh& a, const TriMesh& b);

/// Smooth two-bone blends along a joint chain on the x axis: bone j covers
/// [x_j, x_{j+1}], blending over +-blend around each interior joint.
WeightMatrix chain_weights(const Points& vertices, const std::vector<double>& joint_x,
                           double blend);

/// Gaussian falloff from bone segments, truncated to the `keep` largest.
WeightMatrix distance_weights(const Points& vertices, const Skeleton& skeleton, double falloff,
                              int keep);

/// Straight bar along x (length 2) with a root and an elbow joint at x = 1
/// inside a 28-vertex box cage.
Rig bent_bar();
/// Arm-like tube with a joint chain; ~segments*rings vertices.
Rig tube_rig(int rings, int segments, int joints, int cage_rings);
/// 2082 vertices, 24 joints, 28 cage vertices.
Rig arm();
/// 6498 vertices, 64 joints, 104 cage vertices.
Rig large_tube();
/// Toy biped made of overlapping tubes, 16 joints, 50-vertex box cage.
Rig biped();

/// Rig by name: "bar", "arm", "large", "biped".
Rig by_name(const std::string& name);

}  // namespace deform::fixtures
