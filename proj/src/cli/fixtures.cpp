#include "deform/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace deform::fixtures {
namespace {

Triangle oriented(const Points& v, Triangle t, const Vec3& outward) {
  const Vec3 a = v.row(t[0]);
  const Vec3 b = v.row(t[1]);
  const Vec3 c = v.row(t[2]);
  if ((b - a).cross(c - a).dot(outward) < 0.0) std::swap(t[1], t[2]);
  return t;
}

Points to_points(const std::vector<Vec3>& pts) {
  Points out(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) out.row(i) = pts[i].transpose();
  return out;
}

double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

double segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

Skeleton make_skeleton(const std::vector<std::tuple<std::string, int, Vec3>>& joints) {
  Skeleton skel;
  for (const auto& [name, parent, pos] : joints) skel.joints.push_back({name, parent, pos});
  skel.reset_transforms();
  return skel;
}

}  // namespace

TriMesh tube(const Vec3& from, const Vec3& to, double radius, int rings, int segments) {
  if (rings < 2 || segments < 3) throw std::invalid_argument("tube needs >= 2 rings, >= 3 segments");
  const Vec3 axis = (to - from).normalized();
  const Vec3 helper = std::abs(axis.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 u = axis.cross(helper).normalized();
  const Vec3 w = axis.cross(u);

  std::vector<Vec3> pts;
  for (int r = 0; r < rings; ++r) {
    const Vec3 center = from + (to - from) * (static_cast<double>(r) / (rings - 1));
    for (int k = 0; k < segments; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / segments;
      pts.push_back(center + radius * (std::cos(theta) * u + std::sin(theta) * w));
    }
  }
  const int start = static_cast<int>(pts.size());
  pts.push_back(from);
  const int end = start + 1;
  pts.push_back(to);

  TriMesh mesh;
  mesh.vertices = to_points(pts);
  for (int r = 0; r + 1 < rings; ++r) {
    const Vec3 center = from + (to - from) * ((r + 0.5) / (rings - 1));
    for (int k = 0; k < segments; ++k) {
      const int a = r * segments + k;
      const int b = r * segments + (k + 1) % segments;
      const int c = (r + 1) * segments + k;
      const int d = (r + 1) * segments + (k + 1) % segments;
      const Vec3 mid = 0.25 * (pts[a] + pts[b] + pts[c] + pts[d]);
      const Vec3 radial = mid - center;
      mesh.triangles.push_back(oriented(mesh.vertices, {a, b, d}, radial));
      mesh.triangles.push_back(oriented(mesh.vertices, {a, d, c}, radial));
    }
  }
  const int last = (rings - 1) * segments;
  for (int k = 0; k < segments; ++k) {
    mesh.triangles.push_back(oriented(mesh.vertices, {start, k, (k + 1) % segments}, -axis));
    mesh.triangles.push_back(
        oriented(mesh.vertices, {end, last + k, last + (k + 1) % segments}, axis));
  }
  return mesh;
}

TriMesh box_cage(const Vec3& lo, const Vec3& hi, int nx, int ny, int nz) {
  const std::array<int, 3> n{nx, ny, nz};
  std::map<std::array<int, 3>, int> index;
  std::vector<Vec3> pts;
  for (int i = 0; i <= nx; ++i) {
    for (int j = 0; j <= ny; ++j) {
      for (int k = 0; k <= nz; ++k) {
        const bool surface = i == 0 || i == nx || j == 0 || j == ny || k == 0 || k == nz;
        if (!surface) continue;
        index[{i, j, k}] = static_cast<int>(pts.size());
        pts.emplace_back(lo.x() + (hi.x() - lo.x()) * i / nx, lo.y() + (hi.y() - lo.y()) * j / ny,
                         lo.z() + (hi.z() - lo.z()) * k / nz);
      }
    }
  }
  TriMesh mesh;
  mesh.vertices = to_points(pts);
  for (int axis = 0; axis < 3; ++axis) {
    const int a1 = (axis + 1) % 3;
    const int a2 = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      Vec3 outward = Vec3::Zero();
      outward[axis] = side == 0 ? -1.0 : 1.0;
      for (int p = 0; p < n[a1]; ++p) {
        for (int q = 0; q < n[a2]; ++q) {
          auto at = [&](int dp, int dq) {
            std::array<int, 3> key{};
            key[axis] = side == 0 ? 0 : n[axis];
            key[a1] = p + dp;
            key[a2] = q + dq;
            return index.at(key);
          };
          const int v00 = at(0, 0);
          const int v10 = at(1, 0);
          const int v11 = at(1, 1);
          const int v01 = at(0, 1);
          mesh.triangles.push_back(oriented(mesh.vertices, {v00, v10, v11}, outward));
          mesh.triangles.push_back(oriented(mesh.vertices, {v00, v11, v01}, outward));
        }
      }
    }
  }
  return mesh;
}

TriMesh tetrahedron(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  TriMesh mesh;
  mesh.vertices = to_points({a, b, c, d});
  const Vec3 centroid = 0.25 * (a + b + c + d);
  const std::array<Triangle, 4> faces{{{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}};
  for (const auto& f : faces) {
    const Vec3 mid = (Vec3(mesh.vertices.row(f[0])) + Vec3(mesh.vertices.row(f[1])) +
                      Vec3(mesh.vertices.row(f[2]))) / 3.0;
    mesh.triangles.push_back(oriented(mesh.vertices, f, mid - centroid));
  }
  return mesh;
}

TriMesh octahedron(double radius) {
  TriMesh mesh;
  mesh.vertices = to_points({{radius, 0, 0}, {-radius, 0, 0}, {0, radius, 0},
                             {0, -radius, 0}, {0, 0, radius}, {0, 0, -radius}});
  for (int x : {0, 1}) {
    for (int y : {2, 3}) {
      for (int z : {4, 5}) {
        const Vec3 mid = (Vec3(mesh.vertices.row(x)) + Vec3(mesh.vertices.row(y)) +
                          Vec3(mesh.vertices.row(z))) / 3.0;
        mesh.triangles.push_back(oriented(mesh.vertices, {x, y, z}, mid));
      }
    }
  }
  return mesh;
}

TriMesh cube(double half) {
  std::vector<Vec3> pts;
  for (int i = 0; i < 8; ++i) {
    pts.emplace_back(i & 1 ? half : -half, i & 2 ? half : -half, i & 4 ? half : -half);
  }
  TriMesh mesh;
  mesh.vertices = to_points(pts);
  auto in_tetra = [&](int i) { return pts[i].x() * pts[i].y() * pts[i].z() > 0.0; };
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = 0; side < 2; ++side) {
      std::vector<int> corners;
      for (int i = 0; i < 8; ++i) {
        if (((i >> axis) & 1) == side) corners.push_back(i);
      }
      // cyclic order around the face
      const int a1 = (axis + 1) % 3;
      const int a2 = (axis + 2) % 3;
      std::sort(corners.begin(), corners.end(), [&](int l, int r) {
        return std::atan2(pts[l][a2], pts[l][a1]) < std::atan2(pts[r][a2], pts[r][a1]);
      });
      if (!in_tetra(corners[0])) std::rotate(corners.begin(), corners.begin() + 1, corners.end());
      Vec3 outward = Vec3::Zero();
      outward[axis] = side ? 1.0 : -1.0;
      mesh.triangles.push_back(oriented(mesh.vertices, {corners[0], corners[1], corners[2]}, outward));
      mesh.triangles.push_back(oriented(mesh.vertices, {corners[0], corners[2], corners[3]}, outward));
    }
  }
  return mesh;
}

TriMesh merge(const TriMesh& a, const TriMesh& b) {
  TriMesh out;
  out.vertices.resize(a.vertices.rows() + b.vertices.rows(), 3);
  out.vertices << a.vertices, b.vertices;
  out.triangles = a.triangles;
  const int shift = a.vertex_count();
  for (auto t : b.triangles) out.triangles.push_back({t[0] + shift, t[1] + shift, t[2] + shift});
  return out;
}

WeightMatrix chain_weights(const Points& vertices, const std::vector<double>& joint_x,
                           double blend) {
  const int s = static_cast<int>(joint_x.size());
  std::vector<Eigen::Triplet<double>> trips;
  for (Eigen::Index i = 0; i < vertices.rows(); ++i) {
    const double x = vertices(i, 0);
    int bone = 0;
    while (bone + 1 < s && x >= joint_x[bone + 1]) ++bone;
    int blended = -1;
    for (int j = 1; j < s; ++j) {
      if (std::abs(x - joint_x[j]) < blend) blended = j;
    }
    const int row = static_cast<int>(i);
    if (blended < 0) {
      trips.emplace_back(row, bone, 1.0);
      continue;
    }
    const double t = smoothstep((x - (joint_x[blended] - blend)) / (2.0 * blend));
    if (t > 0.0) trips.emplace_back(row, blended, t);
    if (t < 1.0) trips.emplace_back(row, blended - 1, 1.0 - t);
  }
  SparseRows m(vertices.rows(), s);
  m.setFromTriplets(trips.begin(), trips.end());
  return WeightMatrix(std::move(m), WeightRole::SkinWeights);
}

WeightMatrix distance_weights(const Points& vertices, const Skeleton& skeleton, double falloff,
                              int keep) {
  const int s = skeleton.size();
  const auto kids = skeleton.children();
  std::vector<Vec3> ends(s);
  for (int j = 0; j < s; ++j) {
    const Vec3& a = skeleton.joints[j].rest;
    if (!kids[j].empty()) {
      Vec3 sum = Vec3::Zero();
      for (int c : kids[j]) sum += skeleton.joints[c].rest;
      ends[j] = sum / static_cast<double>(kids[j].size());
    } else if (skeleton.joints[j].parent != kRoot) {
      ends[j] = a + 0.15 * (a - skeleton.joints[skeleton.joints[j].parent].rest).normalized();
    } else {
      ends[j] = a;
    }
  }
  std::vector<Eigen::Triplet<double>> trips;
  for (Eigen::Index i = 0; i < vertices.rows(); ++i) {
    const Vec3 p = vertices.row(i);
    std::vector<std::pair<double, int>> d2(s);
    for (int j = 0; j < s; ++j) {
      const double d = segment_distance(p, skeleton.joints[j].rest, ends[j]);
      d2[j] = {d * d, j};
    }
    std::sort(d2.begin(), d2.end());
    std::vector<std::pair<int, double>> w;
    double total = 0.0;
    for (int k = 0; k < std::min(keep, s); ++k) {
      const double v = std::exp(-(d2[k].first - d2[0].first) / (falloff * falloff));
      w.emplace_back(d2[k].second, v);
      total += v;
    }
    double kept = 0.0;
    for (auto& [j, v] : w) {
      v /= total;
      if (v < 0.01) v = 0.0;
      kept += v;
    }
    for (const auto& [j, v] : w) {
      if (v > 0.0) trips.emplace_back(static_cast<int>(i), j, v / kept);
    }
  }
  SparseRows m(vertices.rows(), s);
  m.setFromTriplets(trips.begin(), trips.end());
  return WeightMatrix(std::move(m), WeightRole::SkinWeights);
}

Rig bent_bar() {
  Rig rig;
  rig.skin = tube({0, 0, 0}, {2, 0, 0}, 0.2, 19, 8);
  rig.skeleton = make_skeleton({{"root", kRoot, {0.2, 0, 0}}, {"elbow", 0, {1.0, 0, 0}}});
  rig.weights = chain_weights(rig.skin.vertices, {0.2, 1.0}, 0.25);
  rig.cage = box_cage({-0.1, -0.3, -0.3}, {2.1, 0.3, 0.3}, 6, 1, 1);
  return rig;
}

Rig tube_rig(int rings, int segments, int joints, int cage_rings) {
  const double length = 10.0;
  const double radius = 0.5;
  Rig rig;
  rig.skin = tube({0, 0, 0}, {length, 0, 0}, radius, rings, segments);
  std::vector<double> xs;
  std::vector<std::tuple<std::string, int, Vec3>> js;
  for (int j = 0; j < joints; ++j) {
    const double x = length * (j + 0.25) / joints;
    xs.push_back(x);
    js.emplace_back("j" + std::to_string(j), j - 1, Vec3(x, 0, 0));
  }
  rig.skeleton = make_skeleton(js);
  rig.weights = chain_weights(rig.skin.vertices, xs, 0.3 * length / joints);
  rig.cage = box_cage({-0.2, -0.8, -0.8}, {length + 0.2, 0.8, 0.8}, cage_rings - 1, 1, 1);
  return rig;
}

Rig arm() { return tube_rig(130, 16, 24, 7); }

Rig large_tube() { return tube_rig(406, 16, 64, 26); }

Rig biped() {
  Rig rig;
  rig.skeleton = make_skeleton({
      {"pelvis", kRoot, {0.0, 0.95, 0}},
      {"spine", 0, {0.0, 1.25, 0}},
      {"neck", 1, {0.0, 1.6, 0}},
      {"head", 2, {0.0, 1.72, 0}},
      {"l_shoulder", 1, {-0.18, 1.5, 0}},
      {"l_elbow", 4, {-0.55, 1.5, 0}},
      {"l_wrist", 5, {-0.9, 1.5, 0}},
      {"r_shoulder", 1, {0.18, 1.5, 0}},
      {"r_elbow", 7, {0.55, 1.5, 0}},
      {"r_wrist", 8, {0.9, 1.5, 0}},
      {"l_hip", 0, {-0.1, 0.88, 0}},
      {"l_knee", 10, {-0.1, 0.5, 0}},
      {"l_ankle", 11, {-0.1, 0.08, 0}},
      {"r_hip", 0, {0.1, 0.88, 0}},
      {"r_knee", 13, {0.1, 0.5, 0}},
      {"r_ankle", 14, {0.1, 0.08, 0}},
  });
  TriMesh skin = tube({0, 0.9, 0}, {0, 1.8, 0}, 0.15, 12, 16);
  skin = merge(skin, tube({-1.0, 1.5, 0}, {1.0, 1.5, 0}, 0.06, 41, 8));
  skin = merge(skin, tube({-0.1, 0.95, 0}, {-0.1, 0.0, 0}, 0.06, 20, 8));
  skin = merge(skin, tube({0.1, 0.95, 0}, {0.1, 0.0, 0}, 0.06, 20, 8));
  rig.skin = std::move(skin);
  rig.weights = distance_weights(rig.skin.vertices, rig.skeleton, 0.08, 3);
  rig.cage = box_cage({-1.1, -0.1, -0.25}, {1.1, 1.95, 0.25}, 4, 4, 1);
  return rig;
}

Rig by_name(const std::string& name) {
  if (name == "bar") return bent_bar();
  if (name == "arm") return arm();
  if (name == "large") return large_tube();
  if (name == "biped") return biped();
  throw std::invalid_argument("unknown fixture rig '" + name + "' (bar|arm|large|biped)");
}

}  // namespace deform::fixtures
