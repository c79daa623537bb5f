#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deform/geometry.hpp"
#include "deform/mesh.hpp"
#include "deform/weights.hpp"

namespace deform {

using Transforms = std::vector<RigidTransform>;

enum class SkinningMethod { LBS, DQS, COR };

const char* to_string(SkinningMethod method);
/// Accepts "lbs", "dqs", "cor" (case-insensitive); throws std::invalid_argument.
SkinningMethod parse_skinning_method(const std::string& name);

/// Per-vertex centers of rotation plus the repositioning matrix that maps the
/// rest cage to them.
struct CoRData {
  Points cors;             // n x 3
  Eigen::MatrixXd lambda;  // n x c; empty when built without cage coordinates
  double sigma = 0.1;
};

inline constexpr double kDefaultCorSigma = 0.1;

// Per-vertex evaluation. `rot` caches the transforms' rotation matrices.
std::vector<Mat3> rotation_matrices(const Transforms& transforms);
Vec3 lbs_vertex(const Vec3& rest, const SparseRows& weights, int row, const Transforms& transforms,
                const std::vector<Mat3>& rot);

/// Linear blend skinning, v = sum_j w_ij T_j v.
Points lbs(const Points& rest, const WeightMatrix& weights, const Transforms& transforms);
/// LBS restricted to `rows`; output row k is vertex rows[k].
Points lbs_rows(const Points& rest, const WeightMatrix& weights, const Transforms& transforms,
                std::span<const int> rows);

/// Split form of LBS for one vertex: v = linear * rest + translation.
struct LinearSplit {
  Mat3 linear;
  Vec3 translation;
};
LinearSplit lbs_split(const SparseRows& weights, int row, const Transforms& transforms,
                      const std::vector<Mat3>& rot);

/// Dual quaternion skinning with sign alignment to the largest-weight bone.
/// Degenerate blends (norm < 1e-12) fall back to LBS for that vertex.
Points dqs(const Points& rest, const WeightMatrix& weights, const Transforms& transforms);

/// Normalized quaternion blend of the bone rotations of one vertex, aligned
/// to the largest-weight bone. Returns nullopt for a degenerate blend.
std::optional<Quat> blend_rotation(const SparseRows& weights, int row, const Transforms& transforms);

/// Centers of rotation from weight similarity, integrated with vertex areas.
/// When `phi` is given, also builds lambda = Phi_cors * phi.
CoRData cor_precompute(const Points& rest, const std::vector<Triangle>& triangles,
                       const WeightMatrix& weights, const WeightMatrix* phi = nullptr,
                       double sigma = kDefaultCorSigma);

/// Weight-profile similarity kernel between two skinning-weight rows.
double cor_similarity(const SparseRows& weights, int p, int v, double sigma);

/// Skinning with optimized centers of rotation.
Points cor_skin(const Points& rest, const WeightMatrix& weights, const Transforms& transforms,
                const CoRData& cor);

/// cors := lambda * rest_cage.
void reposition_cors(CoRData& cor, const Points& rest_cage);

/// Dispatches on `method`. COR requires `cor`.
Points skin(SkinningMethod method, const Points& rest, const WeightMatrix& weights,
            const Transforms& transforms, const CoRData* cor);

}  // namespace deform
