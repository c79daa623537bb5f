#include "deform/skinning.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace deform {
namespace {

int pivot_bone(const SparseRows& weights, int row) {
  int best = -1;
  double best_w = -1.0;
  for (SparseRows::InnerIterator it(weights, row); it; ++it) {
    if (it.value() > best_w) {
      best_w = it.value();
      best = static_cast<int>(it.col());
    }
  }
  return best;
}

Quat dual_part(const RigidTransform& t) {
  const Quat tq(0.0, t.translation.x(), t.translation.y(), t.translation.z());
  Quat d = tq * t.rotation;
  d.coeffs() *= 0.5;
  return d;
}

}  // namespace

const char* to_string(SkinningMethod method) {
  switch (method) {
    case SkinningMethod::LBS: return "lbs";
    case SkinningMethod::DQS: return "dqs";
    case SkinningMethod::COR: return "cor";
  }
  return "?";
}

SkinningMethod parse_skinning_method(const std::string& name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "lbs") return SkinningMethod::LBS;
  if (lower == "dqs") return SkinningMethod::DQS;
  if (lower == "cor") return SkinningMethod::COR;
  throw std::invalid_argument("unknown skinning method '" + name + "' (expected lbs|dqs|cor)");
}

std::vector<Mat3> rotation_matrices(const Transforms& transforms) {
  std::vector<Mat3> out;
  out.reserve(transforms.size());
  for (const auto& t : transforms) out.push_back(t.linear());
  return out;
}

Vec3 lbs_vertex(const Vec3& rest, const SparseRows& weights, int row, const Transforms& transforms,
                const std::vector<Mat3>& rot) {
  Vec3 out = Vec3::Zero();
  for (SparseRows::InnerIterator it(weights, row); it; ++it) {
    out += it.value() * (rot[it.col()] * rest + transforms[it.col()].translation);
  }
  return out;
}

LinearSplit lbs_split(const SparseRows& weights, int row, const Transforms& transforms,
                      const std::vector<Mat3>& rot) {
  LinearSplit out{Mat3::Zero(), Vec3::Zero()};
  for (SparseRows::InnerIterator it(weights, row); it; ++it) {
    out.linear += it.value() * rot[it.col()];
    out.translation += it.value() * transforms[it.col()].translation;
  }
  return out;
}

Points lbs(const Points& rest, const WeightMatrix& weights, const Transforms& transforms) {
  const auto rot = rotation_matrices(transforms);
  Points out(rest.rows(), 3);
  for (Eigen::Index i = 0; i < rest.rows(); ++i) {
    out.row(i) = lbs_vertex(rest.row(i), weights.values, static_cast<int>(i), transforms, rot);
  }
  return out;
}

Points lbs_rows(const Points& rest, const WeightMatrix& weights, const Transforms& transforms,
                std::span<const int> rows) {
  const auto rot = rotation_matrices(transforms);
  Points out(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.row(k) = lbs_vertex(rest.row(rows[k]), weights.values, rows[k], transforms, rot);
  }
  return out;
}

std::optional<Quat> blend_rotation(const SparseRows& weights, int row, const Transforms& transforms) {
  const int pivot = pivot_bone(weights, row);
  if (pivot < 0) return std::nullopt;
  const Eigen::Vector4d ref = transforms[pivot].rotation.coeffs();
  Eigen::Vector4d sum = Eigen::Vector4d::Zero();
  for (SparseRows::InnerIterator it(weights, row); it; ++it) {
    const Eigen::Vector4d q = transforms[it.col()].rotation.coeffs();
    sum += (q.dot(ref) < 0.0 ? -it.value() : it.value()) * q;
  }
  const double norm = sum.norm();
  if (norm < 1e-12) return std::nullopt;
  return Quat(Eigen::Vector4d(sum / norm));
}

Points dqs(const Points& rest, const WeightMatrix& weights, const Transforms& transforms) {
  const auto rot = rotation_matrices(transforms);
  std::vector<Quat> duals;
  duals.reserve(transforms.size());
  for (const auto& t : transforms) duals.push_back(dual_part(t));

  Points out(rest.rows(), 3);
  for (Eigen::Index i = 0; i < rest.rows(); ++i) {
    const int row = static_cast<int>(i);
    const Vec3 v = rest.row(i);
    const int pivot = pivot_bone(weights.values, row);
    Eigen::Vector4d real = Eigen::Vector4d::Zero();
    Eigen::Vector4d dual = Eigen::Vector4d::Zero();
    if (pivot >= 0) {
      const Eigen::Vector4d ref = transforms[pivot].rotation.coeffs();
      for (SparseRows::InnerIterator it(weights.values, row); it; ++it) {
        const Eigen::Vector4d q = transforms[it.col()].rotation.coeffs();
        const double w = q.dot(ref) < 0.0 ? -it.value() : it.value();
        real += w * q;
        dual += w * duals[it.col()].coeffs();
      }
    }
    const double norm = real.norm();
    if (norm < 1e-12) {
      out.row(i) = lbs_vertex(v, weights.values, row, transforms, rot);
      continue;
    }
    const Quat r(Eigen::Vector4d(real / norm));
    const Quat d(Eigen::Vector4d(dual / norm));
    const Vec3 t = 2.0 * (d * r.conjugate()).vec();
    out.row(i) = r.toRotationMatrix() * v + t;
  }
  return out;
}

Points skin(SkinningMethod method, const Points& rest, const WeightMatrix& weights,
            const Transforms& transforms, const CoRData* cor) {
  switch (method) {
    case SkinningMethod::LBS: return lbs(rest, weights, transforms);
    case SkinningMethod::DQS: return dqs(rest, weights, transforms);
    case SkinningMethod::COR:
      if (!cor) throw std::invalid_argument("cor skinning requires center-of-rotation data");
      return cor_skin(rest, weights, transforms, *cor);
  }
  throw std::invalid_argument("unknown skinning method");
}

}  // namespace deform
