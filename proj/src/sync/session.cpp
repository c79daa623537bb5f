#include "deform/session.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "deform/errors.hpp"
#include "deform/kinematics.hpp"
#include "deform/mvc.hpp"

namespace deform {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double max_row_distance(const Points& a, const Points& b) {
  if (a.rows() == 0) return 0.0;
  return (a - b).rowwise().norm().maxCoeff();
}

Eigen::VectorXd flatten(const Points& p) {
  return Eigen::Map<const Eigen::VectorXd>(p.data(), p.size());
}

Points unflatten(const Eigen::VectorXd& v) {
  return Eigen::Map<const Points>(v.data(), v.size() / 3, 3);
}

}  // namespace

const char* to_string(EditDelta::Kind kind) {
  switch (kind) {
    case EditDelta::Kind::SkelRotate: return "SKEL_ROTATE";
    case EditDelta::Kind::CageRest: return "CAGE_REST";
    case EditDelta::Kind::CageCurr: return "CAGE_CURR";
  }
  return "?";
}

double SteadyStateAudit::worst() const {
  return std::max({skin, cage, joints, rest_skin, hierarchy, cors});
}

SyncSession::SyncSession(Rig rig, SessionConfig config)
    : config_(config), rig_(std::move(rig)) {
  setup();
}

SyncSession::SyncSession(Rig rig, WeightMatrix phi, SessionConfig config)
    : config_(config), rig_(std::move(rig)), phi_(std::move(phi)) {
  setup();
}

void SyncSession::setup() {
  validate_rig(rig_);
  bbox_ = bbox_diagonal(rig_.skin.vertices);
  if (!(bbox_ > 0.0)) bbox_ = 1.0;

  if (phi_.rows() == 0 && phi_.cols() == 0) {
    const auto t0 = Clock::now();
    phi_ = mvc_matrix(rig_.skin, rig_.cage);
    stats_.mvc_ms = elapsed_ms(t0);
  }
  phi_.role = WeightRole::CageCoords;
  const double deviation = validate_rest_consensus(rig_, phi_);
  validate_weights(phi_, 1e-8);
  if (deviation > config_.consensus_tolerance * bbox_) {
    throw ValidationError("rest consensus violated: skin deviates from the cage reconstruction by " +
                          std::to_string(deviation));
  }

  auto t0 = Clock::now();
  JointCoordsOptions jc;
  jc.exponent = config_.localization_exponent;
  jc.mec = config_.mec;
  psi_ = joint_coords(rig_.skeleton, rig_.skin, rig_.weights, phi_, rig_.cage, jc);
  stats_.skel_up_preprocess_ms = elapsed_ms(t0);

  t0 = Clock::now();
  selection_ = maxvol_select(phi_, config_.maxvol);
  stats_.cage_up_preprocess_ms = elapsed_ms(t0);

  b_topo_ = build_b_topo(rig_.skeleton);
  ++stats_.b_topo_factorizations;

  const int c = cage_size();
  Eigen::MatrixXd w_sel(c, rig_.skeleton.size());
  for (int r = 0; r < c; ++r) w_sel.row(r) = rig_.weights.values.row(selection_.indices[r]);
  phi_selected_kron_ = kron_identity3(selection_.submatrix);
  weights_selected_kron_ = kron_identity3(w_sel);
  psi_kron_ = kron_identity3(psi_.dense());

  state_.cage_rest = rig_.cage.vertices;
  state_.skeleton = rig_.skeleton;
  state_.skeleton.reset_transforms();
  const Points joints = psi_.apply(state_.cage_rest);
  for (int j = 0; j < state_.skeleton.size(); ++j) state_.skeleton.joints[j].rest = joints.row(j);
  state_.skin_rest = phi_.apply(state_.cage_rest);
  state_.rotation_version = next_version();

  if (config_.method == SkinningMethod::COR) {
    t0 = Clock::now();
    state_.cor = cor_precompute(state_.skin_rest, rig_.skin.triangles, rig_.weights, &phi_,
                                config_.cor_sigma);
    stats_.cor_preprocess_ms = elapsed_ms(t0);
  }
  state_.skin_curr = reskin(state_);
  state_.cage_curr = cage_up(state_);
  publish();
}

Points SyncSession::reskin(const State& s) const {
  return skin(config_.method, s.skin_rest, rig_.weights, s.skeleton.transforms,
              s.cor ? &*s.cor : nullptr);
}

Points SyncSession::reskin() const { return reskin(state_); }

Points SyncSession::fit_positions(const State& s) const {
  if (config_.method == SkinningMethod::LBS || config_.ghost) {
    return lbs_rows(s.skin_rest, rig_.weights, s.skeleton.transforms, selection_.indices);
  }
  Points out(cage_size(), 3);
  for (int r = 0; r < cage_size(); ++r) out.row(r) = s.skin_curr.row(selection_.indices[r]);
  return out;
}

Points SyncSession::fit_positions() const { return fit_positions(state_); }

Points SyncSession::cage_up(const State& s) const {
  return solve_reduced(selection_, fit_positions(s));
}

Points SyncSession::cage_up() const { return cage_up(state_); }

void SyncSession::refit_current(State& s) const {
  s.skin_curr = reskin(s);
  s.cage_curr = cage_up(s);
}

void SyncSession::skel_up(State& s) const {
  if (config_.refit_skeleton) {
    const Points joints = psi_.apply(s.cage_rest);
    for (int j = 0; j < s.skeleton.size(); ++j) s.skeleton.joints[j].rest = joints.row(j);
    refit_translations(s.skeleton);
  }
  if (s.cor) reposition_cors(*s.cor, s.cage_rest);
  s.skin_rest = phi_.apply(s.cage_rest);
  refit_current(s);
}

const SyncSession::ReverseOperator& SyncSession::reverse_operator(const State& s) {
  if (reverse_.valid && reverse_.rotation_version == s.rotation_version) return reverse_;
  const auto t0 = Clock::now();
  reverse_.valid = false;

  const int c = cage_size();
  const auto& transforms = s.skeleton.transforms;
  const auto rot = rotation_matrices(transforms);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(3 * c, 3 * c);
  for (int r = 0; r < c; ++r) {
    const Mat3 linear = lbs_split(rig_.weights.values, selection_.indices[r], transforms, rot).linear;
    for (int col = 0; col < c; ++col) {
      k.block<3, 3>(3 * r, 3 * col) = selection_.submatrix(r, col) * linear;
    }
  }
  // translations respond to joint moves through B_topo^{-1} A_R
  const Eigen::MatrixXd joint_to_translation = b_topo_.factorization.solve(build_a_r(s.skeleton));
  k.noalias() += weights_selected_kron_ * (joint_to_translation * psi_kron_);

  reverse_.lu.compute(k);
  const double rcond = reverse_.lu.rcond();
  ++stats_.cage_rev_builds;
  stats_.cage_rev_build_ms = elapsed_ms(t0);
  if (!(rcond >= config_.min_rcond)) {
    throw SolverError("reverse cage system is singular (rcond " + std::to_string(rcond) +
                      "); edit rejected");
  }
  reverse_.rotation_version = s.rotation_version;
  reverse_.valid = true;
  return reverse_;
}

Points SyncSession::cage_rev(const Points& curr_offsets) {
  if (curr_offsets.rows() != cage_size()) {
    throw ValidationError("cage offsets: expected " + std::to_string(cage_size()) + " rows");
  }
  const auto& op = reverse_operator(state_);
  const Eigen::VectorXd rhs = phi_selected_kron_ * flatten(curr_offsets);
  return unflatten(op.lu.solve(rhs));
}

double SyncSession::rebuild_reverse_operator() {
  std::lock_guard lock(edit_mutex_);
  reverse_.valid = false;
  reverse_operator(state_);
  return stats_.cage_rev_build_ms;
}

void SyncSession::apply(State& s, const EditDelta& delta) {
  const int c = cage_size();
  auto dense_offsets = [&](double cap) {
    Points d = Points::Zero(c, 3);
    for (const auto& [k, off] : delta.offsets) {
      if (k < 0 || k >= c) {
        throw ValidationError("cage vertex " + std::to_string(k) + " out of range");
      }
      if (!off.allFinite()) throw ValidationError("non-finite cage offset");
      if (off.norm() > cap) {
        throw ValidationError("cage offset of " + std::to_string(off.norm()) +
                              " exceeds the per-step cap " + std::to_string(cap));
      }
      d.row(k) += off.transpose();
    }
    return d;
  };

  switch (delta.kind) {
    case EditDelta::Kind::SkelRotate: {
      if (delta.joint < 0 || delta.joint >= s.skeleton.size()) {
        throw ValidationError("joint " + std::to_string(delta.joint) + " out of range");
      }
      const double norm = delta.rotation.norm();
      if (!std::isfinite(norm) || norm < 1e-12) throw ValidationError("invalid rotation quaternion");
      apply_joint_rotation(s.skeleton, delta.joint, delta.rotation.normalized());
      s.rotation_version = next_version();
      refit_current(s);
      break;
    }
    case EditDelta::Kind::CageRest: {
      s.cage_rest += dense_offsets(std::numeric_limits<double>::infinity());
      skel_up(s);
      break;
    }
    case EditDelta::Kind::CageCurr: {
      const Points d = dense_offsets(config_.edit_cap * bbox_);
      const auto& op = reverse_operator(s);
      const Eigen::VectorXd rhs = phi_selected_kron_ * flatten(d);
      s.cage_rest += unflatten(op.lu.solve(rhs));
      skel_up(s);
      break;
    }
  }
  if (!s.skin_curr.allFinite() || !s.cage_curr.allFinite()) {
    throw SolverError(std::string(to_string(delta.kind)) + " produced non-finite geometry");
  }
}

void SyncSession::edit(const EditDelta& delta) {
  std::lock_guard lock(edit_mutex_);
  State work = state_;
  apply(work, delta);
  state_ = std::move(work);
  ++stats_.edits;
  publish();
}

void SyncSession::set_pose(const Points& cage_rest, const std::vector<Quat>& rots) {
  std::lock_guard lock(edit_mutex_);
  if (cage_rest.rows() != cage_size()) {
    throw ValidationError("pose: rest cage has " + std::to_string(cage_rest.rows()) +
                          " vertices, expected " + std::to_string(cage_size()));
  }
  State work = state_;
  if (static_cast<int>(rots.size()) != work.skeleton.size()) {
    throw ValidationError("pose: expected one rotation per joint");
  }
  work.cage_rest = cage_rest;
  set_rotations(work.skeleton, rots);
  work.rotation_version = next_version();
  skel_up(work);
  state_ = std::move(work);
  publish();
}

SteadyStateAudit SyncSession::audit() const {
  SteadyStateAudit a;
  const State& s = state_;
  a.skin = max_row_distance(s.skin_curr, reskin(s)) / bbox_;
  a.cage = max_row_distance(s.cage_curr, cage_up(s)) / bbox_;
  if (config_.refit_skeleton) {
    a.joints = max_row_distance(s.skeleton.rest_positions(), psi_.apply(s.cage_rest)) / bbox_;
  }
  a.rest_skin = max_row_distance(s.skin_rest, phi_.apply(s.cage_rest)) / bbox_;
  a.hierarchy = hierarchy_error(s.skeleton) / bbox_;
  if (s.cor && s.cor->lambda.size() > 0) {
    const Points expected = s.cor->lambda * s.cage_rest;
    a.cors = max_row_distance(s.cor->cors, expected) / bbox_;
  }
  return a;
}

void SyncSession::publish() {
  auto snap = std::make_shared<Snapshot>();
  snap->frame = ++frame_;
  snap->skin_rest = state_.skin_rest;
  snap->skin_curr = state_.skin_curr;
  snap->cage_rest = state_.cage_rest;
  snap->cage_curr = state_.cage_curr;
  snap->joints_rest = state_.skeleton.rest_positions();
  snap->joints_curr = state_.skeleton.current_positions();
  std::lock_guard lock(snapshot_mutex_);
  snapshot_ = std::move(snap);
}

std::shared_ptr<const Snapshot> SyncSession::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return snapshot_;
}

}  // namespace deform
