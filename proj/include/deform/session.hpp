#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "deform/joint_coords.hpp"
#include "deform/maxvol.hpp"
#include "deform/rig.hpp"
#include "deform/skinning.hpp"
#include "deform/topology.hpp"

namespace deform {

struct SessionConfig {
  SkinningMethod method = SkinningMethod::LBS;
  /// Fit the current cage against an LBS ghost of the selected vertices when
  /// the display method is not LBS, keeping the reverse loop exact.
  bool ghost = true;
  /// Refit rest joints after rest-cage changes. Off only for experiments.
  bool refit_skeleton = true;
  double localization_exponent = kDefaultLocalizationExponent;
  double cor_sigma = kDefaultCorSigma;
  /// All tolerances below are relative to the rest skin bounding-box diagonal.
  double consensus_tolerance = 1e-4;
  double audit_tolerance = 1e-8;
  /// Largest single-vertex offset accepted by one CAGE_CURR step.
  double edit_cap = 0.05;
  /// Reverse-cage systems with a smaller reciprocal condition are rejected.
  double min_rcond = 1e-12;
  MaxVolOptions maxvol;
  MecOptions mec;
};

using VertexOffsets = std::vector<std::pair<int, Vec3>>;

struct EditDelta {
  enum class Kind { SkelRotate, CageRest, CageCurr };

  Kind kind = Kind::SkelRotate;
  int joint = -1;
  Quat rotation = Quat::Identity();
  VertexOffsets offsets;

  static EditDelta rotate(int joint, const Quat& q) { return {Kind::SkelRotate, joint, q, {}}; }
  static EditDelta cage_rest(VertexOffsets o) {
    return {Kind::CageRest, -1, Quat::Identity(), std::move(o)};
  }
  static EditDelta cage_curr(VertexOffsets o) {
    return {Kind::CageCurr, -1, Quat::Identity(), std::move(o)};
  }
};

const char* to_string(EditDelta::Kind kind);

/// Deviations from the steady-state relations, relative to the bbox diagonal.
struct SteadyStateAudit {
  double skin = 0.0;       // M_curr vs skin(T, W, M_rest)
  double cage = 0.0;       // C_curr vs reduced fit of the current skin (or ghost)
  double joints = 0.0;     // A_rest vs Psi C_rest
  double rest_skin = 0.0;  // M_rest vs Phi C_rest
  double hierarchy = 0.0;  // attachment of T to the articulations
  double cors = 0.0;       // CoRs vs Lambda C_rest (COR only)

  double worst() const;
  bool ok(double tolerance) const { return worst() <= tolerance; }
};

/// Immutable copy of the displayable state, published after each edit.
struct Snapshot {
  std::uint64_t frame = 0;
  Points skin_rest, skin_curr;
  Points cage_rest, cage_curr;
  Points joints_rest, joints_curr;
};

struct SessionStats {
  double mvc_ms = 0.0;
  double skel_up_preprocess_ms = 0.0;  // joint coordinates
  double cage_up_preprocess_ms = 0.0;  // MaxVol selection
  double cor_preprocess_ms = 0.0;
  double cage_rev_build_ms = 0.0;  // last reverse-operator assembly + factorization
  int b_topo_factorizations = 0;
  int cage_rev_builds = 0;
  int edits = 0;
};

/// The six synchronized structures (skin, skeleton, cage in rest and current
/// pose) plus the cached operators tying them together.
///
/// Every public mutation is transactional and leaves the steady state:
/// M_rest = Phi C_rest, A_rest = Psi C_rest, M_curr = skin(T, W, M_rest),
/// C_curr = reduced fit of M_curr. Edits are serialized; snapshot() may be
/// called from any thread.
class SyncSession {
 public:
  SyncSession(Rig rig, SessionConfig config = {});
  /// Uses the given cage coordinates instead of computing mean value coordinates.
  SyncSession(Rig rig, WeightMatrix phi, SessionConfig config = {});

  SyncSession(const SyncSession&) = delete;
  SyncSession& operator=(const SyncSession&) = delete;

  // Read access to the current state. Not synchronized against edit().
  const SessionConfig& config() const { return config_; }
  const Rig& rig() const { return rig_; }
  const WeightMatrix& phi() const { return phi_; }
  const WeightMatrix& psi() const { return psi_; }
  const MaxVolSelection& selection() const { return selection_; }
  const TopologyOperator& b_topo() const { return b_topo_; }
  const Skeleton& skeleton() const { return state_.skeleton; }
  const Points& skin_rest() const { return state_.skin_rest; }
  const Points& skin_curr() const { return state_.skin_curr; }
  const Points& cage_rest() const { return state_.cage_rest; }
  const Points& cage_curr() const { return state_.cage_curr; }
  const std::optional<CoRData>& cor() const { return state_.cor; }
  const SessionStats& stats() const { return stats_; }
  double bbox() const { return bbox_; }
  int cage_size() const { return rig_.cage.vertex_count(); }

  /// Applies one user edit and propagates it around the synchronization
  /// cycle. On any exception the session is left unchanged.
  void edit(const EditDelta& delta);

  /// Loads a full (rest cage, per-joint rotations) state as used by keyframe
  /// playback: refit skeleton, reskin and fit the current cage. No reverse step.
  void set_pose(const Points& cage_rest, const std::vector<Quat>& rotations);

  /// Current cage fitted to the current skin (or its LBS ghost).
  Points cage_up() const;

  /// Rest-cage offsets whose forward propagation yields `curr_offsets` on the
  /// current cage. Throws SolverError when the system is near singular.
  Points cage_rev(const Points& curr_offsets);

  /// Drops the cached reverse-cage factorization and rebuilds it for the
  /// current pose. Returns the build time in ms. Results are unaffected.
  double rebuild_reverse_operator();

  /// Positions the reduced fit uses: LBS at the selected vertices when the
  /// method is LBS or ghost mode is on, the displayed skin otherwise.
  Points fit_positions() const;

  SteadyStateAudit audit() const;
  std::shared_ptr<const Snapshot> snapshot() const;

  /// Re-runs the skinning backend on the current state without mutating it.
  Points reskin() const;

 private:
  struct State {
    Points skin_rest, skin_curr, cage_rest, cage_curr;
    Skeleton skeleton;
    std::optional<CoRData> cor;
    std::uint64_t rotation_version = 0;
  };

  struct ReverseOperator {
    std::uint64_t rotation_version = 0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    bool valid = false;
  };

  void setup();
  void skel_up(State& s) const;
  void refit_current(State& s) const;
  Points reskin(const State& s) const;
  Points fit_positions(const State& s) const;
  Points cage_up(const State& s) const;
  const ReverseOperator& reverse_operator(const State& s);
  void apply(State& s, const EditDelta& delta);
  void publish();
  std::uint64_t next_version() { return ++version_counter_; }

  SessionConfig config_;
  Rig rig_;
  WeightMatrix phi_;
  WeightMatrix psi_;
  MaxVolSelection selection_;
  TopologyOperator b_topo_;
  Eigen::MatrixXd phi_selected_kron_;  // Phi~ (x) I_3
  Eigen::MatrixXd weights_selected_kron_;  // W~ (x) I_3
  Eigen::MatrixXd psi_kron_;  // Psi (x) I_3
  double bbox_ = 1.0;
  State state_;
  ReverseOperator reverse_;
  SessionStats stats_;
  std::uint64_t version_counter_ = 0;
  std::uint64_t frame_ = 0;

  mutable std::mutex edit_mutex_;
  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const Snapshot> snapshot_;
};

}  // namespace deform
