#include <gtest/gtest.h>

#include <atomic>
#include <random>
#include <thread>

#include "deform/errors.hpp"
#include "deform/fixtures.hpp"
#include "deform/kinematics.hpp"
#include "deform/session.hpp"
#include "deform/topology.hpp"

using namespace deform;

namespace {

SessionConfig with_method(SkinningMethod m) {
  SessionConfig c;
  c.method = m;
  return c;
}

double max_dist(const Points& a, const Points& b) { return (a - b).rowwise().norm().maxCoeff(); }

}  // namespace

TEST(Topology, BTopoStructure) {
  const Skeleton skel = fixtures::biped().skeleton;
  const TopologyOperator b = build_b_topo(skel);
  ASSERT_EQ(b.matrix.rows(), 3 * skel.size());
  // B dT for a uniform translation: root rows see it, child rows see nothing
  Eigen::VectorXd dt(3 * skel.size());
  for (int j = 0; j < skel.size(); ++j) dt.segment<3>(3 * j) = Vec3(1, 2, 3);
  const Eigen::VectorXd r = b.matrix * dt;
  EXPECT_LT((r.segment<3>(0) - Vec3(1, 2, 3)).norm(), 1e-15);
  EXPECT_LT(r.tail(r.size() - 3).norm(), 1e-15);
  EXPECT_NEAR(std::abs(b.matrix.determinant()), 1.0, 1e-12);
}

TEST(Topology, ARGivesTranslationChange) {
  // moving rest joints by dA and refitting changes translations by B^-1 A_R dA
  Skeleton skel = fixtures::biped().skeleton;
  apply_joint_rotation(skel, 1, axis_angle(Vec3(0, 1, 0), 0.7));
  apply_joint_rotation(skel, 5, axis_angle(Vec3(0, 0, 1), 1.2));
  const TopologyOperator b = build_b_topo(skel);
  const Eigen::MatrixXd a_r = build_a_r(skel);
  std::mt19937 rng(1);
  std::normal_distribution<double> g(0.0, 0.01);
  Eigen::VectorXd da(3 * skel.size());
  for (int i = 0; i < da.size(); ++i) da[i] = g(rng);
  Eigen::VectorXd t0(3 * skel.size());
  for (int j = 0; j < skel.size(); ++j) t0.segment<3>(3 * j) = skel.transforms[j].translation;
  for (int j = 0; j < skel.size(); ++j) skel.joints[j].rest += da.segment<3>(3 * j);
  refit_translations(skel);
  Eigen::VectorXd t1(3 * skel.size());
  for (int j = 0; j < skel.size(); ++j) t1.segment<3>(3 * j) = skel.transforms[j].translation;
  EXPECT_LT((t1 - t0 - b.factorization.solve(a_r * da)).norm(), 1e-12);
}

TEST(Session, IdentitySteadyStateAllMethods) {
  for (auto m : {SkinningMethod::LBS, SkinningMethod::DQS, SkinningMethod::COR}) {
    SyncSession s(fixtures::bent_bar(), with_method(m));
    EXPECT_LT(max_dist(s.skin_curr(), s.skin_rest()), 1e-10 * s.bbox()) << to_string(m);
    EXPECT_LT(max_dist(s.cage_curr(), s.cage_rest()), 1e-10 * s.bbox()) << to_string(m);
    EXPECT_TRUE(s.audit().ok(1e-12));
  }
}

TEST(Session, RotateThenAudit) {
  SyncSession s(fixtures::biped());
  s.edit(EditDelta::rotate(5, axis_angle(Vec3::UnitZ(), 0.9)));
  s.edit(EditDelta::rotate(11, axis_angle(Vec3::UnitX(), -0.5)));
  EXPECT_TRUE(s.audit().ok(1e-12)) << s.audit().worst();
  // rest structures untouched by skeleton edits
  EXPECT_EQ(s.cage_rest(), s.rig().cage.vertices);
  EXPECT_GT(max_dist(s.cage_curr(), s.cage_rest()), 0.01);
}

TEST(Session, CurrentCageEditLandsExactly) {
  for (auto m : {SkinningMethod::LBS, SkinningMethod::DQS, SkinningMethod::COR}) {
    SyncSession s(fixtures::bent_bar(), with_method(m));
    s.edit(EditDelta::rotate(1, axis_angle(Vec3::UnitZ(), 1.2)));
    Points expected = s.cage_curr();
    const Vec3 d(0.01, -0.02, 0.015);
    expected.row(9) += d.transpose();
    s.edit(EditDelta::cage_curr({{9, d}}));
    EXPECT_LT(max_dist(s.cage_curr(), expected), 1e-12 * s.bbox()) << to_string(m);
    EXPECT_TRUE(s.audit().ok(1e-10)) << s.audit().worst();
  }
}

TEST(Session, RestCageEditRefitsJoints) {
  SyncSession s(fixtures::bent_bar());
  VertexOffsets all;
  for (int k = 0; k < s.cage_size(); ++k) all.emplace_back(k, Vec3(0.1, 0.0, 0.0));
  s.edit(EditDelta::cage_rest(all));
  const Points joints = s.skeleton().rest_positions();
  EXPECT_NEAR(joints(1, 0), 1.1, 1e-12);
  EXPECT_TRUE(s.audit().ok(1e-12));
}

TEST(Session, CapRejectsAndKeepsState) {
  SyncSession s(fixtures::bent_bar());
  s.edit(EditDelta::rotate(1, axis_angle(Vec3::UnitZ(), 0.5)));
  const auto before = s.snapshot();
  const Vec3 huge(0.06 * s.bbox(), 0, 0);
  EXPECT_THROW(s.edit(EditDelta::cage_curr({{2, huge}})), ValidationError);
  EXPECT_THROW(s.edit(EditDelta::cage_curr({{99, Vec3::Zero()}})), ValidationError);
  EXPECT_THROW(s.edit(EditDelta::rotate(7, Quat::Identity())), ValidationError);
  EXPECT_THROW(s.edit(EditDelta::rotate(0, Quat(0, 0, 0, 0))), ValidationError);
  EXPECT_EQ(s.snapshot(), before);
  EXPECT_EQ(s.cage_curr(), before->cage_curr);
  EXPECT_EQ(s.skin_curr(), before->skin_curr);
}

TEST(Session, SingularReverseSystemRejected) {
  SessionConfig c;
  c.min_rcond = 2.0;  // nothing passes
  SyncSession s(fixtures::bent_bar(), c);
  const auto before = s.snapshot();
  EXPECT_THROW(s.edit(EditDelta::cage_curr({{1, Vec3(0.001, 0, 0)}})), SolverError);
  EXPECT_EQ(s.cage_rest(), before->cage_rest);
}

TEST(Session, ConsensusViolationRejected) {
  Rig rig = fixtures::bent_bar();
  SyncSession ok(rig);  // sanity
  const WeightMatrix phi = ok.phi();
  rig.skin.vertices(5, 1) += 0.05;
  EXPECT_THROW(SyncSession(rig, phi), ValidationError);
}

TEST(Session, CageRevSolvesForwardChain) {
  SyncSession s(fixtures::biped());
  s.edit(EditDelta::rotate(2, axis_angle(Vec3(1, 1, 0), 0.6)));
  s.edit(EditDelta::rotate(8, axis_angle(Vec3(0, 0, 1), -1.0)));
  Points d = Points::Zero(s.cage_size(), 3);
  d.row(3) = Vec3(0.002, 0.001, -0.003).transpose();
  d.row(17) = Vec3(-0.001, 0.004, 0.0).transpose();
  const Points rest_offset = s.cage_rev(d);
  // apply the rest offset directly and check the current cage moved by d
  Points expected = s.cage_curr() + d;
  VertexOffsets offsets;
  for (int k = 0; k < s.cage_size(); ++k) offsets.emplace_back(k, Vec3(rest_offset.row(k)));
  s.edit(EditDelta::cage_rest(offsets));
  EXPECT_LT(max_dist(s.cage_curr(), expected), 1e-10 * s.bbox());
}

TEST(Session, SetPoseMatchesEdits) {
  SyncSession a(fixtures::bent_bar());
  SyncSession b(fixtures::bent_bar());
  a.edit(EditDelta::rotate(1, axis_angle(Vec3::UnitZ(), 0.7)));
  b.set_pose(b.cage_rest(), rotations(a.skeleton()));
  EXPECT_LT(max_dist(a.skin_curr(), b.skin_curr()), 1e-14);
  EXPECT_LT(max_dist(a.cage_curr(), b.cage_curr()), 1e-14);
  EXPECT_THROW(b.set_pose(Points::Zero(3, 3), rotations(a.skeleton())), ValidationError);
  EXPECT_THROW(b.set_pose(b.cage_rest(), {}), ValidationError);
}

TEST(Session, ReverseOperatorCachedUntilRotation) {
  SyncSession s(fixtures::bent_bar());
  s.edit(EditDelta::cage_curr({{1, Vec3(0.001, 0, 0)}}));
  s.edit(EditDelta::cage_curr({{2, Vec3(0.001, 0, 0)}}));
  EXPECT_EQ(s.stats().cage_rev_builds, 1);
  s.edit(EditDelta::rotate(1, axis_angle(Vec3::UnitZ(), 0.2)));
  s.edit(EditDelta::cage_curr({{2, Vec3(0.001, 0, 0)}}));
  EXPECT_EQ(s.stats().cage_rev_builds, 2);
  EXPECT_EQ(s.stats().b_topo_factorizations, 1);
}

TEST(Session, SnapshotsAreImmutableAndOrdered) {
  SyncSession s(fixtures::bent_bar());
  std::atomic<bool> done{false};
  std::atomic<int> bad{0};
  std::thread reader([&] {
    std::uint64_t last = 0;
    while (!done) {
      const auto snap = s.snapshot();
      if (snap->frame < last) ++bad;
      last = snap->frame;
      // a published state is always complete
      if (snap->skin_curr.rows() != s.rig().skin.vertex_count()) ++bad;
    }
  });
  for (int e = 0; e < 50; ++e) s.edit(EditDelta::rotate(1, axis_angle(Vec3::UnitZ(), 0.02)));
  done = true;
  reader.join();
  EXPECT_EQ(bad.load(), 0);
  EXPECT_EQ(s.snapshot()->frame, 51u);
}

TEST(Session, DisabledRefitLeavesJoints) {
  SessionConfig c;
  c.refit_skeleton = false;
  SyncSession s(fixtures::bent_bar(), c);
  VertexOffsets all;
  for (int k = 0; k < s.cage_size(); ++k) all.emplace_back(k, Vec3(0.1, 0, 0));
  s.edit(EditDelta::cage_rest(all));
  EXPECT_NEAR(s.skeleton().rest_positions()(1, 0), 1.0, 1e-12);
}
