#include <gtest/gtest.h>

#include <fstream>
#include <numbers>
#include <sstream>

#include "deform/errors.hpp"
#include "deform/fixtures.hpp"
#include "deform/io.hpp"
#include "deform/keyframes.hpp"
#include "deform/kinematics.hpp"
#include "deform/script.hpp"
#include "deform/timing.hpp"

using namespace deform;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("deform_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

EditScript parse(const std::string& text) {
  std::istringstream in(text);
  return parse_script(in, "<test>", DEFORM_DATA_DIR);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

const fs::path kBentBar = fs::path(DEFORM_DATA_DIR) / "scripts" / "bent_bar.txt";

}  // namespace

TEST(Script, ParsesAllStepKinds) {
  const EditScript s = parse(
      "deform-script 1\n"
      "rig fixture:bar\n"
      "config skinning dqs\n"
      "config ghost off\n"
      "config edit_cap 0.02\n"
      "begin\n"
      "rotate elbow 1 0 0 0   # identity\n"
      "rotate_axis 1 0 0 1 90\n"
      "cage_rest 3 0.1 0 0 4 0 0.1 0\n"
      "cage_curr 5 0 0 0.01\n"
      "scale_rest 2 1 1\n"
      "snapshot a\n"
      "timer t 3\n"
      "end\n");
  EXPECT_EQ(s.rig, "fixture:bar");
  EXPECT_EQ(s.config.method, SkinningMethod::DQS);
  EXPECT_FALSE(s.config.ghost);
  EXPECT_DOUBLE_EQ(s.config.edit_cap, 0.02);
  ASSERT_EQ(s.steps.size(), 7u);
  EXPECT_NEAR(s.steps[1].rotation.angularDistance(axis_angle(Vec3::UnitZ(), std::numbers::pi / 2)), 0.0, 1e-15);
  EXPECT_EQ(s.steps[2].offsets.size(), 2u);
  EXPECT_EQ(s.steps[2].offsets[1].first, 4);
  EXPECT_EQ(s.steps[4].kind, ScriptStep::Kind::ScaleRest);
  EXPECT_EQ(s.steps[6].frames, 3);
  EXPECT_EQ(s.steps[6].line, 13u);
}

TEST(Script, ErrorsCarryLineNumbers) {
  const std::vector<std::pair<std::string, std::size_t>> cases{
      {"deform-script 2\n", 1},
      {"deform-script 1\nrig fixture:bar\nbegin\nrotate 1 1 0 0\nend\n", 4},
      {"deform-script 1\nrig fixture:bar\nconfig skinning nope\nbegin\nend\n", 3},
      {"deform-script 1\nbegin\nend\n", 2},
      {"deform-script 1\nrig fixture:bar\nbegin\ncage_curr 1 0 0\nend\n", 4},
      {"deform-script 1\nrig fixture:bar\nbegin\nsnapshot a\n", 4},
  };
  for (const auto& [text, line] : cases) {
    try {
      parse(text);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), line) << e.what();
    }
  }
}

TEST(Script, WriteParseRoundTrip) {
  EditScript s = parse(
      "deform-script 1\nrig fixture:biped\nconfig skinning cor\nbegin\n"
      "rotate_axis 3 0.3 0.1 1 33.3\ncage_curr 5 0.001 0.0002 -0.0003\nscale_rest 1.1 1 0.9 0.1 0.2 0.3\n"
      "snapshot x\ntimer t 0\nend\n");
  std::stringstream buf;
  write_script(buf, s);
  const EditScript back = parse_script(buf, "<buf>", DEFORM_DATA_DIR);
  std::stringstream again;
  write_script(again, back);
  EXPECT_EQ(buf.str(), again.str());
  EXPECT_EQ(back.steps[0].rotation.coeffs(), s.steps[0].rotation.coeffs());
  EXPECT_EQ(back.steps[1].offsets[0].second, s.steps[1].offsets[0].second);
}

TEST(Script, EmptyScriptExportsRestPose) {
  const fs::path out = scratch("empty");
  RunOptions options;
  options.out_dir = out;
  const RunResult r = run_script(parse("deform-script 1\nrig bar/bar.rig\nbegin\nend\n"), options);
  EXPECT_TRUE(r.steps.empty());
  const Rig rig = load_rig(fs::path(DEFORM_DATA_DIR) / "bar" / "bar.rig");
  const TriMesh skin = io::read_obj(out / "final_skin.obj");
  const TriMesh cage = io::read_obj(out / "final_cage.obj");
  EXPECT_LT((skin.vertices - rig.skin.vertices).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((cage.vertices - rig.cage.vertices).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(fs::exists(out / "audit.txt"));
  EXPECT_TRUE(fs::exists(out / "timings.txt"));
}

TEST(Script, BentBarMatchesGolden) {
  const fs::path out = scratch("golden");
  RunOptions options;
  options.out_dir = out;
  run_script(read_script(kBentBar), options);
  const fs::path golden = fs::path(DEFORM_GOLDEN_DIR) / "bent_bar";
  for (const char* name : {"scaled_skin.obj", "scaled_cage.obj", "scaled_cage_rest.obj"}) {
    const TriMesh want = io::read_obj(golden / name);
    const TriMesh got = io::read_obj(out / name);
    ASSERT_EQ(want.triangles, got.triangles) << name;
    EXPECT_LT((want.vertices - got.vertices).cwiseAbs().maxCoeff(), 1e-9) << name;
  }
  for (const char* name : {"scaled.skel", "scaled_rest.skel"}) {
    const Skeleton want = io::read_skel(golden / name);
    const Skeleton got = io::read_skel(out / name);
    EXPECT_LT((want.rest_positions() - got.rest_positions()).cwiseAbs().maxCoeff(), 1e-9) << name;
  }
}

TEST(Script, ReplayIsByteDeterministic) {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  RunOptions options;
  options.out_dir = a;
  run_script(read_script(kBentBar), options);
  options.out_dir = b;
  run_script(read_script(kBentBar), options);
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename();
    if (name == "timings.txt" || name == "audit.txt") continue;  // wall-clock columns
    EXPECT_EQ(slurp(entry.path()), slurp(b / name)) << name;
  }
}

TEST(Script, FailingStepReportsIndexAndKeepsArtifacts) {
  const fs::path out = scratch("fail");
  RunOptions options;
  options.out_dir = out;
  const EditScript s = parse(
      "deform-script 1\nrig fixture:bar\nbegin\nsnapshot before\n"
      "rotate_axis elbow 0 0 1 10\nrotate nosuchjoint 1 0 0 0\nsnapshot after\nend\n");
  try {
    run_script(s, options);
    FAIL();
  } catch (const ScriptError& e) {
    EXPECT_EQ(e.step(), 3u);
    EXPECT_NE(std::string(e.what()).find("nosuchjoint"), std::string::npos);
  }
  EXPECT_TRUE(fs::exists(out / "before_skin.obj"));
  EXPECT_FALSE(fs::exists(out / "after_skin.obj"));
  EXPECT_NE(slurp(out / "audit.txt").find("rotate elbow"), std::string::npos);
}

TEST(Script, OverrideFlagsApply) {
  RunOptions options;
  options.write_artifacts = false;
  options.method = SkinningMethod::COR;
  const RunResult r = run_script(read_script(kBentBar), options);
  EXPECT_EQ(r.timings.rows.front().method, "cor");
}

TEST(Keyframes, ExactKeysAndMidpoints) {
  KeyframeTrack track;
  const Quat q45 = axis_angle(Vec3::UnitZ(), std::numbers::pi / 4);
  const Quat q90 = axis_angle(Vec3::UnitZ(), std::numbers::pi / 2);
  track.skeleton.push_back({0.0, {Quat::Identity(), Quat::Identity()}});
  track.skeleton.push_back({1.0, {Quat::Identity(), q90}});
  Points c0 = Points::Random(4, 3);
  Points c1 = Points::Random(4, 3);
  track.cage.push_back({0.5, c0});
  track.cage.push_back({2.0, c1});
  validate_track(track, 2, 4);

  PoseSample at_key = interpolate(track, 1.0, 2, Points());
  EXPECT_EQ(at_key.rotations[1].coeffs(), q90.coeffs());
  EXPECT_EQ(interpolate(track, 0.5, 2, Points()).cage_rest, c0);
  EXPECT_EQ(interpolate(track, 2.0, 2, Points()).cage_rest, c1);

  const PoseSample mid = interpolate(track, 0.5, 2, Points());
  EXPECT_LT(mid.rotations[1].angularDistance(q45), 1e-15);
  const PoseSample cage_mid = interpolate(track, 1.25, 2, Points());
  EXPECT_LT((cage_mid.cage_rest - 0.5 * (c0 + c1)).cwiseAbs().maxCoeff(), 1e-15);

  // clamped outside the key range
  EXPECT_EQ(interpolate(track, -3.0, 2, Points()).cage_rest, c0);
  EXPECT_EQ(interpolate(track, 9.0, 2, Points()).rotations[1].coeffs(), q90.coeffs());
  EXPECT_EQ(track_range(track), (std::pair<double, double>{0.0, 2.0}));
}

TEST(Keyframes, ShortestArc) {
  KeyframeTrack track;
  const Quat a = axis_angle(Vec3::UnitZ(), 0.2);
  Quat b = axis_angle(Vec3::UnitZ(), 0.6);
  b.coeffs() *= -1.0;  // same rotation, opposite hemisphere
  track.skeleton.push_back({0.0, {a}});
  track.skeleton.push_back({1.0, {b}});
  const Quat mid = interpolate(track, 0.5, 1, Points()).rotations[0];
  EXPECT_LT(mid.angularDistance(axis_angle(Vec3::UnitZ(), 0.4)), 1e-14);
}

TEST(Keyframes, EmptyTracksUseDefaults) {
  const Points rest = Points::Random(3, 3);
  const PoseSample p = interpolate(KeyframeTrack{}, 0.3, 4, rest);
  EXPECT_EQ(p.rotations.size(), 4u);
  EXPECT_EQ(p.cage_rest, rest);
}

TEST(Keyframes, ParseAndValidate) {
  std::istringstream in(
      "deform-track 1\nskel_key 0\nq 0 1 0 0 0\nq 1 1 0 0 0\nskel_key 1\nq 0 1 0 0 0\n"
      "q 1 0.70710678118654757 0 0 0.70710678118654746\ncage_key 0\nv 0 0 0\nv 1 0 0\n");
  const KeyframeTrack t = parse_track(in);
  ASSERT_EQ(t.skeleton.size(), 2u);
  ASSERT_EQ(t.cage.size(), 1u);
  EXPECT_EQ(t.cage[0].cage_rest.rows(), 2);
  EXPECT_NO_THROW(validate_track(t, 2, 2));
  EXPECT_THROW(validate_track(t, 3, 2), ValidationError);
  EXPECT_THROW(validate_track(t, 2, 5), ValidationError);

  std::stringstream buf;
  write_track(buf, t);
  const KeyframeTrack back = parse_track(buf);
  EXPECT_EQ(back.skeleton[1].rotations[1].coeffs(), t.skeleton[1].rotations[1].coeffs());

  KeyframeTrack bad = t;
  bad.skeleton[1].time = 0.0;
  EXPECT_THROW(validate_track(bad, 2, 2), ValidationError);
  bad = t;
  bad.skeleton[0].rotations[0] = Quat(2, 0, 0, 0);
  EXPECT_THROW(validate_track(bad, 2, 2), ValidationError);

  std::istringstream broken("deform-track 1\nq 0 1 0 0 0\n");
  EXPECT_THROW(parse_track(broken), ParseError);
}

TEST(Keyframes, PlaybackReproducesKeys) {
  SyncSession s(fixtures::bent_bar());
  KeyframeTrack track;
  const std::vector<Quat> key{Quat::Identity(), axis_angle(Vec3::UnitZ(), 1.0)};
  Points cage = s.cage_rest();
  cage.col(0) *= 1.3;
  track.skeleton.push_back({0.0, {Quat::Identity(), Quat::Identity()}});
  track.skeleton.push_back({1.0, key});
  track.cage.push_back({1.0, cage});
  const PoseSample p = interpolate(track, 1.0, 2, s.cage_rest());
  s.set_pose(p.cage_rest, p.rotations);
  EXPECT_EQ(s.cage_rest(), cage);
  const auto got = rotations(s.skeleton());
  for (int j = 0; j < 2; ++j) EXPECT_LT(got[j].angularDistance(key[j]), 1e-15);
  EXPECT_EQ(s.stats().cage_rev_builds, 0);
}

TEST(Timing, ZeroFramesGivesEmptyTable) {
  SyncSession s(fixtures::bent_bar());
  const TimingTable t = report_timings(s, 0);
  EXPECT_TRUE(t.rows.empty());
  EXPECT_FALSE(t.machine.empty());
  EXPECT_NE(format_timings(t).find("machine"), std::string::npos);
}

TEST(Timing, ObservationOnly) {
  SyncSession s(fixtures::bent_bar(), SessionConfig{.method = SkinningMethod::COR});
  s.edit(EditDelta::rotate(1, axis_angle(Vec3::UnitZ(), 0.8)));
  const auto before = s.snapshot();
  const Points cors = s.cor()->cors;
  const TimingTable t = report_timings(s, 3, "bar");
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].vertices, s.rig().skin.vertex_count());
  EXPECT_GT(t.rows[0].cage_rev_update, 0.0);
  EXPECT_EQ(s.skin_curr(), before->skin_curr);
  EXPECT_EQ(s.cage_curr(), before->cage_curr);
  EXPECT_EQ(s.cor()->cors, cors);
  s.edit(EditDelta::cage_curr({{3, Vec3(0.001, 0, 0)}}));
  EXPECT_TRUE(s.audit().ok(1e-10));
}
