// deform: command-line front end for synchronized skeleton/cage editing.
#include <filesystem>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "deform/errors.hpp"
#include "deform/fixtures.hpp"
#include "deform/keyframes.hpp"
#include "deform/script.hpp"
#include "deform/server.hpp"
#include "deform/snapshot.hpp"
#include "deform/timing.hpp"

namespace {

using namespace deform;

struct CommonFlags {
  std::string skinning;
  std::string ghost;
  double tolerance = 0.0;
  std::uint64_t seed = 1;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--skinning", f.skinning, "lbs | dqs | cor")
      ->check(CLI::IsMember({"lbs", "dqs", "cor"}, CLI::ignore_case));
  cmd->add_option("--ghost", f.ghost, "fit the cage to an LBS ghost for non-LBS skinning")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--tolerance", f.tolerance, "steady-state audit tolerance (relative to bbox)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "seed for randomized edits");
}

SessionConfig apply_flags(SessionConfig cfg, const CommonFlags& f) {
  if (!f.skinning.empty()) cfg.method = parse_skinning_method(f.skinning);
  if (!f.ghost.empty()) cfg.ghost = f.ghost == "on";
  if (f.tolerance > 0.0) cfg.audit_tolerance = f.tolerance;
  return cfg;
}

Rig open_rig(const std::string& ref) {
  return load_script_rig(ref, std::filesystem::current_path());
}

int cmd_run(const std::string& path, const std::string& out, bool quiet, const CommonFlags& f) {
  const EditScript script = read_script(path);
  RunOptions options;
  options.out_dir = out;
  if (!f.skinning.empty()) options.method = parse_skinning_method(f.skinning);
  if (!f.ghost.empty()) options.ghost = f.ghost == "on";
  if (f.tolerance > 0.0) options.audit_tolerance = f.tolerance;
  if (!quiet) options.log = &std::cout;
  const RunResult result = run_script(script, options);
  if (!quiet) {
    std::cout << format_timings(result.timings);
    std::cout << "wrote " << result.artifacts.size() << " files to " << out << "\n";
  }
  return 0;
}

int cmd_play(const std::string& rig_ref, const std::string& track_path, double fps,
             const std::string& out, const CommonFlags& f) {
  SyncSession session(open_rig(rig_ref), apply_flags({}, f));
  const KeyframeTrack track = read_track(track_path);
  const int joints = session.skeleton().size();
  validate_track(track, joints, session.cage_size());
  const auto [t0, t1] = track_range(track);
  const Points rest_cage = session.cage_rest();
  const int frames = static_cast<int>(std::floor((t1 - t0) * fps + 1e-9)) + 1;
  for (int i = 0; i < frames; ++i) {
    const double t = std::min(t1, t0 + i / fps);
    const PoseSample pose = interpolate(track, t, joints, rest_cage);
    session.set_pose(pose.cage_rest, pose.rotations);
    char stem[32];
    std::snprintf(stem, sizeof stem, "frame_%05d", i);
    export_snapshot(*session.snapshot(), session.rig(), out, stem);
  }
  std::cout << "wrote " << frames << " frames to " << out << "\n";
  return 0;
}

int cmd_bench(const std::string& rig_ref, int frames, int edits, const CommonFlags& f) {
  SyncSession session(open_rig(rig_ref), apply_flags({}, f));
  const std::string label = rig_ref.starts_with("fixture:") ? rig_ref.substr(8)
                                                             : std::filesystem::path(rig_ref).stem().string();
  TimingTable table = report_timings(session, frames, label);
  std::cout << format_timings(table);
  if (edits <= 0) return 0;

  // loop check: random small current-cage edits must come back exactly
  std::mt19937_64 rng(f.seed);
  std::uniform_int_distribution<int> pick(0, session.cage_size() - 1);
  std::normal_distribution<double> gauss;
  const double step = 0.01 * session.bbox();
  double worst = 0.0;
  for (int e = 0; e < edits; ++e) {
    const int k = pick(rng);
    const Vec3 d = Vec3(gauss(rng), gauss(rng), gauss(rng)).normalized() * step;
    Points expected = session.cage_curr();
    expected.row(k) += d.transpose();
    session.edit(EditDelta::cage_curr({{k, d}}));
    worst = std::max(worst, (session.cage_curr() - expected).rowwise().norm().maxCoeff());
  }
  std::cout << "loop check: " << edits << " edits, worst deviation " << worst / session.bbox()
            << " x bbox\n";
  return 0;
}

int cmd_select(const std::string& rig_ref, const CommonFlags& f) {
  SyncSession session(open_rig(rig_ref), apply_flags({}, f));
  const auto& sel = session.selection();
  std::cout << "# selected skin vertices (one per cage vertex), rcond "
            << inverse_condition(sel) << "\n";
  for (int i : sel.indices) std::cout << i << "\n";
  return 0;
}

protocol::Server* g_server = nullptr;

int cmd_serve(int port, const std::string& record, const std::string& data, const CommonFlags& f) {
  protocol::EndpointOptions options;
  options.config = apply_flags({}, f);
  options.record_path = record;
  options.data_dir = data.empty() ? std::filesystem::current_path() : std::filesystem::path(data);
  protocol::Server server(options, static_cast<std::uint16_t>(port));
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::cout << "listening on 127.0.0.1:" << server.port() << std::endl;
  server.run();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synchronized skeleton and cage deformation"};
  app.require_subcommand(1);
  CommonFlags flags;

  std::string script_path, out_dir = "out";
  bool quiet = false;
  auto* run = app.add_subcommand("run", "replay an edit script");
  run->add_option("script", script_path)->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "artifact directory");
  run->add_flag("--quiet", quiet);
  add_common(run, flags);

  std::string rig_ref, track_path;
  double fps = 24.0;
  auto* play = app.add_subcommand("play", "sample a keyframe track");
  play->add_option("rig", rig_ref, "rig manifest or fixture:NAME")->required();
  play->add_option("track", track_path)->required()->check(CLI::ExistingFile);
  play->add_option("--fps", fps)->check(CLI::PositiveNumber);
  play->add_option("--out", out_dir);
  add_common(play, flags);

  int frames = 100;
  int edits = 0;
  auto* bench = app.add_subcommand("bench", "time the update operators");
  bench->add_option("rig", rig_ref, "rig manifest or fixture:NAME")->required();
  bench->add_option("--frames", frames)->check(CLI::NonNegativeNumber);
  bench->add_option("--edits", edits, "random current-cage edits for a loop check")
      ->check(CLI::NonNegativeNumber);
  add_common(bench, flags);

  int port = 7878;
  std::string record, data_dir;
  auto* serve = app.add_subcommand("serve", "serve the interactive session protocol");
  serve->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve->add_option("--record", record, "write the accepted edit stream as a script");
  serve->add_option("--data", data_dir, "directory for relative rig paths");
  add_common(serve, flags);

  auto* select = app.add_subcommand("select", "print the selected skin vertices");
  select->add_option("rig", rig_ref)->required();
  add_common(select, flags);

  std::string fixture, dir;
  auto* make = app.add_subcommand("make-rig", "write a procedural rig (bar, arm, large, biped)");
  make->add_option("name", fixture)->required();
  make->add_option("dir", dir)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(script_path, out_dir, quiet, flags);
    if (*play) return cmd_play(rig_ref, track_path, fps, out_dir, flags);
    if (*bench) return cmd_bench(rig_ref, frames, edits, flags);
    if (*serve) return cmd_serve(port, record, data_dir, flags);
    if (*select) return cmd_select(rig_ref, flags);
    if (*make) {
      std::cout << save_rig(fixtures::by_name(fixture), dir, fixture).string() << "\n";
      return 0;
    }
  } catch (const ScriptError& e) {
    std::cerr << "deform: " << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "deform: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "deform: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
