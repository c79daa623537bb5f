#include "deform/script.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>

#include "deform/errors.hpp"
#include "deform/fixtures.hpp"
#include "deform/io.hpp"
#include "deform/snapshot.hpp"

namespace deform {
namespace {

constexpr std::string_view kFixturePrefix = "fixture:";

bool parse_switch(std::string_view v, bool& out) {
  if (v == "on" || v == "true" || v == "1") {
    out = true;
    return true;
  }
  if (v == "off" || v == "false" || v == "0") {
    out = false;
    return true;
  }
  return false;
}

const char* on_off(bool v) { return v ? "on" : "off"; }

std::string describe(const ScriptStep& step) {
  switch (step.kind) {
    case ScriptStep::Kind::Rotate: return "rotate " + step.joint;
    case ScriptStep::Kind::CageRest: return "cage_rest x" + std::to_string(step.offsets.size());
    case ScriptStep::Kind::CageCurr: return "cage_curr x" + std::to_string(step.offsets.size());
    case ScriptStep::Kind::ScaleRest: return "scale_rest";
    case ScriptStep::Kind::Snapshot: return "snapshot " + step.label;
    case ScriptStep::Kind::Timer: return "timer " + step.label;
  }
  return "?";
}

}  // namespace

EditScript parse_script(std::istream& in, const std::string& source,
                        const std::filesystem::path& base_dir) {
  EditScript script;
  script.base_dir = base_dir;
  enum class Part { Header, Preamble, Steps, Done } part = Part::Header;
  std::string line;
  std::size_t lineno = 0;

  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const auto toks = io::split_ws(std::string_view(line).substr(0, hash));
    if (toks.empty()) continue;
    auto fail = [&](const std::string& what) -> ParseError { return {source, lineno, what}; };
    auto number = [&](std::size_t i) {
      double v = 0.0;
      if (i >= toks.size() || !io::parse_double(toks[i], v)) {
        throw fail("expected a number at field " + std::to_string(i + 1));
      }
      return v;
    };
    auto integer = [&](std::size_t i) {
      long v = 0;
      if (i >= toks.size() || !io::parse_int(toks[i], v)) {
        throw fail("expected an integer at field " + std::to_string(i + 1));
      }
      return static_cast<int>(v);
    };

    const std::string_view kw = toks[0];
    switch (part) {
      case Part::Header:
        if (toks.size() != 2 || kw != "deform-script" || toks[1] != "1") {
          throw fail("expected header 'deform-script 1'");
        }
        part = Part::Preamble;
        break;

      case Part::Preamble:
        if (kw == "rig") {
          if (toks.size() != 2) throw fail("expected 'rig <path|fixture:NAME>'");
          script.rig = std::string(toks[1]);
        } else if (kw == "config") {
          if (toks.size() != 3) throw fail("expected 'config <key> <value>'");
          const std::string_view key = toks[1];
          const std::string_view value = toks[2];
          auto& cfg = script.config;
          bool ok = true;
          double x = 0.0;
          if (key == "skinning") {
            try {
              cfg.method = parse_skinning_method(std::string(value));
            } catch (const std::invalid_argument& e) {
              throw fail(e.what());
            }
          } else if (key == "ghost") {
            ok = parse_switch(value, cfg.ghost);
          } else if (key == "refit_skeleton") {
            ok = parse_switch(value, cfg.refit_skeleton);
          } else if (key == "localization_exponent" || key == "cor_sigma" ||
                     key == "audit_tolerance" || key == "edit_cap" ||
                     key == "consensus_tolerance") {
            ok = io::parse_double(value, x) && x > 0.0;
            if (key == "localization_exponent") cfg.localization_exponent = x;
            if (key == "cor_sigma") cfg.cor_sigma = x;
            if (key == "audit_tolerance") cfg.audit_tolerance = x;
            if (key == "edit_cap") cfg.edit_cap = x;
            if (key == "consensus_tolerance") cfg.consensus_tolerance = x;
          } else {
            throw fail("unknown config key '" + std::string(key) + "'");
          }
          if (!ok) throw fail("bad value '" + std::string(value) + "' for " + std::string(key));
        } else if (kw == "begin") {
          if (script.rig.empty()) throw fail("'rig' must precede 'begin'");
          part = Part::Steps;
        } else {
          throw fail("unexpected '" + std::string(kw) + "' before 'begin'");
        }
        break;

      case Part::Steps: {
        if (kw == "end") {
          part = Part::Done;
          break;
        }
        ScriptStep step;
        step.line = lineno;
        if (kw == "rotate") {
          if (toks.size() != 6) throw fail("expected 'rotate <joint> <w> <x> <y> <z>'");
          step.kind = ScriptStep::Kind::Rotate;
          step.joint = std::string(toks[1]);
          step.rotation = Quat(number(2), number(3), number(4), number(5));
          if (!(step.rotation.norm() > 1e-12)) throw fail("zero quaternion");
        } else if (kw == "rotate_axis") {
          if (toks.size() != 6) throw fail("expected 'rotate_axis <joint> <ax> <ay> <az> <deg>'");
          step.kind = ScriptStep::Kind::Rotate;
          step.joint = std::string(toks[1]);
          const Vec3 axis(number(2), number(3), number(4));
          if (!(axis.norm() > 0.0)) throw fail("zero rotation axis");
          step.rotation = axis_angle(axis, number(5) * std::numbers::pi / 180.0);
        } else if (kw == "cage_rest" || kw == "cage_curr") {
          if (toks.size() < 5 || (toks.size() - 1) % 4 != 0) {
            throw fail("expected groups of '<vertex> <dx> <dy> <dz>'");
          }
          step.kind = kw == "cage_rest" ? ScriptStep::Kind::CageRest : ScriptStep::Kind::CageCurr;
          for (std::size_t i = 1; i < toks.size(); i += 4) {
            step.offsets.emplace_back(integer(i), Vec3(number(i + 1), number(i + 2), number(i + 3)));
          }
        } else if (kw == "scale_rest") {
          if (toks.size() != 4 && toks.size() != 7) {
            throw fail("expected 'scale_rest <sx> <sy> <sz> [<cx> <cy> <cz>]'");
          }
          step.kind = ScriptStep::Kind::ScaleRest;
          step.scale = Vec3(number(1), number(2), number(3));
          if (toks.size() == 7) step.center = Vec3(number(4), number(5), number(6));
        } else if (kw == "snapshot") {
          if (toks.size() != 2) throw fail("expected 'snapshot <name>'");
          step.kind = ScriptStep::Kind::Snapshot;
          step.label = std::string(toks[1]);
          if (step.label.find('/') != std::string::npos) throw fail("snapshot name contains '/'");
        } else if (kw == "timer") {
          if (toks.size() != 2 && toks.size() != 3) throw fail("expected 'timer <label> [<frames>]'");
          step.kind = ScriptStep::Kind::Timer;
          step.label = std::string(toks[1]);
          step.frames = toks.size() == 3 ? integer(2) : 50;
          if (step.frames < 0) throw fail("negative frame count");
        } else {
          throw fail("unknown step '" + std::string(kw) + "'");
        }
        script.steps.push_back(std::move(step));
        break;
      }

      case Part::Done:
        throw fail("content after 'end'");
    }
  }
  if (part == Part::Header) throw ParseError(source, lineno, "missing header 'deform-script 1'");
  if (part != Part::Done) throw ParseError(source, lineno, "missing 'end'");
  return script;
}

EditScript read_script(const std::filesystem::path& path) {
  auto in = io::open_in(path);
  return parse_script(in, path.string(), path.parent_path());
}

void write_script(std::ostream& out, const EditScript& script) {
  using io::format_double;
  const auto& cfg = script.config;
  out << "deform-script 1\n";
  out << "rig " << script.rig << '\n';
  out << "config skinning " << to_string(cfg.method) << '\n';
  out << "config ghost " << on_off(cfg.ghost) << '\n';
  out << "config refit_skeleton " << on_off(cfg.refit_skeleton) << '\n';
  out << "config localization_exponent " << format_double(cfg.localization_exponent) << '\n';
  out << "config cor_sigma " << format_double(cfg.cor_sigma) << '\n';
  out << "config audit_tolerance " << format_double(cfg.audit_tolerance) << '\n';
  out << "config edit_cap " << format_double(cfg.edit_cap) << '\n';
  out << "config consensus_tolerance " << format_double(cfg.consensus_tolerance) << '\n';
  out << "begin\n";
  for (const auto& step : script.steps) {
    switch (step.kind) {
      case ScriptStep::Kind::Rotate:
        out << "rotate " << step.joint << ' ' << format_double(step.rotation.w()) << ' '
            << format_double(step.rotation.x()) << ' ' << format_double(step.rotation.y()) << ' '
            << format_double(step.rotation.z());
        break;
      case ScriptStep::Kind::CageRest:
      case ScriptStep::Kind::CageCurr:
        out << (step.kind == ScriptStep::Kind::CageRest ? "cage_rest" : "cage_curr");
        for (const auto& [k, d] : step.offsets) {
          out << ' ' << k << ' ' << format_double(d.x()) << ' ' << format_double(d.y()) << ' '
              << format_double(d.z());
        }
        break;
      case ScriptStep::Kind::ScaleRest:
        out << "scale_rest";
        for (int i = 0; i < 3; ++i) out << ' ' << format_double(step.scale[i]);
        for (int i = 0; i < 3; ++i) out << ' ' << format_double(step.center[i]);
        break;
      case ScriptStep::Kind::Snapshot:
        out << "snapshot " << step.label;
        break;
      case ScriptStep::Kind::Timer:
        out << "timer " << step.label << ' ' << step.frames;
        break;
    }
    out << '\n';
  }
  out << "end\n";
}

Rig load_script_rig(const std::string& ref, const std::filesystem::path& base_dir) {
  if (ref.rfind(kFixturePrefix, 0) == 0) return fixtures::by_name(ref.substr(kFixturePrefix.size()));
  std::filesystem::path p(ref);
  if (p.is_relative()) p = base_dir / p;
  return load_rig(p);
}

EditDelta resolve_step(const ScriptStep& step, const SyncSession& session) {
  switch (step.kind) {
    case ScriptStep::Kind::Rotate: {
      const Skeleton& skel = session.skeleton();
      long index = -1;
      if (!io::parse_int(step.joint, index)) {
        for (int j = 0; j < skel.size(); ++j) {
          if (skel.joints[j].name == step.joint) index = j;
        }
      }
      if (index < 0 || index >= skel.size()) {
        throw ValidationError("unknown joint '" + step.joint + "'");
      }
      return EditDelta::rotate(static_cast<int>(index), step.rotation);
    }
    case ScriptStep::Kind::CageRest: return EditDelta::cage_rest(step.offsets);
    case ScriptStep::Kind::CageCurr: return EditDelta::cage_curr(step.offsets);
    case ScriptStep::Kind::ScaleRest: {
      const Points& cage = session.cage_rest();
      VertexOffsets offsets;
      for (Eigen::Index k = 0; k < cage.rows(); ++k) {
        const Vec3 rel = Vec3(cage.row(k)) - step.center;
        offsets.emplace_back(static_cast<int>(k), (step.scale.array() - 1.0).matrix().cwiseProduct(rel));
      }
      return EditDelta::cage_rest(std::move(offsets));
    }
    default:
      throw std::invalid_argument("step is not an edit");
  }
}

RunResult run_script(const EditScript& script, const RunOptions& options) {
  SessionConfig cfg = script.config;
  if (options.method) cfg.method = *options.method;
  if (options.ghost) cfg.ghost = *options.ghost;
  if (options.audit_tolerance) cfg.audit_tolerance = *options.audit_tolerance;

  SyncSession session(load_script_rig(script.rig, script.base_dir), cfg);
  RunResult result;
  result.timings.machine = machine_description();
  result.timings.rows.push_back(setup_timings(session, "setup"));

  std::ofstream audit_log;
  if (options.write_artifacts) {
    std::filesystem::create_directories(options.out_dir);
    audit_log = io::open_out(options.out_dir / "audit.txt");
    audit_log << "# step line what worst skin cage joints rest_skin hierarchy cors ms\n";
  }
  auto write_timings = [&] {
    if (!options.write_artifacts) return;
    auto out = io::open_out(options.out_dir / "timings.txt");
    out << format_timings(result.timings);
  };
  auto snapshot = [&](const std::string& name) {
    if (!options.write_artifacts) return;
    const auto files = export_snapshot(*session.snapshot(), session.rig(), options.out_dir, name);
    result.artifacts.insert(result.artifacts.end(), files.begin(), files.end());
  };

  for (std::size_t i = 0; i < script.steps.size(); ++i) {
    const ScriptStep& step = script.steps[i];
    const std::size_t index = i + 1;
    try {
      if (step.kind == ScriptStep::Kind::Snapshot) {
        snapshot(step.label);
        continue;
      }
      if (step.kind == ScriptStep::Kind::Timer) {
        auto table = report_timings(session, step.frames, step.label);
        result.timings.rows.insert(result.timings.rows.end(), table.rows.begin(), table.rows.end());
        continue;
      }
      const EditDelta delta = resolve_step(step, session);
      const auto t0 = std::chrono::steady_clock::now();
      session.edit(delta);
      StepReport report;
      report.index = index;
      report.description = describe(step);
      report.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      report.audit = session.audit();
      if (audit_log.is_open()) {
        const auto& a = report.audit;
        audit_log << index << ' ' << step.line << " '" << report.description << "' " << a.worst()
                  << ' ' << a.skin << ' ' << a.cage << ' ' << a.joints << ' ' << a.rest_skin << ' '
                  << a.hierarchy << ' ' << a.cors << ' ' << report.ms << '\n'
                  << std::flush;
      }
      if (options.log) {
        *options.log << "step " << index << " (" << report.description << "): audit "
                     << report.audit.worst() << ", " << report.ms << " ms\n";
      }
      result.steps.push_back(report);
      if (!report.audit.ok(cfg.audit_tolerance)) {
        throw SolverError("steady-state audit " + io::format_double(report.audit.worst()) +
                          " exceeds tolerance " + io::format_double(cfg.audit_tolerance));
      }
    } catch (const std::exception& e) {
      write_timings();
      throw ScriptError(index, "line " + std::to_string(step.line) + ": " + e.what());
    }
  }
  snapshot("final");
  write_timings();
  result.final_state = session.snapshot();
  return result;
}

}  // namespace deform
