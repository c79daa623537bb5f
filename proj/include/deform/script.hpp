#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "deform/session.hpp"
#include "deform/timing.hpp"

namespace deform {

/// One line of an edit script. Joints may be referenced by name or index and
/// are resolved against the rig when the script runs.
struct ScriptStep {
  enum class Kind { Rotate, CageRest, CageCurr, ScaleRest, Snapshot, Timer };

  Kind kind = Kind::Rotate;
  std::size_t line = 0;
  std::string joint;
  Quat rotation = Quat::Identity();
  VertexOffsets offsets;
  Vec3 scale = Vec3::Ones();  // ScaleRest: per-axis factors about `center`
  Vec3 center = Vec3::Zero();
  std::string label;  // Snapshot name, Timer label
  int frames = 0;     // Timer repetitions
};

/// Text format (`#` starts a comment):
///   deform-script 1
///   rig <manifest path relative to the script | fixture:NAME>
///   config <key> <value>        skinning, ghost, refit_skeleton,
///                               localization_exponent, cor_sigma,
///                               audit_tolerance, edit_cap
///   begin
///   rotate <joint> <w> <x> <y> <z>
///   rotate_axis <joint> <ax> <ay> <az> <degrees>
///   cage_rest <k> <dx> <dy> <dz> [<k> <dx> <dy> <dz> ...]
///   cage_curr <k> <dx> <dy> <dz> [...]
///   scale_rest <sx> <sy> <sz> [<cx> <cy> <cz>]
///   snapshot <name>
///   timer <label> [<frames>]
///   end
struct EditScript {
  std::string rig;
  std::filesystem::path base_dir;
  SessionConfig config;
  std::vector<ScriptStep> steps;
};

EditScript parse_script(std::istream& in, const std::string& source = "<script>",
                        const std::filesystem::path& base_dir = {});
EditScript read_script(const std::filesystem::path& path);
/// Lossless text form (17 significant digits); parse_script round-trips it.
void write_script(std::ostream& out, const EditScript& script);

/// Rig referenced by a script: `fixture:NAME` or a manifest path.
Rig load_script_rig(const std::string& ref, const std::filesystem::path& base_dir);

/// Converts a step into a session edit. Rotate, CageRest, CageCurr and
/// ScaleRest only.
EditDelta resolve_step(const ScriptStep& step, const SyncSession& session);

class ScriptError : public std::runtime_error {
 public:
  ScriptError(std::size_t step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<SkinningMethod> method;
  std::optional<bool> ghost;
  std::optional<double> audit_tolerance;
  std::ostream* log = nullptr;
  bool write_artifacts = true;
};

struct StepReport {
  std::size_t index = 0;
  std::string description;
  SteadyStateAudit audit;
  double ms = 0.0;
};

struct RunResult {
  std::vector<StepReport> steps;
  std::vector<std::filesystem::path> artifacts;
  TimingTable timings;
  std::shared_ptr<const Snapshot> final_state;
};

/// Replays the script through a fresh session. Writes snapshots, an audit
/// log (audit.txt) and the timing table (timings.txt) under out_dir, plus a
/// `final` snapshot. Throws ScriptError naming the failing step; artifacts
/// written before it stay on disk.
RunResult run_script(const EditScript& script, const RunOptions& options = {});

}  // namespace deform
