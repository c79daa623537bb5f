#pragma once

#include <string>
#include <vector>

#include "deform/session.hpp"

namespace deform {

/// One row per measured session, columns after the usual performance table:
/// preprocessing, CoR update, reverse-cage rebuild and per-frame costs. All ms.
struct TimingRow {
  std::string label;
  std::string method;
  int vertices = 0;
  int joints = 0;
  int cage_vertices = 0;
  int frames = 0;
  double mvc = 0.0;
  double skel_up_preprocess = 0.0;
  double cage_up_preprocess = 0.0;
  double cor_update = 0.0;  // 0 unless the method is COR
  double cage_rev_update = 0.0;
  double cage_up_solve = 0.0;
  double skin_frame = 0.0;
};

struct TimingTable {
  std::string machine;
  std::vector<TimingRow> rows;
};

std::string machine_description();

/// Medians over `n_frames` repetitions of each operation on the current
/// state. Preprocessing is re-run at most kPreprocessRepeats times. Only
/// observes: the session's geometry is not modified. n_frames = 0 yields a
/// table without rows.
inline constexpr int kPreprocessRepeats = 5;
TimingTable report_timings(SyncSession& session, int n_frames, const std::string& label = "rig");

/// Single-shot row from the times recorded during session setup.
TimingRow setup_timings(const SyncSession& session, const std::string& label = "rig");

std::string format_timings(const TimingTable& table);

}  // namespace deform
