#include "deform/timing.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include <sys/utsname.h>

#include "deform/joint_coords.hpp"
#include "deform/maxvol.hpp"

namespace deform {
namespace {

using Clock = std::chrono::steady_clock;

template <class F>
double median_ms(int n, F&& f) {
  std::vector<double> t;
  t.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto t0 = Clock::now();
    f();
    t.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
  }
  std::nth_element(t.begin(), t.begin() + t.size() / 2, t.end());
  return t[t.size() / 2];
}

std::string cpu_model() {
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) return line.substr(colon + 2);
    }
  }
  return "unknown cpu";
}

}  // namespace

std::string machine_description() {
  std::ostringstream out;
  out << cpu_model() << ", " << std::thread::hardware_concurrency() << " hw threads";
  utsname u{};
  if (uname(&u) == 0) out << ", " << u.sysname << ' ' << u.release << ' ' << u.machine;
  return out.str();
}

TimingRow setup_timings(const SyncSession& session, const std::string& label) {
  const auto& st = session.stats();
  TimingRow row;
  row.label = label;
  row.method = to_string(session.config().method);
  row.vertices = session.rig().skin.vertex_count();
  row.joints = session.skeleton().size();
  row.cage_vertices = session.cage_size();
  row.frames = 1;
  row.mvc = st.mvc_ms;
  row.skel_up_preprocess = st.skel_up_preprocess_ms;
  row.cage_up_preprocess = st.cage_up_preprocess_ms;
  row.cage_rev_update = st.cage_rev_build_ms;
  return row;
}

TimingTable report_timings(SyncSession& session, int n_frames, const std::string& label) {
  TimingTable table;
  table.machine = machine_description();
  if (n_frames <= 0) return table;

  TimingRow row = setup_timings(session, label);
  row.frames = n_frames;
  const int pre = std::min(n_frames, kPreprocessRepeats);
  const Rig& rig = session.rig();
  const SessionConfig& cfg = session.config();

  JointCoordsOptions jc;
  jc.exponent = cfg.localization_exponent;
  jc.mec = cfg.mec;
  row.skel_up_preprocess = median_ms(pre, [&] {
    volatile auto rows = joint_coords(rig.skeleton, rig.skin, rig.weights, session.phi(), rig.cage, jc).rows();
    (void)rows;
  });
  row.cage_up_preprocess = median_ms(pre, [&] {
    volatile int k = maxvol_select(session.phi(), cfg.maxvol).size();
    (void)k;
  });
  if (session.cor()) {
    CoRData scratch = *session.cor();
    row.cor_update = median_ms(n_frames, [&] { reposition_cors(scratch, session.cage_rest()); });
  }
  row.cage_rev_update = median_ms(n_frames, [&] { session.rebuild_reverse_operator(); });
  row.cage_up_solve = median_ms(n_frames, [&] {
    volatile double x = session.cage_up()(0, 0);
    (void)x;
  });
  row.skin_frame = median_ms(n_frames, [&] {
    volatile double x = session.reskin()(0, 0);
    (void)x;
  });
  table.rows.push_back(row);
  return table;
}

std::string format_timings(const TimingTable& table) {
  std::ostringstream out;
  out << "# machine: " << table.machine << "\n";
  out << "# times in ms (medians)\n";
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-12s %-4s %7s %6s %5s %6s %9s %9s %9s %9s %9s %9s %9s\n",
                "rig", "skin", "verts", "joints", "cage", "frames", "mvc", "skelup_pp", "cageup_pp",
                "cor_upd", "cagerev", "cageup", "skin_frm");
  out << buf;
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf,
                  "%-12s %-4s %7d %6d %5d %6d %9.3f %9.3f %9.3f %9.3f %9.3f %9.4f %9.4f\n",
                  r.label.c_str(), r.method.c_str(), r.vertices, r.joints, r.cage_vertices,
                  r.frames, r.mvc, r.skel_up_preprocess, r.cage_up_preprocess, r.cor_update,
                  r.cage_rev_update, r.cage_up_solve, r.skin_frame);
    out << buf;
  }
  return out.str();
}

}  // namespace deform
