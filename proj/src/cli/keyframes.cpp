#include "deform/keyframes.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "deform/errors.hpp"
#include "deform/io.hpp"

namespace deform {
namespace {

template <class Key>
std::pair<std::size_t, double> bracket(const std::vector<Key>& keys, double t) {
  // index i and blend u in [0, 1) between keys i and i+1; exact keys give u = 0
  if (t <= keys.front().time) return {0, 0.0};
  if (t >= keys.back().time) return {keys.size() - 1, 0.0};
  const auto it = std::upper_bound(keys.begin(), keys.end(), t,
                                   [](double v, const Key& k) { return v < k.time; });
  const std::size_t i = static_cast<std::size_t>(it - keys.begin()) - 1;
  if (keys[i].time == t) return {i, 0.0};
  return {i, (t - keys[i].time) / (keys[i + 1].time - keys[i].time)};
}

}  // namespace

KeyframeTrack parse_track(std::istream& in, const std::string& source) {
  KeyframeTrack track;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  enum class Block { None, Skeleton, Cage } block = Block::None;
  std::vector<Vec3> cage_rows;

  auto close_cage = [&] {
    if (block != Block::Cage) return;
    Points p(static_cast<Eigen::Index>(cage_rows.size()), 3);
    for (std::size_t i = 0; i < cage_rows.size(); ++i) p.row(i) = cage_rows[i].transpose();
    track.cage.back().cage_rest = std::move(p);
    cage_rows.clear();
  };
  auto number = [&](std::string_view tok) {
    double v = 0.0;
    if (!io::parse_double(tok, v)) throw ParseError(source, lineno, "bad number '" + std::string(tok) + "'");
    return v;
  };

  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = io::split_ws(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    if (!header) {
      if (toks.size() != 2 || toks[0] != "deform-track" || toks[1] != "1") {
        throw ParseError(source, lineno, "expected header 'deform-track 1'");
      }
      header = true;
      continue;
    }
    if (toks[0] == "skel_key" || toks[0] == "cage_key") {
      if (toks.size() != 2) throw ParseError(source, lineno, "expected '<kind> <time>'");
      close_cage();
      const double t = number(toks[1]);
      if (toks[0] == "skel_key") {
        track.skeleton.push_back({t, {}});
        block = Block::Skeleton;
      } else {
        track.cage.push_back({t, {}});
        block = Block::Cage;
      }
    } else if (toks[0] == "q") {
      if (block != Block::Skeleton || toks.size() != 6) {
        throw ParseError(source, lineno, "expected 'q <joint> <w> <x> <y> <z>' inside skel_key");
      }
      long joint = 0;
      auto& rots = track.skeleton.back().rotations;
      if (!io::parse_int(toks[1], joint) || joint != static_cast<long>(rots.size())) {
        throw ParseError(source, lineno, "joint index must be " + std::to_string(rots.size()));
      }
      rots.emplace_back(number(toks[2]), number(toks[3]), number(toks[4]), number(toks[5]));
    } else if (toks[0] == "v") {
      if (block != Block::Cage || toks.size() != 4) {
        throw ParseError(source, lineno, "expected 'v <x> <y> <z>' inside cage_key");
      }
      cage_rows.emplace_back(number(toks[1]), number(toks[2]), number(toks[3]));
    } else {
      throw ParseError(source, lineno, "unknown record '" + std::string(toks[0]) + "'");
    }
  }
  if (!header) throw ParseError(source, lineno, "missing header 'deform-track 1'");
  close_cage();
  return track;
}

KeyframeTrack read_track(const std::filesystem::path& path) {
  auto in = io::open_in(path);
  return parse_track(in, path.string());
}

void write_track(std::ostream& out, const KeyframeTrack& track) {
  using io::format_double;
  out << "deform-track 1\n";
  for (const auto& key : track.skeleton) {
    out << "skel_key " << format_double(key.time) << '\n';
    for (std::size_t j = 0; j < key.rotations.size(); ++j) {
      const Quat& q = key.rotations[j];
      out << "q " << j << ' ' << format_double(q.w()) << ' ' << format_double(q.x()) << ' '
          << format_double(q.y()) << ' ' << format_double(q.z()) << '\n';
    }
  }
  for (const auto& key : track.cage) {
    out << "cage_key " << format_double(key.time) << '\n';
    for (Eigen::Index i = 0; i < key.cage_rest.rows(); ++i) {
      out << "v " << format_double(key.cage_rest(i, 0)) << ' ' << format_double(key.cage_rest(i, 1))
          << ' ' << format_double(key.cage_rest(i, 2)) << '\n';
    }
  }
}

void validate_track(const KeyframeTrack& track, int joints, int cage_vertices) {
  for (std::size_t k = 0; k < track.skeleton.size(); ++k) {
    const auto& key = track.skeleton[k];
    if (k > 0 && !(key.time > track.skeleton[k - 1].time)) {
      throw ValidationError("skeleton key times must be strictly increasing");
    }
    if (static_cast<int>(key.rotations.size()) != joints) {
      throw ValidationError("skeleton key at t=" + io::format_double(key.time) + " has " +
                            std::to_string(key.rotations.size()) + " rotations, expected " +
                            std::to_string(joints));
    }
    for (std::size_t j = 0; j < key.rotations.size(); ++j) {
      if (!(std::abs(key.rotations[j].norm() - 1.0) <= 1e-9)) {
        throw ValidationError("skeleton key at t=" + io::format_double(key.time) +
                              ": rotation of joint " + std::to_string(j) + " is not unit");
      }
    }
  }
  for (std::size_t k = 0; k < track.cage.size(); ++k) {
    const auto& key = track.cage[k];
    if (k > 0 && !(key.time > track.cage[k - 1].time)) {
      throw ValidationError("cage key times must be strictly increasing");
    }
    if (key.cage_rest.rows() != cage_vertices) {
      throw ValidationError("cage key at t=" + io::format_double(key.time) + " has " +
                            std::to_string(key.cage_rest.rows()) + " vertices, expected " +
                            std::to_string(cage_vertices));
    }
    if (!key.cage_rest.allFinite()) throw ValidationError("non-finite cage key");
  }
}

PoseSample interpolate(const KeyframeTrack& track, double t, int joints,
                       const Points& default_cage) {
  PoseSample out;
  if (track.skeleton.empty()) {
    out.rotations.assign(joints, Quat::Identity());
  } else {
    const auto [i, u] = bracket(track.skeleton, t);
    out.rotations = track.skeleton[i].rotations;
    if (u > 0.0) {
      const auto& next = track.skeleton[i + 1].rotations;
      // Eigen's slerp takes the shorter arc (flips to a nonnegative dot)
      for (int j = 0; j < joints; ++j) out.rotations[j] = out.rotations[j].slerp(u, next[j]);
    }
  }
  if (track.cage.empty()) {
    out.cage_rest = default_cage;
  } else {
    const auto [i, u] = bracket(track.cage, t);
    out.cage_rest = track.cage[i].cage_rest;
    if (u > 0.0) out.cage_rest = (1.0 - u) * out.cage_rest + u * track.cage[i + 1].cage_rest;
  }
  return out;
}

std::pair<double, double> track_range(const KeyframeTrack& track) {
  bool any = false;
  double lo = 0.0;
  double hi = 0.0;
  auto extend = [&](double a, double b) {
    lo = any ? std::min(lo, a) : a;
    hi = any ? std::max(hi, b) : b;
    any = true;
  };
  if (!track.skeleton.empty()) extend(track.skeleton.front().time, track.skeleton.back().time);
  if (!track.cage.empty()) extend(track.cage.front().time, track.cage.back().time);
  return {lo, hi};
}

}  // namespace deform
