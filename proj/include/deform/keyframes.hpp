#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "deform/geometry.hpp"

namespace deform {

struct SkeletonKey {
  double time = 0.0;
  std::vector<Quat> rotations;  // one per joint, global
};

struct CageKey {
  double time = 0.0;
  Points cage_rest;
};

/// Skeleton and rest-cage keys are independent tracks sampled at the same t.
/// Either may be empty (identity rotations / the rig's rest cage).
struct KeyframeTrack {
  std::vector<SkeletonKey> skeleton;
  std::vector<CageKey> cage;
};

/// Text format:
///   deform-track 1
///   skel_key <t>      followed by one `q <joint> <w> <x> <y> <z>` per joint
///   cage_key <t>      followed by one `v <x> <y> <z>` per cage vertex
KeyframeTrack parse_track(std::istream& in, const std::string& source = "<track>");
KeyframeTrack read_track(const std::filesystem::path& path);
void write_track(std::ostream& out, const KeyframeTrack& track);

/// Throws ValidationError on non-increasing times, wrong counts or
/// quaternions off unit norm by more than 1e-9.
void validate_track(const KeyframeTrack& track, int joints, int cage_vertices);

struct PoseSample {
  std::vector<Quat> rotations;
  Points cage_rest;
};

/// Slerp per joint (shortest arc) and linear rest-cage blending. t is clamped
/// to each track's key range; exact key times return the key verbatim.
PoseSample interpolate(const KeyframeTrack& track, double t, int joints,
                       const Points& default_cage);

/// [first, last] key time over both tracks; {0, 0} when empty.
std::pair<double, double> track_range(const KeyframeTrack& track);

}  // namespace deform
