#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "deform/session.hpp"

namespace deform {

/// Writes one snapshot as OBJ meshes plus skeleton files into `dir`:
/// <stem>_skin.obj, <stem>_skin_rest.obj, <stem>_cage.obj, <stem>_cage_rest.obj,
/// <stem>.skel (current articulations) and <stem>_rest.skel. Returns the paths.
std::vector<std::filesystem::path> export_snapshot(const Snapshot& snap, const Rig& rig,
                                                   const std::filesystem::path& dir,
                                                   const std::string& stem);

}  // namespace deform
