#include "deform/snapshot.hpp"

#include "deform/io.hpp"

namespace deform {

std::vector<std::filesystem::path> export_snapshot(const Snapshot& snap, const Rig& rig,
                                                   const std::filesystem::path& dir,
                                                   const std::string& stem) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto mesh = [&](const std::string& suffix, const Points& v, const std::vector<Triangle>& tris) {
    const auto path = dir / (stem + suffix + ".obj");
    io::write_obj(path, TriMesh{v, tris});
    written.push_back(path);
  };
  mesh("_skin", snap.skin_curr, rig.skin.triangles);
  mesh("_skin_rest", snap.skin_rest, rig.skin.triangles);
  mesh("_cage", snap.cage_curr, rig.cage.triangles);
  mesh("_cage_rest", snap.cage_rest, rig.cage.triangles);

  const auto curr = dir / (stem + ".skel");
  io::write_skel(curr, rig.skeleton, &snap.joints_curr);
  written.push_back(curr);
  const auto rest = dir / (stem + "_rest.skel");
  io::write_skel(rest, rig.skeleton, &snap.joints_rest);
  written.push_back(rest);
  return written;
}

}  // namespace deform
