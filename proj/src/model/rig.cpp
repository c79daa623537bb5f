#include "deform/rig.hpp"

#include <fstream>
#include <sstream>

#include "deform/errors.hpp"

namespace deform {

void validate_rig(Rig& rig) {
  validate_mesh(rig.skin, "skin");
  validate_closed_manifold(rig.cage, "cage");
  validate_skeleton(rig.skeleton);
  if (rig.weights.rows() != rig.skin.vertex_count() || rig.weights.cols() != rig.skeleton.size()) {
    throw ValidationError("skin weights: expected " + std::to_string(rig.skin.vertex_count()) +
                          " x " + std::to_string(rig.skeleton.size()) + " matrix");
  }
  rig.weights.role = WeightRole::SkinWeights;
  validate_weights(rig.weights, kWeightLoadTolerance);
  normalize_rows(rig.weights);
  for (const auto& t : rig.skeleton.transforms) {
    if (!t.is_identity()) throw ValidationError("skeleton: rest pose transforms must be identity");
  }
}

Rig load_rig(const std::filesystem::path& mesh_path, const std::filesystem::path& skeleton_path,
             const std::filesystem::path& weights_path, const std::filesystem::path& cage_path) {
  Rig rig;
  rig.skin = io::read_obj(mesh_path);
  rig.skeleton = io::read_skel(skeleton_path);
  rig.cage = io::read_obj(cage_path);
  rig.weights = io::read_wgt(weights_path, rig.skin.vertex_count(), rig.skeleton.size(),
                             WeightRole::SkinWeights);
  validate_rig(rig);
  return rig;
}

RigPaths read_rig_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw Error("cannot open " + manifest.string());
  const auto base = manifest.parent_path();
  RigPaths paths;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string key;
    std::string value;
    if (!(ls >> key) || key[0] == '#') continue;
    if (!header) {
      int version = 0;
      if (key != "deform-rig" || !(ls >> version) || version != 1) {
        throw ParseError(manifest.string(), lineno, "expected header 'deform-rig 1'");
      }
      header = true;
      continue;
    }
    if (!(ls >> value)) throw ParseError(manifest.string(), lineno, "missing path");
    if (key == "mesh") paths.mesh = base / value;
    else if (key == "skeleton") paths.skeleton = base / value;
    else if (key == "weights") paths.weights = base / value;
    else if (key == "cage") paths.cage = base / value;
    else throw ParseError(manifest.string(), lineno, "unknown key '" + key + "'");
  }
  if (paths.mesh.empty() || paths.skeleton.empty() || paths.weights.empty() || paths.cage.empty()) {
    throw ParseError(manifest.string(), lineno, "manifest must name mesh, skeleton, weights, cage");
  }
  return paths;
}

Rig load_rig(const std::filesystem::path& manifest) {
  const auto p = read_rig_manifest(manifest);
  return load_rig(p.mesh, p.skeleton, p.weights, p.cage);
}

std::filesystem::path save_rig(const Rig& rig, const std::filesystem::path& dir,
                               const std::string& stem) {
  std::filesystem::create_directories(dir);
  io::write_obj(dir / (stem + ".obj"), rig.skin);
  io::write_skel(dir / (stem + ".skel"), rig.skeleton);
  io::write_wgt(dir / (stem + ".wgt"), rig.weights);
  io::write_obj(dir / (stem + "_cage.obj"), rig.cage);
  const auto manifest = dir / (stem + ".rig");
  std::ofstream out(manifest);
  if (!out) throw Error("cannot write " + manifest.string());
  out << "deform-rig 1\n"
      << "mesh " << stem << ".obj\n"
      << "skeleton " << stem << ".skel\n"
      << "weights " << stem << ".wgt\n"
      << "cage " << stem << "_cage.obj\n";
  return manifest;
}

double validate_rest_consensus(const Rig& rig, const WeightMatrix& phi) {
  if (phi.rows() != rig.skin.vertex_count() || phi.cols() != rig.cage.vertex_count()) {
    throw ValidationError("consensus: coordinate matrix is " + std::to_string(phi.rows()) + " x " +
                          std::to_string(phi.cols()) + ", expected " +
                          std::to_string(rig.skin.vertex_count()) + " x " +
                          std::to_string(rig.cage.vertex_count()));
  }
  const Points reproduced = phi.apply(rig.cage.vertices);
  if (reproduced.rows() == 0) return 0.0;
  return (reproduced - rig.skin.vertices).rowwise().norm().maxCoeff();
}

}  // namespace deform
