#include "deform/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include "deform/errors.hpp"

namespace deform::io {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_double(std::string_view tok, double& out) {
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_int(std::string_view tok, long& out) {
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

TriMesh read_obj(std::istream& in, const std::string& source) {
  std::vector<Vec3> verts;
  std::vector<std::vector<int>> faces;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = split_ws(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    if (toks[0] == "v") {
      if (toks.size() < 4) throw ParseError(source, lineno, "vertex needs 3 coordinates");
      Vec3 p;
      for (int k = 0; k < 3; ++k) {
        if (!parse_double(toks[k + 1], p[k])) {
          throw ParseError(source, lineno, "bad coordinate '" + std::string(toks[k + 1]) + "'");
        }
      }
      verts.push_back(p);
    } else if (toks[0] == "f") {
      if (toks.size() < 4) throw ParseError(source, lineno, "face needs at least 3 vertices");
      std::vector<int> poly;
      for (std::size_t k = 1; k < toks.size(); ++k) {
        const auto slash = toks[k].find('/');
        long idx = 0;
        if (!parse_int(toks[k].substr(0, slash), idx) || idx == 0) {
          throw ParseError(source, lineno, "bad face index '" + std::string(toks[k]) + "'");
        }
        const long resolved = idx > 0 ? idx - 1 : static_cast<long>(verts.size()) + idx;
        if (resolved < 0) throw ParseError(source, lineno, "relative face index out of range");
        poly.push_back(static_cast<int>(resolved));
      }
      faces.push_back(std::move(poly));
    }
  }
  TriMesh mesh;
  mesh.vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) mesh.vertices.row(i) = verts[i].transpose();
  mesh.triangles = fan_triangulate(faces);
  return mesh;
}

TriMesh read_obj(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_obj(in, path.string());
}

void write_obj(std::ostream& out, const Points& vertices, const std::vector<Triangle>& triangles) {
  for (Eigen::Index i = 0; i < vertices.rows(); ++i) {
    out << "v " << format_double(vertices(i, 0)) << ' ' << format_double(vertices(i, 1)) << ' '
        << format_double(vertices(i, 2)) << '\n';
  }
  for (const auto& t : triangles) {
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  }
}

void write_obj(const std::filesystem::path& path, const TriMesh& mesh) {
  auto out = open_out(path);
  write_obj(out, mesh.vertices, mesh.triangles);
}

Skeleton read_skel(std::istream& in, const std::string& source) {
  Skeleton skel;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = split_ws(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    if (toks[0] != "j" || toks.size() != 7) {
      throw ParseError(source, lineno, "expected 'j <index> <name> <parent> <x> <y> <z>'");
    }
    long index = 0;
    long parent = 0;
    if (!parse_int(toks[1], index) || index != static_cast<long>(skel.joints.size())) {
      throw ParseError(source, lineno,
                       "joint index must be " + std::to_string(skel.joints.size()));
    }
    if (!parse_int(toks[3], parent) || parent < -1) {
      throw ParseError(source, lineno, "bad parent index '" + std::string(toks[3]) + "'");
    }
    Joint joint;
    joint.name = std::string(toks[2]);
    joint.parent = static_cast<int>(parent);
    for (int k = 0; k < 3; ++k) {
      if (!parse_double(toks[4 + k], joint.rest[k])) {
        throw ParseError(source, lineno, "bad coordinate '" + std::string(toks[4 + k]) + "'");
      }
    }
    skel.joints.push_back(std::move(joint));
  }
  skel.reset_transforms();
  return skel;
}

Skeleton read_skel(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_skel(in, path.string());
}

void write_skel(std::ostream& out, const Skeleton& skeleton, const Points* positions) {
  for (int j = 0; j < skeleton.size(); ++j) {
    const Vec3 p = positions ? Vec3(positions->row(j)) : skeleton.joints[j].rest;
    out << "j " << j << ' ' << skeleton.joints[j].name << ' ' << skeleton.joints[j].parent << ' '
        << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z())
        << '\n';
  }
}

void write_skel(const std::filesystem::path& path, const Skeleton& skeleton,
                const Points* positions) {
  auto out = open_out(path);
  write_skel(out, skeleton, positions);
}

WeightMatrix read_wgt(std::istream& in, int rows, int cols, WeightRole role,
                      const std::string& source) {
  std::vector<Eigen::Triplet<double>> trips;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = split_ws(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    long r = 0;
    long c = 0;
    double w = 0.0;
    if (toks.size() != 3 || !parse_int(toks[0], r) || !parse_int(toks[1], c) ||
        !parse_double(toks[2], w)) {
      throw ParseError(source, lineno, "expected '<row> <column> <weight>'");
    }
    if (r < 0 || r >= rows) {
      throw ValidationError(source + ":" + std::to_string(lineno) + ": row index " +
                            std::to_string(r) + " out of range");
    }
    if (c < 0 || c >= cols) {
      throw ValidationError(source + ":" + std::to_string(lineno) + ": orphan handle index " +
                            std::to_string(c));
    }
    trips.emplace_back(static_cast<int>(r), static_cast<int>(c), w);
  }
  SparseRows m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  return WeightMatrix(std::move(m), role);
}

WeightMatrix read_wgt(const std::filesystem::path& path, int rows, int cols, WeightRole role) {
  auto in = open_in(path);
  return read_wgt(in, rows, cols, role, path.string());
}

void write_wgt(std::ostream& out, const WeightMatrix& w) {
  for (int r = 0; r < w.values.outerSize(); ++r) {
    for (SparseRows::InnerIterator it(w.values, r); it; ++it) {
      out << r << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
    }
  }
}

void write_wgt(const std::filesystem::path& path, const WeightMatrix& w) {
  auto out = open_out(path);
  write_wgt(out, w);
}

}  // namespace deform::io
