#pragma once

#include <filesystem>
#include <iosfwd>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "deform/mesh.hpp"
#include "deform/skeleton.hpp"
#include "deform/weights.hpp"

namespace deform::io {

// Readers throw ParseError (with line number) on malformed lines. They do not
// validate cross-file consistency; see load_rig for that.

/// OBJ subset: `v x y z` and `f a b c ...` (1-based, negative = relative,
/// `a/b/c` tokens accepted). Polygons are fan-triangulated. Other records
/// are ignored.
TriMesh read_obj(std::istream& in, const std::string& source = "<obj>");
TriMesh read_obj(const std::filesystem::path& path);
void write_obj(std::ostream& out, const Points& vertices, const std::vector<Triangle>& triangles);
void write_obj(const std::filesystem::path& path, const TriMesh& mesh);

/// `j <index> <name> <parent|-1> <x> <y> <z>` per joint, 0-based indices.
Skeleton read_skel(std::istream& in, const std::string& source = "<skel>");
Skeleton read_skel(const std::filesystem::path& path);
/// Writes joint rest positions, or `positions` when given (same topology).
void write_skel(std::ostream& out, const Skeleton& skeleton, const Points* positions = nullptr);
void write_skel(const std::filesystem::path& path, const Skeleton& skeleton,
                const Points* positions = nullptr);

/// `<row> <col> <weight>` triplets. Row/column counts are supplied by the caller.
WeightMatrix read_wgt(std::istream& in, int rows, int cols, WeightRole role,
                      const std::string& source = "<wgt>");
WeightMatrix read_wgt(const std::filesystem::path& path, int rows, int cols, WeightRole role);
void write_wgt(std::ostream& out, const WeightMatrix& w);
void write_wgt(const std::filesystem::path& path, const WeightMatrix& w);

/// 17 significant digits; round-trips doubles exactly.
std::string format_double(double v);

// Shared helpers for the line-oriented text formats.
std::vector<std::string_view> split_ws(std::string_view line);
bool parse_double(std::string_view tok, double& out);
bool parse_int(std::string_view tok, long& out);
/// Throw deform::Error when the file cannot be opened.
std::ifstream open_in(const std::filesystem::path& path);
std::ofstream open_out(const std::filesystem::path& path);

}  // namespace deform::io
