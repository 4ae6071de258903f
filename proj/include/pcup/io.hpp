#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "pcup/geometry.hpp"

namespace pcup {

/// Wavefront OBJ subset: `v`, `vn` and `f` (1-based or negative indices, `v`, `v/vt`,
/// `v//vn` and `v/vt/vn` corners). Polygons are fan-triangulated from their first corner.
/// Vertex normals are attached only when every face corner names one.
TriangleMesh read_obj(std::istream& in);
TriangleMesh read_obj(const std::filesystem::path& path);

void write_obj(std::ostream& out, const TriangleMesh& mesh);
void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh);

/// ASCII PLY with `element vertex N` and double properties x y z [nx ny nz].
void write_ply(std::ostream& out, const PointCloud& cloud);
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);

/// Reads an ASCII PLY vertex element; keeps x y z and, when all present, nx ny nz.
PointCloud read_ply(std::istream& in);
PointCloud read_ply(const std::filesystem::path& path);

/// One point per line, whitespace separated columns.
void write_xyz(std::ostream& out, const PointCloud& cloud);
void write_xyz(const std::filesystem::path& path, const PointCloud& cloud);

/// Shortest decimal text that parses back to the same double; locale independent.
std::string format_double(double value);
/// Shortest round-trip text in scientific notation.
std::string format_scientific(double value);
/// Locale-independent strict parse of a whole token.
double parse_double(const std::string& text);

}  // namespace pcup
