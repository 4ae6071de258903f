#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcup/geometry.hpp"

namespace pcup {

/// Unit-radius icosphere: a regular icosahedron with each face split into four
/// `subdivisions` times, vertices projected onto the sphere.
TriangleMesh make_icosphere(int subdivisions);

/// Axis-aligned box with outward-facing triangles.
TriangleMesh make_box(const Vec3& lo, const Vec3& hi);

/// Concatenates meshes, reindexing triangles. Normals are dropped.
TriangleMesh merge_meshes(const std::vector<TriangleMesh>& parts);

/// Names of the procedural shape families: ellipsoid, superellipsoid, table, vase.
const std::vector<std::string>& synthetic_families();

/// One random member of `family`, fully determined by `seed`.
TriangleMesh make_synthetic(const std::string& family, std::uint64_t seed);

}  // namespace pcup
