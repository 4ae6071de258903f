#include "pcup/synthetic.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include "pcup/error.hpp"
#include "pcup/rng.hpp"

namespace pcup {
namespace {

using Tri = std::array<std::uint32_t, 3>;

TriangleMesh superellipsoid(const Vec3& axes, double exponent) {
  TriangleMesh mesh = make_icosphere(3);
  for (auto& v : mesh.vertices) {
    for (int k = 0; k < 3; ++k) {
      const double c = v[k];
      v[k] = axes[k] * std::copysign(std::pow(std::abs(c), exponent), c);
    }
  }
  return mesh;
}

TriangleMesh table(Rng& rng) {
  const double width = rng.uniform(0.8, 1.2);
  const double depth = rng.uniform(0.45, 0.9);
  const double top = rng.uniform(0.04, 0.1);
  const double height = rng.uniform(0.35, 0.9);
  const double leg = rng.uniform(0.04, 0.1);
  const double inset = rng.uniform(0.0, 0.08);

  std::vector<TriangleMesh> parts;
  parts.push_back(make_box({-width / 2, height, -depth / 2}, {width / 2, height + top, depth / 2}));
  for (int sx : {-1, 1}) {
    for (int sz : {-1, 1}) {
      const double x = sx * (width / 2 - inset - leg / 2);
      const double z = sz * (depth / 2 - inset - leg / 2);
      parts.push_back(make_box({x - leg / 2, 0.0, z - leg / 2}, {x + leg / 2, height, z + leg / 2}));
    }
  }
  return merge_meshes(parts);
}

TriangleMesh vase(Rng& rng) {
  constexpr int rings = 20;
  constexpr int segments = 32;
  const double base = rng.uniform(0.2, 0.45);
  const double bulge = rng.uniform(0.05, 0.3);
  const double freq = rng.uniform(0.6, 1.6);
  const double phase = rng.uniform(0.0, std::numbers::pi);
  const double height = rng.uniform(0.8, 1.6);

  TriangleMesh mesh;
  for (int r = 0; r < rings; ++r) {
    const double t = static_cast<double>(r) / (rings - 1);
    const double radius =
        std::max(0.05, base + bulge * std::sin(std::numbers::pi * freq * t + phase));
    for (int s = 0; s < segments; ++s) {
      const double a = 2.0 * std::numbers::pi * s / segments;
      mesh.vertices.emplace_back(radius * std::cos(a), t * height, radius * std::sin(a));
    }
  }
  auto at = [](int r, int s) { return static_cast<std::uint32_t>(r * segments + (s % segments)); };
  for (int r = 0; r + 1 < rings; ++r) {
    for (int s = 0; s < segments; ++s) {
      mesh.triangles.push_back({at(r, s), at(r + 1, s), at(r, s + 1)});
      mesh.triangles.push_back({at(r, s + 1), at(r + 1, s), at(r + 1, s + 1)});
    }
  }
  const auto bottom = static_cast<std::uint32_t>(mesh.vertices.size());
  mesh.vertices.emplace_back(0.0, 0.0, 0.0);
  const auto top = static_cast<std::uint32_t>(mesh.vertices.size());
  mesh.vertices.emplace_back(0.0, height, 0.0);
  for (int s = 0; s < segments; ++s) {
    mesh.triangles.push_back({bottom, at(0, s), at(0, s + 1)});
    mesh.triangles.push_back({top, at(rings - 1, s + 1), at(rings - 1, s)});
  }
  return mesh;
}

}  // namespace

TriangleMesh make_icosphere(int subdivisions) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh mesh;
  mesh.vertices = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
                   {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
                   {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : mesh.vertices) v.normalize();
  mesh.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                    {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                    {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                    {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoint;
    auto mid = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
      const auto id = static_cast<std::uint32_t>(mesh.vertices.size());
      mesh.vertices.push_back((mesh.vertices[a] + mesh.vertices[b]).normalized());
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<Tri> next;
    next.reserve(mesh.triangles.size() * 4);
    for (const auto& t : mesh.triangles) {
      const auto ab = mid(t[0], t[1]);
      const auto bc = mid(t[1], t[2]);
      const auto ca = mid(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    mesh.triangles = std::move(next);
  }
  return mesh;
}

TriangleMesh make_box(const Vec3& lo, const Vec3& hi) {
  TriangleMesh mesh;
  for (int i = 0; i < 8; ++i) {
    mesh.vertices.emplace_back(i & 1 ? hi.x() : lo.x(), i & 2 ? hi.y() : lo.y(),
                               i & 4 ? hi.z() : lo.z());
  }
  mesh.triangles = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6},   // -z, +z
                    {0, 1, 4}, {1, 5, 4}, {2, 6, 3}, {3, 6, 7},   // -y, +y
                    {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};  // -x, +x
  return mesh;
}

TriangleMesh merge_meshes(const std::vector<TriangleMesh>& parts) {
  TriangleMesh out;
  for (const auto& part : parts) {
    const auto offset = static_cast<std::uint32_t>(out.vertices.size());
    out.vertices.insert(out.vertices.end(), part.vertices.begin(), part.vertices.end());
    for (const auto& t : part.triangles) {
      out.triangles.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
    }
  }
  return out;
}

const std::vector<std::string>& synthetic_families() {
  static const std::vector<std::string> names{"ellipsoid", "superellipsoid", "table", "vase"};
  return names;
}

TriangleMesh make_synthetic(const std::string& family, std::uint64_t seed) {
  Rng rng(seed);
  if (family == "ellipsoid") {
    return superellipsoid({rng.uniform(0.35, 1.0), rng.uniform(0.35, 1.0), rng.uniform(0.35, 1.0)},
                          1.0);
  }
  if (family == "superellipsoid") {
    const Vec3 axes{rng.uniform(0.4, 1.0), rng.uniform(0.4, 1.0), rng.uniform(0.4, 1.0)};
    return superellipsoid(axes, rng.uniform(0.3, 0.7));
  }
  if (family == "table") return table(rng);
  if (family == "vase") return vase(rng);
  throw Error(ErrorCode::InvalidArgument, "unknown synthetic family '" + family + "'");
}

}  // namespace pcup
