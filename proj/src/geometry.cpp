#include "pcup/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "pcup/error.hpp"
#include "pcup/rng.hpp"

namespace pcup {
namespace {

Vec3 face_cross(const TriangleMesh& mesh, const std::array<std::uint32_t, 3>& t) {
  const Vec3& a = mesh.vertices[t[0]];
  return (mesh.vertices[t[1]] - a).cross(mesh.vertices[t[2]] - a);
}

const std::vector<Vec3>& require_normals(const TriangleMesh& mesh) {
  if (!mesh.vertex_normals) {
    throw Error(ErrorCode::MissingNormals, "mesh has no vertex normals");
  }
  return *mesh.vertex_normals;
}

}  // namespace

void TriangleMesh::validate() const {
  const auto n = vertices.size();
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    for (auto idx : triangles[t]) {
      if (idx >= n) {
        throw Error(ErrorCode::InvalidArgument,
                    "triangle " + std::to_string(t) + " references vertex " +
                        std::to_string(idx) + " of " + std::to_string(n));
      }
    }
  }
  if (vertex_normals && vertex_normals->size() != n) {
    throw Error(ErrorCode::InvalidArgument, "vertex normal count differs from vertex count");
  }
}

PointCloud::PointCloud(RowMatrix data) : data_(std::move(data)) {
  if (data_.rows() < 1) throw Error(ErrorCode::EmptySet, "point cloud needs at least one point");
  if (data_.cols() != 3 && data_.cols() != 6) {
    throw Error(ErrorCode::ShapeMismatch,
                "point cloud must have 3 or 6 columns, got " + std::to_string(data_.cols()));
  }
}

PointCloud::PointCloud(const Points3& positions) : PointCloud(RowMatrix(positions)) {}

std::vector<double> triangle_areas(const TriangleMesh& mesh) {
  std::vector<double> areas;
  areas.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles) areas.push_back(0.5 * face_cross(mesh, t).norm());
  return areas;
}

TriangleMesh normalize_model(const TriangleMesh& mesh) {
  mesh.validate();
  const auto areas = triangle_areas(mesh);
  if (std::none_of(areas.begin(), areas.end(), [](double a) { return a > 0.0; })) {
    throw Error(ErrorCode::EmptyMesh, "mesh has no triangle with nonzero area");
  }
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& v : mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const Vec3 center = 0.5 * (lo + hi);
  const double scale = 1.0 / (hi - lo).maxCoeff();

  TriangleMesh out = mesh;
  for (auto& v : out.vertices) v = (v - center) * scale;
  return out;
}

TriangleMesh compute_vertex_normals(const TriangleMesh& mesh) {
  mesh.validate();
  std::vector<Vec3> normals(mesh.vertices.size(), Vec3::Zero());
  for (const auto& t : mesh.triangles) {
    // |cross| = 2 * area, so the sum is area weighted.
    const Vec3 c = face_cross(mesh, t);
    for (auto idx : t) normals[idx] += c;
  }
  for (auto& n : normals) {
    const double len = n.norm();
    n = len > 0.0 ? Vec3(n / len) : Vec3(0.0, 0.0, 1.0);
  }
  TriangleMesh out = mesh;
  out.vertex_normals = std::move(normals);
  return out;
}

double edge_curvature(const TriangleMesh& mesh, std::uint32_t vi, std::uint32_t vj) {
  const auto& normals = require_normals(mesh);
  if (vi >= mesh.vertices.size() || vj >= mesh.vertices.size()) {
    throw Error(ErrorCode::InvalidArgument, "edge vertex index out of range");
  }
  const Vec3 d = mesh.vertices[vj] - mesh.vertices[vi];
  const double len2 = d.squaredNorm();
  if (len2 < 1e-24) {
    throw Error(ErrorCode::ZeroLengthEdge,
                "edge (" + std::to_string(vi) + ", " + std::to_string(vj) + ") has zero length");
  }
  return 2.0 * normals[vi].dot(d) / len2;
}

std::vector<double> vertex_curvatures(const TriangleMesh& mesh) {
  mesh.validate();
  require_normals(mesh);

  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  edges.reserve(mesh.triangles.size() * 3);
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const auto a = t[k];
      const auto b = t[(k + 1) % 3];
      if (a != b) edges.emplace_back(std::min(a, b), std::max(a, b));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::vector<double> sum(mesh.vertices.size(), 0.0);
  std::vector<std::size_t> count(mesh.vertices.size(), 0);
  for (const auto& [a, b] : edges) {
    if ((mesh.vertices[b] - mesh.vertices[a]).squaredNorm() < 1e-24) continue;
    sum[a] += std::abs(edge_curvature(mesh, a, b));
    sum[b] += std::abs(edge_curvature(mesh, b, a));
    ++count[a];
    ++count[b];
  }
  for (std::size_t v = 0; v < sum.size(); ++v) {
    if (count[v] > 0) sum[v] /= static_cast<double>(count[v]);
  }
  return sum;
}

SampledCloud sample_surface_uniform(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "sample count must be positive");
  mesh.validate();
  const TriangleMesh work = mesh.vertex_normals ? mesh : compute_vertex_normals(mesh);
  const auto& vn = *work.vertex_normals;
  const auto curvature = vertex_curvatures(work);

  const auto areas = triangle_areas(work);
  std::vector<double> cumulative(areas.size());
  double total = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t t = 0; t < areas.size(); ++t) {
    total += areas[t];
    cumulative[t] = total;
    if (areas[t] > 0.0) last_positive = t;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::EmptyMesh, "mesh has zero total area");

  SampledCloud out;
  out.positions.resize(static_cast<Eigen::Index>(n), 3);
  out.normals.resize(static_cast<Eigen::Index>(n), 3);
  out.curvatures.resize(static_cast<Eigen::Index>(n));
  out.triangles.resize(n);

  Rng rng(seed);
  for (std::size_t s = 0; s < n; ++s) {
    const double u = rng.uniform() * total;
    auto t = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    t = std::min(t, last_positive);

    const double root = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    const std::array<double, 3> w{1.0 - root, root * (1.0 - r2), root * r2};

    const auto& tri = work.triangles[t];
    Vec3 p = Vec3::Zero();
    Vec3 nrm = Vec3::Zero();
    double k = 0.0;
    for (int c = 0; c < 3; ++c) {
      p += w[c] * work.vertices[tri[c]];
      nrm += w[c] * vn[tri[c]];
      k += w[c] * curvature[tri[c]];
    }
    const double len = nrm.norm();
    nrm = len > 1e-12 ? Vec3(nrm / len) : face_cross(work, tri).normalized();

    const auto row = static_cast<Eigen::Index>(s);
    out.positions.row(row) = p.transpose();
    out.normals.row(row) = nrm.transpose();
    out.curvatures[row] = k;
    out.triangles[s] = static_cast<std::uint32_t>(t);
  }
  return out;
}

std::vector<std::uint32_t> select_indices(const Eigen::VectorXd& curvatures, std::size_t m,
                                          std::size_t k, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(curvatures.size());
  if (m == 0) throw Error(ErrorCode::InvalidArgument, "subsample size must be positive");
  if (m > n) {
    throw Error(ErrorCode::TooFewPoints,
                "cannot draw " + std::to_string(m) + " points from " + std::to_string(n));
  }
  k = std::min(k, m);

  Rng rng(seed);
  std::vector<std::uint32_t> chosen;
  chosen.reserve(m);
  std::vector<char> taken(n, 0);

  if (k > 0) {
    std::vector<double> weight(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double c = curvatures[static_cast<Eigen::Index>(i)];
      if (!(c >= 0.0) || !std::isfinite(c)) {
        throw Error(ErrorCode::InvalidArgument, "curvatures must be finite and nonnegative");
      }
      weight[i] = c;
    }
    while (chosen.size() < k) {
      double total = 0.0;
      for (double w : weight) total += w;
      if (!(total > 0.0)) break;  // remaining slots fall through to the uniform phase

      const double u = rng.uniform() * total;
      double running = 0.0;
      std::size_t pick = n;
      std::size_t last = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (weight[i] <= 0.0) continue;
        last = i;
        running += weight[i];
        if (running > u) {
          pick = i;
          break;
        }
      }
      if (pick == n) pick = last;
      chosen.push_back(static_cast<std::uint32_t>(pick));
      taken[pick] = 1;
      weight[pick] = 0.0;
    }
  }

  std::vector<std::uint32_t> pool;
  pool.reserve(n - chosen.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!taken[i]) pool.push_back(static_cast<std::uint32_t>(i));
  }
  while (chosen.size() < m) {
    const auto j = static_cast<std::size_t>(rng.below(pool.size()));
    chosen.push_back(pool[j]);
    pool[j] = pool.back();
    pool.pop_back();
  }
  return chosen;
}

PointCloud gather(const SampledCloud& cloud, const std::vector<std::uint32_t>& indices,
                  bool include_normals) {
  RowMatrix data(static_cast<Eigen::Index>(indices.size()), include_normals ? 6 : 3);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    const auto src = static_cast<Eigen::Index>(indices[r]);
    if (src >= cloud.size()) throw Error(ErrorCode::InvalidArgument, "gather index out of range");
    data.row(row).head<3>() = cloud.positions.row(src);
    if (include_normals) data.row(row).tail<3>() = cloud.normals.row(src);
  }
  return PointCloud(std::move(data));
}

PointCloud to_point_cloud(const SampledCloud& cloud, bool include_normals) {
  RowMatrix data(cloud.size(), include_normals ? 6 : 3);
  data.leftCols<3>() = cloud.positions;
  if (include_normals) data.rightCols<3>() = cloud.normals;
  return PointCloud(std::move(data));
}

PointCloud subsample(const SampledCloud& cloud, std::size_t m, SamplingMode mode,
                     bool include_normals, std::uint64_t seed) {
  const std::size_t k = mode == SamplingMode::CurvatureBased ? m : 0;
  return gather(cloud, select_indices(cloud.curvatures, m, k, seed), include_normals);
}

std::size_t hybrid_curvature_count(std::size_t m, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0, 1]");
  }
  return static_cast<std::size_t>(std::llround(alpha * static_cast<double>(m)));
}

PointCloud subsample_hybrid(const SampledCloud& cloud, std::size_t m, double alpha,
                            bool include_normals, std::uint64_t seed) {
  const std::size_t k = hybrid_curvature_count(m, alpha);
  return gather(cloud, select_indices(cloud.curvatures, m, k, seed), include_normals);
}

}  // namespace pcup
