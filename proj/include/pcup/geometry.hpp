#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace pcup {

using Vec3 = Eigen::Vector3d;
using Points3 = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::optional<std::vector<Vec3>> vertex_normals;

  /// Throws InvalidArgument if any index is out of range or the normal count is wrong.
  void validate() const;
};

/// Dense surface sample: positions, unit normals and nonnegative curvature per point.
/// `triangles` records the source face of every sample.
struct SampledCloud {
  Points3 positions;
  Points3 normals;
  Eigen::VectorXd curvatures;
  std::vector<std::uint32_t> triangles;

  Eigen::Index size() const noexcept { return positions.rows(); }
};

/// N x M matrix, M = 3 (positions) or 6 (positions followed by unit normals).
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(RowMatrix data);
  /// Positions-only cloud.
  explicit PointCloud(const Points3& positions);

  Eigen::Index size() const noexcept { return data_.rows(); }
  Eigen::Index dim() const noexcept { return data_.cols(); }
  bool has_normals() const noexcept { return data_.cols() == 6; }

  const RowMatrix& data() const noexcept { return data_; }
  Points3 positions() const { return data_.leftCols<3>(); }

 private:
  RowMatrix data_;
};

enum class SamplingMode { Uniform, CurvatureBased };

/// Recentres the bounding box on the origin and scales its longest side to 1.
TriangleMesh normalize_model(const TriangleMesh& mesh);

std::vector<double> triangle_areas(const TriangleMesh& mesh);

/// Area-weighted vertex normals; vertices with no incident area get (0, 0, 1).
TriangleMesh compute_vertex_normals(const TriangleMesh& mesh);

/// Directional curvature along edge (vi, vj) seen from vi: 2 <n_i, v_j - v_i> / |v_j - v_i|^2.
double edge_curvature(const TriangleMesh& mesh, std::uint32_t vi, std::uint32_t vj);

/// Mean |edge_curvature| over the edges incident to each vertex; 0 for isolated vertices.
std::vector<double> vertex_curvatures(const TriangleMesh& mesh);

/// Monte-Carlo surface sample with probability proportional to triangle area.
/// Normals and curvatures are barycentric interpolations of vertex values; vertex
/// normals are computed first when the mesh does not carry them.
SampledCloud sample_surface_uniform(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

/// Draws m distinct indices: the first k with probability proportional to curvature
/// (renormalised after every draw, falling back to uniform once no positive weight
/// remains), the rest uniformly from the points not yet chosen.
std::vector<std::uint32_t> select_indices(const Eigen::VectorXd& curvatures, std::size_t m,
                                          std::size_t k, std::uint64_t seed);

PointCloud subsample(const SampledCloud& cloud, std::size_t m, SamplingMode mode,
                     bool include_normals, std::uint64_t seed);

/// round(alpha * m) curvature-proportional draws followed by uniform draws without repetition.
PointCloud subsample_hybrid(const SampledCloud& cloud, std::size_t m, double alpha,
                            bool include_normals, std::uint64_t seed);

/// Number of curvature-phase draws used by subsample_hybrid.
std::size_t hybrid_curvature_count(std::size_t m, double alpha);

PointCloud gather(const SampledCloud& cloud, const std::vector<std::uint32_t>& indices,
                  bool include_normals);

/// Positions (and optionally normals) of the whole sample as a PointCloud.
PointCloud to_point_cloud(const SampledCloud& cloud, bool include_normals);

}  // namespace pcup
