#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pcup/error.hpp"
#include "pcup/harness.hpp"
#include "pcup/io.hpp"
#include "pcup/metrics.hpp"
#include "pcup/persistence.hpp"
#include "pcup/synthetic.hpp"

namespace py = pybind11;
using namespace pcup;

namespace {

TriangleMesh mesh_from(const Points3& vertices, const Eigen::Matrix<std::int64_t, Eigen::Dynamic, 3, Eigen::RowMajor>& faces) {
  TriangleMesh m;
  for (Eigen::Index i = 0; i < vertices.rows(); ++i) m.vertices.push_back(vertices.row(i).transpose());
  for (Eigen::Index i = 0; i < faces.rows(); ++i) {
    std::array<std::uint32_t, 3> t{};
    for (int k = 0; k < 3; ++k) {
      if (faces(i, k) < 0) throw Error(ErrorCode::InvalidArgument, "negative face index");
      t[k] = static_cast<std::uint32_t>(faces(i, k));
    }
    m.triangles.push_back(t);
  }
  m.validate();
  return m;
}

py::tuple mesh_to_arrays(const TriangleMesh& m) {
  Points3 v(static_cast<Eigen::Index>(m.vertices.size()), 3);
  for (std::size_t i = 0; i < m.vertices.size(); ++i) v.row(static_cast<Eigen::Index>(i)) = m.vertices[i].transpose();
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 3, Eigen::RowMajor> f(static_cast<Eigen::Index>(m.triangles.size()), 3);
  for (std::size_t i = 0; i < m.triangles.size(); ++i) {
    for (int k = 0; k < 3; ++k) f(static_cast<Eigen::Index>(i), k) = m.triangles[i][k];
  }
  return py::make_tuple(v, f);
}

SampledCloud cloud_from(const Points3& positions, const Points3& normals, const Eigen::VectorXd& curvatures) {
  if (normals.rows() != positions.rows() || curvatures.size() != positions.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "positions, normals and curvatures must have the same length");
  }
  SampledCloud c;
  c.positions = positions;
  c.normals = normals;
  c.curvatures = curvatures;
  return c;
}

}  // namespace

PYBIND11_MODULE(_pcup, m) {
  m.doc() = "Point cloud upsampling core";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  m.def("read_obj", [](const std::filesystem::path& p) { return mesh_to_arrays(read_obj(p)); },
        "Vertices (N x 3) and triangles (M x 3) of an OBJ file.");
  m.def("make_synthetic", [](const std::string& family, std::uint64_t seed) {
    return mesh_to_arrays(make_synthetic(family, seed));
  });
  m.def("synthetic_families", &synthetic_families);
  m.def("normalize_model", [](const Points3& v, const Eigen::Matrix<std::int64_t, Eigen::Dynamic, 3, Eigen::RowMajor>& f) {
    return mesh_to_arrays(normalize_model(mesh_from(v, f)));
  });
  m.def("vertex_curvatures", [](const Points3& v, const Eigen::Matrix<std::int64_t, Eigen::Dynamic, 3, Eigen::RowMajor>& f) {
    return vertex_curvatures(compute_vertex_normals(mesh_from(v, f)));
  });
  m.def(
      "sample_surface",
      [](const Points3& v, const Eigen::Matrix<std::int64_t, Eigen::Dynamic, 3, Eigen::RowMajor>& f, std::size_t n,
         std::uint64_t seed) {
        const auto s = sample_surface_uniform(mesh_from(v, f), n, seed);
        return py::make_tuple(s.positions, s.normals, s.curvatures);
      },
      py::arg("vertices"), py::arg("triangles"), py::arg("n"), py::arg("seed") = 0,
      "Area-weighted surface sample: (positions, normals, curvatures).");
  m.def(
      "subsample",
      [](const Points3& positions, const Points3& normals, const Eigen::VectorXd& curvatures, std::size_t m,
         double alpha, bool with_normals, std::uint64_t seed) {
        return subsample_hybrid(cloud_from(positions, normals, curvatures), m, alpha, with_normals, seed).data();
      },
      py::arg("positions"), py::arg("normals"), py::arg("curvatures"), py::arg("m"), py::arg("alpha") = 0.0,
      py::arg("with_normals") = false, py::arg("seed") = 0,
      "round(alpha * m) curvature-weighted draws, the rest uniform; alpha 0 is uniform, 1 is curvature-based.");

  m.def("chamfer_sum", &chamfer_sum);
  m.def("chamfer_loss", &chamfer_loss);
  m.def("chamfer_gradient", &chamfer_gradient);
  m.def("emd", &emd);
  m.def("accuracy", &accuracy, py::arg("pred"), py::arg("gt"), py::arg("rho"));
  m.def("coverage", &coverage, py::arg("pred"), py::arg("gt"), py::arg("rho"));

  m.def("write_ply", [](const std::filesystem::path& p, const RowMatrix& data) { write_ply(p, PointCloud(data)); });
  m.def("read_ply", [](const std::filesystem::path& p) { return read_ply(p).data(); });

  py::class_<Checkpoint>(m, "Network")
      .def_static("load", &load_checkpoint, py::arg("path"))
      .def_static(
          "initial",
          [](int n_out, std::vector<int> encoder, std::vector<int> decoder, int input_dim, int af, std::uint64_t seed) {
            Checkpoint c;
            c.config.shape.n_out = n_out;
            c.config.shape.encoder_widths = std::move(encoder);
            c.config.shape.decoder_hidden = std::move(decoder);
            c.config.shape.input_dim = input_dim;
            c.config.af = af;
            c.config.seed = seed;
            c.params = initial_params<float>(c.config);
            return c;
          },
          py::arg("n_out"), py::arg("encoder_widths"), py::arg("decoder_hidden"), py::arg("input_dim") = 3,
          py::arg("af") = 8, py::arg("seed") = 0, "Untrained network with the given shape.")
      .def("save", [](const Checkpoint& c, const std::filesystem::path& p) { save_checkpoint(p, c); })
      .def_property_readonly("n_out", [](const Checkpoint& c) { return c.params.shape.n_out; })
      .def_property_readonly("input_dim", [](const Checkpoint& c) { return c.params.shape.input_dim; })
      .def_property_readonly("latent_dim", [](const Checkpoint& c) { return c.params.shape.latent_dim(); })
      .def("upsample", [](const Checkpoint& c, const RowMatrix& input) { return upsample(c.params, PointCloud(input)); })
      .def("encode",
           [](const Checkpoint& c, const RowMatrix& input) {
             return Eigen::RowVectorXf(encode(c.params, PointCloud(input)));
           })
      .def("decode",
           [](const Checkpoint& c, const Eigen::RowVectorXf& z) { return decode(c.params, RowVec<float>(z)); })
      .def(
          "morph",
          [](const Checkpoint& c, const RowMatrix& a, const RowMatrix& b, int steps) {
            return morph(c.params, PointCloud(a), PointCloud(b), steps);
          },
          py::arg("a"), py::arg("b"), py::arg("steps") = 6);
}
