#include "pcup/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include "pcup/error.hpp"

namespace pcup {
namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

long parse_index(std::string_view token, std::size_t count, std::size_t line) {
  long value = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || value == 0) {
    throw Error(ErrorCode::Parse, "bad OBJ index '" + std::string(token) + "' on line " +
                                      std::to_string(line));
  }
  const long resolved = value > 0 ? value - 1 : static_cast<long>(count) + value;
  if (resolved < 0 || resolved >= static_cast<long>(count)) {
    throw Error(ErrorCode::Parse, "OBJ index out of range on line " + std::to_string(line));
  }
  return resolved;
}

Vec3 read_vec3(std::istringstream& fields, std::size_t line) {
  std::array<std::string, 3> tok;
  if (!(fields >> tok[0] >> tok[1] >> tok[2])) {
    throw Error(ErrorCode::Parse, "expected three coordinates on line " + std::to_string(line));
  }
  return {parse_double(tok[0]), parse_double(tok[1]), parse_double(tok[2])};
}

void write_rows(std::ostream& out, const PointCloud& cloud) {
  const auto& d = cloud.data();
  for (Eigen::Index r = 0; r < d.rows(); ++r) {
    for (Eigen::Index c = 0; c < d.cols(); ++c) {
      if (c) out << ' ';
      out << format_double(d(r, c));
    }
    out << '\n';
  }
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::string format_scientific(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::scientific);
  return std::string(buf.data(), ptr);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::Parse, "not a number: '" + text + "'");
  }
  return value;
}

TriangleMesh read_obj(std::istream& in) {
  TriangleMesh mesh;
  std::vector<Vec3> normals;
  std::vector<long> normal_of_vertex;
  bool every_corner_has_normal = true;

  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::istringstream fields(raw);
    std::string kind;
    if (!(fields >> kind)) continue;
    if (kind == "v") {
      mesh.vertices.push_back(read_vec3(fields, line));
      normal_of_vertex.push_back(-1);
    } else if (kind == "vn") {
      normals.push_back(read_vec3(fields, line));
    } else if (kind == "f") {
      std::vector<std::uint32_t> corners;
      std::string corner;
      while (fields >> corner) {
        const std::string_view view(corner);
        const auto slash = view.find('/');
        const long v = parse_index(view.substr(0, slash), mesh.vertices.size(), line);
        long vn = -1;
        if (slash != std::string_view::npos) {
          const auto second = view.find('/', slash + 1);
          if (second != std::string_view::npos && second + 1 < view.size()) {
            vn = parse_index(view.substr(second + 1), normals.size(), line);
          }
        }
        if (vn < 0) {
          every_corner_has_normal = false;
        } else {
          normal_of_vertex[static_cast<std::size_t>(v)] = vn;
        }
        corners.push_back(static_cast<std::uint32_t>(v));
      }
      if (corners.size() < 3) {
        throw Error(ErrorCode::Parse, "face with fewer than 3 corners on line " +
                                          std::to_string(line));
      }
      for (std::size_t k = 1; k + 1 < corners.size(); ++k) {
        mesh.triangles.push_back({corners[0], corners[k], corners[k + 1]});
      }
    }
  }

  if (every_corner_has_normal && !mesh.triangles.empty()) {
    std::vector<Vec3> vn(mesh.vertices.size(), Vec3(0.0, 0.0, 1.0));
    for (std::size_t v = 0; v < vn.size(); ++v) {
      const long idx = normal_of_vertex[v];
      if (idx < 0) continue;
      const Vec3 n = normals[static_cast<std::size_t>(idx)];
      if (n.norm() > 0.0) vn[v] = n.normalized();
    }
    mesh.vertex_normals = std::move(vn);
  }
  return mesh;
}

TriangleMesh read_obj(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_obj(in);
}

void write_obj(std::ostream& out, const TriangleMesh& mesh) {
  for (const auto& v : mesh.vertices) {
    out << "v " << format_double(v.x()) << ' ' << format_double(v.y()) << ' '
        << format_double(v.z()) << '\n';
  }
  const bool normals = mesh.vertex_normals.has_value();
  if (normals) {
    for (const auto& n : *mesh.vertex_normals) {
      out << "vn " << format_double(n.x()) << ' ' << format_double(n.y()) << ' '
          << format_double(n.z()) << '\n';
    }
  }
  for (const auto& t : mesh.triangles) {
    out << 'f';
    for (auto idx : t) {
      out << ' ' << idx + 1;
      if (normals) out << "//" << idx + 1;
    }
    out << '\n';
  }
}

void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh) {
  auto out = open_out(path);
  write_obj(out, mesh);
  finish(out, path);
}

void write_ply(std::ostream& out, const PointCloud& cloud) {
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size() << '\n'
      << "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_normals()) {
    out << "property double nx\nproperty double ny\nproperty double nz\n";
  }
  out << "end_header\n";
  write_rows(out, cloud);
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
  auto out = open_out(path);
  write_ply(out, cloud);
  finish(out, path);
}

PointCloud read_ply(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) {
    throw Error(ErrorCode::Parse, "missing 'ply' magic line");
  }
  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> properties;
  };
  std::vector<Element> elements;
  bool header_done = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string kind;
    if (!(fields >> kind)) continue;
    if (kind == "format") {
      std::string fmt;
      fields >> fmt;
      if (fmt != "ascii") throw Error(ErrorCode::Parse, "only ASCII PLY is supported");
    } else if (kind == "element") {
      Element e;
      if (!(fields >> e.name >> e.count)) throw Error(ErrorCode::Parse, "bad element line");
      elements.push_back(std::move(e));
    } else if (kind == "property") {
      if (elements.empty()) throw Error(ErrorCode::Parse, "property before element");
      std::vector<std::string> words;
      std::string w;
      while (fields >> w) words.push_back(w);
      if (words.empty()) throw Error(ErrorCode::Parse, "bad property line");
      elements.back().properties.push_back(words.back());
    } else if (kind == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw Error(ErrorCode::Parse, "PLY header not terminated");

  for (const auto& e : elements) {
    if (e.name != "vertex") {
      // Skip rows of elements that precede the vertices.
      for (std::size_t r = 0; r < e.count; ++r) std::getline(in, line);
      continue;
    }
    auto column = [&](std::string_view name) -> long {
      for (std::size_t c = 0; c < e.properties.size(); ++c) {
        if (e.properties[c] == name) return static_cast<long>(c);
      }
      return -1;
    };
    const std::array<long, 6> cols{column("x"),  column("y"),  column("z"),
                                   column("nx"), column("ny"), column("nz")};
    if (cols[0] < 0 || cols[1] < 0 || cols[2] < 0) {
      throw Error(ErrorCode::Parse, "PLY vertex element lacks x/y/z");
    }
    const bool normals = cols[3] >= 0 && cols[4] >= 0 && cols[5] >= 0;
    RowMatrix data(static_cast<Eigen::Index>(e.count), normals ? 6 : 3);
    std::vector<std::string> tokens(e.properties.size());
    for (std::size_t r = 0; r < e.count; ++r) {
      for (auto& t : tokens) {
        if (!(in >> t)) throw Error(ErrorCode::Parse, "PLY vertex data truncated");
      }
      for (Eigen::Index c = 0; c < data.cols(); ++c) {
        data(static_cast<Eigen::Index>(r), c) =
            parse_double(tokens[static_cast<std::size_t>(cols[static_cast<std::size_t>(c)])]);
      }
    }
    return PointCloud(std::move(data));
  }
  throw Error(ErrorCode::Parse, "PLY file has no vertex element");
}

PointCloud read_ply(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_ply(in);
}

void write_xyz(std::ostream& out, const PointCloud& cloud) { write_rows(out, cloud); }

void write_xyz(const std::filesystem::path& path, const PointCloud& cloud) {
  auto out = open_out(path);
  write_xyz(out, cloud);
  finish(out, path);
}

}  // namespace pcup
