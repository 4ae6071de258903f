#include <doctest.h>

#ifdef PCUP_CLI_PATH

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>

#include "pcup/harness.hpp"
#include "pcup/io.hpp"
#include "pcup/synthetic.hpp"

using namespace pcup;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(PCUP_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string value_of(const std::string& out, const std::string& key) {
  std::istringstream in(out);
  std::string k, v;
  while (in >> k >> v) {
    if (k == key) return v;
  }
  return {};
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("cli eval agrees with the library") {
  const auto dir = fresh_dir("pcup_cli_eval");
  const auto a = sample_surface_uniform(normalize_model(make_synthetic("vase", 1)), 300, 1);
  const auto b = sample_surface_uniform(normalize_model(make_synthetic("vase", 2)), 300, 2);
  write_ply(dir / "a.ply", to_point_cloud(a, false));
  write_ply(dir / "b.ply", to_point_cloud(b, false));
  write_ply(dir / "c.ply", PointCloud(Points3(b.positions.topRows(100))));

  auto r = run_cli("eval " + (dir / "a.ply").string() + " " + (dir / "a.ply").string());
  CHECK(r.status == 0);
  CHECK(parse_double(value_of(r.out, "chamfer")) == 0.0);
  CHECK(parse_double(value_of(r.out, "emd")) == 0.0);
  CHECK(value_of(r.out, "accuracy") == "1");
  CHECK(value_of(r.out, "coverage") == "1");

  r = run_cli("eval --rho 0.05 " + (dir / "a.ply").string() + " " + (dir / "b.ply").string());
  const auto s = evaluate_clouds(a.positions, b.positions, 0.05);
  CHECK(parse_double(value_of(r.out, "chamfer")) == s.chamfer_loss);
  CHECK(parse_double(value_of(r.out, "emd")) == *s.emd);
  CHECK(parse_double(value_of(r.out, "accuracy")) == s.accuracy);
  CHECK(parse_double(value_of(r.out, "coverage")) == s.coverage);

  r = run_cli("eval " + (dir / "a.ply").string() + " " + (dir / "c.ply").string());
  CHECK(r.status == 0);
  CHECK(value_of(r.out, "emd") == "n/a");
  fs::remove_all(dir);
}

TEST_CASE("cli exit codes") {
  CHECK(run_cli("").status == 1);
  CHECK(run_cli("no-such-command").status == 1);
  CHECK(run_cli("sample /nonexistent.obj").status == 2);
  CHECK(run_cli("--help").status == 0);

  const auto dir = fresh_dir("pcup_cli_codes");
  const auto bad = dir / "bad.json";
  write_text_file(bad, R"({"epochz": 3})");
  CHECK(run_cli("--config " + bad.string() + " train --category x --data " + dir.string()).status == 1);

  CHECK(run_cli("--out-dir " + (dir / "data").string() + " gen-data --count 10 --families table").status == 0);
  const auto blowup = dir / "nan.json";
  write_text_file(blowup, R"({"learning_rate": 1e30, "epochs": 3, "n_out": 64,
      "encoder_widths": [8, 8, 8, 8, 8], "decoder_hidden": [8, 8], "data_dir": ")" +
                              (dir / "data").string() + "\"}");
  CHECK(run_cli("--config " + blowup.string() + " --out-dir " + dir.string() +
                " train --category table --af 4")
            .status == 3);
  fs::remove_all(dir);
}

TEST_CASE("cli sample writes input and ground truth") {
  const auto dir = fresh_dir("pcup_cli_sample");
  write_obj(dir / "m.obj", make_synthetic("table", 5));
  const auto r = run_cli("--out-dir " + dir.string() + " sample " + (dir / "m.obj").string() +
                         " -n 256 --mode H --alpha 0.2 --normals");
  REQUIRE(r.status == 0);
  const auto gt = read_ply(dir / "m_gt.ply");
  const auto in = read_ply(dir / "m_input.ply");
  CHECK(gt.size() == 2048);
  CHECK(in.size() == 256);
  CHECK(in.has_normals());
  fs::remove_all(dir);
}

#endif
