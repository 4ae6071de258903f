// Acceptance suite: one PASS/FAIL line per criterion.
//
//   pcup_acceptance [--only N]... [--strict] [--cli PATH] [--work DIR]
//
// Exits 0 once every selected criterion has been evaluated; with --strict, exits 1
// if any of them failed.

#include <CLI11.hpp>
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "pcup/error.hpp"
#include "pcup/harness.hpp"
#include "pcup/io.hpp"
#include "pcup/kdtree.hpp"
#include "pcup/metrics.hpp"
#include "pcup/synthetic.hpp"

using namespace pcup;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string fixed(double v, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct Context {
  fs::path work;
  std::string cli;
  // Shared between criteria 9, 12 and 13.
  std::optional<Checkpoint> trained;
  std::vector<CloudPair> held_out;
};

int run(const std::string& cmd) {
  const int raw = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

// 1
Outcome chamfer_oracle(Context&) {
  Rng rng(101);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto a = oracle::random_points(rng, 2 + static_cast<Eigen::Index>(rng.below(511)));
    const auto b = oracle::random_points(rng, 2 + static_cast<Eigen::Index>(rng.below(511)));
    const double ref = oracle::chamfer_sum(a, b);
    worst = std::max(worst, std::abs(chamfer_sum(a, b) - ref) / ref);
  }
  return {worst <= 1e-9, "max relative error " + sci(worst) + " over 200 pairs"};
}

// 2
Outcome emd_oracle(Context&) {
  Rng rng(102);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto n = 1 + static_cast<Eigen::Index>(rng.below(7));
    const auto a = oracle::random_points(rng, n);
    const auto b = oracle::random_points(rng, n);
    worst = std::max(worst, std::abs(emd(a, b) - oracle::emd(a, b)));
  }
  return {worst <= 1e-9, "max abs difference " + sci(worst) + " over 100 pairs, n <= 7"};
}

// 3
Outcome gradient_check(Context&) {
  int within = 0;
  double worst_entry = 0.0, worst_tensor = 0.0;
  std::size_t compared = 0, skipped = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = oracle::check_network_gradients(seed, 1e-4, 6, false);
    within += r.max_relative_error <= 1e-5;
    worst_entry = std::max(worst_entry, r.max_relative_error);
    worst_tensor = std::max(worst_tensor, r.max_tensor_error);
    compared += r.compared;
    skipped += r.skipped;
  }
  return {within == 20, std::to_string(within) + "/20 seeds within 1e-5 per entry; worst entry " +
                            sci(worst_entry) + ", worst tensor " + sci(worst_tensor) + " (" +
                            std::to_string(compared) + " probes, " + std::to_string(skipped) +
                            " skipped at kinks)"};
}

// 4
Outcome chamfer_gradient_check(Context&) {
  Rng rng(104);
  const double h = 1e-5;
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    auto a = oracle::random_points(rng, 6);
    const auto b = oracle::random_points(rng, 6);
    const auto g = chamfer_gradient(a, b);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      const double saved = a.data()[i];
      a.data()[i] = saved + h;
      const double plus = oracle::chamfer_sum(a, b);
      a.data()[i] = saved - h;
      const double minus = oracle::chamfer_sum(a, b);
      a.data()[i] = saved;
      worst = std::max(worst, std::abs(g.data()[i] - (plus - minus) / (2 * h)));
    }
  }
  return {worst <= 1e-6, "max abs error " + sci(worst) + " over 50 cases"};
}

// 5
Outcome permutation_invariance(Context&) {
  Rng rng(105);
  int equal = 0, total = 0;
  auto check = [&](const auto& params, const auto& input, Mode mode) {
    using Real = typename std::decay_t<decltype(input)>::Scalar;
    const auto ref = encoder_forward(params.encoder, input, mode).latent;
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(input.rows()));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    for (int t = 0; t < 100; ++t) {
      rng.shuffle(std::span<Eigen::Index>(perm));
      Tensor2D<Real> shuffled(input.rows(), input.cols());
      for (Eigen::Index r = 0; r < input.rows(); ++r) shuffled.row(r) = input.row(perm[static_cast<std::size_t>(r)]);
      equal += encoder_forward(params.encoder, shuffled, mode).latent == ref;
      ++total;
    }
  };
  const NetworkShape full;  // full-size network, 256-point input (AF 8)
  const auto pf = init_params<float>(full, 5);
  Tensor2D<float> xf(256, 3);
  for (Eigen::Index i = 0; i < xf.size(); ++i) xf.data()[i] = static_cast<float>(rng.uniform(-0.5, 0.5));
  check(pf, xf, Mode::Train);
  check(pf, xf, Mode::Infer);
  const auto pd = init_params<double>(desk_scale_config().training.shape, 6);
  Tensor2D<double> xd(64, 3);
  for (Eigen::Index i = 0; i < xd.size(); ++i) xd.data()[i] = rng.uniform(-0.5, 0.5);
  check(pd, xd, Mode::Train);
  return {equal == total, std::to_string(equal) + "/" + std::to_string(total) +
                              " permuted latents identical (float full-size and double desk-size, train and infer)"};
}

// 6
Outcome sampling_statistics(Context&) {
  TriangleMesh five;
  five.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {2, 0, 0}, {2, 3, 0},
                   {0, 0, 1}, {0, 2, 1}, {1, 0, 1}, {5, 5, 5}, {5.5, 5, 5}, {5, 5.1, 5}};
  five.triangles = {{0, 1, 2}, {1, 3, 4}, {5, 7, 6}, {8, 9, 10}, {2, 1, 4}};
  const auto s = sample_surface_uniform(five, 100000, 61);
  const auto areas = triangle_areas(five);
  const double total = std::accumulate(areas.begin(), areas.end(), 0.0);
  std::vector<double> observed(areas.size(), 0.0), prob;
  for (auto t : s.triangles) observed[t] += 1;
  for (double a : areas) prob.push_back(a / total);
  const double p_area = oracle::chi_square_p(observed, prob);

  TriangleMesh one;
  one.vertices = {{0, 0, 0}, {1, 0, 0}, {0.2, 0.9, 0.3}};
  one.triangles = {{0, 1, 2}};
  const auto t = sample_surface_uniform(one, 100000, 62);
  const Eigen::RowVector3d centroid = (one.vertices[0] + one.vertices[1] + one.vertices[2]).transpose() / 3.0;
  const double mean_err = (t.positions.colwise().mean() - centroid).cwiseAbs().maxCoeff();

  const Eigen::Index n = 50;
  const std::size_t m = 10;
  const Eigen::VectorXd flat = Eigen::VectorXd::Constant(n, 0.37);
  std::vector<double> counts(static_cast<std::size_t>(n), 0.0);
  for (std::uint64_t trial = 0; trial < 4000; ++trial) {
    for (auto i : select_indices(flat, m, m, trial)) counts[i] += 1;
  }
  const double p_cb = oracle::chi_square_p(counts, std::vector<double>(static_cast<std::size_t>(n), 1.0 / n));

  const bool pass = p_area > 0.001 && mean_err <= 0.005 && p_cb > 0.001;
  return {pass, "area chi-square p " + fixed(p_area) + ", centroid error " + sci(mean_err) +
                    ", equal-curvature CB chi-square p " + fixed(p_cb)};
}

// 7
Outcome curvature_sanity(Context&) {
  TriangleMesh grid;
  const int k = 8;
  for (int y = 0; y <= k; ++y) {
    for (int x = 0; x <= k; ++x) grid.vertices.emplace_back(0.3 * x, 0.2 * y, 0.0);
  }
  auto id = [&](int x, int y) { return static_cast<std::uint32_t>(y * (k + 1) + x); };
  for (int y = 0; y < k; ++y) {
    for (int x = 0; x < k; ++x) {
      grid.triangles.push_back({id(x, y), id(x + 1, y), id(x + 1, y + 1)});
      grid.triangles.push_back({id(x, y), id(x + 1, y + 1), id(x, y + 1)});
    }
  }
  double flat_max = 0.0;
  for (double c : vertex_curvatures(compute_vertex_normals(grid))) flat_max = std::max(flat_max, std::abs(c));
  double lo = 1e9, hi = -1e9;
  for (double c : vertex_curvatures(compute_vertex_normals(make_icosphere(3)))) {
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  return {flat_max < 1e-9 && lo >= 0.85 && hi <= 1.15,
          "plane max " + sci(flat_max) + ", icosphere range [" + fixed(lo, 4) + ", " + fixed(hi, 4) + "]"};
}

// 8
Outcome overfit(Context&) {
  auto config = desk_scale_config();
  config.training.epochs = 500;
  const ExperimentCondition cond{"ellipsoid", 8, SamplingKind::Uniform, 0.0, false};
  const auto tc = condition_config(config, cond);
  const auto gt = sample_surface_uniform(normalize_model(make_synthetic("ellipsoid", 8)), 512, 8);
  DatasetSplit split;
  split.train.push_back({subsample(gt, 64, SamplingMode::Uniform, false, 80), gt.positions, "e0"});
  double best = 1e300;
  int best_epoch = 0;
  const auto r = train<float>(tc, split, [&](const EpochRecord& e) {
    if (e.train_loss < best) {
      best = e.train_loss;
      best_epoch = e.epoch;
    }
  });
  const double infer = mean_chamfer_loss(r.params, split.train);
  return {best < 1e-4, "lowest training loss " + sci(best) + " at epoch " + std::to_string(best_epoch) +
                           ", inference loss " + sci(infer) + " (lr 5e-4, 500 epochs)"};
}

// 9
Outcome generalization(Context& ctx) {
  const auto config = desk_scale_config();
  std::vector<std::string> ids;
  std::vector<TriangleMesh> meshes;
  for (int i = 0; i < 200; ++i) {
    ids.push_back("ellipsoid_" + std::to_string(i));
    meshes.push_back(make_synthetic("ellipsoid", 9000 + static_cast<std::uint64_t>(i)));
  }
  const auto data = prepare_category("ellipsoid", ids, meshes, config.training.shape.n_out, 9);
  const ExperimentCondition cond{"ellipsoid", 8, SamplingKind::Uniform, 0.0, false};
  const auto tc = condition_config(config, cond);
  const auto split = make_split(data, cond, tc.seed);
  const auto baseline = evaluate(initial_params<float>(tc), split.test, config.rho);
  auto trained = train<float>(tc, split);
  const auto report = evaluate(trained.params, split.test, config.rho);

  // Accuracy of an ideal prediction: a fresh sample of the true surface.
  double ideal = 0.0;
  for (auto m : data.split.test) {
    const auto fresh = sample_surface_uniform(normalize_model(meshes[m]), 512, 77 + m);
    ideal += accuracy(fresh.positions, data.ground_truth[m].positions, config.rho);
  }
  ideal /= static_cast<double>(data.split.test.size());

  ctx.trained = Checkpoint{trained.params, tc};
  ctx.held_out = split.test;
  const double ratio = report.chamfer_loss / baseline.chamfer_loss;
  return {ratio < 0.25 && report.accuracy > 0.9,
          "held-out chamfer " + sci(report.chamfer_loss) + " vs untrained " + sci(baseline.chamfer_loss) +
              " (ratio " + fixed(ratio) + "), accuracy " + fixed(report.accuracy) +
              " (a fresh 512-point sample of the true surface scores " + fixed(ideal) + ")"};
}

struct SweepFiles {
  bool ready = false;
  fs::path data, first, second, alpha;
};

SweepFiles& sweep_files(Context& ctx) {
  static SweepFiles f;
  if (f.ready || ctx.cli.empty()) return f;
  f.data = ctx.work / "data";
  f.first = ctx.work / "sweep1";
  f.second = ctx.work / "sweep2";
  f.alpha = ctx.work / "alpha";
  const std::string cli = ctx.cli + " --seed 14 ";
  if (run(cli + "--out-dir " + f.data.string() + " gen-data --families table --count 20") != 0) return f;
  const std::string data = " --data " + f.data.string();
  if (run(cli + "--out-dir " + f.first.string() + " sweep-conditions" + data) != 0) return f;
  if (run(cli + "--out-dir " + f.second.string() + " sweep-conditions" + data) != 0) return f;
  if (run(cli + "--out-dir " + f.alpha.string() + " sweep-alpha --category table --rho 0.03" + data) != 0) {
    return f;
  }
  f.ready = true;
  return f;
}

// 10
Outcome hybrid_endpoints(Context& ctx) {
  const auto& f = sweep_files(ctx);
  if (!f.ready) return {false, "CLI sweep runs did not complete"};
  const auto alpha = read_report_csv(f.alpha / "sweep_alpha.csv");
  const auto pure = read_report_csv(f.first / "sweep_conditions.csv");
  auto find = [&](const std::string& label) -> const ReportRow* {
    for (const auto& r : pure) {
      if (r.condition == label) return &r;
    }
    return nullptr;
  };
  const auto* u = find("table/AF8/U/xyz");
  const auto* cb = find("table/AF8/CB/xyz");
  bool alphas_ok = alpha.size() == 11;
  for (std::size_t i = 0; alphas_ok && i < 11; ++i) alphas_ok = alpha[i].alpha == static_cast<double>(i) / 10.0;
  auto same = [](const ReportRow& a, const ReportRow* b) {
    return b && a.chamfer_loss == b->chamfer_loss && a.accuracy == b->accuracy && a.coverage == b->coverage;
  };
  const bool ends = alphas_ok && same(alpha.front(), u) && same(alpha.back(), cb);
  std::string curve;
  for (const auto& r : alpha) curve += (curve.empty() ? "" : " ") + sci(r.chamfer_loss);
  return {ends, std::to_string(alpha.size()) + " rows; alpha 0 " + (alphas_ok && same(alpha.front(), u) ? "==" : "!=") +
                    " U, alpha 1 " + (alphas_ok && same(alpha.back(), cb) ? "==" : "!=") + " CB; chamfer by alpha: " + curve};
}

// 11
Outcome metric_identities(Context&) {
  Rng rng(111);
  int self_ok = 0, dual_ok = 0, mono_ok = 0;
  for (int t = 0; t < 100; ++t) {
    const auto p = oracle::random_points(rng, 1 + static_cast<Eigen::Index>(rng.below(300)));
    const auto g = oracle::random_points(rng, 1 + static_cast<Eigen::Index>(rng.below(300)));
    const double rho = rng.uniform(0.005, 0.2);
    self_ok += accuracy(p, p, rho) == 1.0 && coverage(p, p, rho) == 1.0;
    dual_ok += coverage(p, g, rho) == accuracy(g, p, rho);
    bool mono = true;
    double pa = 0.0, pc = 0.0;
    for (int k = 1; k <= 10; ++k) {
      const double r = rho * k / 5.0;
      const double a = accuracy(p, g, r), c = coverage(p, g, r);
      mono = mono && a >= pa && c >= pc;
      pa = a;
      pc = c;
    }
    mono_ok += mono;
  }
  return {self_ok == 100 && dual_ok == 100 && mono_ok == 100,
          "self " + std::to_string(self_ok) + "/100, duality " + std::to_string(dual_ok) + "/100, monotone " +
              std::to_string(mono_ok) + "/100"};
}

// 12
Outcome morph_endpoints(Context& ctx) {
  if (!ctx.trained || ctx.held_out.size() < 2) return {false, "needs the network trained for criterion 9"};
  const auto& params = ctx.trained->params;
  const auto& a = ctx.held_out[0].input;
  const auto& b = ctx.held_out[1].input;
  const auto frames = morph(params, a, b, 6);
  const bool lib = frames.front() == upsample(params, a) && frames.back() == upsample(params, b);

  bool cli = false;
  if (!ctx.cli.empty()) {
    const auto dir = ctx.work / "morph";
    fs::create_directories(dir);
    save_checkpoint(dir / "net.pcup", *ctx.trained);
    write_ply(dir / "a.ply", a);
    write_ply(dir / "b.ply", b);
    if (run(ctx.cli + " --out-dir " + dir.string() + " morph " + (dir / "net.pcup").string() + " " +
            (dir / "a.ply").string() + " " + (dir / "b.ply").string() + " --steps 6") == 0) {
      cli = read_ply(dir / "morph_00.ply").positions() == upsample(params, a) &&
            read_ply(dir / "morph_05.ply").positions() == upsample(params, b);
    }
  }
  return {lib && cli, std::string("library endpoints ") + (lib ? "exact" : "differ") + ", CLI endpoints " +
                          (cli ? "exact" : "differ")};
}

// 13
Outcome persistence(Context& ctx) {
  Checkpoint c;
  if (ctx.trained) {
    c = *ctx.trained;
  } else {
    c.config = desk_scale_config().training;
    c.params = initial_params<float>(c.config);
  }
  const auto path = ctx.work / "roundtrip.pcup";
  save_checkpoint(path, c);
  auto back = load_checkpoint(path);
  auto orig = c.params;
  const auto x = all_tensors(orig);
  const auto y = all_tensors(back.params);
  bool exact = x.size() == y.size() && back.config.shape == c.config.shape && back.config.seed == c.config.seed;
  for (std::size_t k = 0; exact && k < x.size(); ++k) {
    exact = std::memcmp(x[k].values.data(), y[k].values.data(), x[k].values.size() * sizeof(float)) == 0;
  }
  const auto bytes = encode_checkpoint(c);
  exact = exact && encode_checkpoint(back) == bytes;

  Rng rng(113);
  int detected = 0;
  for (int t = 0; t < 50; ++t) {
    auto bad = bytes;
    bad[static_cast<std::size_t>(rng.below(bad.size()))] ^= static_cast<std::uint8_t>(1 + rng.below(255));
    try {
      decode_checkpoint(bad);
    } catch (const Error&) {
      ++detected;
    }
  }
  return {exact && detected == 50, std::string("round-trip ") + (exact ? "bit-exact" : "differs") + " (" +
                                       std::to_string(bytes.size()) + " bytes), corruption detected " +
                                       std::to_string(detected) + "/50"};
}

// 14
Outcome determinism(Context& ctx) {
  const auto& f = sweep_files(ctx);
  if (!f.ready) return {false, "CLI sweep runs did not complete"};
  const auto a = read_text_file(f.first / "sweep_conditions.csv");
  const auto b = read_text_file(f.second / "sweep_conditions.csv");
  const auto rows = std::count(a.begin(), a.end(), '\n') - 1;
  return {a == b && rows == 12, std::to_string(rows) + " condition rows, " + std::to_string(a.size()) +
                                    " bytes, " + (a == b ? "identical" : "different") + " across two runs"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::vector<int> only;
  bool strict = false;
  std::string cli =
#ifdef PCUP_CLI_PATH
      PCUP_CLI_PATH;
#else
      "";
#endif
  std::string work = (fs::temp_directory_path() / "pcup_acceptance").string();
  app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 14));
  app.add_flag("--strict", strict, "Exit 1 if any criterion fails");
  app.add_option("--cli", cli, "Path to the pcup executable");
  app.add_option("--work", work, "Scratch directory");
  CLI11_PARSE(app, argc, argv);

  Context ctx;
  ctx.work = work;
  ctx.cli = cli;
  fs::remove_all(ctx.work);
  fs::create_directories(ctx.work);

  const std::vector<std::pair<std::string, std::function<Outcome(Context&)>>> criteria{
      {"chamfer oracle", chamfer_oracle},
      {"EMD oracle", emd_oracle},
      {"network gradient check", gradient_check},
      {"chamfer gradient check", chamfer_gradient_check},
      {"permutation invariance", permutation_invariance},
      {"sampling statistics", sampling_statistics},
      {"curvature sanity", curvature_sanity},
      {"overfit one cloud", overfit},
      {"generalization on ellipsoids", generalization},
      {"hybrid endpoints", hybrid_endpoints},
      {"metric identities", metric_identities},
      {"morph endpoints", morph_endpoints},
      {"checkpoint persistence", persistence},
      {"sweep determinism", determinism},
  };
  const double limits[] = {10, 5, 30, 0, 0, 0, 0, 180, 900, 0, 0, 0, 0, 0};

  const std::set<int> selected(only.begin(), only.end());
  int failed = 0, ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(number)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limits[i] > 0 && secs >= limits[i]) {
      o.pass = false;
      o.detail += "; over the " + fixed(limits[i], 0) + " s limit";
    }
    char head[64];
    std::snprintf(head, sizeof head, "%s %2d ", o.pass ? "PASS" : "FAIL", number);
    std::cout << head << criteria[i].first << ": " << o.detail << " [" << fixed(secs, 2) << " s]" << std::endl;
    failed += !o.pass;
    ++ran;
  }
  std::cout << ran - failed << "/" << ran << " criteria passed" << std::endl;
  return strict && failed > 0 ? 1 : 0;
}
