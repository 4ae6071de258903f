// Command-line front end: data generation, sampling, training and the experiment sweeps.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pcup/error.hpp"
#include "pcup/harness.hpp"
#include "pcup/io.hpp"
#include "pcup/metrics.hpp"
#include "pcup/rng.hpp"
#include "pcup/synthetic.hpp"

namespace fs = std::filesystem;
using namespace pcup;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct Globals {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string config_path;
  std::string out_dir = ".";
};

struct ConditionFlags {
  int af = 8;
  std::string sampling = "U";
  double alpha = 0.0;
  bool normals = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--af", af, "Amplification factor")->check(CLI::IsMember({2, 4, 8}));
    cmd->add_option("--sampling", sampling, "U, CB or H")->check(CLI::IsMember({"U", "CB", "H"}));
    cmd->add_option("--alpha", alpha, "Curvature fraction for H sampling")->check(CLI::Range(0.0, 1.0));
    cmd->add_flag("--normals", normals, "Feed normals to the network");
  }

  ExperimentCondition condition(const std::string& category) const {
    ExperimentCondition c;
    c.category = category;
    c.af = af;
    c.sampling = sampling == "CB" ? SamplingKind::CurvatureBased
                 : sampling == "H" ? SamplingKind::Hybrid
                                   : SamplingKind::Uniform;
    c.alpha = alpha;
    c.normals = normals;
    return c;
  }
};

ExperimentConfig resolve_config(const Globals& g, ExperimentConfig defaults) {
  ExperimentConfig c = g.config_path.empty() ? defaults : load_config(g.config_path, defaults);
  if (g.seed_given) c.training.seed = g.seed;
  return c;
}

std::string data_dir_of(const std::string& flag, const ExperimentConfig& c) {
  const std::string dir = flag.empty() ? c.data_dir : flag;
  if (dir.empty()) throw Error(ErrorCode::Config, "no data directory (use --data or data_dir in the config)");
  return dir;
}

std::vector<CategoryData> load_categories(const std::string& data_dir, std::vector<std::string> names,
                                          const ExperimentConfig& c) {
  if (names.empty()) names = c.categories;
  if (names.empty()) names = list_categories(data_dir);
  std::vector<CategoryData> out;
  for (const auto& n : names) {
    std::cerr << "loading " << n << "\n";
    out.push_back(load_category(data_dir, n, c.training.shape.n_out, c.training.seed));
  }
  return out;
}

fs::path out_path(const Globals& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / name;
}

void print_row(const ReportRow& r) {
  std::cout << r.condition << "  chamfer " << format_scientific(r.chamfer_loss) << "  accuracy "
            << format_double(r.accuracy) << "  coverage " << format_double(r.coverage) << "\n";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NumericFailure: return kNumeric;
    case ErrorCode::Config: return kUsage;
    default: return kData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point cloud upsampling experiments"};
  app.require_subcommand(1);
  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--config", g.config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--out-dir", g.out_dir, "Output directory");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Write seeded synthetic meshes, one directory per family");
  std::vector<std::string> families = synthetic_families();
  int gen_count = 100;
  gen->add_option("--families", families, "Families to generate");
  gen->add_option("--count", gen_count, "Meshes per family")->check(CLI::PositiveNumber);

  // sample
  auto* sample = app.add_subcommand("sample", "Normalise, sample and subsample one mesh");
  std::string mesh_path, sample_name;
  int sample_n = 256, sample_n_out = 2048;
  ConditionFlags sample_flags;
  sample->add_option("mesh", mesh_path, "OBJ file")->required();
  sample->add_option("-n,--points", sample_n, "Input cloud size")->check(CLI::PositiveNumber);
  sample->add_option("--n-out", sample_n_out, "Ground-truth size")->check(CLI::PositiveNumber);
  sample->add_option("--mode", sample_flags.sampling, "U, CB or H")->check(CLI::IsMember({"U", "CB", "H"}));
  sample->add_option("--alpha", sample_flags.alpha, "Curvature fraction for H")->check(CLI::Range(0.0, 1.0));
  sample->add_flag("--normals", sample_flags.normals, "Write normals");
  sample->add_option("--name", sample_name, "Output file stem (default: mesh file stem)");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train one category under one condition");
  std::string train_data, train_category;
  ConditionFlags train_flags;
  train_cmd->add_option("--data", train_data, "Dataset directory");
  train_cmd->add_option("--category", train_category, "Category directory name")->required();
  train_flags.add_to(train_cmd);

  // eval
  auto* eval = app.add_subcommand("eval", "Compare a predicted cloud with a ground-truth cloud");
  std::string pred_path, gt_path;
  double eval_rho = 0.03;
  eval->add_option("pred", pred_path, "Predicted PLY")->required();
  eval->add_option("gt", gt_path, "Ground-truth PLY")->required();
  eval->add_option("--rho", eval_rho, "Accuracy/coverage radius")->check(CLI::PositiveNumber);

  // sweep-conditions
  auto* sweep = app.add_subcommand("sweep-conditions", "Train and evaluate the twelve conditions per category");
  std::string sweep_data;
  std::vector<std::string> sweep_categories;
  int jobs = 1;
  sweep->add_option("--data", sweep_data, "Dataset directory");
  sweep->add_option("--categories", sweep_categories, "Categories (default: all)");
  sweep->add_option("--jobs", jobs, "Conditions trained in parallel")->check(CLI::PositiveNumber);

  // sweep-alpha
  auto* alpha = app.add_subcommand("sweep-alpha", "Hybrid sampling at alpha = 0, 0.1, ..., 1");
  std::string alpha_data, alpha_category;
  std::optional<double> alpha_rho;
  alpha->add_option("--data", alpha_data, "Dataset directory");
  alpha->add_option("--category", alpha_category, "Category directory name")->required();
  alpha->add_option("--rho", alpha_rho, "Accuracy/coverage radius (default 0.015)")->check(CLI::PositiveNumber);
  alpha->add_option("--jobs", jobs, "Conditions trained in parallel")->check(CLI::PositiveNumber);

  // inter-class
  auto* inter = app.add_subcommand("inter-class", "Evaluate each category's network on every other category");
  std::string inter_data, checkpoint_dir;
  std::vector<std::string> inter_categories;
  ConditionFlags inter_flags;
  inter->add_option("--data", inter_data, "Dataset directory");
  inter->add_option("--checkpoints", checkpoint_dir, "Directory of <category>.pcup files")->required();
  inter->add_option("--categories", inter_categories, "Categories (default: all)");
  inter_flags.add_to(inter);

  // multi-class
  auto* multi = app.add_subcommand("multi-class", "Train one network on a balanced mix of categories");
  std::string multi_data;
  std::vector<std::string> multi_categories;
  int per_category = 0;
  ConditionFlags multi_flags;
  multi->add_option("--data", multi_data, "Dataset directory");
  multi->add_option("--categories", multi_categories, "Categories (default: all)");
  multi->add_option("--per-category", per_category, "Training models drawn per category")
      ->check(CLI::PositiveNumber);
  multi_flags.add_to(multi);

  // morph
  auto* morph_cmd = app.add_subcommand("morph", "Decode interpolated latent vectors of two clouds");
  std::string morph_ckpt, cloud_a, cloud_b;
  int steps = 6;
  morph_cmd->add_option("checkpoint", morph_ckpt, "Checkpoint file")->required();
  morph_cmd->add_option("a", cloud_a, "First input PLY")->required();
  morph_cmd->add_option("b", cloud_b, "Second input PLY")->required();
  morph_cmd->add_option("--steps", steps, "Number of frames")->check(CLI::Range(2, 1000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }
  g.seed_given = seed_opt->count() > 0;

  try {
    if (*gen) {
      generate_dataset(g.out_dir, families, gen_count, g.seed);
      std::cout << "wrote " << families.size() * static_cast<std::size_t>(gen_count) << " meshes to "
                << g.out_dir << "\n";
    } else if (*sample) {
      const auto mesh = normalize_model(read_obj(fs::path(mesh_path)));
      const auto gt = sample_surface_uniform(mesh, static_cast<std::size_t>(sample_n_out), g.seed);
      const auto cond = sample_flags.condition("");
      const auto k = hybrid_curvature_count(static_cast<std::size_t>(sample_n), cond.curvature_fraction());
      const auto input = gather(gt, select_indices(gt.curvatures, static_cast<std::size_t>(sample_n), k,
                                                   Rng::derive(g.seed, 1).next_u64()),
                                sample_flags.normals);
      const std::string stem = sample_name.empty() ? fs::path(mesh_path).stem().string() : sample_name;
      const auto gt_file = out_path(g, stem + "_gt.ply");
      const auto in_file = out_path(g, stem + "_input.ply");
      write_ply(gt_file, to_point_cloud(gt, sample_flags.normals));
      write_ply(in_file, input);
      std::cout << gt_file.string() << " (" << gt.size() << " points)\n"
                << in_file.string() << " (" << input.size() << " points)\n";
    } else if (*train_cmd) {
      const auto config = resolve_config(g, ExperimentConfig{});
      const auto data = load_category(data_dir_of(train_data, config), train_category,
                                      config.training.shape.n_out, config.training.seed);
      const auto cond = train_flags.condition(train_category);
      const auto tc = condition_config(config, cond);
      const auto split = make_split(data, cond, tc.seed);
      auto trained = train<float>(tc, split, [](const EpochRecord& r) {
        if (r.validation_loss >= 0) {
          std::cerr << "epoch " << r.epoch << "  train " << format_scientific(r.train_loss) << "  validation "
                    << format_scientific(r.validation_loss) << "\n";
        }
      });
      const auto report = evaluate(trained.params, split.test, config.rho);
      const ReportRow row{cond.label(), cond.af,        cond.sampling_code(), cond.normals,
                          cond.curvature_fraction(), report.chamfer_loss, report.accuracy,
                          report.coverage};
      save_checkpoint(out_path(g, train_category + ".pcup"), {trained.params, tc});
      write_report_csv(out_path(g, train_category + "_train.csv"), {row});
      print_row(row);
    } else if (*eval) {
      const auto pred = read_ply(fs::path(pred_path)).positions();
      const auto gt = read_ply(fs::path(gt_path)).positions();
      const auto s = evaluate_clouds(pred, gt, eval_rho);
      std::cout << "chamfer " << format_scientific(s.chamfer_loss) << "\n"
                << "chamfer_sum " << format_scientific(s.chamfer_sum) << "\n"
                << "emd " << (s.emd ? format_scientific(*s.emd) : std::string("n/a")) << "\n"
                << "accuracy " << format_double(s.accuracy) << "\n"
                << "coverage " << format_double(s.coverage) << "\n";
    } else if (*sweep) {
      const auto config = resolve_config(g, desk_scale_config());
      const auto cats = load_categories(data_dir_of(sweep_data, config), sweep_categories, config);
      const auto rows = sweep_conditions(cats, config, jobs);
      for (const auto& r : rows) print_row(r);
      write_report_csv(out_path(g, "sweep_conditions.csv"), rows);
    } else if (*alpha) {
      auto defaults = desk_scale_config();
      defaults.rho = 0.015;
      auto config = resolve_config(g, defaults);
      if (alpha_rho) config.rho = *alpha_rho;
      const auto data = load_category(data_dir_of(alpha_data, config), alpha_category,
                                      config.training.shape.n_out, config.training.seed);
      const auto rows = sweep_alpha(data, config, jobs);
      for (const auto& r : rows) print_row(r);
      write_report_csv(out_path(g, "sweep_alpha.csv"), rows);
    } else if (*inter) {
      const auto config = resolve_config(g, desk_scale_config());
      const auto cats = load_categories(data_dir_of(inter_data, config), inter_categories, config);
      std::vector<std::string> names;
      for (const auto& c : cats) names.push_back(c.name);
      const auto result = inter_class(cats, load_category_checkpoints(checkpoint_dir, names),
                                      inter_flags.condition(""), config);
      for (const auto& r : result.off_diagonal_rows) print_row(r);
      write_report_csv(out_path(g, "inter_class.csv"), result.off_diagonal_rows);
    } else if (*multi) {
      const auto config = resolve_config(g, desk_scale_config());
      const auto cats = load_categories(data_dir_of(multi_data, config), multi_categories, config);
      const int count = per_category > 0 ? per_category : config.models_per_category;
      if (count < 1) throw Error(ErrorCode::Config, "--per-category or models_per_category is required");
      const auto result = multi_class(cats, count, multi_flags.condition(""), config);
      std::cerr << "trained on " << result.training_clouds << " clouds\n";
      for (const auto& r : result.rows) print_row(r);
      save_checkpoint(out_path(g, "multi_class.pcup"), result.checkpoint);
      write_report_csv(out_path(g, "multi_class.csv"), result.rows);
    } else if (*morph_cmd) {
      const auto ckpt = load_checkpoint(fs::path(morph_ckpt));
      const auto frames = morph(ckpt.params, read_ply(fs::path(cloud_a)), read_ply(fs::path(cloud_b)), steps);
      for (std::size_t i = 0; i < frames.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "morph_%02zu.ply", i);
        const auto file = out_path(g, name);
        write_ply(file, PointCloud(frames[i]));
        std::cout << file.string() << "\n";
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kOk;
}
