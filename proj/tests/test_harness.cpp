#include <doctest.h>

#include <filesystem>

#include "pcup/error.hpp"
#include "pcup/harness.hpp"
#include "pcup/io.hpp"
#include "pcup/synthetic.hpp"

using namespace pcup;

namespace {

ExperimentConfig tiny_experiment() {
  ExperimentConfig c;
  c.training.shape.encoder_widths = {8, 16, 16, 32, 16};
  c.training.shape.decoder_hidden = {32, 32};
  c.training.shape.n_out = 64;
  c.training.epochs = 6;
  c.training.batch_size = 8;
  c.training.validate_every = 3;
  c.training.learning_rate = 2e-3;
  c.training.seed = 21;
  c.rho = 0.05;
  return c;
}

CategoryData synthetic_category(const std::string& family, int count, int n_out, std::uint64_t seed) {
  std::vector<std::string> ids;
  std::vector<TriangleMesh> meshes;
  for (int i = 0; i < count; ++i) {
    ids.push_back(family + std::to_string(i));
    meshes.push_back(make_synthetic(family, seed * 1000 + static_cast<std::uint64_t>(i)));
  }
  return prepare_category(family, ids, meshes, n_out, seed);
}

}  // namespace

TEST_CASE("condition labels and codes") {
  ExperimentCondition c{"vase", 4, SamplingKind::CurvatureBased, 0.0, true};
  CHECK(c.label() == "vase/AF4/CB/normals");
  CHECK(c.curvature_fraction() == 1.0);
  c = {"vase", 8, SamplingKind::Hybrid, 0.3, false};
  CHECK(c.label() == "vase/AF8/H0.3/xyz");
  CHECK(c.sampling_code() == "H");
  CHECK(standard_conditions("x").size() == 12);
  const auto alphas = alpha_conditions("x");
  REQUIRE(alphas.size() == 11);
  CHECK(alphas.front().alpha == 0.0);
  CHECK(alphas.back().alpha == 1.0);
}

TEST_CASE("desk scale defaults") {
  const auto c = desk_scale_config();
  CHECK(c.training.shape.n_out == 512);
  CHECK(c.training.shape.encoder_widths == std::vector<int>{16, 32, 32, 64, 32});
  CHECK(c.training.shape.decoder_hidden == std::vector<int>{64, 64});
  CHECK(c.training.epochs == 300);
  CHECK(c.rho == 0.03);
}

TEST_CASE("prepared categories are deterministic and split") {
  const auto a = synthetic_category("ellipsoid", 20, 64, 3);
  const auto b = synthetic_category("ellipsoid", 20, 64, 3);
  CHECK(a.ground_truth.size() == 20);
  CHECK(a.ground_truth[5].positions == b.ground_truth[5].positions);
  CHECK(a.split.test == b.split.test);
  CHECK(a.split.test.size() == 2);
  CHECK(a.split.validation.size() == 1);
}

TEST_CASE("pairs have the condition's shape and hybrid endpoints match") {
  const auto data = synthetic_category("table", 12, 64, 1);
  const std::vector<std::size_t> models{0, 3, 7};
  const ExperimentCondition u{"table", 8, SamplingKind::Uniform, 0.0, true};
  const auto pu = make_pairs(data, models, u, 5);
  REQUIRE(pu.size() == 3);
  CHECK(pu[0].input.size() == 8);
  CHECK(pu[0].input.dim() == 6);
  CHECK(pu[0].target.rows() == 64);

  const ExperimentCondition h0{"table", 8, SamplingKind::Hybrid, 0.0, true};
  const ExperimentCondition h1{"table", 8, SamplingKind::Hybrid, 1.0, true};
  const ExperimentCondition cb{"table", 8, SamplingKind::CurvatureBased, 0.0, true};
  const auto ph0 = make_pairs(data, models, h0, 5);
  const auto ph1 = make_pairs(data, models, h1, 5);
  const auto pcb = make_pairs(data, models, cb, 5);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(ph0[i].input.data() == pu[i].input.data());
    CHECK(ph1[i].input.data() == pcb[i].input.data());
  }
  const ExperimentCondition bad{"table", 3, SamplingKind::Uniform, 0.0, false};
  CHECK_THROWS_AS(make_pairs(data, models, bad, 5), Error);
}

TEST_CASE("run_conditions is independent of the job count") {
  const auto data = synthetic_category("ellipsoid", 12, 64, 2);
  auto config = tiny_experiment();
  const auto conds = alpha_conditions("ellipsoid");
  const std::vector<ExperimentCondition> picked{conds[0], conds[5], conds[10]};
  const std::vector<const CategoryData*> ptrs(3, &data);
  const auto serial = run_conditions(ptrs, picked, config, 1);
  const auto parallel = run_conditions(ptrs, picked, config, 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(serial[i].row == parallel[i].row);
  CHECK(format_report_csv({serial[0].row, serial[1].row}) ==
        format_report_csv({parallel[0].row, parallel[1].row}));

  const ExperimentCondition u{"ellipsoid", 8, SamplingKind::Uniform, 0.0, false};
  const auto pure = run_condition(data, u, config);
  CHECK(pure.row.chamfer_loss == serial[0].row.chamfer_loss);
  CHECK(pure.row.accuracy == serial[0].row.accuracy);
  CHECK(pure.row.coverage == serial[0].row.coverage);
}

TEST_CASE("morph endpoints equal plain upsampling") {
  const auto data = synthetic_category("vase", 12, 64, 4);
  const auto config = tiny_experiment();
  const ExperimentCondition u{"vase", 4, SamplingKind::Uniform, 0.0, false};
  const auto outcome = run_condition(data, u, config);
  const auto pairs = make_pairs(data, {0, 1}, u, 9);
  const auto frames = morph(outcome.checkpoint.params, pairs[0].input, pairs[1].input, 5);
  REQUIRE(frames.size() == 5);
  CHECK(frames.front() == upsample(outcome.checkpoint.params, pairs[0].input));
  CHECK(frames.back() == upsample(outcome.checkpoint.params, pairs[1].input));
  CHECK_THROWS_AS(morph(outcome.checkpoint.params, pairs[0].input, pairs[1].input, 1), Error);
}

TEST_CASE("inter-class and multi-class bookkeeping") {
  const std::vector<CategoryData> cats{synthetic_category("ellipsoid", 20, 64, 5),
                                       synthetic_category("table", 20, 64, 6)};
  auto config = tiny_experiment();
  config.training.epochs = 30;
  const ExperimentCondition u{"", 8, SamplingKind::Uniform, 0.0, false};

  std::map<std::string, Checkpoint> checkpoints;
  for (const auto& c : cats) {
    ExperimentCondition cond = u;
    cond.category = c.name;
    checkpoints.emplace(c.name, run_condition(c, cond, config).checkpoint);
  }
  const auto r = inter_class(cats, checkpoints, u, config);
  CHECK(r.off_diagonal_rows.size() == 2);
  CHECK(r.off_diagonal_rows[0].condition == "train=ellipsoid/test=table");
  // A network trained on one family reconstructs its own family better.
  CHECK(r.matrix[0][0].chamfer_loss < r.matrix[1][0].chamfer_loss);
  CHECK(r.matrix[1][1].chamfer_loss < r.matrix[0][1].chamfer_loss);

  checkpoints.erase("table");
  try {
    inter_class(cats, checkpoints, u, config);
    FAIL("expected Io");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
    CHECK(std::string(e.what()).find("train=table/test=ellipsoid") != std::string::npos);
  }

  const auto m = multi_class(cats, 5, u, config);
  CHECK(m.training_clouds == 10);
  CHECK(m.rows.size() == 2);
  CHECK(m.rows[1].condition == "multi/test=table");
  try {
    multi_class(cats, 100, u, config);
    FAIL("expected TooFewModels");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewModels);
    CHECK(std::string(e.what()).find("ellipsoid") != std::string::npos);
  }
}

TEST_CASE("generated datasets load back") {
  const auto dir = std::filesystem::temp_directory_path() / "pcup_harness_gen";
  std::filesystem::remove_all(dir);
  generate_dataset(dir, {"ellipsoid", "vase"}, 10, 7);
  CHECK(list_categories(dir) == std::vector<std::string>{"ellipsoid", "vase"});
  CHECK(std::filesystem::exists(dir / "vase" / "vase_0009.obj"));
  const auto data = load_category(dir, "vase", 64, 1);
  CHECK(data.model_ids.front() == "vase_0000");
  CHECK(data.ground_truth.size() == 10);
  const auto again = load_category(dir, "vase", 64, 1);
  CHECK(again.ground_truth[3].positions == data.ground_truth[3].positions);
  CHECK_THROWS_AS(load_category(dir, "chair", 64, 1), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("evaluate_clouds reports emd only when defined") {
  const auto data = synthetic_category("ellipsoid", 10, 64, 8);
  const auto& p = data.ground_truth[0].positions;
  const auto& q = data.ground_truth[1].positions;
  const auto s = evaluate_clouds(p, q, 0.05);
  REQUIRE(s.emd.has_value());
  CHECK(*s.emd > 0.0);
  const auto t = evaluate_clouds(p, Points3(q.topRows(10)), 0.05);
  CHECK_FALSE(t.emd.has_value());
  CHECK(t.chamfer_loss == doctest::Approx(t.chamfer_sum / 74.0));
}
