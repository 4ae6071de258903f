#include "pcup/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <thread>

#include "pcup/error.hpp"
#include "pcup/io.hpp"
#include "pcup/metrics.hpp"
#include "pcup/rng.hpp"
#include "pcup/synthetic.hpp"

namespace pcup {
namespace {

std::uint64_t stream_id(const std::string& text) {
  return fnv1a64(reinterpret_cast<const std::uint8_t*>(text.data()), text.size());
}

std::uint64_t derived_seed(std::uint64_t seed, const std::string& purpose) {
  return Rng::derive(seed, stream_id(purpose)).next_u64();
}

std::string fixed_width(int value, int width) {
  std::string s = std::to_string(value);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

ReportRow make_row(const std::string& label, const ExperimentCondition& c,
                   const EvaluationReport& r) {
  return {label,      c.af,       c.sampling_code(), c.normals, c.curvature_fraction(),
          r.chamfer_loss, r.accuracy, r.coverage};
}

}  // namespace

double ExperimentCondition::curvature_fraction() const {
  switch (sampling) {
    case SamplingKind::Uniform: return 0.0;
    case SamplingKind::CurvatureBased: return 1.0;
    case SamplingKind::Hybrid: return alpha;
  }
  return 0.0;
}

std::string ExperimentCondition::sampling_code() const {
  switch (sampling) {
    case SamplingKind::Uniform: return "U";
    case SamplingKind::CurvatureBased: return "CB";
    case SamplingKind::Hybrid: return "H";
  }
  return "?";
}

std::string ExperimentCondition::label() const {
  std::string s = category + "/AF" + std::to_string(af) + "/" + sampling_code();
  if (sampling == SamplingKind::Hybrid) s += format_double(alpha);
  s += normals ? "/normals" : "/xyz";
  return s;
}

ExperimentConfig desk_scale_config() {
  ExperimentConfig c;
  c.training.epochs = 300;
  c.training.shape.n_out = 512;
  c.training.shape = c.training.shape.scaled(4);
  c.rho = 0.03;
  return c;
}

CategoryData prepare_category(const std::string& name, const std::vector<std::string>& ids,
                              const std::vector<TriangleMesh>& meshes, int n_out,
                              std::uint64_t seed) {
  if (ids.size() != meshes.size()) {
    throw Error(ErrorCode::InvalidArgument, "model id and mesh counts differ");
  }
  if (n_out < 1) throw Error(ErrorCode::InvalidArgument, "n_out must be positive");
  CategoryData data;
  data.name = name;
  data.model_ids = ids;
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    try {
      const auto mesh = normalize_model(meshes[i]);
      data.ground_truth.push_back(sample_surface_uniform(
          mesh, static_cast<std::size_t>(n_out), derived_seed(seed, "gt/" + name + "/" + ids[i])));
    } catch (const Error& e) {
      throw Error(e.code(), "model '" + name + "/" + ids[i] + "': " + e.what());
    }
  }
  try {
    data.split = split_indices(meshes.size(), derived_seed(seed, "split/" + name));
  } catch (const Error& e) {
    throw Error(e.code(), "category '" + name + "': " + e.what());
  }
  return data;
}

std::vector<std::string> list_categories(const std::filesystem::path& data_dir) {
  if (!std::filesystem::is_directory(data_dir)) {
    throw Error(ErrorCode::Io, "data directory " + data_dir.string() + " does not exist");
  }
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(data_dir)) {
    if (entry.is_directory()) names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

CategoryData load_category(const std::filesystem::path& data_dir, const std::string& name,
                           int n_out, std::uint64_t seed) {
  const auto dir = data_dir / name;
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::Io, "category directory " + dir.string() + " does not exist");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".obj") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::string> ids;
  std::vector<TriangleMesh> meshes;
  for (const auto& f : files) {
    ids.push_back(f.stem().string());
    meshes.push_back(read_obj(f));
  }
  return prepare_category(name, ids, meshes, n_out, seed);
}

void generate_dataset(const std::filesystem::path& out_dir, const std::vector<std::string>& families,
                      int count, std::uint64_t seed) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "model count must be positive");
  for (const auto& family : families) {
    for (int i = 0; i < count; ++i) {
      const std::string id = family + "_" + fixed_width(i, 4);
      const auto mesh = make_synthetic(family, derived_seed(seed, "mesh/" + id));
      write_obj(out_dir / family / (id + ".obj"), mesh);
    }
  }
}

std::vector<CloudPair> make_pairs(const CategoryData& data, const std::vector<std::size_t>& models,
                                  const ExperimentCondition& condition, std::uint64_t seed) {
  std::vector<CloudPair> pairs;
  pairs.reserve(models.size());
  for (auto m : models) {
    const auto& gt = data.ground_truth.at(m);
    const auto& id = data.model_ids.at(m);
    if (condition.af < 1 || gt.size() % condition.af != 0) {
      throw Error(ErrorCode::Config, "AF " + std::to_string(condition.af) +
                                         " does not divide the ground-truth size " +
                                         std::to_string(gt.size()));
    }
    const auto n_in = static_cast<std::size_t>(gt.size() / condition.af);
    const auto input_seed = derived_seed(seed, "input/" + data.name + "/" + id);
    const auto k = hybrid_curvature_count(n_in, condition.curvature_fraction());
    pairs.push_back({gather(gt, select_indices(gt.curvatures, n_in, k, input_seed), condition.normals),
                     gt.positions, data.name + "/" + id});
  }
  return pairs;
}

DatasetSplit make_split(const CategoryData& data, const ExperimentCondition& condition,
                        std::uint64_t seed) {
  return {make_pairs(data, data.split.train, condition, seed),
          make_pairs(data, data.split.validation, condition, seed),
          make_pairs(data, data.split.test, condition, seed)};
}

TrainingConfig condition_config(const ExperimentConfig& config, const ExperimentCondition& condition) {
  TrainingConfig t = config.training;
  t.af = condition.af;
  t.shape.input_dim = condition.normals ? 6 : 3;
  t.validate();
  return t;
}

ConditionOutcome run_condition(const CategoryData& data, const ExperimentCondition& condition,
                               const ExperimentConfig& config) {
  const auto tc = condition_config(config, condition);
  const auto split = make_split(data, condition, tc.seed);
  auto trained = train<float>(tc, split);
  const auto report = evaluate(trained.params, split.test, config.rho);
  ConditionOutcome out;
  out.row = make_row(condition.label(), condition, report);
  out.checkpoint = {std::move(trained.params), tc};
  out.history = std::move(trained.history);
  return out;
}

std::vector<ExperimentCondition> standard_conditions(const std::string& category) {
  std::vector<ExperimentCondition> out;
  for (int af : {2, 4, 8}) {
    for (auto kind : {SamplingKind::Uniform, SamplingKind::CurvatureBased}) {
      for (bool normals : {false, true}) out.push_back({category, af, kind, 0.0, normals});
    }
  }
  return out;
}

std::vector<ExperimentCondition> alpha_conditions(const std::string& category) {
  std::vector<ExperimentCondition> out;
  for (int i = 0; i <= 10; ++i) {
    out.push_back({category, 8, SamplingKind::Hybrid, static_cast<double>(i) / 10.0, false});
  }
  return out;
}

std::vector<ConditionOutcome> run_conditions(const std::vector<const CategoryData*>& data,
                                             const std::vector<ExperimentCondition>& conditions,
                                             const ExperimentConfig& config, int jobs) {
  if (data.size() != conditions.size()) {
    throw Error(ErrorCode::InvalidArgument, "one category per condition expected");
  }
  std::vector<std::optional<ConditionOutcome>> results(conditions.size());
  std::vector<std::exception_ptr> errors(conditions.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < conditions.size(); i += stride) {
      try {
        results[i] = run_condition(*data[i], conditions[i], config);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  }
  std::vector<ConditionOutcome> out;
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*results[i]));
  }
  return out;
}

std::vector<ReportRow> sweep_conditions(const std::vector<CategoryData>& categories,
                                        const ExperimentConfig& config, int jobs) {
  std::vector<const CategoryData*> data;
  std::vector<ExperimentCondition> conditions;
  for (const auto& c : categories) {
    for (auto& cond : standard_conditions(c.name)) {
      data.push_back(&c);
      conditions.push_back(std::move(cond));
    }
  }
  std::vector<ReportRow> rows;
  for (auto& o : run_conditions(data, conditions, config, jobs)) rows.push_back(std::move(o.row));
  return rows;
}

std::vector<ReportRow> sweep_alpha(const CategoryData& category, const ExperimentConfig& config,
                                   int jobs) {
  const auto conditions = alpha_conditions(category.name);
  const std::vector<const CategoryData*> data(conditions.size(), &category);
  std::vector<ReportRow> rows;
  for (auto& o : run_conditions(data, conditions, config, jobs)) rows.push_back(std::move(o.row));
  return rows;
}

std::map<std::string, Checkpoint> load_category_checkpoints(
    const std::filesystem::path& checkpoint_dir, const std::vector<std::string>& categories) {
  std::map<std::string, Checkpoint> out;
  for (const auto& c : categories) {
    const auto path = checkpoint_dir / (c + ".pcup");
    if (std::filesystem::exists(path)) out.emplace(c, load_checkpoint(path));
  }
  return out;
}

InterClassResult inter_class(const std::vector<CategoryData>& categories,
                             const std::map<std::string, Checkpoint>& checkpoints,
                             const ExperimentCondition& condition, const ExperimentConfig& config) {
  if (categories.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "inter-class evaluation needs at least 2 categories");
  }
  InterClassResult out;
  const auto n = categories.size();
  out.matrix.assign(n, std::vector<EvaluationReport>(n));
  for (const auto& c : categories) out.categories.push_back(c.name);

  std::vector<std::vector<CloudPair>> tests;
  for (const auto& c : categories) {
    ExperimentCondition cond = condition;
    cond.category = c.name;
    tests.push_back(make_pairs(c, c.split.test, cond, config.training.seed));
  }
  for (std::size_t a = 0; a < n; ++a) {
    const auto it = checkpoints.find(categories[a].name);
    for (std::size_t b = 0; b < n; ++b) {
      const std::string cell = "train=" + categories[a].name + "/test=" + categories[b].name;
      if (it == checkpoints.end()) {
        throw Error(ErrorCode::Io, "missing checkpoint for cell " + cell);
      }
      out.matrix[a][b] = evaluate(it->second.params, tests[b], config.rho);
      if (a != b) {
        ExperimentCondition cond = condition;
        cond.category = categories[b].name;
        out.off_diagonal_rows.push_back(make_row(cell, cond, out.matrix[a][b]));
      }
    }
  }
  return out;
}

MultiClassResult multi_class(const std::vector<CategoryData>& categories, int per_category,
                             const ExperimentCondition& condition, const ExperimentConfig& config) {
  if (categories.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "multi-class training needs at least 2 categories");
  }
  if (per_category < 1) throw Error(ErrorCode::InvalidArgument, "per-category count must be positive");
  const auto tc = condition_config(config, condition);

  DatasetSplit split;
  std::vector<std::vector<CloudPair>> tests;
  for (const auto& c : categories) {
    if (c.split.train.size() < static_cast<std::size_t>(per_category)) {
      throw Error(ErrorCode::TooFewModels,
                  "category '" + c.name + "' has " + std::to_string(c.split.train.size()) +
                      " training models, " + std::to_string(per_category) + " requested");
    }
    auto pool = c.split.train;
    Rng rng(derived_seed(tc.seed, "multi/" + c.name));
    rng.shuffle(std::span<std::size_t>(pool));
    pool.resize(static_cast<std::size_t>(per_category));

    ExperimentCondition cond = condition;
    cond.category = c.name;
    for (auto& p : make_pairs(c, pool, cond, tc.seed)) split.train.push_back(std::move(p));
    for (auto& p : make_pairs(c, c.split.validation, cond, tc.seed)) {
      split.validation.push_back(std::move(p));
    }
    tests.push_back(make_pairs(c, c.split.test, cond, tc.seed));
  }

  MultiClassResult out;
  out.training_clouds = split.train.size();
  auto trained = train<float>(tc, split);
  for (std::size_t i = 0; i < categories.size(); ++i) {
    ExperimentCondition cond = condition;
    cond.category = categories[i].name;
    out.rows.push_back(make_row("multi/test=" + categories[i].name, cond,
                                evaluate(trained.params, tests[i], config.rho)));
  }
  out.checkpoint = {std::move(trained.params), tc};
  return out;
}

std::vector<Points3> morph(const NetworkParams<float>& params, const PointCloud& a,
                           const PointCloud& b, int steps) {
  if (steps < 2) throw Error(ErrorCode::InvalidArgument, "morph needs at least 2 steps");
  const RowVec<float> za = encode(params, a);
  const RowVec<float> zb = encode(params, b);
  std::vector<Points3> out;
  for (int i = 0; i < steps; ++i) {
    const float w = static_cast<float>(i) / static_cast<float>(steps - 1);
    const RowVec<float> z = (1.0f - w) * za + w * zb;
    out.push_back(decode(params, z));
  }
  return out;
}

EvalSummary evaluate_clouds(const Points3& prediction, const Points3& target, double rho) {
  EvalSummary s;
  s.chamfer_sum = chamfer_sum(prediction, target);
  s.chamfer_loss = s.chamfer_sum / static_cast<double>(prediction.rows() + target.rows());
  if (prediction.rows() == target.rows() && prediction.rows() <= kMaxEmdPoints) {
    s.emd = emd(prediction, target);
  }
  s.accuracy = accuracy(prediction, target, rho);
  s.coverage = coverage(prediction, target, rho);
  return s;
}

}  // namespace pcup
