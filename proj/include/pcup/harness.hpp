#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pcup/geometry.hpp"
#include "pcup/persistence.hpp"
#include "pcup/training.hpp"

namespace pcup {

enum class SamplingKind { Uniform, CurvatureBased, Hybrid };

/// One cell of the parametric grid.
struct ExperimentCondition {
  std::string category;
  int af = 8;
  SamplingKind sampling = SamplingKind::Uniform;
  double alpha = 0.0;  // used by Hybrid only
  bool normals = false;

  /// Fraction of curvature-based draws: 0 for Uniform, 1 for CurvatureBased.
  double curvature_fraction() const;
  std::string sampling_code() const;  // U, CB or H
  std::string label() const;
};

/// Dense ground-truth samples of every model in one category plus the frozen split.
struct CategoryData {
  std::string name;
  std::vector<std::string> model_ids;
  std::vector<SampledCloud> ground_truth;
  SplitIndices split;
};

/// Experiment defaults sized for a single CPU: n_out 512, widths / 4, 300 epochs.
ExperimentConfig desk_scale_config();

/// Category from in-memory meshes. Each mesh is normalised, then sampled with
/// n_out points; sample seeds and the split depend only on (seed, category, id).
CategoryData prepare_category(const std::string& name, const std::vector<std::string>& ids,
                              const std::vector<TriangleMesh>& meshes, int n_out,
                              std::uint64_t seed);

/// Reads every *.obj under data_dir/name (sorted by file name).
CategoryData load_category(const std::filesystem::path& data_dir, const std::string& name,
                           int n_out, std::uint64_t seed);

/// Sub-directory names of data_dir, sorted.
std::vector<std::string> list_categories(const std::filesystem::path& data_dir);

/// Writes `count` seeded meshes of each family to out_dir/<family>/<family>_NNNN.obj.
void generate_dataset(const std::filesystem::path& out_dir, const std::vector<std::string>& families,
                      int count, std::uint64_t seed);

/// Input/target pairs for the given model indices under a condition. The subsample
/// seed of a model does not depend on the condition, so Hybrid alpha = 0 / 1
/// reproduce Uniform / CurvatureBased inputs exactly.
std::vector<CloudPair> make_pairs(const CategoryData& data, const std::vector<std::size_t>& models,
                                  const ExperimentCondition& condition, std::uint64_t seed);

DatasetSplit make_split(const CategoryData& data, const ExperimentCondition& condition,
                        std::uint64_t seed);

/// Training configuration for a condition: af and input_dim follow the condition.
TrainingConfig condition_config(const ExperimentConfig& config, const ExperimentCondition& condition);

struct ConditionOutcome {
  ReportRow row;
  Checkpoint checkpoint;
  std::vector<EpochRecord> history;
};

ConditionOutcome run_condition(const CategoryData& data, const ExperimentCondition& condition,
                               const ExperimentConfig& config);

/// The twelve conditions (AF 2/4/8 x U/CB x with/without normals) for one category.
std::vector<ExperimentCondition> standard_conditions(const std::string& category);

/// Hybrid conditions at alpha = 0.0, 0.1, ..., 1.0 for AF 8 without normals.
std::vector<ExperimentCondition> alpha_conditions(const std::string& category);

/// Trains and evaluates every condition; rows come back in condition order regardless
/// of `jobs`.
std::vector<ConditionOutcome> run_conditions(const std::vector<const CategoryData*>& data,
                                             const std::vector<ExperimentCondition>& conditions,
                                             const ExperimentConfig& config, int jobs = 1);

std::vector<ReportRow> sweep_conditions(const std::vector<CategoryData>& categories,
                                        const ExperimentConfig& config, int jobs = 1);

std::vector<ReportRow> sweep_alpha(const CategoryData& category, const ExperimentConfig& config,
                                   int jobs = 1);

struct InterClassResult {
  std::vector<std::string> categories;
  /// loss[train][test]; diagonal entries are same-category evaluations.
  std::vector<std::vector<EvaluationReport>> matrix;
  std::vector<ReportRow> off_diagonal_rows;
};

/// Evaluates each category's checkpoint on every category's frozen test set.
/// Throws Io naming the cell when a checkpoint is missing.
InterClassResult inter_class(const std::vector<CategoryData>& categories,
                             const std::map<std::string, Checkpoint>& checkpoints,
                             const ExperimentCondition& condition, const ExperimentConfig& config);

/// Loads <checkpoint_dir>/<category>.pcup for every category.
std::map<std::string, Checkpoint> load_category_checkpoints(
    const std::filesystem::path& checkpoint_dir, const std::vector<std::string>& categories);

struct MultiClassResult {
  Checkpoint checkpoint;
  std::vector<ReportRow> rows;
  std::size_t training_clouds = 0;
};

/// Draws `per_category` models from each category's training split (seeded), trains
/// one network on the union and reports each category's test set separately.
MultiClassResult multi_class(const std::vector<CategoryData>& categories, int per_category,
                             const ExperimentCondition& condition, const ExperimentConfig& config);

/// Decodes (1 - w) * latent(a) + w * latent(b) for `steps` evenly spaced w in [0, 1].
std::vector<Points3> morph(const NetworkParams<float>& params, const PointCloud& a,
                           const PointCloud& b, int steps);

struct EvalSummary {
  double chamfer_loss = 0.0;
  double chamfer_sum = 0.0;
  std::optional<double> emd;  // present when sizes match and do not exceed kMaxEmdPoints
  double accuracy = 0.0;
  double coverage = 0.0;
};

inline constexpr Eigen::Index kMaxEmdPoints = 1024;

EvalSummary evaluate_clouds(const Points3& prediction, const Points3& target, double rho);

}  // namespace pcup
