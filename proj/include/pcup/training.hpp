#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pcup/geometry.hpp"
#include "pcup/network.hpp"

namespace pcup {

struct TrainingConfig {
  double learning_rate = 5e-4;
  int batch_size = 50;
  int epochs = 2000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  int af = 8;
  int validate_every = 10;
  NetworkShape shape;

  /// Throws Config on any out-of-range field.
  void validate() const;
  int input_points() const { return shape.n_out / af; }
};

/// One training example: a sparse input cloud and the dense cloud it should become.
struct CloudPair {
  PointCloud input;
  Points3 target;
  std::string id;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

struct DatasetSplit {
  std::vector<CloudPair> train;
  std::vector<CloudPair> validation;
  std::vector<CloudPair> test;
};

/// Seeded shuffle of 0..n-1, then test = floor(n/10), validation = floor(n/20), the
/// rest train. Partitions are taken in the order test, validation, train.
SplitIndices split_indices(std::size_t n, std::uint64_t seed);
DatasetSplit split_dataset(std::vector<CloudPair> pairs, std::uint64_t seed);

template <class Real>
struct OptimizerState {
  std::vector<std::vector<Real>> first_moment;
  std::vector<std::vector<Real>> second_moment;
  std::uint64_t step = 0;
};

struct AdamSettings {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam update over parallel lists of parameter and gradient tensors.
/// Moments are allocated on the first call; later calls must present the same shapes.
template <class Real>
void adam_step(std::span<const std::span<Real>> params, std::span<const std::span<const Real>> grads,
               OptimizerState<Real>& state, const AdamSettings& settings);

/// Adam over every learnable tensor of a network.
template <class Real>
void adam_step(NetworkParams<Real>& params, NetworkParams<Real>& grads, OptimizerState<Real>& state,
               const AdamSettings& settings);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double validation_loss = -1.0;  // negative when not evaluated this epoch
};

template <class Real>
struct TrainResult {
  NetworkParams<Real> params;  // best-validation parameters (final ones without validation data)
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_validation_loss = -1.0;
};

using EpochObserver = std::function<void(const EpochRecord&)>;

/// The parameters train() starts from: init_params seeded from config.seed.
template <class Real>
NetworkParams<Real> initial_params(const TrainingConfig& config);

/// Adam on the mean normalised Chamfer loss of each minibatch; one parameter update
/// per minibatch, clouds processed one at a time. Throws NumericFailure on a
/// non-finite loss.
template <class Real>
TrainResult<Real> train(const TrainingConfig& config, const DatasetSplit& split,
                        const EpochObserver& observer = {});

/// Same loop starting from given parameters.
template <class Real>
TrainResult<Real> train_from(NetworkParams<Real> params, const TrainingConfig& config,
                             const DatasetSplit& split, const EpochObserver& observer = {});

struct EvaluationReport {
  double chamfer_loss = 0.0;
  double accuracy = 0.0;
  double coverage = 0.0;
  std::size_t count = 0;
};

struct PairMetrics {
  double chamfer_loss = 0.0;
  double accuracy = 0.0;
  double coverage = 0.0;
};

PairMetrics evaluate_pair(const Points3& prediction, const Points3& target, double rho);

/// Arithmetic means over the test pairs of the Infer-mode predictions.
template <class Real>
EvaluationReport evaluate(const NetworkParams<Real>& params, const std::vector<CloudPair>& test,
                          double rho);

/// Mean normalised Chamfer loss of Infer-mode predictions.
template <class Real>
double mean_chamfer_loss(const NetworkParams<Real>& params, const std::vector<CloudPair>& pairs);

}  // namespace pcup
