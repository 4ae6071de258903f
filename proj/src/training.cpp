#include "pcup/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pcup/error.hpp"
#include "pcup/metrics.hpp"
#include "pcup/rng.hpp"

namespace pcup {

void TrainingConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::Config, "learning_rate must be positive");
  if (batch_size < 1) throw Error(ErrorCode::Config, "batch_size must be at least 1");
  if (epochs < 1) throw Error(ErrorCode::Config, "epochs must be at least 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw Error(ErrorCode::Config, "Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw Error(ErrorCode::Config, "epsilon must be positive");
  if (af < 1 || shape.n_out % af != 0) {
    throw Error(ErrorCode::Config, "af must be positive and divide n_out");
  }
  if (validate_every < 1) throw Error(ErrorCode::Config, "validate_every must be at least 1");
  try {
    shape.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, e.what());
  }
}

SplitIndices split_indices(std::size_t n, std::uint64_t seed) {
  if (n < 10) {
    throw Error(ErrorCode::TooFewModels,
                "need at least 10 models to split, got " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  const std::size_t n_test = n / 10;
  const std::size_t n_val = n / 20;
  SplitIndices out;
  out.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  out.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test),
                        order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
  out.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), order.end());
  return out;
}

DatasetSplit split_dataset(std::vector<CloudPair> pairs, std::uint64_t seed) {
  const auto idx = split_indices(pairs.size(), seed);
  DatasetSplit out;
  for (auto i : idx.train) out.train.push_back(std::move(pairs[i]));
  for (auto i : idx.validation) out.validation.push_back(std::move(pairs[i]));
  for (auto i : idx.test) out.test.push_back(std::move(pairs[i]));
  return out;
}

template <class Real>
void adam_step(std::span<const std::span<Real>> params, std::span<const std::span<const Real>> grads,
               OptimizerState<Real>& state, const AdamSettings& settings) {
  if (params.size() != grads.size()) {
    throw Error(ErrorCode::ShapeMismatch, "parameter and gradient lists differ in length");
  }
  if (state.step == 0 && state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.size(), Real(0));
      state.second_moment.emplace_back(p.size(), Real(0));
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw Error(ErrorCode::ShapeMismatch, "optimizer state does not match the parameters");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].size() != grads[k].size() || state.first_moment[k].size() != params[k].size()) {
      throw Error(ErrorCode::ShapeMismatch, "tensor " + std::to_string(k) + " shape mismatch");
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const Real b1 = static_cast<Real>(settings.beta1);
  const Real b2 = static_cast<Real>(settings.beta2);
  const Real correction1 = static_cast<Real>(1.0 - std::pow(settings.beta1, t));
  const Real correction2 = static_cast<Real>(1.0 - std::pow(settings.beta2, t));
  const Real lr = static_cast<Real>(settings.learning_rate);
  const Real eps = static_cast<Real>(settings.epsilon);

  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    const auto g = grads[k];
    const auto p = params[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (Real(1) - b1) * g[i];
      v[i] = b2 * v[i] + (Real(1) - b2) * g[i] * g[i];
      const Real m_hat = m[i] / correction1;
      const Real v_hat = v[i] / correction2;
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

template <class Real>
void adam_step(NetworkParams<Real>& params, NetworkParams<Real>& grads, OptimizerState<Real>& state,
               const AdamSettings& settings) {
  auto p = learnable_tensors(params);
  auto g = learnable_tensors(grads);
  std::vector<std::span<Real>> pv;
  std::vector<std::span<const Real>> gv;
  for (auto& t : p) pv.push_back(t.values);
  for (auto& t : g) gv.emplace_back(t.values.data(), t.values.size());
  adam_step<Real>(pv, gv, state, settings);
}

PairMetrics evaluate_pair(const Points3& prediction, const Points3& target, double rho) {
  return {chamfer_loss(prediction, target), accuracy(prediction, target, rho),
          coverage(prediction, target, rho)};
}

template <class Real>
double mean_chamfer_loss(const NetworkParams<Real>& params, const std::vector<CloudPair>& pairs) {
  if (pairs.empty()) throw Error(ErrorCode::EmptySet, "no pairs to evaluate");
  double sum = 0.0;
  for (const auto& p : pairs) sum += chamfer_loss(upsample(params, p.input), p.target);
  return sum / static_cast<double>(pairs.size());
}

template <class Real>
EvaluationReport evaluate(const NetworkParams<Real>& params, const std::vector<CloudPair>& test,
                          double rho) {
  if (test.empty()) throw Error(ErrorCode::EmptyTestSet, "test set is empty");
  EvaluationReport report;
  for (const auto& p : test) {
    const auto m = evaluate_pair(upsample(params, p.input), p.target, rho);
    report.chamfer_loss += m.chamfer_loss;
    report.accuracy += m.accuracy;
    report.coverage += m.coverage;
  }
  report.count = test.size();
  const double n = static_cast<double>(test.size());
  report.chamfer_loss /= n;
  report.accuracy /= n;
  report.coverage /= n;
  return report;
}

namespace {

void check_data(const TrainingConfig& config, const DatasetSplit& split) {
  if (split.train.empty()) throw Error(ErrorCode::InvalidArgument, "training split is empty");
  auto check = [&](const std::vector<CloudPair>& pairs, const char* which) {
    for (const auto& p : pairs) {
      if (p.target.rows() != config.shape.n_out) {
        throw Error(ErrorCode::InvalidArgument, std::string(which) + " pair '" + p.id +
                                                    "' target has " +
                                                    std::to_string(p.target.rows()) +
                                                    " points, expected n_out = " +
                                                    std::to_string(config.shape.n_out));
      }
      if (p.input.size() != config.input_points() || p.input.dim() != config.shape.input_dim) {
        throw Error(ErrorCode::InvalidArgument,
                    std::string(which) + " pair '" + p.id + "' input is " +
                        std::to_string(p.input.size()) + "x" + std::to_string(p.input.dim()) +
                        ", expected " + std::to_string(config.input_points()) + "x" +
                        std::to_string(config.shape.input_dim));
      }
    }
  };
  check(split.train, "train");
  check(split.validation, "validation");
}

template <class Real>
void accumulate(NetworkParams<Real>& into, NetworkParams<Real>& grads) {
  auto a = learnable_tensors(into);
  auto b = learnable_tensors(grads);
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (std::size_t i = 0; i < a[k].values.size(); ++i) a[k].values[i] += b[k].values[i];
  }
}

}  // namespace

template <class Real>
TrainResult<Real> train_from(NetworkParams<Real> params, const TrainingConfig& config,
                             const DatasetSplit& split, const EpochObserver& observer) {
  config.validate();
  if (!(params.shape == config.shape)) {
    throw Error(ErrorCode::Config, "initial parameters do not match the configured shape");
  }
  check_data(config, split);

  const AdamSettings adam{config.learning_rate, config.beta1, config.beta2, config.epsilon};
  OptimizerState<Real> state;
  Rng shuffle_rng = Rng::derive(config.seed, 2);

  std::vector<Tensor2D<Real>> inputs;
  inputs.reserve(split.train.size());
  for (const auto& p : split.train) inputs.push_back(to_tensor<Real>(p.input));

  TrainResult<Real> result;
  result.params = params;
  std::vector<std::size_t> order(split.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const double batch_scale = 1.0 / static_cast<double>(stop - start);
      auto batch_grad = zero_params<Real>(config.shape);

      for (std::size_t b = start; b < stop; ++b) {
        const auto& pair = split.train[order[b]];
        auto pass = forward(params, inputs[order[b]], Mode::Train);
        update_running_stats(params.encoder, pass.encoder);

        const Points3 predicted = to_points<Real>(pass.output);
        if (!predicted.allFinite()) {
          throw Error(ErrorCode::NumericFailure, "non-finite network output at epoch " +
                                                     std::to_string(epoch) + " on '" + pair.id +
                                                     "'");
        }
        auto ce = chamfer_with_gradient(predicted, pair.target);
        const double norm = 1.0 / static_cast<double>(predicted.rows() + pair.target.rows());
        const double loss = ce.sum * norm;
        if (!std::isfinite(loss)) {
          throw Error(ErrorCode::NumericFailure, "non-finite loss at epoch " +
                                                     std::to_string(epoch) + " on '" + pair.id +
                                                     "'");
        }
        epoch_loss += loss;
        const Tensor2D<Real> upstream = (ce.gradient * (norm * batch_scale)).template cast<Real>();
        auto g = backward(params, pass, upstream);
        accumulate(batch_grad, g.params);
      }
      adam_step(params, batch_grad, state, adam);
    }

    EpochRecord record{epoch, epoch_loss / static_cast<double>(order.size()), -1.0};
    const bool validate_now = epoch % config.validate_every == 0 || epoch == config.epochs;
    if (!split.validation.empty() && validate_now) {
      record.validation_loss = mean_chamfer_loss(params, split.validation);
      if (!std::isfinite(record.validation_loss)) {
        throw Error(ErrorCode::NumericFailure,
                    "non-finite validation loss at epoch " + std::to_string(epoch));
      }
      if (result.best_epoch == 0 || record.validation_loss < result.best_validation_loss) {
        result.best_validation_loss = record.validation_loss;
        result.best_epoch = epoch;
        result.params = params;
      }
    }
    result.history.push_back(record);
    if (observer) observer(record);
  }
  if (split.validation.empty()) {
    result.params = std::move(params);
    result.best_epoch = config.epochs;
  }
  return result;
}

template <class Real>
NetworkParams<Real> initial_params(const TrainingConfig& config) {
  config.validate();
  return init_params<Real>(config.shape, Rng::derive(config.seed, 1).next_u64());
}

template <class Real>
TrainResult<Real> train(const TrainingConfig& config, const DatasetSplit& split,
                        const EpochObserver& observer) {
  return train_from(initial_params<Real>(config), config, split, observer);
}

#define PCUP_INSTANTIATE(R)                                                                   \
  template void adam_step<R>(std::span<const std::span<R>>, std::span<const std::span<const R>>, \
                             OptimizerState<R>&, const AdamSettings&);                        \
  template void adam_step<R>(NetworkParams<R>&, NetworkParams<R>&, OptimizerState<R>&,        \
                             const AdamSettings&);                                            \
  template NetworkParams<R> initial_params<R>(const TrainingConfig&);                        \
  template TrainResult<R> train<R>(const TrainingConfig&, const DatasetSplit&,                \
                                   const EpochObserver&);                                     \
  template TrainResult<R> train_from<R>(NetworkParams<R>, const TrainingConfig&,              \
                                        const DatasetSplit&, const EpochObserver&);           \
  template EvaluationReport evaluate<R>(const NetworkParams<R>&, const std::vector<CloudPair>&, \
                                        double);                                              \
  template double mean_chamfer_loss<R>(const NetworkParams<R>&, const std::vector<CloudPair>&);

PCUP_INSTANTIATE(float)
PCUP_INSTANTIATE(double)
#undef PCUP_INSTANTIATE

}  // namespace pcup
