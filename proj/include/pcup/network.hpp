#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pcup/geometry.hpp"

namespace pcup {

template <class Real>
using Tensor2D = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class Real>
using RowVec = Eigen::Matrix<Real, 1, Eigen::Dynamic>;

/// Layer widths of the encoder-decoder. The encoder is a stack of shared per-point
/// layers ending in a channel-wise max; the decoder is a fully connected chain
/// latent -> hidden... -> 3 * n_out.
struct NetworkShape {
  int input_dim = 3;
  std::vector<int> encoder_widths{64, 128, 128, 256, 128};
  std::vector<int> decoder_hidden{256, 256};
  int n_out = 2048;

  int latent_dim() const { return encoder_widths.empty() ? 0 : encoder_widths.back(); }
  void validate() const;

  /// Every width divided by `factor` (rounded down, at least 1).
  NetworkShape scaled(int factor) const;

  bool operator==(const NetworkShape&) const = default;
};

template <class Real>
struct ConvLayer {
  Tensor2D<Real> weight;  // in_dim x out_dim
  RowVec<Real> bias;
  RowVec<Real> gamma;
  RowVec<Real> beta;
  RowVec<Real> running_mean;
  RowVec<Real> running_var;
};

template <class Real>
struct DenseLayer {
  Tensor2D<Real> weight;  // in_dim x out_dim
  RowVec<Real> bias;
};

template <class Real>
struct EncoderParams {
  std::vector<ConvLayer<Real>> layers;
};

template <class Real>
struct DecoderParams {
  std::vector<DenseLayer<Real>> layers;
  int n_out = 0;
};

template <class Real>
struct NetworkParams {
  NetworkShape shape;
  EncoderParams<Real> encoder;
  DecoderParams<Real> decoder;
};

/// A named view onto one contiguous parameter tensor.
template <class Real>
struct TensorView {
  std::string name;
  std::span<Real> values;
  bool learnable = true;
};

/// Every tensor in a fixed declaration order: per encoder layer weight, bias, gamma,
/// beta, running_mean, running_var; per decoder layer weight, bias.
template <class Real>
std::vector<TensorView<Real>> all_tensors(NetworkParams<Real>& params);

/// The subset of all_tensors that receives gradients.
template <class Real>
std::vector<TensorView<Real>> learnable_tensors(NetworkParams<Real>& params);

enum class Mode { Train, Infer };

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.9;

template <class Real>
struct ConvCache {
  Tensor2D<Real> input;
  Tensor2D<Real> normalized;  // (z - mean) / sqrt(var + eps)
  Tensor2D<Real> activated;   // gamma * normalized + beta, before ReLU
  RowVec<Real> batch_mean;
  RowVec<Real> batch_var;
  RowVec<Real> inv_std;
};

template <class Real>
struct EncoderCache {
  Mode mode = Mode::Infer;
  std::vector<ConvCache<Real>> layers;
  Tensor2D<Real> features;             // last-layer ReLU output, N x latent
  std::vector<Eigen::Index> argmax;    // row chosen for each latent channel
};

template <class Real>
struct DecoderCache {
  RowVec<Real> latent;
  std::vector<RowVec<Real>> pre_activation;  // per layer, before ReLU
};

template <class Real>
struct EncoderResult {
  RowVec<Real> latent;
  EncoderCache<Real> cache;
};

template <class Real>
struct DecoderResult {
  Tensor2D<Real> cloud;  // n_out x 3
  DecoderCache<Real> cache;
};

template <class Real>
struct ForwardPass {
  EncoderCache<Real> encoder;
  DecoderCache<Real> decoder;
  RowVec<Real> latent;
  Tensor2D<Real> output;
};

template <class Real>
struct Gradients {
  NetworkParams<Real> params;  // running statistics stay zero
  Tensor2D<Real> input;
};

/// Glorot-uniform weights, zero biases, unit gamma, zero beta, running mean 0 / var 1.
template <class Real>
NetworkParams<Real> init_params(const NetworkShape& shape, std::uint64_t seed);

/// Zero-filled parameters with the layout of `shape`.
template <class Real>
NetworkParams<Real> zero_params(const NetworkShape& shape);

template <class To, class From>
NetworkParams<To> cast_params(const NetworkParams<From>& params);

/// Per layer ReLU(BN(x W + b)) on every row, then a channel-wise max over rows.
/// Train mode normalises with the statistics of this cloud; Infer uses running stats.
template <class Real>
EncoderResult<Real> encoder_forward(const EncoderParams<Real>& params, const Tensor2D<Real>& input,
                                    Mode mode);

/// Folds the batch statistics of a Train-mode pass into the running estimates.
template <class Real>
void update_running_stats(EncoderParams<Real>& params, const EncoderCache<Real>& cache,
                          double momentum = kBatchNormMomentum);

template <class Real>
DecoderResult<Real> decoder_forward(const DecoderParams<Real>& params, const RowVec<Real>& latent);

template <class Real>
ForwardPass<Real> forward(const NetworkParams<Real>& params, const Tensor2D<Real>& input,
                          Mode mode);

/// Exact gradients of a scalar loss given dL/d(output cloud).
template <class Real>
Gradients<Real> backward(const NetworkParams<Real>& params, const ForwardPass<Real>& pass,
                         const Tensor2D<Real>& output_grad);

/// Infer-mode forward pass on a point cloud.
template <class Real>
Points3 upsample(const NetworkParams<Real>& params, const PointCloud& input);

template <class Real>
RowVec<Real> encode(const NetworkParams<Real>& params, const PointCloud& input);

template <class Real>
Points3 decode(const NetworkParams<Real>& params, const RowVec<Real>& latent);

template <class Real>
Tensor2D<Real> to_tensor(const PointCloud& cloud);

template <class Real>
Points3 to_points(const Tensor2D<Real>& cloud);

}  // namespace pcup
