#include "pcup/network.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "pcup/error.hpp"
#include "pcup/rng.hpp"

namespace pcup {
namespace {

std::string dims(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

template <class M>
std::span<typename M::Scalar> span_of(M& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

template <class Real>
void glorot_fill(Tensor2D<Real>& w, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    w.data()[i] = static_cast<Real>(rng.uniform(-limit, limit));
  }
}

template <class Real>
Tensor2D<Real> relu(const Tensor2D<Real>& x) {
  return x.cwiseMax(Real(0));
}

// Column sums that do not depend on row order: each column is summed in sorted order.
template <typename Real>
RowVec<Real> ordered_column_sum(const Tensor2D<Real>& m) {
  RowVec<Real> out(m.cols());
  std::vector<Real> column(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) column[static_cast<std::size_t>(r)] = m(r, c);
    std::sort(column.begin(), column.end());
    Real acc = 0;
    for (Real v : column) acc += v;
    out[c] = acc;
  }
  return out;
}
}  // namespace

void NetworkShape::validate() const {
  if (input_dim != 3 && input_dim != 6) {
    throw Error(ErrorCode::ShapeMismatch, "input_dim must be 3 or 6");
  }
  if (encoder_widths.empty()) throw Error(ErrorCode::ShapeMismatch, "encoder has no layers");
  if (n_out < 1) throw Error(ErrorCode::ShapeMismatch, "n_out must be positive");
  for (int w : encoder_widths) {
    if (w < 1) throw Error(ErrorCode::ShapeMismatch, "encoder widths must be positive");
  }
  for (int w : decoder_hidden) {
    if (w < 1) throw Error(ErrorCode::ShapeMismatch, "decoder widths must be positive");
  }
}

NetworkShape NetworkShape::scaled(int factor) const {
  NetworkShape out = *this;
  for (auto& w : out.encoder_widths) w = std::max(1, w / factor);
  for (auto& w : out.decoder_hidden) w = std::max(1, w / factor);
  return out;
}

template <class Real>
std::vector<TensorView<Real>> all_tensors(NetworkParams<Real>& params) {
  std::vector<TensorView<Real>> out;
  for (std::size_t l = 0; l < params.encoder.layers.size(); ++l) {
    auto& layer = params.encoder.layers[l];
    const std::string p = "encoder." + std::to_string(l) + ".";
    out.push_back({p + "weight", span_of(layer.weight), true});
    out.push_back({p + "bias", span_of(layer.bias), true});
    out.push_back({p + "gamma", span_of(layer.gamma), true});
    out.push_back({p + "beta", span_of(layer.beta), true});
    out.push_back({p + "running_mean", span_of(layer.running_mean), false});
    out.push_back({p + "running_var", span_of(layer.running_var), false});
  }
  for (std::size_t l = 0; l < params.decoder.layers.size(); ++l) {
    auto& layer = params.decoder.layers[l];
    const std::string p = "decoder." + std::to_string(l) + ".";
    out.push_back({p + "weight", span_of(layer.weight), true});
    out.push_back({p + "bias", span_of(layer.bias), true});
  }
  return out;
}

template <class Real>
std::vector<TensorView<Real>> learnable_tensors(NetworkParams<Real>& params) {
  auto all = all_tensors(params);
  std::erase_if(all, [](const TensorView<Real>& t) { return !t.learnable; });
  return all;
}

template <class Real>
NetworkParams<Real> zero_params(const NetworkShape& shape) {
  shape.validate();
  NetworkParams<Real> p;
  p.shape = shape;
  int in = shape.input_dim;
  for (int out : shape.encoder_widths) {
    ConvLayer<Real> layer;
    layer.weight = Tensor2D<Real>::Zero(in, out);
    layer.bias = RowVec<Real>::Zero(out);
    layer.gamma = RowVec<Real>::Zero(out);
    layer.beta = RowVec<Real>::Zero(out);
    layer.running_mean = RowVec<Real>::Zero(out);
    layer.running_var = RowVec<Real>::Zero(out);
    p.encoder.layers.push_back(std::move(layer));
    in = out;
  }
  std::vector<int> widths = shape.decoder_hidden;
  widths.push_back(3 * shape.n_out);
  for (int out : widths) {
    DenseLayer<Real> layer;
    layer.weight = Tensor2D<Real>::Zero(in, out);
    layer.bias = RowVec<Real>::Zero(out);
    p.decoder.layers.push_back(std::move(layer));
    in = out;
  }
  p.decoder.n_out = shape.n_out;
  return p;
}

template <class Real>
NetworkParams<Real> init_params(const NetworkShape& shape, std::uint64_t seed) {
  auto p = zero_params<Real>(shape);
  Rng rng(seed);
  for (auto& layer : p.encoder.layers) {
    glorot_fill(layer.weight, rng);
    layer.gamma.setOnes();
    layer.running_var.setOnes();
  }
  for (auto& layer : p.decoder.layers) glorot_fill(layer.weight, rng);
  return p;
}

template <class To, class From>
NetworkParams<To> cast_params(const NetworkParams<From>& params) {
  NetworkParams<To> out;
  out.shape = params.shape;
  for (const auto& l : params.encoder.layers) {
    out.encoder.layers.push_back({l.weight.template cast<To>(), l.bias.template cast<To>(),
                                  l.gamma.template cast<To>(), l.beta.template cast<To>(),
                                  l.running_mean.template cast<To>(),
                                  l.running_var.template cast<To>()});
  }
  for (const auto& l : params.decoder.layers) {
    out.decoder.layers.push_back({l.weight.template cast<To>(), l.bias.template cast<To>()});
  }
  out.decoder.n_out = params.decoder.n_out;
  return out;
}

template <class Real>
EncoderResult<Real> encoder_forward(const EncoderParams<Real>& params, const Tensor2D<Real>& input,
                                    Mode mode) {
  if (params.layers.empty()) throw Error(ErrorCode::ShapeMismatch, "encoder has no layers");
  if (input.rows() < 1) throw Error(ErrorCode::ShapeMismatch, "encoder input has no points");
  if (input.cols() != params.layers.front().weight.rows()) {
    throw Error(ErrorCode::ShapeMismatch,
                "encoder expects " + std::to_string(params.layers.front().weight.rows()) +
                    " columns, got input " + dims(input.rows(), input.cols()));
  }

  const Eigen::Index n = input.rows();
  const Real eps = static_cast<Real>(kBatchNormEpsilon);
  EncoderResult<Real> result;
  auto& cache = result.cache;
  cache.mode = mode;
  cache.layers.resize(params.layers.size());

  Tensor2D<Real> x = input;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    auto& lc = cache.layers[l];
    if (layer.weight.rows() != x.cols()) {
      throw Error(ErrorCode::ShapeMismatch, "encoder layer " + std::to_string(l) +
                                                " input width mismatch");
    }
    Tensor2D<Real> z = x * layer.weight;
    z.rowwise() += layer.bias;

    if (mode == Mode::Train) {
      lc.batch_mean = ordered_column_sum(z) / static_cast<Real>(n);
      z.rowwise() -= lc.batch_mean;
      lc.batch_var = ordered_column_sum(Tensor2D<Real>(z.cwiseAbs2())) / static_cast<Real>(n);
    } else {
      lc.batch_mean = layer.running_mean;
      lc.batch_var = layer.running_var;
      z.rowwise() -= lc.batch_mean;
    }
    lc.inv_std = (lc.batch_var.array() + eps).rsqrt().matrix();
    z.array().rowwise() *= lc.inv_std.array();
    lc.normalized = std::move(z);

    lc.activated = lc.normalized;
    lc.activated.array().rowwise() *= layer.gamma.array();
    lc.activated.rowwise() += layer.beta;
    lc.input = std::move(x);
    x = relu(lc.activated);
  }

  const Eigen::Index channels = x.cols();
  result.latent.resize(channels);
  cache.argmax.assign(static_cast<std::size_t>(channels), 0);
  for (Eigen::Index c = 0; c < channels; ++c) {
    Eigen::Index best = 0;
    for (Eigen::Index r = 1; r < n; ++r) {
      if (x(r, c) > x(best, c)) best = r;
    }
    cache.argmax[static_cast<std::size_t>(c)] = best;
    result.latent[c] = x(best, c);
  }
  cache.features = std::move(x);
  return result;
}

template <class Real>
void update_running_stats(EncoderParams<Real>& params, const EncoderCache<Real>& cache,
                          double momentum) {
  if (cache.mode != Mode::Train || cache.layers.size() != params.layers.size()) {
    throw Error(ErrorCode::StaleCache, "running statistics need a matching Train-mode pass");
  }
  const Real keep = static_cast<Real>(momentum);
  const Real take = static_cast<Real>(1.0 - momentum);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& layer = params.layers[l];
    const auto& lc = cache.layers[l];
    if (lc.batch_mean.size() != layer.running_mean.size()) {
      throw Error(ErrorCode::StaleCache, "batch statistics do not match layer width");
    }
    layer.running_mean = keep * layer.running_mean + take * lc.batch_mean;
    layer.running_var = keep * layer.running_var + take * lc.batch_var;
  }
}

template <class Real>
DecoderResult<Real> decoder_forward(const DecoderParams<Real>& params, const RowVec<Real>& latent) {
  if (params.layers.empty()) throw Error(ErrorCode::ShapeMismatch, "decoder has no layers");
  if (latent.size() != params.layers.front().weight.rows()) {
    throw Error(ErrorCode::ShapeMismatch,
                "decoder expects latent of " + std::to_string(params.layers.front().weight.rows()) +
                    ", got " + std::to_string(latent.size()));
  }
  if (params.layers.back().weight.cols() != 3 * static_cast<Eigen::Index>(params.n_out)) {
    throw Error(ErrorCode::ShapeMismatch, "decoder output width is not 3 * n_out");
  }

  DecoderResult<Real> result;
  result.cache.latent = latent;
  RowVec<Real> a = latent;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    if (layer.weight.rows() != a.size()) {
      throw Error(ErrorCode::ShapeMismatch, "decoder layer " + std::to_string(l) +
                                                " input width mismatch");
    }
    RowVec<Real> z = a * layer.weight + layer.bias;
    result.cache.pre_activation.push_back(z);
    a = l + 1 < params.layers.size() ? RowVec<Real>(z.cwiseMax(Real(0))) : z;
  }
  result.cloud = Eigen::Map<const Tensor2D<Real>>(a.data(), params.n_out, 3);
  return result;
}

template <class Real>
ForwardPass<Real> forward(const NetworkParams<Real>& params, const Tensor2D<Real>& input,
                          Mode mode) {
  auto enc = encoder_forward(params.encoder, input, mode);
  auto dec = decoder_forward(params.decoder, enc.latent);
  return {std::move(enc.cache), std::move(dec.cache), std::move(enc.latent), std::move(dec.cloud)};
}

template <class Real>
Gradients<Real> backward(const NetworkParams<Real>& params, const ForwardPass<Real>& pass,
                         const Tensor2D<Real>& output_grad) {
  const auto& enc = params.encoder;
  const auto& dec = params.decoder;
  const auto& ec = pass.encoder;
  const auto& dc = pass.decoder;
  if (ec.mode != Mode::Train) throw Error(ErrorCode::StaleCache, "backward needs a Train-mode pass");
  if (ec.layers.size() != enc.layers.size() || dc.pre_activation.size() != dec.layers.size() ||
      dc.latent.size() != dec.layers.front().weight.rows() ||
      ec.features.cols() != enc.layers.back().weight.cols()) {
    throw Error(ErrorCode::StaleCache, "forward cache does not match the parameters");
  }
  for (std::size_t l = 0; l < enc.layers.size(); ++l) {
    if (ec.layers[l].input.cols() != enc.layers[l].weight.rows() ||
        ec.layers[l].activated.cols() != enc.layers[l].weight.cols()) {
      throw Error(ErrorCode::StaleCache, "encoder cache layer " + std::to_string(l) +
                                             " does not match the parameters");
    }
  }
  if (output_grad.rows() != dec.n_out || output_grad.cols() != 3) {
    throw Error(ErrorCode::ShapeMismatch, "output gradient must be " + dims(dec.n_out, 3) +
                                              ", got " + dims(output_grad.rows(), output_grad.cols()));
  }

  Gradients<Real> g;
  g.params = zero_params<Real>(params.shape);

  // Decoder, last layer first. Row-major storage makes the reshape a flat view.
  RowVec<Real> dz = Eigen::Map<const RowVec<Real>>(output_grad.data(), 3 * dec.n_out);
  for (std::size_t l = dec.layers.size(); l-- > 0;) {
    const RowVec<Real> a_in =
        l == 0 ? dc.latent : RowVec<Real>(dc.pre_activation[l - 1].cwiseMax(Real(0)));
    auto& gl = g.params.decoder.layers[l];
    gl.weight.noalias() = a_in.transpose() * dz;
    gl.bias = dz;
    RowVec<Real> da = dz * dec.layers[l].weight.transpose();
    if (l > 0) {
      da.array() *= (dc.pre_activation[l - 1].array() > Real(0)).template cast<Real>();
    }
    dz = std::move(da);
  }

  // Maxpool routes each channel's gradient to its argmax row only.
  const Eigen::Index n = ec.features.rows();
  Tensor2D<Real> d_act = Tensor2D<Real>::Zero(n, ec.features.cols());
  for (Eigen::Index c = 0; c < d_act.cols(); ++c) {
    d_act(ec.argmax[static_cast<std::size_t>(c)], c) = dz[c];
  }

  const Real inv_n = Real(1) / static_cast<Real>(n);
  for (std::size_t l = enc.layers.size(); l-- > 0;) {
    const auto& layer = enc.layers[l];
    const auto& lc = ec.layers[l];
    auto& gl = g.params.encoder.layers[l];

    Tensor2D<Real> dy = d_act.cwiseProduct((lc.activated.array() > Real(0)).template cast<Real>().matrix());
    gl.beta = dy.colwise().sum();
    gl.gamma = dy.cwiseProduct(lc.normalized).colwise().sum();

    Tensor2D<Real> dxhat = dy;
    dxhat.array().rowwise() *= layer.gamma.array();
    const RowVec<Real> sum_dxhat = dxhat.colwise().sum();
    const RowVec<Real> sum_dxhat_xhat = dxhat.cwiseProduct(lc.normalized).colwise().sum();

    // Full batch-statistics Jacobian:
    // dz = inv_std / N * (N dxhat - sum(dxhat) - xhat * sum(dxhat * xhat))
    Tensor2D<Real> dzl = lc.normalized;
    dzl.array().rowwise() *= sum_dxhat_xhat.array();
    dzl = dxhat - dzl * inv_n;
    dzl.rowwise() -= sum_dxhat * inv_n;
    dzl.array().rowwise() *= lc.inv_std.array();

    gl.weight.noalias() = lc.input.transpose() * dzl;
    gl.bias = dzl.colwise().sum();
    d_act.noalias() = dzl * layer.weight.transpose();
  }
  g.input = std::move(d_act);
  return g;
}

template <class Real>
Tensor2D<Real> to_tensor(const PointCloud& cloud) {
  return cloud.data().template cast<Real>();
}

template <class Real>
Points3 to_points(const Tensor2D<Real>& cloud) {
  if (cloud.cols() != 3) throw Error(ErrorCode::ShapeMismatch, "expected an N x 3 cloud");
  return cloud.template cast<double>();
}

template <class Real>
RowVec<Real> encode(const NetworkParams<Real>& params, const PointCloud& input) {
  return encoder_forward(params.encoder, to_tensor<Real>(input), Mode::Infer).latent;
}

template <class Real>
Points3 decode(const NetworkParams<Real>& params, const RowVec<Real>& latent) {
  return to_points<Real>(decoder_forward(params.decoder, latent).cloud);
}

template <class Real>
Points3 upsample(const NetworkParams<Real>& params, const PointCloud& input) {
  return decode(params, encode(params, input));
}

#define PCUP_INSTANTIATE(R)                                                                    \
  template std::vector<TensorView<R>> all_tensors(NetworkParams<R>&);                          \
  template std::vector<TensorView<R>> learnable_tensors(NetworkParams<R>&);                    \
  template NetworkParams<R> init_params<R>(const NetworkShape&, std::uint64_t);                \
  template NetworkParams<R> zero_params<R>(const NetworkShape&);                               \
  template EncoderResult<R> encoder_forward(const EncoderParams<R>&, const Tensor2D<R>&, Mode); \
  template void update_running_stats(EncoderParams<R>&, const EncoderCache<R>&, double);       \
  template DecoderResult<R> decoder_forward(const DecoderParams<R>&, const RowVec<R>&);        \
  template ForwardPass<R> forward(const NetworkParams<R>&, const Tensor2D<R>&, Mode);          \
  template Gradients<R> backward(const NetworkParams<R>&, const ForwardPass<R>&,               \
                                 const Tensor2D<R>&);                                          \
  template Points3 upsample(const NetworkParams<R>&, const PointCloud&);                       \
  template RowVec<R> encode(const NetworkParams<R>&, const PointCloud&);                       \
  template Points3 decode(const NetworkParams<R>&, const RowVec<R>&);                          \
  template Tensor2D<R> to_tensor<R>(const PointCloud&);                                        \
  template Points3 to_points(const Tensor2D<R>&);

PCUP_INSTANTIATE(float)
PCUP_INSTANTIATE(double)
#undef PCUP_INSTANTIATE

template NetworkParams<float> cast_params<float, double>(const NetworkParams<double>&);
template NetworkParams<double> cast_params<double, float>(const NetworkParams<float>&);
template NetworkParams<float> cast_params<float, float>(const NetworkParams<float>&);
template NetworkParams<double> cast_params<double, double>(const NetworkParams<double>&);

}  // namespace pcup
