#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "workload/series.hpp"

namespace wl::nnet {

enum class Variant { kUnivariate, kMultivariate };
enum class Activation { kRelu, kTanh, kIdentity };
enum class Optimizer { kSgd, kAdam };

struct NetworkSpec {
  Variant variant = Variant::kUnivariate;
  int lookback = 32;
  std::array<int, 2> hidden{64, 64};
  Activation activation = Activation::kRelu;
  double dropout_rate = 0.2;
  int conv_kernel_width = 3;   // multivariate only; odd
  int conv_channels = 16;      // multivariate only
  int input_dims = 1;
  int output_dims = 1;
};

inline void validate(const NetworkSpec& spec) {
  if (spec.lookback < 1) throw std::invalid_argument("spec: lookback must be >= 1");
  if (spec.hidden[0] < 1 || spec.hidden[1] < 1)
    throw std::invalid_argument("spec: hidden sizes must be >= 1");
  if (spec.dropout_rate < 0 || spec.dropout_rate >= 1)
    throw std::invalid_argument("spec: dropout_rate must be in [0,1)");
  if (spec.variant == Variant::kUnivariate) {
    if (spec.input_dims != 1 || spec.output_dims != 1)
      throw std::invalid_argument("spec: univariate networks are 1-D");
  } else {
    if (spec.input_dims != 3 || spec.output_dims != 3)
      throw std::invalid_argument("spec: multivariate networks are 3-D");
    if (spec.conv_kernel_width < 1 || spec.conv_kernel_width % 2 == 0)
      throw std::invalid_argument("spec: conv kernel width must be odd");
    if (spec.conv_channels < 1)
      throw std::invalid_argument("spec: conv channels must be >= 1");
  }
}

// Gate weights stacked row-wise in the order [input, forget, candidate,
// output], each acting on the concatenated [x_t, h_{t-1}].
template <typename Scalar>
struct LstmLayerParamsT {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  int input_size = 0;
  int hidden_size = 0;
  Matrix w;  // 4H x (input_size + hidden_size)
  Vector b;  // 4H
};

template <typename Scalar>
struct Conv1dParamsT {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  int kernel_width = 0;
  int in_channels = 0;
  int out_channels = 0;
  Matrix kernel;  // out_channels x (kernel_width * in_channels)
  Vector bias;    // out_channels
};

template <typename Scalar>
struct DenseParamsT {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> w;  // output x hidden
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> b;
};

template <typename Scalar>
struct NetworkParamsT {
  Conv1dParamsT<Scalar> conv;  // empty for the univariate variant
  LstmLayerParamsT<Scalar> lstm1;
  LstmLayerParamsT<Scalar> lstm2;
  DenseParamsT<Scalar> dense;
};
using NetworkParams = NetworkParamsT<double>;

// Applies f to every parameter block, conv blocks first. The same order is
// used for flattening, optimizer state and checkpoints.
template <typename Scalar, typename Params, typename F>
void for_each_param(const NetworkSpec& spec, Params& p, F&& f) {
  if (spec.variant == Variant::kMultivariate) {
    f(p.conv.kernel);
    f(p.conv.bias);
  }
  f(p.lstm1.w);
  f(p.lstm1.b);
  f(p.lstm2.w);
  f(p.lstm2.b);
  f(p.dense.w);
  f(p.dense.b);
}

template <typename Scalar>
struct LstmCellCacheT {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vector x, h_prev, c_prev;
  Vector gate_i, gate_f, gate_g, gate_o;
  Vector c, tanh_c;
};

// Zips the corresponding parameter blocks of several NetworkParams values.
template <typename Scalar, typename F>
void zip_params(const NetworkSpec& spec, NetworkParamsT<Scalar>& a,
                const NetworkParamsT<Scalar>& b, F&& f) {
  if (spec.variant == Variant::kMultivariate) {
    f(a.conv.kernel, b.conv.kernel);
    f(a.conv.bias, b.conv.bias);
  }
  f(a.lstm1.w, b.lstm1.w);
  f(a.lstm1.b, b.lstm1.b);
  f(a.lstm2.w, b.lstm2.w);
  f(a.lstm2.b, b.lstm2.b);
  f(a.dense.w, b.dense.w);
  f(a.dense.b, b.dense.b);
}

template <typename Scalar, typename F>
void zip_params(const NetworkSpec& spec, NetworkParamsT<Scalar>& a,
                const NetworkParamsT<Scalar>& b, NetworkParamsT<Scalar>& c,
                NetworkParamsT<Scalar>& d, F&& f) {
  if (spec.variant == Variant::kMultivariate) {
    f(a.conv.kernel, b.conv.kernel, c.conv.kernel, d.conv.kernel);
    f(a.conv.bias, b.conv.bias, c.conv.bias, d.conv.bias);
  }
  f(a.lstm1.w, b.lstm1.w, c.lstm1.w, d.lstm1.w);
  f(a.lstm1.b, b.lstm1.b, c.lstm1.b, d.lstm1.b);
  f(a.lstm2.w, b.lstm2.w, c.lstm2.w, d.lstm2.w);
  f(a.lstm2.b, b.lstm2.b, c.lstm2.b, d.lstm2.b);
  f(a.dense.w, b.dense.w, c.dense.w, d.dense.w);
  f(a.dense.b, b.dense.b, c.dense.b, d.dense.b);
}

template <typename Scalar>
void lstm_cell_forward(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x,
                       const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& h_prev,
                       const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& c_prev,
                       const LstmLayerParamsT<Scalar>& params,
                       Eigen::Matrix<Scalar, Eigen::Dynamic, 1>* h_out,
                       Eigen::Matrix<Scalar, Eigen::Dynamic, 1>* c_out,
                       LstmCellCacheT<Scalar>* cache = nullptr) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const int hidden = params.hidden_size;
  if (x.size() != params.input_size || h_prev.size() != hidden || c_prev.size() != hidden)
    throw std::invalid_argument("lstm_cell_forward: shape mismatch");

  Vector xh(params.input_size + hidden);
  xh << x, h_prev;
  Vector z = params.w * xh + params.b;
  Vector gate_i = (Scalar(1) / (Scalar(1) + (-z.segment(0, hidden).array()).exp())).matrix();
  Vector gate_f = (Scalar(1) / (Scalar(1) + (-z.segment(hidden, hidden).array()).exp())).matrix();
  Vector gate_g = z.segment(2 * hidden, hidden).array().tanh().matrix();
  Vector gate_o = (Scalar(1) / (Scalar(1) + (-z.segment(3 * hidden, hidden).array()).exp())).matrix();

  Vector c = gate_f.cwiseProduct(c_prev) + gate_i.cwiseProduct(gate_g);
  Vector tanh_c = c.array().tanh().matrix();
  Vector h = gate_o.cwiseProduct(tanh_c);

  if (cache) {
    cache->x = x;
    cache->h_prev = h_prev;
    cache->c_prev = c_prev;
    cache->gate_i = std::move(gate_i);
    cache->gate_f = std::move(gate_f);
    cache->gate_g = std::move(gate_g);
    cache->gate_o = std::move(gate_o);
    cache->c = c;
    cache->tanh_c = std::move(tanh_c);
  }
  *h_out = std::move(h);
  *c_out = std::move(c);
}

// One BPTT step. dh/dc are gradients flowing into this cell's outputs;
// returns gradients for x and for the previous h and c, accumulating into
// the layer's weight gradients.
template <typename Scalar>
void lstm_cell_backward(const LstmLayerParamsT<Scalar>& params,
                        const LstmCellCacheT<Scalar>& cache,
                        const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& dh,
                        const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& dc_in,
                        LstmLayerParamsT<Scalar>* grads,
                        Eigen::Matrix<Scalar, Eigen::Dynamic, 1>* dx,
                        Eigen::Matrix<Scalar, Eigen::Dynamic, 1>* dh_prev,
                        Eigen::Matrix<Scalar, Eigen::Dynamic, 1>* dc_prev) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const int hidden = params.hidden_size;

  Vector dc = dc_in + dh.cwiseProduct(cache.gate_o)
                          .cwiseProduct((Scalar(1) - cache.tanh_c.array().square()).matrix());
  Vector d_o = dh.cwiseProduct(cache.tanh_c);
  Vector d_f = dc.cwiseProduct(cache.c_prev);
  Vector d_i = dc.cwiseProduct(cache.gate_g);
  Vector d_g = dc.cwiseProduct(cache.gate_i);

  Vector dz(4 * hidden);
  dz.segment(0, hidden) =
      d_i.cwiseProduct(cache.gate_i).cwiseProduct((Scalar(1) - cache.gate_i.array()).matrix());
  dz.segment(hidden, hidden) =
      d_f.cwiseProduct(cache.gate_f).cwiseProduct((Scalar(1) - cache.gate_f.array()).matrix());
  dz.segment(2 * hidden, hidden) =
      d_g.cwiseProduct((Scalar(1) - cache.gate_g.array().square()).matrix());
  dz.segment(3 * hidden, hidden) =
      d_o.cwiseProduct(cache.gate_o).cwiseProduct((Scalar(1) - cache.gate_o.array()).matrix());

  Vector xh(params.input_size + hidden);
  xh << cache.x, cache.h_prev;
  grads->w.noalias() += dz * xh.transpose();
  grads->b += dz;

  Vector dxh = params.w.transpose() * dz;
  *dx = dxh.segment(0, params.input_size);
  *dh_prev = dxh.segment(params.input_size, hidden);
  *dc_prev = dc.cwiseProduct(cache.gate_f);
}

template <typename Scalar>
struct ForwardCachesT {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix window;            // raw input, lookback x input_dims
  Matrix conv_out;          // lookback x conv_channels (multivariate)
  std::vector<LstmCellCacheT<Scalar>> layer1, layer2;
  Matrix mask1;             // inverted-dropout masks per step (lookback x H1)
  Vector mask2;             // mask on the activated head input
  Vector h2_last;           // final hidden state of layer 2
  Vector act;               // activation(h2_last)
  bool training = false;
};
using ForwardCaches = ForwardCachesT<double>;

namespace detail {

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> conv1d_forward(
    const Conv1dParamsT<Scalar>& conv,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& in) {
  const Eigen::Index steps = in.rows();
  const int half = conv.kernel_width / 2;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(steps, conv.out_channels);
  for (Eigen::Index t = 0; t < steps; ++t) {
    out.row(t) = conv.bias.transpose();
    for (int kk = 0; kk < conv.kernel_width; ++kk) {
      const Eigen::Index s = t + kk - half;
      if (s < 0 || s >= steps) continue;  // zero padding
      out.row(t) += in.row(s) *
                    conv.kernel.middleCols(kk * conv.in_channels, conv.in_channels).transpose();
    }
  }
  return out;
}

template <typename Scalar>
void conv1d_backward(const Conv1dParamsT<Scalar>& conv,
                     const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& in,
                     const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& d_out,
                     Conv1dParamsT<Scalar>* grads) {
  const Eigen::Index steps = in.rows();
  const int half = conv.kernel_width / 2;
  grads->bias += d_out.colwise().sum().transpose();
  for (int kk = 0; kk < conv.kernel_width; ++kk) {
    for (Eigen::Index t = 0; t < steps; ++t) {
      const Eigen::Index s = t + kk - half;
      if (s < 0 || s >= steps) continue;
      grads->kernel.middleCols(kk * conv.in_channels, conv.in_channels).noalias() +=
          d_out.row(t).transpose() * in.row(s);
    }
  }
}

template <typename Scalar>
Scalar activate(Activation kind, Scalar v) {
  switch (kind) {
    case Activation::kRelu: return v > Scalar(0) ? v : Scalar(0);
    case Activation::kTanh: return std::tanh(v);
    default: return v;
  }
}

template <typename Scalar>
Scalar activate_grad(Activation kind, Scalar pre, Scalar post) {
  switch (kind) {
    case Activation::kRelu: return pre > Scalar(0) ? Scalar(1) : Scalar(0);
    case Activation::kTanh: return Scalar(1) - post * post;
    default: return Scalar(1);
  }
}

}  // namespace detail

// Full network forward pass. Dropout masks are sampled only when `training`
// is set and a generator is supplied; the caches retain everything backward
// needs.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> forward(
    const NetworkSpec& spec, const NetworkParamsT<Scalar>& params,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& window,
    ForwardCachesT<Scalar>* caches = nullptr, bool training = false,
    std::mt19937_64* rng = nullptr) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  if (window.rows() != spec.lookback || window.cols() != spec.input_dims)
    throw std::invalid_argument("forward: window shape mismatch");
  const int steps = spec.lookback;
  const int h1 = spec.hidden[0];
  const int h2 = spec.hidden[1];
  const bool dropout = training && spec.dropout_rate > 0;
  if (dropout && !rng)
    throw std::invalid_argument("forward: training with dropout needs a generator");

  ForwardCachesT<Scalar> local;
  ForwardCachesT<Scalar>& cc = caches ? *caches : local;
  cc.window = window;
  cc.training = training;
  cc.layer1.assign(static_cast<std::size_t>(steps), {});
  cc.layer2.assign(static_cast<std::size_t>(steps), {});

  const Matrix* lstm_in = &window;
  if (spec.variant == Variant::kMultivariate) {
    cc.conv_out = detail::conv1d_forward(params.conv, window);
    lstm_in = &cc.conv_out;
  }

  const Scalar keep = Scalar(1) - static_cast<Scalar>(spec.dropout_rate);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto sample_mask = [&](Vector& mask, int size) {
    mask.resize(size);
    if (!dropout) {
      mask.setOnes();
      return;
    }
    for (int i = 0; i < size; ++i)
      mask[i] = unit(*rng) < spec.dropout_rate ? Scalar(0) : Scalar(1) / keep;
  };

  cc.mask1.resize(steps, h1);
  Vector h_prev1 = Vector::Zero(h1), c_prev1 = Vector::Zero(h1);
  Vector h_prev2 = Vector::Zero(h2), c_prev2 = Vector::Zero(h2);
  Vector h1_t(h1), c1_t(h1), h2_t(h2), c2_t(h2);
  for (int t = 0; t < steps; ++t) {
    Vector x = lstm_in->row(t).transpose();
    lstm_cell_forward(x, h_prev1, c_prev1, params.lstm1, &h1_t, &c1_t,
                      &cc.layer1[static_cast<std::size_t>(t)]);
    Vector mask;
    sample_mask(mask, h1);
    cc.mask1.row(t) = mask.transpose();
    Vector h1_dropped = h1_t.cwiseProduct(mask);
    lstm_cell_forward(h1_dropped, h_prev2, c_prev2, params.lstm2, &h2_t, &c2_t,
                      &cc.layer2[static_cast<std::size_t>(t)]);
    h_prev1 = h1_t;
    c_prev1 = c1_t;
    h_prev2 = h2_t;
    c_prev2 = c2_t;
  }
  cc.h2_last = h_prev2;

  cc.act.resize(h2);
  for (int i = 0; i < h2; ++i)
    cc.act[i] = detail::activate(spec.activation, cc.h2_last[i]);
  sample_mask(cc.mask2, h2);

  return params.dense.w * cc.act.cwiseProduct(cc.mask2) + params.dense.b;
}

template <typename Scalar>
NetworkParamsT<Scalar> zero_like(const NetworkSpec& spec, const NetworkParamsT<Scalar>& p) {
  NetworkParamsT<Scalar> g = p;
  for_each_param<Scalar>(spec, g, [](auto& block) { block.setZero(); });
  return g;
}

// Exact gradients of forward composed with d_prediction; full BPTT over the
// window with parameters shared across steps.
template <typename Scalar>
NetworkParamsT<Scalar> backward(const NetworkSpec& spec,
                                const NetworkParamsT<Scalar>& params,
                                const ForwardCachesT<Scalar>& caches,
                                const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& d_prediction) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  const int steps = spec.lookback;
  const int h1 = spec.hidden[0];
  const int h2 = spec.hidden[1];
  if (static_cast<int>(caches.layer1.size()) != steps ||
      static_cast<int>(caches.layer2.size()) != steps)
    throw std::invalid_argument("backward: caches do not match spec");
  if (d_prediction.size() != spec.output_dims)
    throw std::invalid_argument("backward: d_prediction shape mismatch");

  NetworkParamsT<Scalar> grads = zero_like(spec, params);

  grads.dense.w.noalias() = d_prediction * caches.act.cwiseProduct(caches.mask2).transpose();
  grads.dense.b = d_prediction;
  Vector d_act = (params.dense.w.transpose() * d_prediction).cwiseProduct(caches.mask2);
  Vector d_h2_last(h2);
  for (int i = 0; i < h2; ++i)
    d_h2_last[i] =
        d_act[i] * detail::activate_grad(spec.activation, caches.h2_last[i], caches.act[i]);

  Matrix d_lstm1_out = Matrix::Zero(steps, h1);  // gradient w.r.t. dropped layer-1 outputs
  Vector dh2 = d_h2_last;
  Vector dc2 = Vector::Zero(h2);
  for (int t = steps - 1; t >= 0; --t) {
    Vector dx, dh_prev, dc_prev;
    lstm_cell_backward(params.lstm2, caches.layer2[static_cast<std::size_t>(t)], dh2, dc2,
                       &grads.lstm2, &dx, &dh_prev, &dc_prev);
    d_lstm1_out.row(t) = dx.transpose();
    dh2 = std::move(dh_prev);
    dc2 = std::move(dc_prev);
  }

  const bool multivariate = spec.variant == Variant::kMultivariate;
  Matrix d_lstm1_in = Matrix::Zero(steps, multivariate ? spec.conv_channels : spec.input_dims);
  Vector dh1 = Vector::Zero(h1);
  Vector dc1 = Vector::Zero(h1);
  for (int t = steps - 1; t >= 0; --t) {
    Vector dh_total =
        dh1 + d_lstm1_out.row(t).transpose().cwiseProduct(caches.mask1.row(t).transpose());
    Vector dx, dh_prev, dc_prev;
    lstm_cell_backward(params.lstm1, caches.layer1[static_cast<std::size_t>(t)], dh_total, dc1,
                       &grads.lstm1, &dx, &dh_prev, &dc_prev);
    d_lstm1_in.row(t) = dx.transpose();
    dh1 = std::move(dh_prev);
    dc1 = std::move(dc_prev);
  }

  if (multivariate)
    detail::conv1d_backward(params.conv, caches.window, d_lstm1_in, &grads.conv);
  return grads;
}

// Seeded uniform(-s, s) with s = 1/sqrt(fan_in); forget-gate biases start
// at 1 to keep early gradients flowing.
template <typename Scalar>
NetworkParamsT<Scalar> init_params(const NetworkSpec& spec, std::uint64_t seed) {
  validate(spec);
  NetworkParamsT<Scalar> p;
  std::mt19937_64 rng(seed);
  auto fill = [&](auto& block, int fan_in) {
    const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-s, s);
    for (Eigen::Index i = 0; i < block.size(); ++i)
      block.data()[i] = static_cast<Scalar>(dist(rng));
  };

  int lstm1_in = spec.input_dims;
  if (spec.variant == Variant::kMultivariate) {
    p.conv.kernel_width = spec.conv_kernel_width;
    p.conv.in_channels = spec.input_dims;
    p.conv.out_channels = spec.conv_channels;
    p.conv.kernel.resize(spec.conv_channels, spec.conv_kernel_width * spec.input_dims);
    p.conv.bias.resize(spec.conv_channels);
    fill(p.conv.kernel, spec.conv_kernel_width * spec.input_dims);
    fill(p.conv.bias, spec.conv_kernel_width * spec.input_dims);
    lstm1_in = spec.conv_channels;
  }

  auto init_lstm = [&](LstmLayerParamsT<Scalar>& layer, int input, int hidden) {
    layer.input_size = input;
    layer.hidden_size = hidden;
    layer.w.resize(4 * hidden, input + hidden);
    layer.b.resize(4 * hidden);
    fill(layer.w, input + hidden);
    fill(layer.b, input + hidden);
    layer.b.segment(hidden, hidden).setConstant(Scalar(1));  // forget gate
  };
  init_lstm(p.lstm1, lstm1_in, spec.hidden[0]);
  init_lstm(p.lstm2, spec.hidden[0], spec.hidden[1]);

  p.dense.w.resize(spec.output_dims, spec.hidden[1]);
  p.dense.b.resize(spec.output_dims);
  fill(p.dense.w, spec.hidden[1]);
  fill(p.dense.b, spec.hidden[1]);
  return p;
}

struct TrainConfig {
  int epochs = 150;
  double learning_rate = 1e-3;
  int batch_size = 32;
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;
  Optimizer optimizer = Optimizer::kAdam;
};

struct EpochLoss {
  double train = 0;
  double val = 0;
};

struct TrainResult {
  NetworkParams params;
  std::vector<EpochLoss> history;
};

namespace detail {

struct AdamState {
  NetworkParams m;
  NetworkParams v;
  long t = 0;
};

}  // namespace detail

// Minimizes mean squared error over the dataset with a chronological
// validation split (the last fraction). Deterministic per seed.
inline TrainResult train(const NetworkSpec& spec, const series::WindowedDataset& dataset,
                         const TrainConfig& config) {
  validate(spec);
  if (dataset.size() == 0) throw std::invalid_argument("train: empty dataset");
  if (config.epochs < 1 || !(config.learning_rate > 0) || config.batch_size < 1 ||
      config.validation_fraction < 0 || config.validation_fraction >= 1)
    throw std::invalid_argument("train: invalid config");

  const std::size_t n = dataset.size();
  std::size_t n_val = static_cast<std::size_t>(config.validation_fraction * static_cast<double>(n));
  const std::size_t n_train = n - n_val;
  if (n_train == 0) throw std::invalid_argument("train: no training samples after split");

  TrainResult result;
  result.params = init_params<double>(spec, config.seed);
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  detail::AdamState adam;
  if (config.optimizer == Optimizer::kAdam) {
    adam.m = zero_like(spec, result.params);
    adam.v = zero_like(spec, result.params);
  }
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const double inv_dims = 1.0 / static_cast<double>(spec.output_dims);

  ForwardCaches caches;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double train_loss = 0;
    std::size_t pos = 0;
    while (pos < n_train) {
      const std::size_t batch = std::min<std::size_t>(config.batch_size, n_train - pos);
      NetworkParams grads = zero_like(spec, result.params);
      for (std::size_t b = 0; b < batch; ++b) {
        const std::size_t idx = order[pos + b];
        Eigen::VectorXd pred =
            forward(spec, result.params, dataset.inputs[idx], &caches, true, &rng);
        Eigen::VectorXd err = pred - dataset.targets.row(static_cast<Eigen::Index>(idx)).transpose();
        train_loss += err.squaredNorm() * inv_dims;
        Eigen::VectorXd d_pred = 2.0 * inv_dims * err / static_cast<double>(batch);
        NetworkParams g = backward(spec, result.params, caches, d_pred);
        zip_params<double>(spec, grads, g, [](auto& acc, const auto& src) { acc += src; });
      }
      pos += batch;

      if (config.optimizer == Optimizer::kAdam) {
        ++adam.t;
        const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam.t));
        const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam.t));
        zip_params<double>(spec, result.params, grads, adam.m, adam.v,
                           [&](auto& p_block, const auto& g_block, auto& m_block,
                               auto& v_block) {
          m_block = kBeta1 * m_block + (1.0 - kBeta1) * g_block;
          v_block = (kBeta2 * v_block.array() + (1.0 - kBeta2) * g_block.array().square())
                        .matrix();
          p_block.array() -= config.learning_rate * (m_block.array() / bc1) /
                             ((v_block.array() / bc2).sqrt() + kEps);
        });
      } else {
        zip_params<double>(spec, result.params, grads,
                           [&](auto& p_block, const auto& g_block) {
                             p_block -= config.learning_rate * g_block;
                           });
      }
    }
    train_loss /= static_cast<double>(n_train);

    double val_loss = train_loss;
    if (n_val > 0) {
      val_loss = 0;
      for (std::size_t i = n_train; i < n; ++i) {
        Eigen::VectorXd pred = forward(spec, result.params, dataset.inputs[i]);
        val_loss += (pred - dataset.targets.row(static_cast<Eigen::Index>(i)).transpose())
                        .squaredNorm() * inv_dims;
      }
      val_loss /= static_cast<double>(n_val);
    }
    result.history.push_back({train_loss, val_loss});
  }
  return result;
}

// Normalizes the window, runs an inference forward pass and maps the output
// back to original units.
inline Eigen::VectorXd predict(const NetworkSpec& spec, const NetworkParams& params,
                               const Eigen::MatrixXd& window, const series::Scaler& scaler) {
  if (scaler.dims() != spec.input_dims)
    throw std::invalid_argument("predict: scaler dimension mismatch");
  Eigen::MatrixXd normalized = window;
  for (Eigen::Index d = 0; d < window.cols(); ++d) {
    const double span = scaler.maxs[d] - scaler.mins[d];
    if (span == 0.0)
      normalized.col(d).setZero();
    else
      normalized.col(d) = (window.col(d).array() - scaler.mins[d]) / span;
  }
  Eigen::VectorXd y = forward(spec, params, normalized);
  for (Eigen::Index d = 0; d < y.size(); ++d)
    y[d] = y[d] * (scaler.maxs[d] - scaler.mins[d]) + scaler.mins[d];
  return y;
}

}  // namespace wl::nnet
