#pragma once

// Minimal layer zoo: dense, valid 2-d convolution, peephole LSTM cell,
// concat/flatten, fan-in initialization. Every forward has an analytic
// backward validated against finite differences.

#include <cstdint>
#include <vector>

#include "vinet/rng.hpp"
#include "vinet/tensor.hpp"

namespace vinet {

enum class Activation { Identity, LeakyRelu };

inline constexpr double kLeakySlope = 0.1;

double apply_activation(Activation act, double x);
double activation_grad(Activation act, double x);  // derivative at preactivation x

// --- dense -------------------------------------------------------------

struct DenseParams {
  Tensor W;  // [out, in]
  Tensor b;  // [out]
};

struct DenseCache {
  Tensor x;
};

Tensor dense_forward(const Tensor& x, const DenseParams& p, DenseCache* cache = nullptr);
// Returns grad_x; accumulates parameter gradients into `grads`.
Tensor dense_backward(const Tensor& grad_out, const DenseParams& p,
                      const DenseCache& cache, DenseParams& grads);

// --- 2-d convolution -----------------------------------------------------

struct ConvLayerSpec {
  std::size_t in_maps = 1;
  std::size_t out_maps = 1;
  std::size_t kh = 3;
  std::size_t kw = 3;
  std::size_t stride = 1;
  Activation act = Activation::LeakyRelu;

  void validate() const;
  std::size_t out_h(std::size_t in_h) const { return (in_h - kh) / stride + 1; }
  std::size_t out_w(std::size_t in_w) const { return (in_w - kw) / stride + 1; }
};

struct ConvParams {
  Tensor w;  // [out_maps, in_maps, kh, kw]
  Tensor b;  // [out_maps]
};

struct ConvCache {
  Tensor input;    // [m, h, w]
  Tensor preact;   // [f, h', w']
};

// Valid (no padding) cross-correlation followed by the activation.
Tensor conv2d_forward(const Tensor& input, const ConvLayerSpec& spec,
                      const ConvParams& p, ConvCache* cache = nullptr);
Tensor conv2d_backward(const Tensor& grad_out, const ConvLayerSpec& spec,
                       const ConvParams& p, const ConvCache& cache,
                       ConvParams& grads);

// --- peephole LSTM cell ---------------------------------------------------
//
//   i_t = sigma(W_xi x + W_hi h_{t-1} + w_ci . c_{t-1} + b_i)
//   f_t = sigma(W_xf x + W_hf h_{t-1} + w_cf . c_{t-1} + b_f)
//   z_t = tanh (W_xc x + W_hc h_{t-1} + b_c)
//   c_t = f_t . c_{t-1} + i_t . z_t
//   o_t = sigma(W_xo x + W_ho h_{t-1} + w_co . c_t + b_o)
//   h_t = o_t . tanh(c_t)
//
// Peephole weights are diagonal, stored as vectors. The output gate peeps at
// the current cell c_t.

struct LstmParams {
  Tensor W_xi, W_hi, w_ci, b_i;
  Tensor W_xf, W_hf, w_cf, b_f;
  Tensor W_xc, W_hc, b_c;
  Tensor W_xo, W_ho, w_co, b_o;

  std::size_t input_size() const { return W_xi.extent(1); }
  std::size_t hidden_size() const { return W_xi.extent(0); }
};

struct LstmState {
  Tensor h;
  Tensor c;

  LstmState() = default;
  explicit LstmState(std::size_t hidden)
      : h(Tensor::zeros({hidden})), c(Tensor::zeros({hidden})) {}
};

struct LstmCache {
  Tensor x, h_prev, c_prev;
  Tensor i, f, z, c, o, tanh_c;
};

struct LstmStateGrads {
  Tensor dx;
  Tensor dh_prev;
  Tensor dc_prev;
};

LstmState lstm_cell_forward(const Tensor& x, const LstmState& prev,
                            const LstmParams& p, LstmCache* cache = nullptr);
// grad_h/grad_c: gradients flowing into h_t and c_t. Parameter gradients
// accumulate into `grads` (shapes must match `p`).
LstmStateGrads lstm_cell_backward(const Tensor& grad_h, const Tensor& grad_c,
                                  const LstmParams& p, const LstmCache& cache,
                                  LstmParams& grads);

// --- concat / flatten ------------------------------------------------------

Tensor concat_forward(const std::vector<const Tensor*>& parts);
std::vector<Tensor> concat_backward(const Tensor& grad_out,
                                    const std::vector<std::size_t>& sizes);
inline Tensor flatten(const Tensor& t) { return t.reshaped({t.numel()}); }

// --- initialization ---------------------------------------------------------

// Uniform(-sqrt(3/fan_in), +sqrt(3/fan_in)): variance 1/fan_in.
Tensor init_uniform(std::vector<std::size_t> shape, std::size_t fan_in, Rng& rng);
DenseParams init_dense(std::size_t in, std::size_t out, Rng& rng);
ConvParams init_conv(const ConvLayerSpec& spec, Rng& rng);
// LSTM weights fan-in scaled; forget-gate bias starts at +1.
LstmParams init_lstm(std::size_t input, std::size_t hidden, Rng& rng);

}  // namespace vinet
