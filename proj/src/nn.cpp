#include "vinet/nn.hpp"

#include <cmath>

#include <Eigen/Core>

namespace vinet {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatView = Eigen::Map<const RowMat>;
using MatViewMut = Eigen::Map<RowMat>;
using VecView = Eigen::Map<const Eigen::VectorXd>;
using VecViewMut = Eigen::Map<Eigen::VectorXd>;

MatView mat(const Tensor& t) { return MatView(t.data(), t.extent(0), t.extent(1)); }
VecView vec(const Tensor& t) { return VecView(t.data(), t.numel()); }
VecViewMut vec_mut(Tensor& t) { return VecViewMut(t.data(), t.numel()); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// y += W x + (peephole) wc.c + b, evaluated as a gate preactivation
Eigen::VectorXd gate_preact(const Tensor& Wx, const Tensor& Wh, const Tensor* wc,
                            const Tensor& b, const Tensor& x, const Tensor& h,
                            const Tensor& c) {
  Eigen::VectorXd a = mat(Wx) * vec(x) + mat(Wh) * vec(h) + vec(b);
  if (wc != nullptr) {
    a.array() += vec(*wc).array() * vec(c).array();
  }
  return a;
}

}  // namespace

double apply_activation(Activation act, double x) {
  switch (act) {
    case Activation::Identity:
      return x;
    case Activation::LeakyRelu:
      return x >= 0.0 ? x : kLeakySlope * x;
  }
  return x;
}

double activation_grad(Activation act, double x) {
  switch (act) {
    case Activation::Identity:
      return 1.0;
    case Activation::LeakyRelu:
      return x >= 0.0 ? 1.0 : kLeakySlope;
  }
  return 1.0;
}

// --- dense -------------------------------------------------------------

Tensor dense_forward(const Tensor& x, const DenseParams& p, DenseCache* cache) {
  const std::size_t in = p.W.extent(1);
  const std::size_t out = p.W.extent(0);
  require_shape(x, {in}, "dense_forward input");
  Tensor y({out});
  vec_mut(y) = mat(p.W) * vec(x) + vec(p.b);
  if (cache != nullptr) cache->x = x;
  check_finite(y, "dense_forward");
  return y;
}

Tensor dense_backward(const Tensor& grad_out, const DenseParams& p,
                      const DenseCache& cache, DenseParams& grads) {
  const std::size_t in = p.W.extent(1);
  const std::size_t out = p.W.extent(0);
  require_shape(grad_out, {out}, "dense_backward grad");
  Tensor gx({in});
  vec_mut(gx) = mat(p.W).transpose() * vec(grad_out);
  MatViewMut gW(grads.W.data(), out, in);
  gW.noalias() += vec(grad_out) * vec(cache.x).transpose();
  vec_mut(grads.b) += vec(grad_out);
  return gx;
}

// --- conv2d -------------------------------------------------------------

void ConvLayerSpec::validate() const {
  if (kh < 1 || kw < 1 || stride < 1 || in_maps < 1 || out_maps < 1) {
    throw ShapeError("ConvLayerSpec: extents and stride must be >= 1");
  }
}

Tensor conv2d_forward(const Tensor& input, const ConvLayerSpec& spec,
                      const ConvParams& p, ConvCache* cache) {
  spec.validate();
  if (input.ndim() != 3 || input.extent(0) != spec.in_maps) {
    throw ShapeError("conv2d_forward: input must be [in_maps, h, w]");
  }
  const std::size_t h = input.extent(1);
  const std::size_t w = input.extent(2);
  if (h < spec.kh || w < spec.kw) {
    throw ShapeError("conv2d_forward: image smaller than kernel");
  }
  const std::size_t oh = spec.out_h(h);
  const std::size_t ow = spec.out_w(w);
  Tensor pre({spec.out_maps, oh, ow});
  for (std::size_t f = 0; f < spec.out_maps; ++f) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        double acc = p.b[f];
        for (std::size_t m = 0; m < spec.in_maps; ++m) {
          for (std::size_t q = 0; q < spec.kh; ++q) {
            const double* in_row = &input.data()[(m * h + y * spec.stride + q) * w +
                                                 x * spec.stride];
            const double* w_row = &p.w.data()[((f * spec.in_maps + m) * spec.kh + q) *
                                              spec.kw];
            for (std::size_t r = 0; r < spec.kw; ++r) {
              acc += w_row[r] * in_row[r];
            }
          }
        }
        pre.at(f, y, x) = acc;
      }
    }
  }
  Tensor outp({spec.out_maps, oh, ow});
  for (std::size_t i = 0; i < pre.numel(); ++i) {
    outp[i] = apply_activation(spec.act, pre[i]);
  }
  if (cache != nullptr) {
    cache->input = input;
    cache->preact = pre;
  }
  check_finite(outp, "conv2d_forward");
  return outp;
}

Tensor conv2d_backward(const Tensor& grad_out, const ConvLayerSpec& spec,
                       const ConvParams& p, const ConvCache& cache,
                       ConvParams& grads) {
  const Tensor& input = cache.input;
  const std::size_t h = input.extent(1);
  const std::size_t w = input.extent(2);
  const std::size_t oh = spec.out_h(h);
  const std::size_t ow = spec.out_w(w);
  require_shape(grad_out, {spec.out_maps, oh, ow}, "conv2d_backward grad");
  Tensor gin({spec.in_maps, h, w});
  for (std::size_t f = 0; f < spec.out_maps; ++f) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        const double g =
            grad_out.at(f, y, x) * activation_grad(spec.act, cache.preact.at(f, y, x));
        if (g == 0.0) continue;
        grads.b[f] += g;
        for (std::size_t m = 0; m < spec.in_maps; ++m) {
          for (std::size_t q = 0; q < spec.kh; ++q) {
            const double* in_row = &input.data()[(m * h + y * spec.stride + q) * w +
                                                 x * spec.stride];
            double* gin_row = &gin.data()[(m * h + y * spec.stride + q) * w +
                                          x * spec.stride];
            const std::size_t wbase = ((f * spec.in_maps + m) * spec.kh + q) * spec.kw;
            for (std::size_t r = 0; r < spec.kw; ++r) {
              grads.w[wbase + r] += g * in_row[r];
              gin_row[r] += g * p.w[wbase + r];
            }
          }
        }
      }
    }
  }
  return gin;
}

// --- LSTM -------------------------------------------------------------

LstmState lstm_cell_forward(const Tensor& x, const LstmState& prev,
                            const LstmParams& p, LstmCache* cache) {
  const std::size_t hs = p.hidden_size();
  require_shape(x, {p.input_size()}, "lstm x");
  require_shape(prev.h, {hs}, "lstm h_prev");
  require_shape(prev.c, {hs}, "lstm c_prev");

  const Eigen::VectorXd ai = gate_preact(p.W_xi, p.W_hi, &p.w_ci, p.b_i, x, prev.h, prev.c);
  const Eigen::VectorXd af = gate_preact(p.W_xf, p.W_hf, &p.w_cf, p.b_f, x, prev.h, prev.c);
  const Eigen::VectorXd az = gate_preact(p.W_xc, p.W_hc, nullptr, p.b_c, x, prev.h, prev.c);

  LstmState out(hs);
  Tensor i({hs}), f({hs}), z({hs}), o({hs}), tc({hs});
  for (std::size_t k = 0; k < hs; ++k) {
    i[k] = sigmoid(ai[k]);
    f[k] = sigmoid(af[k]);
    z[k] = std::tanh(az[k]);
    out.c[k] = f[k] * prev.c[k] + i[k] * z[k];
  }
  const Eigen::VectorXd ao = gate_preact(p.W_xo, p.W_ho, &p.w_co, p.b_o, x, prev.h, out.c);
  for (std::size_t k = 0; k < hs; ++k) {
    o[k] = sigmoid(ao[k]);
    tc[k] = std::tanh(out.c[k]);
    out.h[k] = o[k] * tc[k];
  }
  if (cache != nullptr) {
    cache->x = x;
    cache->h_prev = prev.h;
    cache->c_prev = prev.c;
    cache->i = i;
    cache->f = f;
    cache->z = z;
    cache->c = out.c;
    cache->o = o;
    cache->tanh_c = tc;
  }
  check_finite(out.h, "lstm_cell_forward");
  return out;
}

LstmStateGrads lstm_cell_backward(const Tensor& grad_h, const Tensor& grad_c,
                                  const LstmParams& p, const LstmCache& cache,
                                  LstmParams& grads) {
  const std::size_t hs = p.hidden_size();
  const std::size_t is = p.input_size();
  require_shape(grad_h, {hs}, "lstm grad_h");
  require_shape(grad_c, {hs}, "lstm grad_c");

  Eigen::VectorXd da_i(hs), da_f(hs), da_z(hs), da_o(hs), dc(hs);
  for (std::size_t k = 0; k < hs; ++k) {
    const double o = cache.o[k];
    const double tc = cache.tanh_c[k];
    const double d_o = grad_h[k] * tc;
    da_o[k] = d_o * o * (1.0 - o);
    // c receives: direct grad, h-path through tanh, and the o-gate peephole.
    dc[k] = grad_c[k] + grad_h[k] * o * (1.0 - tc * tc) + da_o[k] * p.w_co[k];
    const double i = cache.i[k];
    const double f = cache.f[k];
    const double z = cache.z[k];
    da_i[k] = dc[k] * z * i * (1.0 - i);
    da_f[k] = dc[k] * cache.c_prev[k] * f * (1.0 - f);
    da_z[k] = dc[k] * i * (1.0 - z * z);
  }

  LstmStateGrads out;
  out.dx = Tensor({is});
  out.dh_prev = Tensor({hs});
  out.dc_prev = Tensor({hs});

  auto accum = [&](const Tensor& Wx, const Tensor& Wh, Tensor& gWx, Tensor& gWh,
                   Tensor& gb, const Eigen::VectorXd& da) {
    VecViewMut(out.dx.data(), is) += MatView(Wx.data(), hs, is).transpose() * da;
    VecViewMut(out.dh_prev.data(), hs) += MatView(Wh.data(), hs, hs).transpose() * da;
    MatViewMut(gWx.data(), hs, is).noalias() +=
        da * VecView(cache.x.data(), is).transpose();
    MatViewMut(gWh.data(), hs, hs).noalias() +=
        da * VecView(cache.h_prev.data(), hs).transpose();
    VecViewMut(gb.data(), hs) += da;
  };
  accum(p.W_xi, p.W_hi, grads.W_xi, grads.W_hi, grads.b_i, da_i);
  accum(p.W_xf, p.W_hf, grads.W_xf, grads.W_hf, grads.b_f, da_f);
  accum(p.W_xc, p.W_hc, grads.W_xc, grads.W_hc, grads.b_c, da_z);
  accum(p.W_xo, p.W_ho, grads.W_xo, grads.W_ho, grads.b_o, da_o);

  for (std::size_t k = 0; k < hs; ++k) {
    grads.w_ci[k] += da_i[k] * cache.c_prev[k];
    grads.w_cf[k] += da_f[k] * cache.c_prev[k];
    grads.w_co[k] += da_o[k] * cache.c[k];
    out.dc_prev[k] = dc[k] * cache.f[k] + da_i[k] * p.w_ci[k] + da_f[k] * p.w_cf[k];
  }
  return out;
}

// --- concat -------------------------------------------------------------

Tensor concat_forward(const std::vector<const Tensor*>& parts) {
  std::size_t total = 0;
  for (const Tensor* p : parts) total += p->numel();
  Tensor out({total});
  std::size_t off = 0;
  for (const Tensor* p : parts) {
    for (std::size_t i = 0; i < p->numel(); ++i) out[off + i] = (*p)[i];
    off += p->numel();
  }
  return out;
}

std::vector<Tensor> concat_backward(const Tensor& grad_out,
                                    const std::vector<std::size_t>& sizes) {
  std::size_t total = 0;
  for (std::size_t s : sizes) total += s;
  require_shape(grad_out, {total}, "concat_backward grad");
  std::vector<Tensor> grads;
  grads.reserve(sizes.size());
  std::size_t off = 0;
  for (std::size_t s : sizes) {
    Tensor g({s});
    for (std::size_t i = 0; i < s; ++i) g[i] = grad_out[off + i];
    grads.push_back(std::move(g));
    off += s;
  }
  return grads;
}

// --- init -------------------------------------------------------------

Tensor init_uniform(std::vector<std::size_t> shape, std::size_t fan_in, Rng& rng) {
  Tensor t(std::move(shape));
  const double bound = std::sqrt(3.0 / static_cast<double>(fan_in));
  for (std::size_t i = 0; i < t.numel(); ++i) {
    t[i] = rng.uniform(-bound, bound);
  }
  return t;
}

DenseParams init_dense(std::size_t in, std::size_t out, Rng& rng) {
  DenseParams p;
  p.W = init_uniform({out, in}, in, rng);
  p.b = Tensor::zeros({out});
  return p;
}

ConvParams init_conv(const ConvLayerSpec& spec, Rng& rng) {
  ConvParams p;
  p.w = init_uniform({spec.out_maps, spec.in_maps, spec.kh, spec.kw},
                     spec.in_maps * spec.kh * spec.kw, rng);
  p.b = Tensor::zeros({spec.out_maps});
  return p;
}

LstmParams init_lstm(std::size_t input, std::size_t hidden, Rng& rng) {
  LstmParams p;
  p.W_xi = init_uniform({hidden, input}, input, rng);
  p.W_hi = init_uniform({hidden, hidden}, hidden, rng);
  p.w_ci = init_uniform({hidden}, hidden, rng);
  p.b_i = Tensor::zeros({hidden});
  p.W_xf = init_uniform({hidden, input}, input, rng);
  p.W_hf = init_uniform({hidden, hidden}, hidden, rng);
  p.w_cf = init_uniform({hidden}, hidden, rng);
  p.b_f = Tensor::full({hidden}, 1.0);
  p.W_xc = init_uniform({hidden, input}, input, rng);
  p.W_hc = init_uniform({hidden, hidden}, hidden, rng);
  p.b_c = Tensor::zeros({hidden});
  p.W_xo = init_uniform({hidden, input}, input, rng);
  p.W_ho = init_uniform({hidden, hidden}, hidden, rng);
  p.w_co = init_uniform({hidden}, hidden, rng);
  p.b_o = Tensor::zeros({hidden});
  return p;
}

}  // namespace vinet
