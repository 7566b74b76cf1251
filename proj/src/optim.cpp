#include "vinet/optim.hpp"

#include <cmath>

namespace vinet {

namespace {

void require_finite_grad(const Tensor& g, std::size_t index) {
  for (std::size_t i = 0; i < g.numel(); ++i) {
    if (!std::isfinite(g[i])) {
      throw NumericError("optimizer: non-finite gradient in parameter #" +
                         std::to_string(index) + " at element " + std::to_string(i) +
                         " (value " + std::to_string(g[i]) + ")");
    }
  }
}

void require_match(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads) {
  if (params.size() != grads.size()) {
    throw ShapeError("optimizer: parameter/gradient count mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->same_shape(grads[i])) {
      throw ShapeError("optimizer: shape mismatch for parameter #" + std::to_string(i));
    }
  }
}

}  // namespace

void sgd_step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
              double learning_rate) {
  if (learning_rate <= 0.0) {
    throw ConfigError("sgd_step: learning rate must be positive");
  }
  require_match(params, grads);
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_finite_grad(grads[i], i);
    Tensor& w = *params[i];
    const Tensor& g = grads[i];
    for (std::size_t k = 0; k < w.numel(); ++k) {
      w[k] -= learning_rate * g[k];
    }
  }
}

void rmsprop_step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
                  OptimizerState& state) {
  if (state.learning_rate <= 0.0 || state.rms_decay <= 0.0 || state.rms_decay >= 1.0) {
    throw ConfigError("rmsprop_step: need lr > 0 and decay in (0,1)");
  }
  require_match(params, grads);
  if (state.mean_square.empty()) {
    state.mean_square.reserve(params.size());
    for (const Tensor* p : params) {
      state.mean_square.push_back(Tensor::zeros(p->shape()));
    }
  }
  if (state.mean_square.size() != params.size()) {
    throw ShapeError("rmsprop_step: optimizer state does not match parameter list");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_finite_grad(grads[i], i);
    Tensor& w = *params[i];
    Tensor& s = state.mean_square[i];
    const Tensor& g = grads[i];
    for (std::size_t k = 0; k < w.numel(); ++k) {
      s[k] = state.rms_decay * s[k] + (1.0 - state.rms_decay) * g[k] * g[k];
      w[k] -= state.learning_rate * g[k] / std::sqrt(s[k] + state.rms_eps);
    }
  }
}

double global_grad_norm(const std::vector<Tensor>& grads) {
  double sq = 0.0;
  for (const Tensor& g : grads) {
    for (std::size_t k = 0; k < g.numel(); ++k) {
      sq += g[k] * g[k];
    }
  }
  return std::sqrt(sq);
}

double clip_global_norm(std::vector<Tensor>& grads, double max_norm) {
  const double norm = global_grad_norm(grads);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (Tensor& g : grads) {
      for (std::size_t k = 0; k < g.numel(); ++k) {
        g[k] *= scale;
      }
    }
  }
  return norm;
}

}  // namespace vinet
