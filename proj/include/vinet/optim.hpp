#pragma once

#include <string>
#include <vector>

#include "vinet/tensor.hpp"

namespace vinet {

// State for the RMSProp-scaled SGD update:
//   s <- decay*s + (1-decay)*g^2
//   w <- w - lr * g / sqrt(s + eps)
struct OptimizerState {
  double learning_rate = 1e-3;
  double rms_decay = 0.9;
  double rms_eps = 1e-8;
  std::vector<Tensor> mean_square;  // one accumulator per parameter

  void reset() { mean_square.clear(); }
};

// Plain w <- w - lr*g. Throws NumericError on a non-finite gradient.
void sgd_step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
              double learning_rate);

void rmsprop_step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
                  OptimizerState& state);

double global_grad_norm(const std::vector<Tensor>& grads);

// Scales all gradients so the global L2 norm is at most max_norm.
// Returns the pre-clip norm.
double clip_global_norm(std::vector<Tensor>& grads, double max_norm);

}  // namespace vinet
