#pragma once

// The VINet computation graph: CNN on consecutive frame pairs, an IMU LSTM
// running at the IMU rate, a stacked core LSTM at camera rate with the
// accumulated pose fed back in, a twist head, and on-manifold pose
// accumulation through a parameter-free composition step.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vinet/lie_se3.hpp"
#include "vinet/nn.hpp"
#include "vinet/sequence.hpp"
#include "vinet/tensor.hpp"

namespace vinet {

struct ConvStage {
  std::size_t out_maps = 8;
  std::size_t kernel = 3;
  std::size_t stride = 2;

  bool operator==(const ConvStage&) const = default;
};

struct ModelConfig {
  std::size_t image_width = 64;
  std::size_t image_height = 64;
  std::size_t image_channels = 1;
  std::vector<ConvStage> cnn = {{8, 3, 2}, {16, 3, 2}, {32, 3, 2}, {64, 3, 2}};
  std::size_t imu_hidden = 32;
  std::size_t core_hidden = 128;
  std::size_t core_layers = 2;
  std::size_t imu_input = 6;
  std::size_t rate_ratio = 10;  // nominal IMU samples per frame
  // Per-axis tanh bound on the rotational head. pi/sqrt(3) keeps the
  // twist norm strictly inside the exp principal branch.
  double omega_max = 1.8137993642342178;  // pi / sqrt(3)

  void validate() const;
  std::vector<ConvLayerSpec> conv_specs() const;
  std::size_t visual_feature_size() const;
  std::size_t core_input_size() const {
    return visual_feature_size() + imu_hidden + 7;
  }

  bool operator==(const ModelConfig&) const = default;
};

// One frame-to-frame prediction: the twist and the pose accumulated from the
// sequence start. pose = compose(previous pose, exp_se3(xi)) exactly.
struct StepOutput {
  Twist xi;
  Pose pose;
};

// Carried recurrent state: IMU LSTM, core LSTM stack, accumulated pose.
struct RunState {
  LstmState imu;
  std::vector<LstmState> core;
  Pose pose;
};

struct VisualCache {
  std::vector<ConvCache> conv;
};

struct StepCache {
  VisualCache visual;
  std::vector<LstmCache> imu;   // one per IMU sample in the window
  std::vector<LstmCache> core;  // one per core layer
  DenseCache head;
  Tensor head_raw;              // 6 head preactivations
  Twist xi;
  Pose prev_pose;
  Pose step_pose;               // exp_se3(xi)
  Pose pose;
};

struct SequenceCache {
  std::vector<StepCache> steps;
};

struct PoseGrad {
  Vec4 dq = Vec4::Zero();
  Vec3 dt = Vec3::Zero();
};

// Loss seeds for a cached window. Either vector may be empty (treated as
// zeros); otherwise it must have one entry per cached step.
struct StepSeeds {
  std::vector<Vec6> d_xi;        // dL/d(twist) per step
  std::vector<PoseGrad> d_pose;  // dL/d(q, t) of the accumulated pose per step
};

class VinetModel {
 public:
  VinetModel(ModelConfig cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  RunState initial_state() const;

  // CNN branch on a normalized frame pair (prev and curr stacked channel-wise).
  Tensor visual_forward(const Tensor& prev_img, const Tensor& curr_img,
                        VisualCache* cache = nullptr) const;

  // Runs the IMU LSTM over one inter-frame window. An empty window passes the
  // carried state through unchanged and returns its hidden vector.
  Tensor imu_window_forward(std::span<const ImuSample> samples, LstmState& state,
                            std::vector<LstmCache>* caches = nullptr) const;

  // Fuses features with the fed-back pose (detached), advances the core LSTM,
  // reads out a twist and composes the accumulated pose.
  StepOutput core_step(const Tensor& visual_feat, const Tensor& imu_feat,
                       const Pose& prev_pose, std::vector<LstmState>& core_state,
                       StepCache* cache = nullptr) const;

  // Runs steps [first_step, first_step + count) of the sequence, carrying
  // `state` across calls. Chunked evaluation with carried state is bitwise
  // identical to one unbroken run.
  std::vector<StepOutput> forward_steps(const SyncedSequence& seq,
                                        std::size_t first_step, std::size_t count,
                                        RunState& state,
                                        SequenceCache* cache = nullptr) const;
  std::vector<StepOutput> sequence_forward(const SyncedSequence& seq, RunState& state,
                                           SequenceCache* cache = nullptr) const;

  // BPTT over a cached window; accumulates into the parameter grad buffers.
  // Carried-in states are treated as constants.
  void backward(const SequenceCache& cache, const StepSeeds& seeds);

  struct ParamRef {
    std::string name;
    std::size_t group;  // depth index used for the se(3)-loss layer boundary
    Tensor* value;
    Tensor* grad;
  };
  std::vector<ParamRef> param_refs();
  std::vector<Tensor*> param_values();
  std::vector<Tensor> grads_snapshot();
  void zero_grads();
  std::size_t n_groups() const { return cfg_.cnn.size() + cfg_.core_layers + 2; }
  std::size_t n_parameters();

  // instrumentation: total IMU-LSTM cell evaluations
  mutable std::uint64_t imu_step_count = 0;

 private:
  ModelConfig cfg_;
  std::vector<ConvLayerSpec> conv_specs_;
  std::vector<ConvParams> cnn_, cnn_grads_;
  LstmParams imu_, imu_grads_;
  std::vector<LstmParams> core_, core_grads_;
  DenseParams head_, head_grads_;
};

}  // namespace vinet
