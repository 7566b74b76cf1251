#pragma once

// Hand-built toy sequences for model/training tests (no simulator involved).

#include "test_util.hpp"
#include "vinet/model.hpp"
#include "vinet/sequence.hpp"

namespace vinet::testutil {

inline Tensor random_image(std::size_t channels, std::size_t h, std::size_t w,
                           Rng& rng) {
  Tensor img({channels, h, w});
  for (std::size_t i = 0; i < img.numel(); ++i) {
    img[i] = rng.uniform(-0.5, 0.5);
  }
  return img;
}

// n_frames frames at 10 Hz with a 10x IMU stream and small random motion.
inline SyncedSequence toy_sequence(const ModelConfig& cfg, std::size_t n_frames,
                                   std::uint64_t seed) {
  Rng rng(seed);
  SyncedSequence seq;
  seq.cam_rate_hz = 10.0;
  seq.imu_rate_hz = 100.0;
  Pose pose;
  for (std::size_t k = 0; k < n_frames; ++k) {
    seq.frame_times.push_back(0.1 * static_cast<double>(k));
    seq.images.push_back(
        random_image(cfg.image_channels, cfg.image_height, cfg.image_width, rng));
    if (k > 0) {
      const Twist step(0.05 * rng.normal3(), 0.1 * rng.normal3());
      pose = compose(pose, exp_se3(step));
    }
    seq.gt_poses.push_back(pose);
  }
  const double end = seq.frame_times.back();
  for (int j = 1; j * 0.01 <= end + 1e-9; ++j) {
    ImuSample s;
    s.t = 0.01 * j;
    s.a = rng.normal3();
    s.w = 0.3 * rng.normal3();
    seq.imu.push_back(s);
  }
  seq.validate();
  return seq;
}

inline ModelConfig tiny_model_config() {
  ModelConfig cfg;
  cfg.image_width = 8;
  cfg.image_height = 8;
  cfg.image_channels = 1;
  cfg.cnn = {{2, 3, 2}};
  cfg.imu_hidden = 3;
  cfg.core_hidden = 4;
  cfg.core_layers = 2;
  return cfg;
}

}  // namespace vinet::testutil
