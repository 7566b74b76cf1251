#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "vinet/lie_se3.hpp"
#include "vinet/tensor.hpp"

namespace vinet {

// One inertial measurement: specific force a (m/s^2), angular rate w (rad/s).
struct ImuSample {
  Vec3 a = Vec3::Zero();
  Vec3 w = Vec3::Zero();
  double t = 0.0;
};

// A single world landmark as seen by the renderer.
struct Landmark {
  Vec3 position = Vec3::Zero();
  double brightness = 1.0;
};

// Everything needed to re-render the camera observations of a sequence
// (e.g. after an extrinsic perturbation).
struct RenderContext {
  std::vector<Landmark> landmarks;
  double focal_px = 64.0;
  double splat_sigma_px = 1.0;
  double pixel_noise_sigma = 0.0;
  std::uint64_t noise_seed = 0;
};

// Time-indexed camera frames plus IMU stream with ground truth.
// Invariants: frame timestamps strictly increasing, imu sorted by t,
// gt_poses[0] = identity, one image and one ground-truth pose per frame.
struct SyncedSequence {
  std::vector<double> frame_times;
  std::vector<Tensor> images;   // [channels, height, width], values in [-0.5, 0.5]
  std::vector<ImuSample> imu;
  std::vector<Pose> gt_poses;   // world-from-body at each frame time

  Mat3 R_SC = Mat3::Identity();  // camera-from-IMU rotation
  double time_offset = 0.0;      // shift applied to the IMU clock

  double cam_rate_hz = 10.0;
  double imu_rate_hz = 100.0;
  Vec3 gravity = Vec3(0, 0, -9.81);

  RenderContext render;

  std::size_t n_frames() const { return frame_times.size(); }
  // Prediction steps pair consecutive frames: step k covers frame k-1 -> k.
  std::size_t n_steps() const {
    return frame_times.empty() ? 0 : frame_times.size() - 1;
  }

  void validate() const;
};

// Half-open IMU index window (first, last) covering t in (t_{k-1}, t_k] for
// step k; empty windows are legal (e.g. after a clock shift).
std::pair<std::size_t, std::size_t> imu_window(const SyncedSequence& seq,
                                               std::size_t step);

}  // namespace vinet
