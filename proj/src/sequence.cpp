#include "vinet/sequence.hpp"

#include <algorithm>

namespace vinet {

void SyncedSequence::validate() const {
  if (frame_times.size() != images.size() || frame_times.size() != gt_poses.size()) {
    throw ShapeError("SyncedSequence: frames, images and gt_poses must align");
  }
  for (std::size_t i = 1; i < frame_times.size(); ++i) {
    if (!(frame_times[i] > frame_times[i - 1])) {
      throw Error("SyncedSequence: frame timestamps must be strictly increasing");
    }
  }
  for (std::size_t i = 1; i < imu.size(); ++i) {
    if (!(imu[i].t > imu[i - 1].t)) {
      throw Error("SyncedSequence: IMU timestamps must be strictly increasing");
    }
  }
  if (!gt_poses.empty() && !gt_poses[0].isApprox(Pose(), 1e-12)) {
    throw Error("SyncedSequence: gt_poses[0] must be the identity");
  }
}

std::pair<std::size_t, std::size_t> imu_window(const SyncedSequence& seq,
                                               std::size_t step) {
  if (step == 0 || step >= seq.n_frames()) {
    throw Error("imu_window: step index out of range");
  }
  const double t0 = seq.frame_times[step - 1];
  const double t1 = seq.frame_times[step];
  auto lo = std::upper_bound(seq.imu.begin(), seq.imu.end(), t0,
                             [](double t, const ImuSample& s) { return t < s.t; });
  auto hi = std::upper_bound(seq.imu.begin(), seq.imu.end(), t1,
                             [](double t, const ImuSample& s) { return t < s.t; });
  return {static_cast<std::size_t>(lo - seq.imu.begin()),
          static_cast<std::size_t>(hi - seq.imu.begin())};
}

}  // namespace vinet
