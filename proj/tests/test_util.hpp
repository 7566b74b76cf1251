#pragma once

// Shared helpers for the unit suites: deterministic random inputs and
// finite-difference oracles. Oracles here stay independent of the analytic
// backward passes they validate.

#include <algorithm>
#include <cmath>
#include <functional>

#include "vinet/lie_se3.hpp"
#include "vinet/rng.hpp"
#include "vinet/tensor.hpp"

namespace vinet::testutil {

inline Vec3 random_unit3(Rng& rng) {
  Vec3 v;
  do {
    v = rng.normal3();
  } while (v.norm() < 1e-6);
  return v.normalized();
}

inline Twist random_twist(Rng& rng, double max_angle = 3.0) {
  const Vec3 axis = random_unit3(rng);
  const double angle = rng.uniform(0.0, max_angle);
  return Twist(angle * axis, rng.normal3());
}

inline Pose random_pose(Rng& rng, double max_angle = 3.0) {
  return exp_se3(random_twist(rng, max_angle));
}

inline double rel_err(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  const double scale = std::max({got.cwiseAbs().maxCoeff(),
                                 want.cwiseAbs().maxCoeff(), 1e-10});
  return (got - want).cwiseAbs().maxCoeff() / scale;
}

inline double rel_err_scalar(double got, double want) {
  return std::abs(got - want) / std::max({std::abs(got), std::abs(want), 1e-10});
}

// Local-tangent displacement of pose b as seen from pose a.
inline Vec6 pose_delta(const Pose& a, const Pose& b) {
  return log_se3(compose(inverse(a), b)).vec();
}

// d/dh f(compose(T, exp(h*e_j))) at h = 0, central differences.
inline Vec6 fd_pose_grad(const std::function<double(const Pose&)>& f, const Pose& T,
                         double h = 1e-6) {
  Vec6 g;
  for (int j = 0; j < 6; ++j) {
    Vec6 e = Vec6::Zero();
    e[j] = h;
    const Pose tp = compose(T, exp_se3(Twist::from_vec(e)));
    const Pose tm = compose(T, exp_se3(Twist::from_vec(-e)));
    g[j] = (f(tp) - f(tm)) / (2.0 * h);
  }
  return g;
}

// Central-difference gradient of a scalar function of a flat double vector.
inline Eigen::VectorXd fd_grad(const std::function<double(const Eigen::VectorXd&)>& f,
                               const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (int j = 0; j < x.size(); ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    g[j] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// Central-difference gradient w.r.t. one tensor inside a scalar computation.
inline Tensor fd_tensor_grad(const std::function<double()>& f, Tensor& t,
                             double h = 1e-6) {
  Tensor g(t.shape());
  for (std::size_t j = 0; j < t.numel(); ++j) {
    const double keep = t[j];
    t[j] = keep + h;
    const double fp = f();
    t[j] = keep - h;
    const double fm = f();
    t[j] = keep;
    g[j] = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

inline double tensor_rel_err(const Tensor& got, const Tensor& want) {
  double scale = 1e-10;
  for (std::size_t i = 0; i < got.numel(); ++i) {
    scale = std::max({scale, std::abs(got[i]), std::abs(want[i])});
  }
  return max_abs_diff(got, want) / scale;
}

}  // namespace vinet::testutil
