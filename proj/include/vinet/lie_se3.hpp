#pragma once

// SO(3)/SE(3)/se(3) math with analytic backward passes.
//
// Conventions:
//  - a twist is (omega, v), omega first; 6-vectors follow the same order
//  - rotations are stored as unit quaternions with w >= 0
//  - pose gradients live in the local (right) tangent: a perturbed pose is
//    T * exp_se3(delta), and grad[i] = dL/d(delta[i]) at delta = 0
//
// Closed forms follow the standard treatments (E. Eade, "Lie Groups for
// Computer Vision"; Barfoot, "State Estimation for Robotics").

#include <utility>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "vinet/errors.hpp"

namespace vinet {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec7 = Eigen::Matrix<double, 7, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Quat = Eigen::Quaterniond;

// Rotation angle below which exp/log/left-Jacobian switch to Taylor series.
inline constexpr double kSmallAngle = 1e-5;
// Margin around pi where the principal-branch log is refused.
inline constexpr double kAnglePiMargin = 1e-6;

// se(3) element: rotational part omega (radians, |omega| < pi) and
// translational part v (meters).
struct Twist {
  Vec3 omega = Vec3::Zero();
  Vec3 v = Vec3::Zero();

  Twist() = default;
  Twist(const Vec3& omega_in, const Vec3& v_in);

  Vec6 vec() const {
    Vec6 x;
    x << omega, v;
    return x;
  }
  static Twist from_vec(const Vec6& x) { return Twist(x.head<3>(), x.tail<3>()); }
};

// SE(3) element as unit quaternion (w >= 0) plus translation.
class Pose {
 public:
  Pose() : q_(1, 0, 0, 0), t_(Vec3::Zero()) {}
  Pose(const Quat& q, const Vec3& t);

  const Quat& q() const { return q_; }
  const Vec3& t() const { return t_; }
  Mat3 rotation() const { return q_.toRotationMatrix(); }

  // (qw, qx, qy, qz, tx, ty, tz) -- the network's pose feedback layout.
  Vec7 as7() const {
    Vec7 x;
    x << q_.w(), q_.x(), q_.y(), q_.z(), t_;
    return x;
  }

  bool isApprox(const Pose& other, double tol = 1e-12) const {
    return (q_.coeffs() - other.q_.coeffs()).norm() <= tol &&
           (t_ - other.t_).norm() <= tol;
  }

 private:
  Quat q_;
  Vec3 t_;
};

// --- so(3) ---
Mat3 hat(const Vec3& w);
Vec3 vee(const Mat3& m);
Mat3 exp_so3(const Vec3& omega);
Vec3 log_so3(const Mat3& R);  // throws AngleNearPiError near pi
Quat quat_exp_so3(const Vec3& omega);
Vec3 quat_log_so3(const Quat& q);  // throws AngleNearPiError near pi
Mat3 so3_left_jacobian(const Vec3& omega);
Mat3 so3_left_jacobian_inv(const Vec3& omega);
bool is_rotation_matrix(const Mat3& m, double tol = 1e-9);
// Geodesic angle between two rotations, in radians.
double rotation_geodesic(const Mat3& a, const Mat3& b);

// --- SE(3) ---
Pose exp_se3(const Twist& xi);
Twist log_se3(const Pose& T);
Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& T);

// Adjoint in (omega, v) ordering: exp(adjoint(T) * d) = T * exp(d) * T^-1.
Mat6 adjoint(const Pose& T);

// Right Jacobian of the SE(3) exponential:
// exp(xi + d) = exp(xi) * exp(se3_right_jacobian(xi) * d) + O(|d|^2).
Mat6 se3_right_jacobian(const Twist& xi);

// --- backward passes (grad_out in the local tangent of the op's output) ---
Vec6 exp_se3_backward(const Twist& xi, const Vec6& grad_out);
std::pair<Vec6, Vec6> compose_backward(const Pose& a, const Pose& b,
                                       const Vec6& grad_out);
// Backward through reading a Pose out as (q, t) components, e.g. for a loss
// on the quaternion/translation. dq is ordered (w, x, y, z).
Vec6 pose_components_backward(const Pose& T, const Vec4& dq, const Vec3& dt);

}  // namespace vinet
