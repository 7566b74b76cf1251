#include "vinet/lie_se3.hpp"

#include <cmath>

namespace vinet {

namespace {

bool finite3(const Vec3& v) {
  return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

// Barfoot-style Q block of the SE(3) left Jacobian (translation response to
// rotational perturbation). Series branch kicks in early: the closed-form
// coefficients cancel catastrophically below theta ~ 1e-2.
Mat3 se3_jacobian_q(const Vec3& omega, const Vec3& v) {
  const double th = omega.norm();
  const Mat3 W = hat(omega);
  const Mat3 V = hat(v);
  double c1, c2, c3;
  if (th < 1e-2) {
    const double th2 = th * th;
    const double th4 = th2 * th2;
    c1 = 1.0 / 6.0 - th2 / 120.0 + th4 / 5040.0;
    c2 = 1.0 / 24.0 - th2 / 720.0 + th4 / 40320.0;
    c3 = 1.0 / 120.0 - th2 / 2520.0 + th4 / 120960.0;
  } else {
    const double th2 = th * th;
    c1 = (th - std::sin(th)) / (th2 * th);
    c2 = (th2 + 2.0 * std::cos(th) - 2.0) / (2.0 * th2 * th2);
    c3 = (2.0 * th - 3.0 * std::sin(th) + th * std::cos(th)) / (2.0 * th2 * th2 * th);
  }
  const Mat3 WV = W * V;
  const Mat3 VW = V * W;
  const Mat3 WVW = WV * W;
  return 0.5 * V + c1 * (WV + VW + WVW) +
         c2 * (W * WV + VW * W - 3.0 * WVW) + c3 * (WVW * W + W * WVW);
}

}  // namespace

Twist::Twist(const Vec3& omega_in, const Vec3& v_in) : omega(omega_in), v(v_in) {
  if (!finite3(omega) || !finite3(v)) {
    throw NumericError("Twist: non-finite component");
  }
  if (omega.norm() >= M_PI) {
    throw Error("Twist: |omega| must be < pi (principal branch)");
  }
}

Pose::Pose(const Quat& q, const Vec3& t) : q_(q.normalized()), t_(t) {
  if (!q_.coeffs().allFinite() || !finite3(t_)) {
    throw NumericError("Pose: non-finite component");
  }
  if (q_.w() < 0.0) {
    q_.coeffs() = -q_.coeffs();
  }
}

Mat3 hat(const Vec3& w) {
  Mat3 m;
  m << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return m;
}

Vec3 vee(const Mat3& m) { return Vec3(m(2, 1), m(0, 2), m(1, 0)); }

Mat3 exp_so3(const Vec3& omega) {
  if (!finite3(omega)) {
    throw NumericError("exp_so3: non-finite input");
  }
  const double th = omega.norm();
  const Mat3 W = hat(omega);
  double a, b;  // R = I + a*W + b*W^2
  if (th < kSmallAngle) {
    const double th2 = th * th;
    a = 1.0 - th2 / 6.0;
    b = 0.5 - th2 / 24.0;
  } else {
    a = std::sin(th) / th;
    b = (1.0 - std::cos(th)) / (th * th);
  }
  return Mat3::Identity() + a * W + b * (W * W);
}

Quat quat_exp_so3(const Vec3& omega) {
  if (!finite3(omega)) {
    throw NumericError("quat_exp_so3: non-finite input");
  }
  const double th = omega.norm();
  double s;  // sin(th/2)/th
  if (th < kSmallAngle) {
    s = 0.5 - th * th / 48.0;
  } else {
    s = std::sin(0.5 * th) / th;
  }
  Quat q(std::cos(0.5 * th), s * omega.x(), s * omega.y(), s * omega.z());
  if (q.w() < 0.0) {
    q.coeffs() = -q.coeffs();
  }
  return q;
}

Vec3 quat_log_so3(const Quat& q_in) {
  Quat q = q_in.normalized();
  if (q.w() < 0.0) {
    q.coeffs() = -q.coeffs();
  }
  const double s = q.vec().norm();
  const double th = 2.0 * std::atan2(s, q.w());
  if (th > M_PI - kAnglePiMargin) {
    throw AngleNearPiError("log: rotation angle within margin of pi");
  }
  double scale;  // omega = scale * q.vec()
  if (s < kSmallAngle) {
    const double w = q.w();
    scale = 2.0 / w * (1.0 - s * s / (3.0 * w * w));
  } else {
    scale = th / s;
  }
  return scale * q.vec();
}

bool is_rotation_matrix(const Mat3& m, double tol) {
  if (!m.allFinite()) return false;
  const Mat3 should_be_identity = m.transpose() * m;
  if ((should_be_identity - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(m.determinant() - 1.0) <= tol;
}

Vec3 log_so3(const Mat3& R) {
  if (!is_rotation_matrix(R)) {
    throw Error("log_so3: input is not a rotation matrix");
  }
  // Quaternion route: atan2-based angle is well conditioned near 0 and pi,
  // unlike acos of the trace.
  return quat_log_so3(Quat(R));
}

double rotation_geodesic(const Mat3& a, const Mat3& b) {
  const Quat qa(a);
  const Quat qb(b);
  Quat d = qa.conjugate() * qb;
  if (d.w() < 0.0) {
    d.coeffs() = -d.coeffs();
  }
  return 2.0 * std::atan2(d.vec().norm(), d.w());
}

Mat3 so3_left_jacobian(const Vec3& omega) {
  const double th = omega.norm();
  const Mat3 W = hat(omega);
  double b, c;  // V = I + b*W + c*W^2
  if (th < kSmallAngle) {
    const double th2 = th * th;
    b = 0.5 - th2 / 24.0;
    c = 1.0 / 6.0 - th2 / 120.0;
  } else {
    const double th2 = th * th;
    b = (1.0 - std::cos(th)) / th2;
    c = (th - std::sin(th)) / (th2 * th);
  }
  return Mat3::Identity() + b * W + c * (W * W);
}

Mat3 so3_left_jacobian_inv(const Vec3& omega) {
  const double th = omega.norm();
  const Mat3 W = hat(omega);
  double d;  // V^-1 = I - W/2 + d*W^2
  if (th < kSmallAngle) {
    d = 1.0 / 12.0 + th * th / 720.0;
  } else {
    d = 1.0 / (th * th) - (1.0 + std::cos(th)) / (2.0 * th * std::sin(th));
  }
  return Mat3::Identity() - 0.5 * W + d * (W * W);
}

Pose exp_se3(const Twist& xi) {
  return Pose(quat_exp_so3(xi.omega), so3_left_jacobian(xi.omega) * xi.v);
}

Twist log_se3(const Pose& T) {
  const Vec3 omega = quat_log_so3(T.q());
  return Twist(omega, so3_left_jacobian_inv(omega) * T.t());
}

Pose compose(const Pose& a, const Pose& b) {
  return Pose(a.q() * b.q(), a.t() + a.q() * b.t());
}

Pose inverse(const Pose& T) {
  const Quat qi = T.q().conjugate();
  return Pose(qi, -(qi * T.t()));
}

Mat6 adjoint(const Pose& T) {
  const Mat3 R = T.rotation();
  Mat6 adj = Mat6::Zero();
  adj.topLeftCorner<3, 3>() = R;
  adj.bottomRightCorner<3, 3>() = R;
  adj.bottomLeftCorner<3, 3>() = hat(T.t()) * R;
  return adj;
}

Mat6 se3_right_jacobian(const Twist& xi) {
  // J_r(xi) = J_l(-xi)
  const Vec3 nw = -xi.omega;
  const Vec3 nv = -xi.v;
  const Mat3 j = so3_left_jacobian(nw);
  Mat6 J = Mat6::Zero();
  J.topLeftCorner<3, 3>() = j;
  J.bottomRightCorner<3, 3>() = j;
  J.bottomLeftCorner<3, 3>() = se3_jacobian_q(nw, nv);
  return J;
}

Vec6 exp_se3_backward(const Twist& xi, const Vec6& grad_out) {
  return se3_right_jacobian(xi).transpose() * grad_out;
}

std::pair<Vec6, Vec6> compose_backward(const Pose& /*a*/, const Pose& b,
                                       const Vec6& grad_out) {
  // c = a*b. Right-perturbing b perturbs c identically; right-perturbing a
  // reaches c through conjugation by b.
  const Vec6 grad_a = adjoint(inverse(b)).transpose() * grad_out;
  return {grad_a, grad_out};
}

Vec6 pose_components_backward(const Pose& T, const Vec4& dq, const Vec3& dt) {
  const Quat& q = T.q();
  Vec6 g;
  // d(q * exp([0, e_j/2]))/d(delta_omega_j) = 0.5 * q * (0, e_j)
  for (int j = 0; j < 3; ++j) {
    Vec3 e = Vec3::Zero();
    e[j] = 1.0;
    const Quat dqj(-q.vec().dot(e), 0, 0, 0);
    const Vec3 vpart = q.w() * e + q.vec().cross(e);
    g[j] = 0.5 * (dq[0] * dqj.w() + dq[1] * vpart.x() + dq[2] * vpart.y() +
                  dq[3] * vpart.z());
  }
  g.tail<3>() = T.rotation().transpose() * dt;
  return g;
}

}  // namespace vinet
