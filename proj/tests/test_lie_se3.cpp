#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "vinet/lie_se3.hpp"

using namespace vinet;
using namespace vinet::testutil;

namespace {

// Independent oracle: rotate a vector with the quaternion sandwich product
// built from axis/angle directly (no library rotation code).
Vec3 quat_rotate_oracle(const Vec3& axis, double angle, const Vec3& p) {
  const double w = std::cos(angle / 2.0);
  const Vec3 u = std::sin(angle / 2.0) * axis.normalized();
  // p' = p + 2*u x (u x p + w*p)
  const Vec3 t = 2.0 * u.cross(p);
  return p + w * t + u.cross(t);
}

// Independent oracle: integrate the screw d/dt T = T * [xi]^ with explicit
// Euler on 4x4 homogeneous matrices.
Eigen::Matrix4d screw_euler_oracle(const Twist& xi, int steps) {
  Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
  A.topLeftCorner<3, 3>() = hat(xi.omega);
  A.topRightCorner<3, 1>() = xi.v;
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  const double dt = 1.0 / steps;
  for (int k = 0; k < steps; ++k) {
    T += (T * A) * dt;
  }
  return T;
}

Eigen::Matrix4d homogeneous(const Pose& p) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = p.rotation();
  m.topRightCorner<3, 1>() = p.t();
  return m;
}

}  // namespace

TEST_CASE("hat basics") {
  CHECK(hat(Vec3::Zero()).isZero(0.0));

  Mat3 expected;
  expected << 0, -3, 2, 3, 0, -1, -2, 1, 0;
  CHECK((hat(Vec3(1, 2, 3)) - expected).cwiseAbs().maxCoeff() == 0.0);

  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const Vec3 w = rng.normal3();
    const Mat3 m = hat(w);
    CHECK((m + m.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((m * w).norm() <= 1e-15 * (1.0 + w.squaredNorm()));
    CHECK(vee(m) == w);
  }
}

TEST_CASE("exp_so3 identity and quarter turn") {
  CHECK((exp_so3(Vec3::Zero()) - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);

  const Vec3 omega(M_PI / 2.0, 0, 0);
  const Mat3 R = exp_so3(omega);
  const Vec3 got = R * Vec3(0, 1, 0);
  CHECK((got - Vec3(0, 0, 1)).norm() < 1e-12);

  // quaternion-composition oracle on random axes/angles
  Rng rng(12);
  for (int i = 0; i < 100; ++i) {
    const Vec3 axis = random_unit3(rng);
    const double angle = rng.uniform(0.0, M_PI - 0.01);
    const Vec3 p = rng.normal3();
    const Vec3 want = quat_rotate_oracle(axis, angle, p);
    CHECK((exp_so3(angle * axis) * p - want).norm() < 1e-12 * (1.0 + want.norm()));
  }

  CHECK_THROWS_AS(exp_so3(Vec3(std::nan(""), 0, 0)), NumericError);
}

TEST_CASE("so3 round trips") {
  CHECK(log_so3(Mat3::Identity()).norm() == 0.0);
  CHECK((log_so3(exp_so3(Vec3(0.1, 0.2, 0.3))) - Vec3(0.1, 0.2, 0.3)).norm() < 1e-9);

  Rng rng(13);
  for (int i = 0; i < 500; ++i) {
    const Vec3 w = rng.uniform(0.0, M_PI - 0.01) * random_unit3(rng);
    CHECK((log_so3(exp_so3(w)) - w).norm() < 1e-9);
  }
}

TEST_CASE("log_so3 rejects angle near pi and non-rotations") {
  const Vec3 w = (M_PI - 1e-7) * Vec3(0, 0, 1);
  CHECK_THROWS_AS(log_so3(exp_so3(w)), AngleNearPiError);

  Mat3 not_rot = Mat3::Identity();
  not_rot(0, 0) = 2.0;
  CHECK_THROWS_AS(log_so3(not_rot), Error);

  // angle within the principal branch but close to the margin still works
  const Vec3 ok = (M_PI - 1e-4) * Vec3(0, 1, 0);
  CHECK((log_so3(exp_so3(ok)) - ok).norm() < 1e-8);
}

TEST_CASE("twist and pose invariants") {
  CHECK_THROWS(Twist(Vec3(M_PI, 0, 0), Vec3::Zero()));
  CHECK_THROWS_AS(Twist(Vec3(0, 0, 0), Vec3(INFINITY, 0, 0)), NumericError);

  // construction normalizes and canonicalizes the hemisphere
  const Pose p(Quat(-2.0, 0.2, 0.4, 0.1), Vec3(1, 2, 3));
  CHECK(p.q().norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.q().w() >= 0.0);

  Rng rng(14);
  for (int i = 0; i < 200; ++i) {
    const Pose r = random_pose(rng);
    CHECK(std::abs(r.q().norm() - 1.0) < 1e-12);
    CHECK(r.q().w() >= 0.0);
  }
}

TEST_CASE("exp_se3 pure translation and screw oracle") {
  const Pose pt = exp_se3(Twist(Vec3::Zero(), Vec3(1, 2, 3)));
  CHECK(pt.q().w() == 1.0);
  CHECK((pt.t() - Vec3(1, 2, 3)).norm() == 0.0);

  // quarter-turn screw, translation checked against 1e6 Euler steps
  const Twist xi(Vec3(0, 0, M_PI / 2.0), Vec3(1, 0, 0));
  const Eigen::Matrix4d want = screw_euler_oracle(xi, 1000000);
  const Eigen::Matrix4d got = homogeneous(exp_se3(xi));
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("se3 round trips") {
  const Twist zero = log_se3(Pose());
  CHECK(zero.vec().norm() == 0.0);

  const Pose pure(Quat(1, 0, 0, 0), Vec3(4, -5, 6));
  const Twist back = log_se3(pure);
  CHECK(back.omega.norm() == 0.0);
  CHECK((back.v - Vec3(4, -5, 6)).norm() == 0.0);

  Rng rng(15);
  for (int i = 0; i < 500; ++i) {
    const Twist xi = random_twist(rng, 3.0);
    const Twist rt = log_se3(exp_se3(xi));
    CHECK((rt.vec() - xi.vec()).norm() < 1e-8);
  }
}

TEST_CASE("compose and inverse group behaviour") {
  Rng rng(16);
  const Pose id;
  for (int i = 0; i < 1000; ++i) {
    const Pose a = random_pose(rng);
    const Pose b = random_pose(rng);
    const Pose c = random_pose(rng);

    CHECK(compose(a, id).isApprox(a, 1e-9));
    CHECK(compose(id, a).isApprox(a, 1e-9));
    CHECK(compose(a, inverse(a)).isApprox(id, 1e-9));
    CHECK(compose(inverse(a), a).isApprox(id, 1e-9));
    CHECK(compose(compose(a, b), c).isApprox(compose(a, compose(b, c)), 1e-9));
  }

  const Pose shift(Quat(1, 0, 0, 0), Vec3(1, 2, 3));
  CHECK((inverse(shift).t() + Vec3(1, 2, 3)).norm() == 0.0);
  CHECK(inverse(id).isApprox(id, 0.0));
}

TEST_CASE("compose matches homogeneous matrix product") {
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    const Pose a = random_pose(rng);
    const Pose b = random_pose(rng);
    const Eigen::Matrix4d want = homogeneous(a) * homogeneous(b);
    CHECK((homogeneous(compose(a, b)) - want).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("exp_se3_backward identity at zero") {
  const Twist zero;
  for (int j = 0; j < 6; ++j) {
    Vec6 e = Vec6::Zero();
    e[j] = 1.0;
    CHECK((exp_se3_backward(zero, e) - e).norm() < 1e-14);
  }
}

TEST_CASE("exp_se3_backward matches finite differences") {
  Rng rng(18);
  const double h = 1e-6;
  auto check_case = [&](const Twist& xi) {
    const Pose T = exp_se3(xi);
    const Vec6 g = rng.normal3().norm() * Vec6::NullaryExpr([&](int) { return rng.normal(); });
    const Vec6 analytic = exp_se3_backward(xi, g);
    Vec6 fd;
    for (int j = 0; j < 6; ++j) {
      Vec6 xp = xi.vec(), xm = xi.vec();
      xp[j] += h;
      xm[j] -= h;
      const Vec6 dp = pose_delta(T, exp_se3(Twist::from_vec(xp)));
      const Vec6 dm = pose_delta(T, exp_se3(Twist::from_vec(xm)));
      fd[j] = g.dot((dp - dm) / (2.0 * h));
    }
    CHECK(rel_err(analytic, fd) < 1e-5);
  };

  for (int i = 0; i < 100; ++i) {
    check_case(random_twist(rng, 3.0));
  }
  // at and around the Taylor branch point
  for (int i = 0; i < 20; ++i) {
    check_case(Twist(1e-7 * random_unit3(rng), rng.normal3()));
    check_case(Twist(1e-4 * random_unit3(rng), rng.normal3()));
  }
}

TEST_CASE("compose_backward pass-through and finite differences") {
  Rng rng(19);
  const Pose id;

  // b = identity: grad_a is pass-through; a = identity: grad_b pass-through
  const Pose a = random_pose(rng);
  Vec6 g = Vec6::NullaryExpr([&](int) { return rng.normal(); });
  auto [ga_id, gb_id] = compose_backward(a, id, g);
  CHECK((ga_id - g).norm() < 1e-14);
  auto [ga2, gb2] = compose_backward(id, a, g);
  CHECK((gb2 - g).norm() < 1e-14);

  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const Pose pa = random_pose(rng);
    const Pose pb = random_pose(rng);
    const Pose c = compose(pa, pb);
    g = Vec6::NullaryExpr([&](int) { return rng.normal(); });
    const auto [grad_a, grad_b] = compose_backward(pa, pb, g);

    Vec6 fd_a, fd_b;
    for (int j = 0; j < 6; ++j) {
      Vec6 e = Vec6::Zero();
      e[j] = h;
      const Pose ap = compose(pa, exp_se3(Twist::from_vec(e)));
      const Pose am = compose(pa, exp_se3(Twist::from_vec(-e)));
      fd_a[j] = g.dot((pose_delta(c, compose(ap, pb)) -
                       pose_delta(c, compose(am, pb))) / (2.0 * h));
      const Pose bp = compose(pb, exp_se3(Twist::from_vec(e)));
      const Pose bm = compose(pb, exp_se3(Twist::from_vec(-e)));
      fd_b[j] = g.dot((pose_delta(c, compose(pa, bp)) -
                       pose_delta(c, compose(pa, bm))) / (2.0 * h));
    }
    CHECK(rel_err(grad_a, fd_a) < 1e-5);
    CHECK(rel_err(grad_b, fd_b) < 1e-5);
  }
}

TEST_CASE("pose_components_backward matches finite differences") {
  Rng rng(20);
  for (int i = 0; i < 100; ++i) {
    const Pose T = random_pose(rng, 2.5);
    const Vec4 dq = Vec4::NullaryExpr([&](int) { return rng.normal(); });
    const Vec3 dt = rng.normal3();
    const Vec6 analytic = pose_components_backward(T, dq, dt);
    const Vec6 fd = fd_pose_grad(
        [&](const Pose& p) {
          return dq[0] * p.q().w() + dq[1] * p.q().x() + dq[2] * p.q().y() +
                 dq[3] * p.q().z() + dt.dot(p.t());
        },
        T);
    CHECK(rel_err(analytic, fd) < 1e-5);
  }
}

TEST_CASE("adjoint conjugation identity") {
  Rng rng(21);
  for (int i = 0; i < 50; ++i) {
    const Pose T = random_pose(rng);
    const Vec6 d = 1e-4 * Vec6::NullaryExpr([&](int) { return rng.normal(); });
    const Pose lhs = exp_se3(Twist::from_vec(adjoint(T) * d));
    const Pose rhs = compose(compose(T, exp_se3(Twist::from_vec(d))), inverse(T));
    CHECK((lhs.as7() - rhs.as7()).norm() < 1e-11);
  }
}
