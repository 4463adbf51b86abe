#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "ehps/errors.hpp"

namespace ehps {

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d k;
  k << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return k;
}

// Below this angle the sin/cos coefficients switch to 2-term Taylor
// expansions; keeps the map smooth through zero without a visible branch
// discontinuity at tolerance scale.
inline constexpr double kRodriguesTaylorAngle = 1e-8;

// Axis-angle (radians) -> rotation matrix:
// R = I + sin(t)[k]x + (1-cos(t))[k]x^2 with t = |aa|, k = aa/t.
inline Eigen::Matrix3d rodrigues(const Eigen::Vector3d& aa) {
  require(aa.allFinite(), errc::invalid_argument, "rodrigues: non-finite axis-angle");
  const double theta = aa.norm();
  if (theta < kRodriguesTaylorAngle) {
    // sin(t)/t ~ 1 - t^2/6, (1-cos(t))/t^2 ~ 1/2 - t^2/24, applied to the
    // unnormalized generator so no division by theta is needed.
    const Eigen::Matrix3d k = skew(aa);
    const double t2 = theta * theta;
    return Eigen::Matrix3d::Identity() + (1.0 - t2 / 6.0) * k +
           (0.5 - t2 / 24.0) * (k * k);
  }
  const Eigen::Matrix3d k = skew(aa / theta);
  return Eigen::Matrix3d::Identity() + std::sin(theta) * k +
         (1.0 - std::cos(theta)) * (k * k);
}

// Rotation matrix -> canonical axis-angle with |aa| in [0, pi]. Uses the
// max-diagonal quaternion extraction, which stays well conditioned near
// half-turns where the naive trace formula degrades. At exactly pi, where
// +aa and -aa describe the same rotation, the sign is canonicalized so the
// first nonzero axis component is positive.
inline Eigen::Vector3d rotation_log(const Eigen::Matrix3d& R) {
  require((R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-6 &&
              R.determinant() > 0.0,
          errc::invalid_argument, "rotation_log: input is not a rotation matrix");
  const double tr = R.trace();
  double w, x, y, z;
  if (tr > 0.0) {
    const double s = std::sqrt(tr + 1.0) * 2.0;  // 4w
    w = 0.25 * s;
    x = (R(2, 1) - R(1, 2)) / s;
    y = (R(0, 2) - R(2, 0)) / s;
    z = (R(1, 0) - R(0, 1)) / s;
  } else if (R(0, 0) > R(1, 1) && R(0, 0) > R(2, 2)) {
    const double s = std::sqrt(1.0 + R(0, 0) - R(1, 1) - R(2, 2)) * 2.0;  // 4x
    w = (R(2, 1) - R(1, 2)) / s;
    x = 0.25 * s;
    y = (R(0, 1) + R(1, 0)) / s;
    z = (R(0, 2) + R(2, 0)) / s;
  } else if (R(1, 1) > R(2, 2)) {
    const double s = std::sqrt(1.0 + R(1, 1) - R(0, 0) - R(2, 2)) * 2.0;  // 4y
    w = (R(0, 2) - R(2, 0)) / s;
    x = (R(0, 1) + R(1, 0)) / s;
    y = 0.25 * s;
    z = (R(1, 2) + R(2, 1)) / s;
  } else {
    const double s = std::sqrt(1.0 + R(2, 2) - R(0, 0) - R(1, 1)) * 2.0;  // 4z
    w = (R(1, 0) - R(0, 1)) / s;
    x = (R(0, 2) + R(2, 0)) / s;
    y = (R(1, 2) + R(2, 1)) / s;
    z = 0.25 * s;
  }
  if (w < 0.0) {
    w = -w;
    x = -x;
    y = -y;
    z = -z;
  }
  Eigen::Vector3d v(x, y, z);
  const double vn = v.norm();
  if (vn < 1e-12) {
    // theta ~ 2*vn: aa = theta * v/vn ~ 2v.
    return 2.0 * v;
  }
  double theta = 2.0 * std::atan2(vn, w);
  Eigen::Vector3d aa = (theta / vn) * v;
  if (theta > M_PI - 1e-12) {
    // Half-turn: pick the sign deterministically.
    for (int i = 0; i < 3; ++i) {
      if (std::abs(aa[i]) > 1e-12) {
        if (aa[i] < 0.0) aa = -aa;
        break;
      }
    }
  }
  return aa;
}

}  // namespace ehps
