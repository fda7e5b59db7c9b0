// Copyright 2026 The ScrewSplat Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#pragma once

#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "screwsplat/types.hpp"

namespace screwsplat {

enum class JointType { Revolute, Prismatic };

/// Zero-pitch screw axis (omega, v). Revolute axes have |omega| = 1 and
/// v = -omega x q for a point q on the axis; prismatic axes have omega = 0
/// and |v| = 1.
template <typename Scalar>
struct ScrewAxis {
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

  Vector3 omega = Vector3::Zero();
  Vector3 v = Vector3::UnitX();
  JointType joint_type = JointType::Prismatic;

  bool is_revolute() const { return joint_type == JointType::Revolute; }

  /// Closest point on a revolute axis to the origin.
  Vector3 point() const { return omega.cross(v); }

  /// Motion direction: omega for revolute, v for prismatic.
  Vector3 direction() const { return is_revolute() ? omega : v; }
};

template <typename Scalar>
struct RigidTransform {
  using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

  Matrix3 rotation = Matrix3::Identity();
  Vector3 translation = Vector3::Zero();

  static RigidTransform Identity() { return {}; }

  Vector3 operator*(const Vector3& p) const { return rotation * p + translation; }

  RigidTransform operator*(const RigidTransform& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }

  RigidTransform inverse() const {
    Matrix3 rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  Eigen::Matrix<Scalar, 4, 4> matrix() const {
    Eigen::Matrix<Scalar, 4, 4> m = Eigen::Matrix<Scalar, 4, 4>::Identity();
    m.template topLeftCorner<3, 3>() = rotation;
    m.template topRightCorner<3, 1>() = translation;
    return m;
  }
};

using ScrewAxisd = ScrewAxis<double>;
using RigidTransformd = RigidTransform<double>;

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 3, 3> skew(const Eigen::MatrixBase<Derived>& w) {
  using S = typename Derived::Scalar;
  Eigen::Matrix<S, 3, 3> k;
  k << S(0), -w(2), w(1),
       w(2), S(0), -w(0),
       -w(1), w(0), S(0);
  return k;
}

inline constexpr double kAxisNormFloor = 1e-8;

/// Maps an unconstrained 6-vector (x, q) onto a valid axis. Revolute:
/// omega = x/|x|, v = -omega x q. Prismatic: omega = 0, v = q/|q|.
template <typename Scalar>
ScrewAxis<Scalar> normalize_screw(const Eigen::Matrix<Scalar, 6, 1>& raw, JointType type) {
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
  const Vector3 x = raw.template head<3>();
  const Vector3 q = raw.template tail<3>();
  ScrewAxis<Scalar> s;
  s.joint_type = type;
  if (type == JointType::Revolute) {
    const Scalar n = x.norm();
    if (!(n > Scalar(kAxisNormFloor))) throw Error(Errc::DegenerateAxis, "revolute direction has zero norm");
    s.omega = x / n;
    s.v = -s.omega.cross(q);
  } else {
    const Scalar n = q.norm();
    if (!(n > Scalar(kAxisNormFloor))) throw Error(Errc::DegenerateAxis, "prismatic direction has zero norm");
    s.omega.setZero();
    s.v = q / n;
  }
  return s;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> rodrigues(const Eigen::Matrix<Scalar, 3, 1>& omega, Scalar theta) {
  using std::cos;
  using std::sin;
  const Eigen::Matrix<Scalar, 3, 3> k = skew(omega);
  return Eigen::Matrix<Scalar, 3, 3>::Identity() + sin(theta) * k + (Scalar(1) - cos(theta)) * (k * k);
}

template <typename Scalar>
RigidTransform<Scalar> screw_exp(const ScrewAxis<Scalar>& s, Scalar theta) {
  using std::cos;
  using std::sin;
  RigidTransform<Scalar> t;
  if (s.joint_type == JointType::Prismatic) {
    t.translation = s.v * theta;
    return t;
  }
  const Eigen::Matrix<Scalar, 3, 3> k = skew(s.omega);
  const Eigen::Matrix<Scalar, 3, 3> k2 = k * k;
  const Scalar st = sin(theta);
  const Scalar ct = cos(theta);
  t.rotation = Eigen::Matrix<Scalar, 3, 3>::Identity() + st * k + (Scalar(1) - ct) * k2;
  t.translation = (Eigen::Matrix<Scalar, 3, 3>::Identity() * theta + (Scalar(1) - ct) * k + (theta - st) * k2) * s.v;
  return t;
}

/// 4x4 matrix form [[omega^], v; 0, 0].
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 4> screw_bracket(const ScrewAxis<Scalar>& s) {
  Eigen::Matrix<Scalar, 4, 4> m = Eigen::Matrix<Scalar, 4, 4>::Zero();
  m.template topLeftCorner<3, 3>() = skew(s.omega);
  m.template topRightCorner<3, 1>() = s.v;
  return m;
}

/// Minimum distance between two revolute axis lines.
template <typename Scalar>
Scalar line_line_distance(const ScrewAxis<Scalar>& a, const ScrewAxis<Scalar>& b) {
  using std::abs;
  if (!a.is_revolute() || !b.is_revolute()) throw Error(Errc::NotRevolute, "line distance needs revolute axes");
  const auto pa = a.point();
  const auto pb = b.point();
  const auto d = pb - pa;
  const auto n = a.omega.cross(b.omega);
  const Scalar nn = n.norm();
  // Near-parallel lines: distance from pb to line a.
  if (nn < Scalar(1e-9)) return (d - d.dot(a.omega) * a.omega).norm();
  return abs(d.dot(n)) / nn;
}

}  // namespace screwsplat
