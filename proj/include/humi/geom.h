// Copyright 2026 The humi Authors
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

#ifndef HUMI_GEOM_H_
#define HUMI_GEOM_H_

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace humi::geom {

using Vec3 = Eigen::Vector3d;
// Unit quaternion. Constructed as Quat(w, x, y, z).
using Quat = Eigen::Quaterniond;

// Tolerance used when a query time is compared against a trajectory's span.
inline constexpr double kTimeEpsilon = 1e-9;

// Rigid transform: rotate, then translate. Frames are right-handed, units are
// meters and radians.
struct Pose {
  Vec3 translation = Vec3::Zero();
  Quat rotation = Quat::Identity();

  static Pose Identity() { return Pose{}; }
  static Pose FromTranslation(const Vec3& t) { return Pose{t, Quat::Identity()}; }
  static Pose FromRotation(const Quat& q) { return Pose{Vec3::Zero(), q}; }
};

struct Twist {
  Vec3 linear = Vec3::Zero();   // m/s
  Vec3 angular = Vec3::Zero();  // rad/s
};

// a * b: `b` expressed in a's frame, mapped to a's parent frame.
Pose Compose(const Pose& a, const Pose& b);
Pose Inverse(const Pose& pose);
Vec3 TransformPoint(const Pose& pose, const Vec3& point);

// Rotation about a unit axis.
Quat AxisAngle(const Vec3& axis, double angle);

// SO(3) exponential and logarithm on rotation vectors. Log returns the
// shortest rotation vector, norm in [0, pi].
Quat Exp(const Vec3& rotation_vector);
Vec3 Log(const Quat& q);

// Geodesic angle between two orientations, in [0, pi]. Invariant to the sign
// of either quaternion.
double RotationError(const Quat& ref, const Quat& actual);
double RotationError(const Pose& ref, const Pose& actual);

// World-frame rotation vector r with Exp(r) * actual == ref. Its norm equals
// RotationError(ref, actual).
Vec3 RotationErrorVector(const Quat& ref, const Quat& actual);

// Linear blend of translations and shortest-arc slerp of rotations.
// Throws RangeError when u is outside [0, 1].
Pose Interpolate(const Pose& a, const Pose& b, double u);

// Pose whose rotation keeps only the heading (rotation about world z).
Pose YawOnly(const Pose& pose);

bool IsFinite(const Pose& pose);
bool IsFinite(const Twist& twist);

struct TimedPose {
  double time = 0.0;
  Pose pose;
};

// Timestamped poses of one frame. Timestamps are strictly increasing.
class PoseTrajectory {
 public:
  PoseTrajectory() = default;
  // Throws InvalidArgument on unordered timestamps or non-finite poses.
  PoseTrajectory(std::string frame_name, std::vector<TimedPose> samples,
                 double rate_hint = 0.0);

  const std::string& frame_name() const { return frame_name_; }
  const std::vector<TimedPose>& samples() const { return samples_; }
  double rate_hint() const { return rate_hint_; }
  size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double start_time() const;
  double end_time() const;
  double duration() const { return empty() ? 0.0 : end_time() - start_time(); }
  bool Covers(double t) const;

  // Interpolated pose at time t. Throws RangeError outside the span.
  Pose At(double t) const;

 private:
  std::string frame_name_;
  std::vector<TimedPose> samples_;
  double rate_hint_ = 0.0;
};

// Poses of `traj` at the requested times (order preserved). Throws
// RangeError naming the first time outside [start, end].
PoseTrajectory Resample(const PoseTrajectory& traj,
                        std::span<const double> times);

// Central-difference twist at t, one-sided at the ends. Linear velocity in
// the world frame; angular velocity from the log of the relative rotation.
Twist FiniteDifferenceTwist(const PoseTrajectory& traj, double t);

// start, start + 1/rate, ... up to and including `end` (within kTimeEpsilon).
std::vector<double> UniformClock(double start, double end, double rate);

// Scalar signal sampled at strictly increasing times.
struct ScalarSeries {
  std::vector<double> times;
  std::vector<double> values;

  size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  double start_time() const { return times.front(); }
  double end_time() const { return times.back(); }
};

// Throws InvalidArgument unless sizes match and times strictly increase.
void ValidateSeries(const ScalarSeries& series, const std::string& what);

// Linear interpolation; times outside the span hold the end value.
double SampleHold(const ScalarSeries& series, double t);

}  // namespace humi::geom

#endif  // HUMI_GEOM_H_
