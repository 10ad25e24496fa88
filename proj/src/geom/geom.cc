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

#include "humi/geom.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "humi/error.h"

namespace humi::geom {
namespace {

Quat Normalized(const Quat& q) {
  Quat out = q;
  out.normalize();
  return out;
}

// Index i such that samples[i].time <= t < samples[i + 1].time, clamped to
// the last segment.
size_t SegmentIndex(const std::vector<TimedPose>& samples, double t) {
  auto it = std::upper_bound(
      samples.begin(), samples.end(), t,
      [](double value, const TimedPose& s) { return value < s.time; });
  size_t upper = static_cast<size_t>(it - samples.begin());
  if (upper == 0) return 0;
  return std::min(upper - 1, samples.size() - 2);
}

}  // namespace

Pose Compose(const Pose& a, const Pose& b) {
  Pose out;
  out.translation = a.rotation * b.translation + a.translation;
  out.rotation = Normalized(a.rotation * b.rotation);
  return out;
}

Pose Inverse(const Pose& pose) {
  Pose out;
  out.rotation = pose.rotation.conjugate();
  out.translation = -(out.rotation * pose.translation);
  return out;
}

Vec3 TransformPoint(const Pose& pose, const Vec3& point) {
  return pose.rotation * point + pose.translation;
}

Quat AxisAngle(const Vec3& axis, double angle) {
  return Quat(Eigen::AngleAxisd(angle, axis.normalized()));
}

Quat Exp(const Vec3& rotation_vector) {
  const double angle = rotation_vector.norm();
  if (angle < 1e-12) {
    // first-order expansion
    return Normalized(Quat(1.0, 0.5 * rotation_vector.x(),
                           0.5 * rotation_vector.y(),
                           0.5 * rotation_vector.z()));
  }
  const double s = std::sin(0.5 * angle) / angle;
  return Quat(std::cos(0.5 * angle), s * rotation_vector.x(),
              s * rotation_vector.y(), s * rotation_vector.z());
}

Vec3 Log(const Quat& q_in) {
  Quat q = q_in;
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Vec3 v = q.vec();
  const double s = v.norm();
  if (s < 1e-12) return 2.0 * v / std::max(q.w(), 1e-300);
  const double angle = 2.0 * std::atan2(s, q.w());
  return v * (angle / s);
}

double RotationError(const Quat& ref, const Quat& actual) {
  const Quat rel = ref * actual.conjugate();
  return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w()));
}

double RotationError(const Pose& ref, const Pose& actual) {
  return RotationError(ref.rotation, actual.rotation);
}

Vec3 RotationErrorVector(const Quat& ref, const Quat& actual) {
  return Log(ref * actual.conjugate());
}

Pose Interpolate(const Pose& a, const Pose& b, double u) {
  if (!(u >= 0.0 && u <= 1.0)) {
    std::ostringstream msg;
    msg << "interpolation fraction " << u << " outside [0, 1]";
    throw RangeError(msg.str());
  }
  if (u == 0.0) return a;
  if (u == 1.0) return b;
  Pose out;
  out.translation = (1.0 - u) * a.translation + u * b.translation;
  // Eigen's slerp takes the shortest arc
  out.rotation = Normalized(a.rotation.slerp(u, b.rotation));
  return out;
}

Pose YawOnly(const Pose& pose) {
  const Vec3 x_axis = pose.rotation * Vec3::UnitX();
  const double yaw = std::atan2(x_axis.y(), x_axis.x());
  return Pose{pose.translation, AxisAngle(Vec3::UnitZ(), yaw)};
}

bool IsFinite(const Pose& pose) {
  return pose.translation.allFinite() && pose.rotation.coeffs().allFinite() &&
         std::abs(pose.rotation.norm() - 1.0) < 1e-6;
}

bool IsFinite(const Twist& twist) {
  return twist.linear.allFinite() && twist.angular.allFinite();
}

PoseTrajectory::PoseTrajectory(std::string frame_name,
                               std::vector<TimedPose> samples,
                               double rate_hint)
    : frame_name_(std::move(frame_name)),
      samples_(std::move(samples)),
      rate_hint_(rate_hint) {
  for (size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i].time) || !IsFinite(samples_[i].pose)) {
      std::ostringstream msg;
      msg << "trajectory '" << frame_name_ << "' sample " << i
          << " is not finite or has a non-unit quaternion";
      throw InvalidArgument(msg.str());
    }
    samples_[i].pose.rotation.normalize();
    if (i > 0 && !(samples_[i].time > samples_[i - 1].time)) {
      std::ostringstream msg;
      msg << "trajectory '" << frame_name_ << "' timestamps not strictly "
          << "increasing at sample " << i << " (t=" << samples_[i].time << ")";
      throw InvalidArgument(msg.str());
    }
  }
}

double PoseTrajectory::start_time() const {
  if (empty()) throw RangeError("empty trajectory '" + frame_name_ + "'");
  return samples_.front().time;
}

double PoseTrajectory::end_time() const {
  if (empty()) throw RangeError("empty trajectory '" + frame_name_ + "'");
  return samples_.back().time;
}

bool PoseTrajectory::Covers(double t) const {
  return !empty() && t >= start_time() - kTimeEpsilon &&
         t <= end_time() + kTimeEpsilon;
}

Pose PoseTrajectory::At(double t) const {
  if (!Covers(t)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "time " << t << " outside trajectory '" << frame_name_ << "'";
    if (!empty()) msg << " span [" << start_time() << ", " << end_time() << "]";
    throw RangeError(msg.str());
  }
  if (samples_.size() == 1) return samples_.front().pose;
  const size_t i = SegmentIndex(samples_, t);
  const TimedPose& a = samples_[i];
  const TimedPose& b = samples_[i + 1];
  if (t <= a.time) return a.pose;
  if (t >= b.time) return b.pose;
  return Interpolate(a.pose, b.pose, (t - a.time) / (b.time - a.time));
}

PoseTrajectory Resample(const PoseTrajectory& traj,
                        std::span<const double> times) {
  std::vector<TimedPose> out;
  out.reserve(times.size());
  for (double t : times) out.push_back({t, traj.At(t)});
  return PoseTrajectory(traj.frame_name(), std::move(out), traj.rate_hint());
}

Twist FiniteDifferenceTwist(const PoseTrajectory& traj, double t) {
  if (traj.size() < 2) {
    throw InvalidArgument("trajectory '" + traj.frame_name() +
                          "' needs at least 2 samples to differentiate");
  }
  if (!traj.Covers(t)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "time " << t << " outside trajectory '" << traj.frame_name() << "'";
    throw RangeError(msg.str());
  }
  const auto& s = traj.samples();
  Pose before, after;
  double span = 0.0;
  if (t - traj.start_time() <= kTimeEpsilon) {
    before = s[0].pose;
    after = s[1].pose;
    span = s[1].time - s[0].time;
  } else if (traj.end_time() - t <= kTimeEpsilon) {
    before = s[s.size() - 2].pose;
    after = s.back().pose;
    span = s.back().time - s[s.size() - 2].time;
  } else {
    const size_t i = SegmentIndex(s, t);
    const double h = std::min({s[i + 1].time - s[i].time,
                               t - traj.start_time(), traj.end_time() - t});
    before = traj.At(t - h);
    after = traj.At(t + h);
    span = 2.0 * h;
  }
  Twist twist;
  twist.linear = (after.translation - before.translation) / span;
  twist.angular = RotationErrorVector(after.rotation, before.rotation) / span;
  return twist;
}

std::vector<double> UniformClock(double start, double end, double rate) {
  if (!(rate > 0.0)) throw InvalidArgument("clock rate must be positive");
  std::vector<double> times;
  if (end < start - kTimeEpsilon) return times;
  const auto count =
      static_cast<size_t>(std::floor((end - start) * rate + 1e-6)) + 1;
  times.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    times.push_back(std::min(start + static_cast<double>(i) / rate, end));
  }
  return times;
}

void ValidateSeries(const ScalarSeries& series, const std::string& what) {
  if (series.times.size() != series.values.size()) {
    throw InvalidArgument(what + ": times and values differ in length");
  }
  for (size_t i = 0; i < series.size(); ++i) {
    if (!std::isfinite(series.times[i]) || !std::isfinite(series.values[i])) {
      throw InvalidArgument(what + ": non-finite entry at index " +
                            std::to_string(i));
    }
    if (i > 0 && !(series.times[i] > series.times[i - 1])) {
      throw InvalidArgument(what + ": timestamps not strictly increasing at " +
                            "index " + std::to_string(i));
    }
  }
}

double SampleHold(const ScalarSeries& series, double t) {
  if (series.empty()) throw RangeError("empty series");
  if (t <= series.times.front()) return series.values.front();
  if (t >= series.times.back()) return series.values.back();
  auto it = std::upper_bound(series.times.begin(), series.times.end(), t);
  const size_t i = static_cast<size_t>(it - series.times.begin()) - 1;
  const double u =
      (t - series.times[i]) / (series.times[i + 1] - series.times[i]);
  return (1.0 - u) * series.values[i] + u * series.values[i + 1];
}

}  // namespace humi::geom
