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

#include "humi/synthetic.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "humi/error.h"

namespace humi::synthetic {
namespace {

double Variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return var / static_cast<double>(v.size());
}

void AddNoise(std::vector<double>& values, double snr_db,
              std::mt19937_64& rng) {
  const double sigma = std::sqrt(Variance(values) / std::pow(10.0, snr_db / 10.0));
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& v : values) v += noise(rng);
}

void SetJoint(const robot::KinematicModel& model, robot::JointState& s,
              const std::string& name, double value) {
  const int j = model.FindJoint(name);
  if (j >= 0) s.q[j] = value;
}

// World angular speed of a keyframe by a symmetric difference of FK.
template <typename StateAt>
double KeyframeSpeed(const robot::KinematicModel& model, int keyframe,
                     const StateAt& state_at, double t) {
  const double h = 1e-4;
  const auto before = robot::LinkPoses(model, state_at(t - h));
  const auto after = robot::LinkPoses(model, state_at(t + h));
  const geom::Quat a = robot::KeyframePose(model, before, keyframe).rotation;
  const geom::Quat b = robot::KeyframePose(model, after, keyframe).rotation;
  return geom::RotationError(b, a) / (2.0 * h);
}

}  // namespace

BandLimitedSignal::BandLimitedSignal(std::mt19937_64& rng, double amplitude,
                                     double f_min, double f_max,
                                     int components) {
  std::uniform_real_distribution<double> freq(f_min, f_max);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> weight(0.2, 1.0);
  double total = 0.0;
  for (int k = 0; k < components; ++k) {
    omega_.push_back(2.0 * std::numbers::pi * freq(rng));
    phase_.push_back(phase(rng));
    amplitude_.push_back(weight(rng));
    total += amplitude_.back();
  }
  for (double& a : amplitude_) a *= amplitude / total;
}

double BandLimitedSignal::operator()(double t) const {
  double v = 0.0;
  for (size_t k = 0; k < omega_.size(); ++k) {
    v += amplitude_[k] * std::sin(omega_[k] * t + phase_[k]);
  }
  return v;
}

GyroPair MakeGyroPair(uint64_t seed, double offset, double duration,
                      double rate, double snr_db) {
  std::mt19937_64 rng(seed);
  const BandLimitedSignal wx(rng, 2.0, 0.2, 5.0);
  const BandLimitedSignal wy(rng, 2.0, 0.2, 5.0);
  const BandLimitedSignal wz(rng, 2.0, 0.2, 5.0);
  auto speed = [&](double t) {
    return std::sqrt(wx(t) * wx(t) + wy(t) * wy(t) + wz(t) * wz(t));
  };
  GyroPair pair;
  pair.reference.times = geom::UniformClock(0.0, duration, rate);
  pair.shifted.times = pair.reference.times;
  for (double t : pair.reference.times) {
    pair.reference.values.push_back(speed(t));
    pair.shifted.values.push_back(speed(t - offset));
  }
  AddNoise(pair.reference.values, snr_db, rng);
  AddNoise(pair.shifted.values, snr_db, rng);
  return pair;
}

robot::JointState RelaxedStance(const robot::KinematicModel& model) {
  robot::JointState s = robot::ZeroState(model);
  for (const char* side : {"left", "right"}) {
    const std::string p(side);
    SetJoint(model, s, p + "_hip_pitch_joint", -0.2);
    SetJoint(model, s, p + "_knee_joint", 0.4);
    SetJoint(model, s, p + "_ankle_pitch_joint", -0.2);
    SetJoint(model, s, p + "_elbow_joint", 0.5);
    SetJoint(model, s, p + "_shoulder_pitch_joint", -0.2);
  }
  SetJoint(model, s, "left_shoulder_roll_joint", 0.3);
  SetJoint(model, s, "right_shoulder_roll_joint", -0.3);
  double lowest = 0.0;
  for (const auto& [name, pose] : robot::ForwardKinematics(model, s)) {
    lowest = std::min(lowest, pose.translation.z());
  }
  s.base_pose.translation.z() = -lowest;
  return s;
}

ingest::DemoRecording MakeRecording(const robot::KinematicModel& model,
                                    const RecordingConfig& config) {
  if (!(config.duration > 0.0)) throw InvalidArgument("duration must be positive");
  std::mt19937_64 rng(config.seed);
  const robot::JointState stance = RelaxedStance(model);

  std::vector<BandLimitedSignal> joint_motion;
  for (int j = 0; j < model.num_joints(); ++j) {
    const auto& joint = model.joints()[j];
    const double room =
        std::min(stance.q[j] - joint.q_min, joint.q_max - stance.q[j]);
    double amplitude = 0.03;
    if (joint.name.find("shoulder") != std::string::npos ||
        joint.name.find("elbow") != std::string::npos ||
        joint.name.find("wrist") != std::string::npos) {
      amplitude = 0.25;
    } else if (joint.name.find("waist") != std::string::npos) {
      amplitude = 0.15;
    }
    joint_motion.emplace_back(rng, std::min(amplitude, 0.4 * room), 0.1, 0.8);
  }
  const BandLimitedSignal sway(rng, 0.005, 0.02, 0.1);
  const BandLimitedSignal heading(rng, 0.1, 0.05, 0.3);

  auto state_at = [&](double t) {
    robot::JointState s = stance;
    for (int j = 0; j < model.num_joints(); ++j) s.q[j] += joint_motion[j](t);
    s.base_pose.translation.x() += 0.004 * t;
    s.base_pose.translation.y() += sway(t);
    s.base_pose.rotation =
        geom::Quat(Eigen::AngleAxisd(heading(t), geom::Vec3::UnitZ()));
    return s;
  };

  ingest::DemoRecording rec;
  rec.scene = "synthetic";
  rec.operator_id = "generator-" + std::to_string(config.seed);
  std::map<std::string, std::vector<geom::TimedPose>> samples;
  for (double t : geom::UniformClock(0.0, config.duration, config.tracker_rate)) {
    for (const auto& [name, pose] : robot::ForwardKinematics(model, state_at(t))) {
      samples[name].push_back({t, pose});
    }
  }
  for (auto& [name, s] : samples) {
    rec.trackers[name] =
        geom::PoseTrajectory(name, std::move(s), config.tracker_rate);
  }

  std::uniform_real_distribution<double> jitter(-config.marker_jitter,
                                                config.marker_jitter);
  for (const auto& [name, offset] : config.videos) {
    const int keyframe = model.FindKeyframe(name);
    if (keyframe < 0) {
      throw InvalidArgument("video '" + name + "' is not a model keyframe");
    }
    ingest::VideoStream video;
    video.name = name;
    video.sync_tracker = name;
    video.frames = "video/" + name + ".mp4";
    for (double tau : geom::UniformClock(offset, offset + config.duration,
                                         config.gyro_rate)) {
      const double t = std::clamp(tau - offset, 0.0, config.duration);
      video.gyro.times.push_back(tau);
      video.gyro.values.push_back(KeyframeSpeed(model, keyframe, state_at, t));
    }
    AddNoise(video.gyro.values, config.snr_db, rng);
    const BandLimitedSignal opening(rng, 0.035, 0.05, 0.5);
    for (double tau : geom::UniformClock(offset, offset + config.duration,
                                         config.width_rate)) {
      video.width.times.push_back(tau);
      video.width.values.push_back(0.04 + opening(tau - offset));
    }
    for (const auto& [start, stop] : config.episodes) {
      video.markers.emplace_back(start + offset + jitter(rng),
                                 stop + offset + jitter(rng));
    }
    rec.videos.push_back(std::move(video));
  }
  return rec;
}

}  // namespace humi::synthetic
