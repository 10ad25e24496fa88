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

#ifndef HUMI_AUGMENT_H_
#define HUMI_AUGMENT_H_

#include <cstdint>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "humi/geom.h"
#include "humi/ik.h"

namespace humi::augment {

using Rng = std::mt19937_64;

inline constexpr double kSpeedMin = 0.25;
inline constexpr double kSpeedMax = 1.25;
inline constexpr double kSpeedMean = 1.0;
inline constexpr double kSpeedInterval = 0.02;  // s

// Uniform draw on [lo, hi].
double Uniform(Rng& rng, double lo, double hi);

// Normal(mean, sigma^2) conditioned on [lo, hi] (inclusive) by rejection.
// sigma == 0 returns the mean when it lies inside the bounds. Throws
// InvalidArgument for sigma < 0, lo > hi, or a window so far in the tail
// that 10^6 proposals are all rejected.
double TruncatedNormal(Rng& rng, double mean, double sigma, double lo,
                       double hi);

// Piecewise-constant playback speed, factors[k] applies on
// [k * delta, (k + 1) * delta) of output time.
struct SpeedSchedule {
  double delta = kSpeedInterval;
  std::vector<double> factors;
  double sigma = 0.0;

  double duration() const { return delta * static_cast<double>(factors.size()); }
};

// ceil(duration / delta) draws of TruncatedNormal(1, sigma^2) on
// [kSpeedMin, kSpeedMax]. Throws InvalidArgument unless duration > 0 and
// sigma >= 0.
SpeedSchedule SampleSpeedSchedule(double duration, double sigma,
                                  uint64_t seed);

// Reference phase after t seconds of output time: the integral of the
// schedule. Constant factors of exactly 1 contribute exactly t. Throws
// RangeError outside [0, duration].
double Phase(const SpeedSchedule& schedule, double t);

// Output time at which the phase first reaches `phase`.
double InversePhase(const SpeedSchedule& schedule, double phase);

// Plays `traj` back at the scheduled speed. The output keeps the input's
// start time and sample spacing and runs until the phase would pass the end
// of the input, so slow schedules produce longer outputs. The schedule must
// reach the end of the input in phase; otherwise InvalidArgument. The input
// must be uniformly sampled (within 1e-6 s) with at least two samples.
geom::PoseTrajectory TimeWarp(const geom::PoseTrajectory& traj,
                              const SpeedSchedule& schedule);
ik::JointTrajectory TimeWarp(const ik::JointTrajectory& traj,
                             const SpeedSchedule& schedule);

struct PushPerturbation {
  double interval = 5.0;  // s until the next push
  double vx = 0.0;
  double vy = 0.0;
  double yaw_rate = 0.0;
};

struct ResetPerturbation {
  geom::Vec3 position = geom::Vec3::Zero();
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
  geom::Vec3 linear_velocity = geom::Vec3::Zero();
  geom::Vec3 angular_velocity = geom::Vec3::Zero();  // roll, pitch, yaw rates
  double joint_offset = 0.0;  // added to every joint, rad
  double time_shift = 0.0;    // s
};

// Physical fields are recorded for reproducibility only; nothing in this
// toolkit simulates dynamics.
struct RandomizationDraw {
  double static_friction = 1.0;
  double dynamic_friction = 1.0;
  double restitution = 0.5;
  double default_joint_offset = 0.0;
  geom::Vec3 com_offset = geom::Vec3::Zero();
  double ee_mass_scale = 1.0;
  PushPerturbation push;
  ResetPerturbation reset;
};

RandomizationDraw DrawRandomization(uint64_t seed);
RandomizationDraw DrawRandomization(Rng& rng);

// A fresh push drawn for each event.
PushPerturbation DrawPush(Rng& rng);

// Push events starting after the first interval, up to `horizon` seconds.
std::vector<std::pair<double, PushPerturbation>> PushSchedule(double horizon,
                                                              uint64_t seed);

// t_reset + U[-0.05, 0.05], clamped to [0, trajectory_end]. Throws
// InvalidArgument for negative t_reset or t_reset beyond trajectory_end.
double ShiftResetTime(double t_reset, double trajectory_end, uint64_t seed);

nlohmann::json ToJson(const RandomizationDraw& draw);
nlohmann::json ToJson(const SpeedSchedule& schedule);

}  // namespace humi::augment

#endif  // HUMI_AUGMENT_H_
