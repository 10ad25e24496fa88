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

#ifndef HUMI_TESTS_IK_FIXTURES_H_
#define HUMI_TESTS_IK_FIXTURES_H_

#include <algorithm>
#include <map>
#include <random>

#include "humi/ik.h"
#include "humi/robot.h"
#include "test_util.h"

namespace humi::testing {

// Configuration near the zero pose, inside the limits and clear of every
// collision pair by at least `clearance`. Targets produced by FK of such a
// state are reachable by construction.
inline robot::JointState RandomReachableState(
    const robot::KinematicModel& model, std::mt19937_64& rng,
    double spread = 0.6, double clearance = 0.03) {
  std::uniform_real_distribution<double> u(-spread, spread);
  for (;;) {
    robot::JointState s = robot::ZeroState(model);
    s.base_pose = RandomPose(rng, 0.5);
    for (int j = 0; j < model.num_joints(); ++j) {
      const auto& joint = model.joints()[j];
      const double inset = 0.05 * (joint.q_max - joint.q_min);
      s.q[j] = std::clamp(u(rng), joint.q_min + inset, joint.q_max - inset);
    }
    bool clear = true;
    for (const auto& c : robot::CollisionDistances(model, s)) {
      clear = clear && c.clearance >= clearance;
    }
    if (clear) return s;
  }
}

inline robot::JointState Perturb(const robot::KinematicModel& model,
                                 const robot::JointState& s,
                                 std::mt19937_64& rng, double joint_noise,
                                 double base_noise) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd d(model.num_dofs());
  for (int i = 0; i < model.num_dofs(); ++i) {
    d[i] = u(rng) * (i < robot::kBaseDofs ? base_noise : joint_noise);
  }
  robot::JointState out = robot::Integrate(model, s, d);
  for (int j = 0; j < model.num_joints(); ++j) {
    const auto& joint = model.joints()[j];
    out.q[j] = std::clamp(out.q[j], joint.q_min + 1e-6, joint.q_max - 1e-6);
  }
  return out;
}

inline ik::IkTargets TargetsFromState(const robot::KinematicModel& model,
                                      const robot::JointState& s) {
  ik::IkTargets t;
  t.poses = robot::ForwardKinematics(model, s);
  t.rest_posture = robot::ZeroState(model);
  return t;
}

// FK replay of a smooth joint motion: feasible and C1 by construction.
inline std::map<std::string, geom::PoseTrajectory> ReplayTrajectories(
    const robot::KinematicModel& model, const robot::JointState& center, double duration,
    double rate) {
  std::map<std::string, std::vector<geom::TimedPose>> samples;
  for (double t : geom::UniformClock(0.0, duration, rate)) {
    robot::JointState s = center;
    for (int j = 0; j < model.num_joints(); ++j) {
      const auto& joint = model.joints()[j];
      const double room = std::min(center.q[j] - joint.q_min,
                                   joint.q_max - center.q[j]);
      s.q[j] += std::min(0.15, 0.5 * room) * std::sin(0.8 * t + 0.3 * j);
    }
    s.base_pose.translation.x() += 0.05 * t;
    for (const auto& [name, pose] : robot::ForwardKinematics(model, s)) {
      samples[name].push_back({t, pose});
    }
  }
  std::map<std::string, geom::PoseTrajectory> out;
  for (auto& [name, s] : samples) out[name] = geom::PoseTrajectory(name, s);
  return out;
}

}  // namespace humi::testing

#endif  // HUMI_TESTS_IK_FIXTURES_H_
