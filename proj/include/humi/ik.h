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

#ifndef HUMI_IK_H_
#define HUMI_IK_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "humi/geom.h"
#include "humi/robot.h"

// Differential whole-body inverse kinematics with three weighted subtasks:
// keyframe pose tracking, self-collision avoidance, and posture
// regularization toward a rest configuration.
namespace humi::ik {

struct IkTaskWeights {
  // Per-keyframe weights; keyframes not listed use the defaults.
  std::map<std::string, double> w_position;
  std::map<std::string, double> w_rotation;
  double default_position = 1.0;
  double default_rotation = 1.0;
  double w_posture = 1e-5;
  double w_collision = 1.0;
  double damping = 1e-4;
  double max_step = 0.2;  // rad or m per iteration, infinity norm
  // Collision rows are active while a pair's clearance is below this margin.
  double collision_margin = 0.02;
  // When false the floating base is held fixed.
  bool mobile_base = true;

  double PositionWeight(const std::string& keyframe) const;
  double RotationWeight(const std::string& keyframe) const;
};

// Throws InvalidArgument on negative weights or non-positive damping.
void Validate(const IkTaskWeights& weights);

struct IkTolerance {
  double position = 1e-3;  // m
  double rotation = 1e-2;  // rad
  // A joint within this distance of a limit is reported as saturated.
  double limit_band = 1e-3;
};

struct IkTargets {
  std::map<std::string, geom::Pose> poses;  // world frame, unscaled
  robot::JointState rest_posture;
};

struct KeyframeResidual {
  std::string keyframe;
  double position = 0.0;  // m
  double rotation = 0.0;  // rad
};

struct IkSolution {
  robot::JointState state;
  std::vector<KeyframeResidual> residuals;
  std::vector<std::string> collision_flags;  // "first|second" per violated pair
  std::vector<std::string> limit_flags;      // saturated joint names
  bool converged = false;
  int iterations = 0;

  double MaxPositionResidual() const;
  double MaxRotationResidual() const;
};

// Batch and preview defaults.
struct IkConfig {
  IkTaskWeights weights;
  IkTolerance tolerance;
  int max_iterations = 200;
  int preview_iterations = 5;
  // Pelvis height scaling; a ratio of 1 leaves targets untouched.
  double human_height = 1.0;
  double robot_height = 1.0;
};

IkConfig IkConfigFromJson(const nlohmann::json& doc, const std::string& path);
nlohmann::json ToJson(const IkConfig& config);

// Multiplies the pelvis target height by robot_height / human_height. Every
// other value is copied unchanged. Throws InvalidArgument on a non-positive
// height.
IkTargets ScalePelvisHeight(const IkTargets& targets, double human_height,
                            double robot_height,
                            std::string_view pelvis = "pelvis");

// Throws InvalidArgument when a target names an unknown keyframe.
void CheckTargets(const robot::KinematicModel& model, const IkTargets& targets);

// One damped least-squares update over the stacked, weighted task rows.
robot::JointState SolveStep(const robot::KinematicModel& model,
                            const robot::JointState& state,
                            const IkTargets& targets,
                            const IkTaskWeights& weights);

// Residuals and feasibility flags of `state` without iterating.
IkSolution Evaluate(const robot::KinematicModel& model,
                    const robot::JointState& state, const IkTargets& targets,
                    const IkTolerance& tolerance);

// Iterates SolveStep until the tolerances hold (checked before each step) or
// max_iters steps were taken. Infeasibility is reported, never thrown.
IkSolution Solve(const robot::KinematicModel& model,
                 const robot::JointState& q0, const IkTargets& targets,
                 const IkTaskWeights& weights, const IkTolerance& tolerance,
                 int max_iters);

// Rest posture with the base placed at the pelvis target when there is one.
robot::JointState InitialGuess(const robot::KinematicModel& model,
                               const IkTargets& targets,
                               std::string_view pelvis = "pelvis");

struct JointTrajectory {
  std::vector<double> times;
  std::vector<robot::JointState> states;
};

struct FrameIssue {
  size_t frame = 0;
  double time = 0.0;
  bool not_converged = false;
  bool collision = false;
  bool limit_saturated = false;
};

struct FeasibilityReport {
  size_t frames = 0;
  std::vector<FrameIssue> issues;
  bool empty() const { return issues.empty(); }
};

struct TrajectorySolution {
  JointTrajectory trajectory;
  FeasibilityReport report;
};

// Common time span of all trajectories. Throws InvalidArgument when the
// spans do not overlap.
std::pair<double, double> CommonSpan(
    const std::map<std::string, geom::PoseTrajectory>& trajectories);

// Targets of every trajectory at time t.
IkTargets TargetsAt(const std::map<std::string, geom::PoseTrajectory>& trajs,
                    double t, const robot::JointState& rest);

// Solves every frame of a uniform clock at `rate` over the common span,
// warm-starting from the previous frame. Targets are used as given.
TrajectorySolution SolveTrajectory(
    const robot::KinematicModel& model,
    const std::map<std::string, geom::PoseTrajectory>& targets,
    const IkConfig& config, double rate,
    std::optional<robot::JointState> initial = std::nullopt);

}  // namespace humi::ik

#endif  // HUMI_IK_H_
