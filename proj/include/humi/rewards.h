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

#ifndef HUMI_REWARDS_H_
#define HUMI_REWARDS_H_

#include <map>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "humi/geom.h"
#include "humi/robot.h"

namespace humi::rewards {

inline constexpr double kDegree = std::numbers::pi / 180.0;

struct SigmaRange {
  double min = 0.0;
  double max = 0.0;
};

enum class EeMode { kAdaptive, kFixed };

// Tracking reward and penalty constants. Angles are radians in memory and
// degrees in config files.
struct TrackingRewardConfig {
  // whole-body kernels
  double sigma_p = 0.3;
  double sigma_theta = 0.4;
  double sigma_v = 1.0;
  double sigma_w = std::numbers::pi;
  // adaptive end-effector tolerance
  SigmaRange ee_position{0.01, 0.1};
  SigmaRange ee_rotation{5.0 * kDegree, 20.0 * kDegree};
  double v_min = 0.05;
  double v_max = 0.1;
  double gate_delta = 0.02;
  double w_body = 1.0;
  double w_ee_max = 0.5;
  EeMode mode = EeMode::kAdaptive;
  // tight constant tolerance used by EeMode::kFixed
  double fixed_sigma_p = 0.01;
  double fixed_sigma_theta = 5.0 * kDegree;
  double fixed_w_ee = 0.5;
  // curriculum over training steps
  double ramp_start = 10000.0;
  double ramp_end = 15000.0;
  double sigma_p_min_start = 0.1;  // annealed to ee_position.min
  double speed_sigma_start = 1e-4;
  double speed_sigma_end = 1.0;
  // penalties
  double w_action_rate = -5e-2;
  double w_joint_limit = -10.0;
  double w_contact = -0.1;
  double contact_threshold = 1.0;  // N
  std::vector<std::string> contact_exempt = {"ankle", "knee", "hip"};
};

// Throws InvalidArgument naming the first broken constraint.
void Validate(const TrackingRewardConfig& config);

TrackingRewardConfig RewardConfigFromJson(const nlohmann::json& doc,
                                          const std::string& path);
nlohmann::json ToJson(const TrackingRewardConfig& config);

struct CurriculumState {
  double step = 0.0;
  double w_ee = 0.0;
  double sigma_p_min = 0.1;
  double speed_sigma = 1e-4;
};

// Piecewise linear in step over [ramp_start, ramp_end], constant outside.
CurriculumState CurriculumAt(double step, const TrackingRewardConfig& config);

// exp(-error_sq / sigma^2). Throws InvalidArgument for a negative error or
// non-positive sigma.
double Kernel(double error_sq, double sigma);

// clip(linear map of [v_min, v_max] onto [range.min, range.max]).
double EeTolerance(double v_ref_ee, const SigmaRange& range, double v_min,
                   double v_max);

enum class EeMetric { kPosition, kRotation };

// Tolerance at the configured (un-annealed) minimum.
double EeTolerance(double v_ref_ee, EeMetric metric,
                   const TrackingRewardConfig& config);

struct BodySample {
  std::string name;
  geom::Pose ref;
  geom::Pose actual;
  geom::Twist ref_twist;
  geom::Twist actual_twist;
};

struct EeSample {
  std::string name;
  geom::Pose ref;
  geom::Pose actual;
  double ref_speed = 0.0;  // |reference linear velocity|, m/s
};

struct TrackingSample {
  std::vector<BodySample> bodies;
  std::vector<EeSample> end_effectors;
  double ref_base_speed = 0.0;  // m/s
};

// Sum over position, rotation, linear and angular velocity of the kernel of
// the mean squared error over bodies. Throws InvalidArgument when empty.
double BodyReward(const TrackingSample& sample,
                  const TrackingRewardConfig& config);

// Gated adaptive EE reward, or the fixed variant. The adaptive tolerance is
// driven by the mean reference speed of the end-effectors. Throws
// InvalidArgument without end-effectors.
double EeReward(const TrackingSample& sample,
                const TrackingRewardConfig& config,
                const CurriculumState& curriculum);

struct TrackingReward {
  double r_body = 0.0;
  double r_ee = 0.0;
  double w_ee = 0.0;
  double total = 0.0;
};

// w_body * r_body + w_ee * r_ee. With w_ee == 0 the EE part of the sample
// is never read.
TrackingReward TotalTrackingReward(const TrackingSample& sample,
                                   const TrackingRewardConfig& config,
                                   const CurriculumState& curriculum);

struct PenaltyBreakdown {
  double action_rate = 0.0;
  double joint_limits = 0.0;
  double contacts = 0.0;
  double total = 0.0;
};

// Action-rate, joint-limit and undesired-contact penalties (all <= 0).
// `contacts` maps link names to force magnitudes in newtons. Throws
// InvalidArgument on action length mismatch or an unknown link.
PenaltyBreakdown Penalties(const Eigen::VectorXd& action,
                           const Eigen::VectorXd& previous_action,
                           const robot::JointState& state,
                           const robot::KinematicModel& model,
                           const std::map<std::string, double>& contacts,
                           const TrackingRewardConfig& config);

struct FrameReward {
  double time = 0.0;
  TrackingReward tracking;
  PenaltyBreakdown penalties;
  bool gated = false;  // adaptive EE term switched off by base speed
};

struct TraceInput {
  std::map<std::string, geom::PoseTrajectory> reference;
  std::map<std::string, geom::PoseTrajectory> tracked;
  std::vector<std::string> end_effectors;
  std::string base = "pelvis";
  // optional joint trajectory of the tracker (one state per frame); actions
  // are taken to be the joint targets
  std::vector<robot::JointState> joints;
};

// Per-frame rewards at the reference sample times. Every tracked frame must
// share the reference timestamps (within 1e-9 s); otherwise InvalidArgument.
std::vector<FrameReward> EvaluateTrace(const TraceInput& input,
                                       const robot::KinematicModel* model,
                                       const TrackingRewardConfig& config,
                                       double step);

}  // namespace humi::rewards

#endif  // HUMI_REWARDS_H_
