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

#ifndef HUMI_TRACKSIM_H_
#define HUMI_TRACKSIM_H_

#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "humi/chunk.h"
#include "humi/geom.h"

namespace humi::tracksim {

// Speed of the constant-velocity fixture; with the default gain the
// steady-state lag is 5 cm.
inline constexpr double kFixtureSpeed = 1.0;  // m/s

// Kinematic stand-in for a low-level tracking controller: first-order
// pursuit x' = gain * (r - x) of the (delayed) target, integrated exactly
// over each control step with the target moving linearly across the step,
// plus optional noise. Blind keypoints see the world through an estimate
// that carries a bias of drift_offset + drift_rate * t * drift_axis.
struct TrackerModel {
  double gain = 20.0;           // 1/s; gain * dt >= 1 snaps to the target
  double latency = 0.0;         // s, rounded to whole control steps
  double noise_position = 0.0;  // m per axis per step
  double noise_rotation = 0.0;  // rad per axis per step
  double drift_rate = 0.0;      // m/s
  geom::Vec3 drift_axis = geom::Vec3::UnitZ();
  geom::Vec3 drift_offset = geom::Vec3::Zero();
  std::vector<std::string> blind = {"pelvis"};
  double dt = chunk::kControlDt;
};

// Throws InvalidArgument for negative gain, latency, noise or drift rate, a
// non-positive dt, or a zero drift axis.
void Validate(const TrackerModel& model);
TrackerModel TrackerModelFromJson(const nlohmann::json& doc,
                                  const std::string& path);
nlohmann::json ToJson(const TrackerModel& model);

// |v| * (1 / gain + latency): the distance a first-order follower trails a
// target moving at constant speed.
double SteadyStateLag(double speed, const TrackerModel& model);

enum class Feedback {
  kWorld,           // blind keypoints are corrected from the biased estimate
  kProprioceptive,  // corrections use the true pose
};

class Tracker {
 public:
  Tracker(TrackerModel model, chunk::KeypointPoses initial, uint64_t seed);

  const chunk::KeypointPoses& poses() const { return poses_; }
  // World-frame estimate: true poses with the bias on blind keypoints.
  chunk::KeypointPoses Estimate() const;
  geom::Vec3 Bias() const;
  bool IsBlind(const std::string& keypoint) const;
  int64_t step() const { return step_; }
  double time() const { return static_cast<double>(step_) * model_.dt; }

  // Advances one control step toward `targets`, the poses commanded for the
  // end of the step; the target is taken to move linearly from the previous
  // command. Keypoints without a target hold still, as does everything
  // until the latency has elapsed.
  void Step(const chunk::KeypointPoses& targets,
            Feedback feedback = Feedback::kWorld);

  // Replaces the current command without moving, e.g. when a new chunk
  // re-anchors the target at the present step.
  void Retarget(const chunk::KeypointPoses& targets);

 private:
  struct Segment {
    chunk::KeypointPoses from;
    chunk::KeypointPoses to;
  };

  TrackerModel model_;
  chunk::KeypointPoses poses_;
  chunk::KeypointPoses command_;
  std::deque<Segment> queue_;
  std::mt19937_64 rng_;
  int64_t step_ = 0;
};

struct ErrorStats {
  double mean_position = 0.0;
  double max_position = 0.0;
  double mean_rotation = 0.0;
  double max_rotation = 0.0;
};

struct BoundaryRecord {
  int64_t step = 0;
  double position = 0.0;  // max over keypoints
  double rotation = 0.0;
};

struct EpisodeMetrics {
  std::map<std::string, ErrorStats> tracking;  // true pose vs commanded
  std::vector<BoundaryRecord> boundaries;
  int64_t steps = 0;

  double MaxBoundaryPosition() const;
};

// Replays a policy chunk stream (relative waypoints) at the control rate,
// anchoring each chunk with NextReference from the tracker's world estimate.
// `initial` seeds the tracker. steps <= 0 runs until one chunk period past
// the last issue (or one chunk horizon for a single chunk). Throws
// InvalidArgument for an empty stream, a first chunk issued after step 0,
// or chunks out of order.
EpisodeMetrics RunEpisode(const std::vector<chunk::CommandChunk>& stream,
                          chunk::ReferenceMode mode, const TrackerModel& model,
                          const chunk::KeypointPoses& initial, uint64_t seed,
                          int64_t steps = 0);

// Straight-line keypoint motion at `speed` along x, sampled at 50 Hz.
std::map<std::string, geom::PoseTrajectory> ConstantVelocityFixture(
    const std::string& keypoint, double speed, double duration);

enum class CommandStyle { kAbsolute, kRelative };

const char* ToString(CommandStyle style);
CommandStyle ParseCommandStyle(const std::string& text);

struct DriftResult {
  std::vector<double> times;
  std::vector<double> target_error;  // effective target vs reference, m
  std::vector<double> pose_error;    // true pose vs reference, m
  double final_target_error = 0.0;
  double final_pose_error = 0.0;
  // Commands handed to the tracker. Relative style: blind waypoints of each
  // student command. Absolute style: the world targets at each schedule step.
  std::vector<chunk::BlindWaypoint> relative_commands;
  std::vector<geom::Pose> absolute_targets;
};

// Drives one blind keypoint along `reference` for `duration` seconds,
// re-planning every `stride` control steps. Absolute commands are pursued
// through the biased world estimate; relative commands are chained from the
// previous target and pursued proprioceptively. The reference must cover
// duration plus the command horizon; otherwise InvalidArgument.
DriftResult DriftExperiment(const geom::PoseTrajectory& reference,
                            CommandStyle style, const TrackerModel& model,
                            double duration, uint64_t seed,
                            int64_t stride = chunk::ScheduleStride());

nlohmann::json ToJson(const EpisodeMetrics& metrics);
nlohmann::json ToJson(const DriftResult& result);

}  // namespace humi::tracksim

#endif  // HUMI_TRACKSIM_H_
