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

#ifndef HUMI_CHUNK_H_
#define HUMI_CHUNK_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "humi/geom.h"

namespace humi::chunk {

inline constexpr double kControlDt = 1.0 / 50.0;   // low-level control step
inline constexpr double kWaypointDt = 1.0 / 20.0;  // policy action rate
inline constexpr int kActionHorizon = 48;
inline constexpr double kCommandHorizon = 2.0;  // s
inline constexpr int kCommandCount = 10;

inline constexpr char kChunkStreamFormat[] = "humi-chunks/1";

enum class ReferenceMode { kTargetPose, kExecutedPose };

const char* ToString(ReferenceMode mode);
// Accepts "target" and "executed". Throws InvalidArgument otherwise.
ReferenceMode ParseReferenceMode(const std::string& text);

using KeypointPoses = std::map<std::string, geom::Pose>;
using KeypointWaypoints = std::map<std::string, std::vector<geom::Pose>>;

// One block of future keypoint targets. Waypoint i of every keypoint is
// scheduled waypoint_dt * i seconds after the chunk is issued.
struct CommandChunk {
  int64_t issued_at = 0;  // control step
  double waypoint_dt = kWaypointDt;
  double control_dt = kControlDt;
  KeypointPoses reference;
  KeypointWaypoints relative;
  std::map<std::string, std::vector<double>> gripper_widths;
  KeypointWaypoints absolute;  // reference * relative

  size_t num_waypoints() const;

  // Scheduled target at a control step: linear/slerp between waypoints,
  // the first waypoint before issue and the last one past the horizon.
  // Throws InvalidArgument for an unknown keypoint.
  geom::Pose TargetAt(const std::string& keypoint, int64_t step) const;
  KeypointPoses TargetsAt(int64_t step) const;
};

// absolute[k][i] = reference[k] * relative[k][i]. Throws InvalidArgument on
// empty waypoints, ragged waypoint counts, or a keypoint missing from the
// reference.
CommandChunk ComposeChunk(
    KeypointWaypoints relative, const KeypointPoses& reference,
    int64_t issued_at,
    std::map<std::string, std::vector<double>> gripper_widths = {},
    double waypoint_dt = kWaypointDt, double control_dt = kControlDt);

// Anchor for the chunk issued at `step`. kTargetPose returns the previous
// chunk's scheduled targets at that step and never reads `executed`;
// kExecutedPose returns `executed`. Without a previous chunk both modes
// return `executed`.
KeypointPoses NextReference(ReferenceMode mode, const CommandChunk* previous,
                            const KeypointPoses& executed, int64_t step);

struct Discontinuity {
  double position = 0.0;  // m
  double rotation = 0.0;  // rad
};

// Distance between prev's scheduled target at next.issued_at and next's
// first waypoint, for every keypoint the two chunks share. Throws
// InvalidArgument when next is issued before prev.
std::map<std::string, Discontinuity> BoundaryDiscontinuity(
    const CommandChunk& prev, const CommandChunk& next);

// floor(horizon / (count * control_dt)) control steps.
int64_t ScheduleStride(double horizon = kCommandHorizon,
                       int count = kCommandCount,
                       double control_dt = kControlDt);

// t + k * stride for k = 1..count. Throws InvalidArgument for t < 0,
// non-positive horizon/count/control_dt, or a zero stride.
std::vector<int64_t> SampleSchedule(int64_t t,
                                    double horizon = kCommandHorizon,
                                    int count = kCommandCount,
                                    double control_dt = kControlDt);

// Pelvis pose with only its heading kept.
geom::Pose LocalizationFrame(const geom::Pose& pelvis);

// Rotation vectors throughout. EE quantities are expressed in the
// localization frame; blind quantities are world-frame differences.
struct EeWaypoint {
  geom::Vec3 position = geom::Vec3::Zero();
  geom::Vec3 rotation = geom::Vec3::Zero();
  geom::Vec3 position_delta = geom::Vec3::Zero();  // p_ref - p
  geom::Vec3 rotation_delta = geom::Vec3::Zero();  // theta_ref (-) theta
};

struct BlindWaypoint {
  geom::Vec3 position_delta = geom::Vec3::Zero();  // p_ref(t_k) - p_ref(t)
  geom::Vec3 rotation_delta = geom::Vec3::Zero();  // theta_ref(t_k) (-) theta_ref(t)
};

struct StudentCommand {
  std::vector<int64_t> schedule;
  std::map<std::string, std::vector<EeWaypoint>> ee;
  std::map<std::string, std::vector<BlindWaypoint>> blind;
};

struct StudentCommandConfig {
  double horizon = kCommandHorizon;
  int count = kCommandCount;
  double control_dt = kControlDt;
};

// Control step n maps to trajectory time n * control_dt. The current
// measured pose of each EE is compared against every future reference
// waypoint. Blind entries read reference poses only. Throws RangeError when
// a scheduled time is outside a reference, InvalidArgument when an EE has
// no measured pose.
StudentCommand BuildStudentCommand(
    const std::map<std::string, geom::PoseTrajectory>& ee_refs,
    const std::map<std::string, geom::PoseTrajectory>& blind_refs,
    const KeypointPoses& measured, int64_t t, const geom::Pose& localization,
    const StudentCommandConfig& config = {});

// Stands in for the high-level policy: replays reference keypoint motion as
// relative waypoints, each chunk expressed in the frame of the reference
// pose at its issue time (so waypoint 0 is the identity). Queries past the
// end of a reference hold its last pose.
class ScriptedPolicy {
 public:
  explicit ScriptedPolicy(std::map<std::string, geom::PoseTrajectory> reference,
                          std::map<std::string, geom::ScalarSeries> widths = {},
                          int horizon = kActionHorizon,
                          double waypoint_dt = kWaypointDt,
                          double control_dt = kControlDt);

  // Chunk with relative waypoints and widths only; anchor it with
  // ComposeChunk.
  CommandChunk Predict(int64_t step) const;

  const std::map<std::string, geom::PoseTrajectory>& reference() const {
    return reference_;
  }

 private:
  std::map<std::string, geom::PoseTrajectory> reference_;
  std::map<std::string, geom::ScalarSeries> widths_;
  int horizon_;
  double waypoint_dt_;
  double control_dt_;
};

// Predictions issued every `stride` control steps for steps [0, steps).
std::vector<CommandChunk> PolicyStream(const ScriptedPolicy& policy,
                                       int64_t steps, int64_t stride);

nlohmann::json ChunkToJson(const CommandChunk& chunk);
// Rebuilds `absolute` from reference and relative.
CommandChunk ChunkFromJson(const nlohmann::json& doc, const std::string& path);

// Line-delimited: a header record {"format": ...} then one chunk per line.
void WriteChunkStream(const std::string& file,
                      const std::vector<CommandChunk>& chunks);
std::vector<CommandChunk> ReadChunkStream(const std::string& file);

}  // namespace humi::chunk

#endif  // HUMI_CHUNK_H_
