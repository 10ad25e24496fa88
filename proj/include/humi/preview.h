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

#ifndef HUMI_PREVIEW_H_
#define HUMI_PREVIEW_H_

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "humi/geom.h"
#include "humi/ik.h"
#include "humi/robot.h"

// Live IK preview: sessions that merge streamed keyframe targets and run a
// fixed number of solver iterations per update, plus the message layer of
// the "humi-preview/1" protocol. Transport lives in preview_server.h.
namespace humi::preview {

inline constexpr char kProtocol[] = "humi-preview/1";
inline constexpr char kRecordingFormat[] = "humi-preview-recording/1";

using Targets = std::map<std::string, geom::Pose>;
using Keypoints = std::map<std::string, geom::PoseTrajectory>;

nlohmann::json StateToJson(const robot::KinematicModel& model,
                           const robot::JointState& state);
robot::JointState StateFromJson(const robot::KinematicModel& model,
                                const nlohmann::json& doc,
                                const std::string& path);
// {keyframe: pose}; throws ParseError on a malformed pose.
Targets TargetsFromJson(const nlohmann::json& doc, const std::string& path);
nlohmann::json TargetsToJson(const Targets& targets);

struct RecordedUpdate {
  Targets targets;  // as received, before merging
  bool replace = false;  // scrub: targets replace the held set
  robot::JointState state;
};

// Everything needed to reproduce a captured target/solution stream.
struct Recording {
  std::string model;
  ik::IkConfig config;
  robot::JointState initial_state;
  Targets initial_targets;
  std::vector<RecordedUpdate> updates;
};

nlohmann::json ToJson(const robot::KinematicModel& model,
                      const Recording& recording);
Recording RecordingFromJson(const robot::KinematicModel& model,
                            const nlohmann::json& doc,
                            const std::string& path);

// One live solve loop. Not thread-safe; PreviewService serializes access.
class PreviewSession {
 public:
  PreviewSession(std::string id, std::string model_id,
                 std::shared_ptr<const robot::KinematicModel> model,
                 ik::IkConfig config);

  const std::string& id() const { return id_; }
  const std::string& model_id() const { return model_id_; }
  const robot::KinematicModel& model() const { return *model_; }
  const ik::IkConfig& config() const { return config_; }
  const robot::JointState& state() const { return state_; }
  const Targets& targets() const { return targets_; }
  int tick_budget() const { return config_.preview_iterations; }

  // Merges `targets` over the held ones and runs up to tick_budget solver
  // iterations from the current state. Unknown keyframes throw
  // InvalidArgument and leave the session untouched.
  ik::IkSolution Update(const Targets& targets);

  // Replaces the targets with the episode keypoints at time t (pelvis height
  // scaled as in packaging) and solves. RangeError outside the common span.
  ik::IkSolution Scrub(const Keypoints& episode, double t);

  // Residuals and flags of the current state.
  ik::IkSolution Current() const;

  // Sets state and held targets without solving. Throws InvalidArgument on
  // a state or keyframe that does not fit the model.
  void Reset(const robot::JointState& state, Targets targets);

  void StartRecording();
  // Throws InvalidArgument when not recording.
  Recording StopRecording();
  bool recording() const { return recording_.has_value(); }

 private:
  ik::IkSolution Solve();

  std::string id_;
  std::string model_id_;
  std::shared_ptr<const robot::KinematicModel> model_;
  ik::IkConfig config_;
  robot::JointState rest_;
  robot::JointState state_;
  Targets targets_;
  std::optional<Recording> recording_;
};

// Feeds a recording into a fresh session and returns the solution stream.
std::vector<robot::JointState> Replay(
    std::shared_ptr<const robot::KinematicModel> model,
    const Recording& recording);

// Bounded FIFO of inbound protocol messages for one client channel. When
// full, the oldest pending "targets" message is dropped; its poses are
// folded into the next pending "targets" message of the same session so
// that held targets still merge as sent. Without any pending "targets"
// message the oldest message is dropped.
class MessageQueue {
 public:
  explicit MessageQueue(size_t capacity);

  // Returns the session of a dropped message, if one was dropped.
  std::optional<std::string> Push(nlohmann::json message);
  std::optional<nlohmann::json> Pop();
  size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  uint64_t dropped() const { return dropped_; }

 private:
  size_t capacity_;
  std::deque<nlohmann::json> items_;
  uint64_t dropped_ = 0;
};

// Transport-free service: model and episode registries, sessions, and the
// protocol handler. Thread-safe; updates to one session are serialized,
// different sessions proceed independently.
class PreviewService {
 public:
  explicit PreviewService(ik::IkConfig defaults = {});

  void AddModel(const std::string& id, robot::KinematicModel model);
  void AddEpisode(const std::string& id, Keypoints keypoints);
  std::vector<std::string> ModelIds() const;
  std::vector<std::string> EpisodeIds() const;

  // Handles one request message and returns the reply ("state" or
  // "error"). Never throws for bad input.
  nlohmann::json Handle(const nlohmann::json& message);
  nlohmann::json HandleText(std::string_view text);

  // GET /health body.
  nlohmann::json Health() const;
  // POST /solve: single-frame or whole-trajectory batch solve. Throws
  // ParseError or InvalidArgument on a bad request.
  nlohmann::json Solve(const nlohmann::json& request) const;

  void NoteDropped(const std::string& session, uint64_t count = 1);
  size_t num_sessions() const;
  bool HasSession(const std::string& id) const;
  void CloseSession(const std::string& id);
  void CloseAll();

 private:
  struct Slot {
    std::mutex mutex;
    std::unique_ptr<PreviewSession> session;
    uint64_t dropped = 0;
  };

  std::shared_ptr<const robot::KinematicModel> FindModel(
      const std::string& id) const;
  std::shared_ptr<Slot> FindSlot(const std::string& id) const;
  nlohmann::json Open(const nlohmann::json& message);
  nlohmann::json StateReply(const nlohmann::json& message, Slot& slot,
                            const ik::IkSolution& solution) const;

  ik::IkConfig defaults_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const robot::KinematicModel>> models_;
  std::map<std::string, std::shared_ptr<const Keypoints>> episodes_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  uint64_t next_session_ = 1;
};

}  // namespace humi::preview

#endif  // HUMI_PREVIEW_H_
