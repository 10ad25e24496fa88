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

#include <utility>

#include "humi/error.h"
#include "humi/io.h"
#include "humi/preview.h"

namespace humi::preview {

using Json = nlohmann::json;

Json StateToJson(const robot::KinematicModel& model,
                 const robot::JointState& state) {
  Json q = Json::object();
  for (int i = 0; i < model.num_joints(); ++i) {
    q[model.joints()[i].name] = state.q[i];
  }
  return {{"base_pose", io::PoseToJson(state.base_pose)}, {"q", q}};
}

robot::JointState StateFromJson(const robot::KinematicModel& model,
                                const Json& doc, const std::string& path) {
  io::ExpectObject(doc, path);
  io::RejectUnknownFields(doc, {"base_pose", "q"}, path);
  robot::JointState state = robot::ZeroState(model);
  state.base_pose = io::PoseFromJson(io::Require(doc, "base_pose", path),
                                     path + ".base_pose");
  const Json& q = io::Require(doc, "q", path);
  io::ExpectObject(q, path + ".q");
  for (const auto& [name, value] : q.items()) {
    const int j = model.FindJoint(name);
    if (j < 0) throw ParseError(path + ".q." + name, "unknown joint");
    state.q[j] = io::AsNumber(value, path + ".q." + name);
  }
  if (q.size() != static_cast<size_t>(model.num_joints())) {
    throw ParseError(path + ".q", "expected every joint of the model");
  }
  return state;
}

Targets TargetsFromJson(const Json& doc, const std::string& path) {
  io::ExpectObject(doc, path);
  Targets out;
  for (const auto& [name, value] : doc.items()) {
    out[name] = io::PoseFromJson(value, path + "." + name);
  }
  return out;
}

Json TargetsToJson(const Targets& targets) {
  Json out = Json::object();
  for (const auto& [name, pose] : targets) out[name] = io::PoseToJson(pose);
  return out;
}

Json ToJson(const robot::KinematicModel& model, const Recording& recording) {
  Json updates = Json::array();
  for (const auto& u : recording.updates) {
    updates.push_back({{"targets", TargetsToJson(u.targets)},
                       {"replace", u.replace},
                       {"state", StateToJson(model, u.state)}});
  }
  return {{"format", kRecordingFormat},
          {"model", recording.model},
          {"config", ik::ToJson(recording.config)},
          {"initial_state", StateToJson(model, recording.initial_state)},
          {"initial_targets", TargetsToJson(recording.initial_targets)},
          {"updates", updates}};
}

Recording RecordingFromJson(const robot::KinematicModel& model,
                            const Json& doc, const std::string& path) {
  io::ExpectObject(doc, path);
  io::RejectUnknownFields(doc,
                          {"format", "model", "config", "initial_state",
                           "initial_targets", "updates"},
                          path);
  io::ExpectFormat(doc, kRecordingFormat, path);
  Recording r;
  r.model = io::AsString(io::Require(doc, "model", path), path + ".model");
  r.config = ik::IkConfigFromJson(io::Require(doc, "config", path),
                                  path + ".config");
  r.initial_state = StateFromJson(
      model, io::Require(doc, "initial_state", path), path + ".initial_state");
  r.initial_targets =
      TargetsFromJson(io::Require(doc, "initial_targets", path),
                      path + ".initial_targets");
  const Json& updates = io::Require(doc, "updates", path);
  io::ExpectArray(updates, path + ".updates");
  for (size_t i = 0; i < updates.size(); ++i) {
    const std::string at = path + ".updates[" + std::to_string(i) + "]";
    const Json& u = updates[i];
    io::ExpectObject(u, at);
    io::RejectUnknownFields(u, {"targets", "replace", "state"}, at);
    RecordedUpdate ru;
    ru.targets = TargetsFromJson(io::Require(u, "targets", at), at + ".targets");
    if (u.contains("replace")) {
      if (!u["replace"].is_boolean()) {
        throw ParseError(at + ".replace", "expected a boolean");
      }
      ru.replace = u["replace"].get<bool>();
    }
    ru.state = StateFromJson(model, io::Require(u, "state", at), at + ".state");
    r.updates.push_back(std::move(ru));
  }
  return r;
}

PreviewSession::PreviewSession(
    std::string id, std::string model_id,
    std::shared_ptr<const robot::KinematicModel> model, ik::IkConfig config)
    : id_(std::move(id)),
      model_id_(std::move(model_id)),
      model_(std::move(model)),
      config_(std::move(config)) {
  if (!model_) throw InvalidArgument("preview session without a model");
  ik::Validate(config_.weights);
  if (config_.preview_iterations < 1) {
    throw InvalidArgument("tick budget must be at least one iteration");
  }
  rest_ = robot::ZeroState(*model_);
  state_ = rest_;
}

ik::IkSolution PreviewSession::Solve() {
  ik::IkTargets t{targets_, rest_};
  ik::IkSolution sol = ik::Solve(*model_, state_, t, config_.weights,
                                 config_.tolerance, tick_budget());
  state_ = sol.state;
  return sol;
}

ik::IkSolution PreviewSession::Update(const Targets& targets) {
  ik::CheckTargets(*model_, ik::IkTargets{targets, rest_});
  for (const auto& [name, pose] : targets) targets_[name] = pose;
  ik::IkSolution sol = Solve();
  if (recording_) recording_->updates.push_back({targets, false, state_});
  return sol;
}

ik::IkSolution PreviewSession::Scrub(const Keypoints& episode, double t) {
  Keypoints known;
  for (const auto& [name, traj] : episode) {
    if (model_->FindKeyframe(name) >= 0) known[name] = traj;
  }
  if (known.empty()) {
    throw InvalidArgument("episode has no keypoint the model can track");
  }
  const auto [start, end] = ik::CommonSpan(known);
  if (!(t >= start && t <= end)) {
    throw RangeError("scrub time " + std::to_string(t) +
                     " outside episode span [" + std::to_string(start) + ", " +
                     std::to_string(end) + "]");
  }
  const ik::IkTargets scaled = ik::ScalePelvisHeight(
      ik::TargetsAt(known, t, rest_), config_.human_height,
      config_.robot_height);
  targets_ = scaled.poses;
  ik::IkSolution sol = Solve();
  if (recording_) recording_->updates.push_back({targets_, true, state_});
  return sol;
}

ik::IkSolution PreviewSession::Current() const {
  return ik::Evaluate(*model_, state_, ik::IkTargets{targets_, rest_},
                      config_.tolerance);
}

void PreviewSession::Reset(const robot::JointState& state, Targets targets) {
  robot::CheckState(*model_, state);
  ik::CheckTargets(*model_, ik::IkTargets{targets, rest_});
  state_ = state;
  targets_ = std::move(targets);
}

void PreviewSession::StartRecording() {
  Recording r;
  r.model = model_id_;
  r.config = config_;
  r.initial_state = state_;
  r.initial_targets = targets_;
  recording_ = std::move(r);
}

Recording PreviewSession::StopRecording() {
  if (!recording_) throw InvalidArgument("session is not recording");
  Recording r = std::move(*recording_);
  recording_.reset();
  return r;
}

std::vector<robot::JointState> Replay(
    std::shared_ptr<const robot::KinematicModel> model,
    const Recording& recording) {
  PreviewSession session("replay", recording.model, std::move(model),
                         recording.config);
  session.Reset(recording.initial_state, recording.initial_targets);
  std::vector<robot::JointState> out;
  for (const auto& u : recording.updates) {
    if (u.replace) session.Reset(session.state(), {});
    session.Update(u.targets);
    out.push_back(session.state());
  }
  return out;
}

namespace {

std::string TypeOf(const Json& m) {
  if (m.is_object() && m.contains("type") && m["type"].is_string()) {
    return m["type"].get<std::string>();
  }
  return {};
}

std::optional<std::string> SessionOf(const Json& m) {
  if (m.is_object() && m.contains("session") && m["session"].is_string()) {
    return m["session"].get<std::string>();
  }
  return std::nullopt;
}

bool HasTargetObject(const Json& m) {
  return m.contains("payload") && m["payload"].is_object() &&
         m["payload"].contains("targets") &&
         m["payload"]["targets"].is_object();
}

}  // namespace

MessageQueue::MessageQueue(size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw InvalidArgument("queue capacity must be positive");
}

std::optional<std::string> MessageQueue::Push(Json message) {
  std::optional<std::string> dropped_session;
  if (items_.size() >= capacity_) {
    auto victim = items_.begin();
    for (auto it = items_.begin(); it != items_.end(); ++it) {
      if (TypeOf(*it) == "targets") {
        victim = it;
        break;
      }
    }
    const bool is_targets = TypeOf(*victim) == "targets";
    dropped_session = SessionOf(*victim);
    if (is_targets && HasTargetObject(*victim)) {
      // fold into the next pending update of the same session
      Json* next = nullptr;
      for (auto it = std::next(victim); it != items_.end() && !next; ++it) {
        if (TypeOf(*it) == "targets" && SessionOf(*it) == dropped_session &&
            HasTargetObject(*it)) {
          next = &*it;
        }
      }
      if (!next && TypeOf(message) == "targets" &&
          SessionOf(message) == dropped_session && HasTargetObject(message)) {
        next = &message;
      }
      if (next) {
        Json& into = (*next)["payload"]["targets"];
        for (const auto& [k, v] : (*victim)["payload"]["targets"].items()) {
          if (!into.contains(k)) into[k] = v;
        }
      }
    }
    items_.erase(victim);
    ++dropped_;
    if (!dropped_session) dropped_session = std::string();
  }
  items_.push_back(std::move(message));
  return dropped_session;
}

std::optional<Json> MessageQueue::Pop() {
  if (items_.empty()) return std::nullopt;
  Json m = std::move(items_.front());
  items_.pop_front();
  return m;
}

}  // namespace humi::preview
