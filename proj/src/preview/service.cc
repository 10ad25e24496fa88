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
#include "humi/ingest.h"
#include "humi/io.h"
#include "humi/preview.h"
#include "humi/version.h"

namespace humi::preview {

using Json = nlohmann::json;

namespace {

Json Feasibility(const ik::IkSolution& sol) {
  return {{"converged", sol.converged},
          {"collision_flags", sol.collision_flags},
          {"limit_flags", sol.limit_flags}};
}

Json SolutionToJson(const robot::KinematicModel& model,
                    const ik::IkSolution& sol) {
  Json out = Feasibility(sol);
  Json residuals = Json::object();
  for (const auto& r : sol.residuals) {
    residuals[r.keyframe] = {{"position", r.position},
                             {"rotation", r.rotation}};
  }
  out["residuals"] = residuals;
  out["iterations"] = sol.iterations;
  out["state"] = StateToJson(model, sol.state);
  return out;
}

Json ErrorReply(const Json& seq, const std::string& session,
                const std::string& code, const std::string& message,
                const std::string& path = {}) {
  Json payload = {{"code", code}, {"message", message}};
  if (!path.empty()) payload["path"] = path;
  Json reply = {{"type", "error"}, {"seq", seq}, {"payload", payload}};
  reply["session"] = session.empty() ? Json(nullptr) : Json(session);
  return reply;
}

Json SeqOf(const Json& message) {
  if (message.is_object() && message.contains("seq") &&
      message["seq"].is_number_integer()) {
    return message["seq"];
  }
  return nullptr;
}

const Json& PayloadOf(const Json& message) {
  static const Json kEmpty = Json::object();
  if (!message.contains("payload")) return kEmpty;
  io::ExpectObject(message["payload"], "payload");
  return message["payload"];
}

}  // namespace

PreviewService::PreviewService(ik::IkConfig defaults)
    : defaults_(std::move(defaults)) {
  ik::Validate(defaults_.weights);
}

void PreviewService::AddModel(const std::string& id,
                              robot::KinematicModel model) {
  std::lock_guard lock(mutex_);
  models_[id] = std::make_shared<const robot::KinematicModel>(std::move(model));
}

void PreviewService::AddEpisode(const std::string& id, Keypoints keypoints) {
  std::lock_guard lock(mutex_);
  episodes_[id] = std::make_shared<const Keypoints>(std::move(keypoints));
}

std::vector<std::string> PreviewService::ModelIds() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, m] : models_) out.push_back(id);
  return out;
}

std::vector<std::string> PreviewService::EpisodeIds() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, e] : episodes_) out.push_back(id);
  return out;
}

std::shared_ptr<const robot::KinematicModel> PreviewService::FindModel(
    const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = models_.find(id);
  return it == models_.end() ? nullptr : it->second;
}

std::shared_ptr<PreviewService::Slot> PreviewService::FindSlot(
    const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

Json PreviewService::StateReply(const Json& message, Slot& slot,
                                const ik::IkSolution& solution) const {
  const PreviewSession& s = *slot.session;
  Json payload = SolutionToJson(s.model(), solution);
  payload["model"] = s.model_id();
  payload["tick_budget"] = s.tick_budget();
  payload["dropped"] = slot.dropped;
  payload["recording"] = s.recording();
  Json keyframes = Json::object();
  for (const auto& [name, pose] : robot::ForwardKinematics(s.model(), s.state())) {
    keyframes[name] = io::PoseToJson(pose);
  }
  payload["keyframes"] = keyframes;
  payload["targets"] = TargetsToJson(s.targets());
  return {{"type", "state"},
          {"session", s.id()},
          {"seq", SeqOf(message)},
          {"payload", payload}};
}

Json PreviewService::Open(const Json& message) {
  const Json& payload = PayloadOf(message);
  io::RejectUnknownFields(payload, {"model", "config"}, "payload");
  const std::string model_id =
      io::AsString(io::Require(payload, "model", "payload"), "payload.model");
  auto model = FindModel(model_id);
  if (!model) {
    return ErrorReply(SeqOf(message), "", "unknown_model",
                      "no model registered as '" + model_id + "'");
  }
  ik::IkConfig config = defaults_;
  if (payload.contains("config")) {
    io::ExpectObject(payload["config"], "payload.config");
    Json merged = ik::ToJson(defaults_);
    merged.merge_patch(payload["config"]);
    config = ik::IkConfigFromJson(merged, "payload.config");
  }
  auto slot = std::make_shared<Slot>();
  std::string id;
  {
    std::lock_guard lock(mutex_);
    id = "s" + std::to_string(next_session_++);
  }
  slot->session = std::make_unique<PreviewSession>(id, model_id, model, config);
  std::lock_guard slot_lock(slot->mutex);
  {
    std::lock_guard lock(mutex_);
    sessions_[id] = slot;
  }
  Json reply = StateReply(message, *slot, slot->session->Current());
  reply["payload"]["protocol"] = kProtocol;
  Json joints = Json::array();
  for (const auto& j : model->joints()) joints.push_back(j.name);
  reply["payload"]["joints"] = joints;
  return reply;
}

Json PreviewService::HandleText(std::string_view text) {
  Json message;
  try {
    message = io::ParseJson(text, "message");
  } catch (const ParseError& e) {
    return ErrorReply(nullptr, "", "bad_message", e.what(), e.path());
  }
  return Handle(message);
}

Json PreviewService::Handle(const Json& message) {
  const Json seq = SeqOf(message);
  std::string session_id;
  std::shared_ptr<Slot> slot;
  std::unique_lock<std::mutex> slot_lock;
  try {
    io::ExpectObject(message, "message");
    io::RejectUnknownFields(message, {"type", "session", "payload", "seq"},
                            "message");
    if (message.contains("seq") && !message["seq"].is_number_integer()) {
      throw ParseError("message.seq", "expected an integer");
    }
    const std::string type =
        io::AsString(io::Require(message, "type", "message"), "message.type");
    if (type == "open") return Open(message);
    session_id = io::AsString(io::Require(message, "session", "message"),
                              "message.session");
    slot = FindSlot(session_id);
    if (slot) slot_lock = std::unique_lock(slot->mutex);
    if (!slot || !slot->session) {
      const std::string id = session_id;
      session_id.clear();
      return ErrorReply(seq, id, "unknown_session",
                        "no open session '" + id + "'");
    }
    PreviewSession& s = *slot->session;
    const Json& payload = PayloadOf(message);
    if (type == "targets") {
      io::RejectUnknownFields(payload, {"targets"}, "payload");
      const Targets targets = TargetsFromJson(
          io::Require(payload, "targets", "payload"), "payload.targets");
      return StateReply(message, *slot, s.Update(targets));
    }
    if (type == "scrub") {
      io::RejectUnknownFields(payload, {"episode", "t"}, "payload");
      const std::string episode = io::AsString(
          io::Require(payload, "episode", "payload"), "payload.episode");
      const double t =
          io::AsNumber(io::Require(payload, "t", "payload"), "payload.t");
      std::shared_ptr<const Keypoints> keypoints;
      {
        std::lock_guard lock(mutex_);
        const auto it = episodes_.find(episode);
        if (it != episodes_.end()) keypoints = it->second;
      }
      if (!keypoints) {
        Json reply = ErrorReply(seq, session_id, "unknown_episode",
                                "no episode loaded as '" + episode + "'");
        reply["payload"].update(Feasibility(s.Current()));
        return reply;
      }
      return StateReply(message, *slot, s.Scrub(*keypoints, t));
    }
    if (type == "record_start") {
      s.StartRecording();
      return StateReply(message, *slot, s.Current());
    }
    if (type == "record_stop") {
      const Recording recording = s.StopRecording();
      Json reply = StateReply(message, *slot, s.Current());
      reply["payload"]["recording"] = ToJson(s.model(), recording);
      return reply;
    }
    if (type == "state") return StateReply(message, *slot, s.Current());
    if (type == "close") {
      Json reply = StateReply(message, *slot, s.Current());
      reply["payload"]["closed"] = true;
      slot->session.reset();
      slot_lock.unlock();
      CloseSession(session_id);
      return reply;
    }
    Json reply = ErrorReply(seq, session_id, "unknown_type",
                            "unknown message type '" + type + "'");
    reply["payload"].update(Feasibility(s.Current()));
    return reply;
  } catch (const Error& e) {
    std::string code = "failed";
    std::string path;
    if (const auto* p = dynamic_cast<const ParseError*>(&e)) {
      code = "bad_message";
      path = p->path();
    } else if (dynamic_cast<const RangeError*>(&e)) {
      code = "out_of_span";
    } else if (dynamic_cast<const InvalidArgument*>(&e)) {
      code = "invalid";
    }
    Json reply = ErrorReply(seq, session_id, code, e.what(), path);
    if (slot && slot->session) {
      reply["payload"].update(Feasibility(slot->session->Current()));
    }
    return reply;
  }
}

Json PreviewService::Health() const {
  Json out = {{"status", "ok"},
              {"version", kVersion},
              {"protocol", kProtocol},
              {"models", ModelIds()},
              {"episodes", EpisodeIds()}};
  out["sessions"] = num_sessions();
  return out;
}

Json PreviewService::Solve(const Json& request) const {
  io::ExpectObject(request, "request");
  io::RejectUnknownFields(request,
                          {"model", "config", "targets", "initial",
                           "iterations", "trajectories", "rate"},
                          "request");
  const std::string model_id =
      io::AsString(io::Require(request, "model", "request"), "request.model");
  const auto model = FindModel(model_id);
  if (!model) {
    throw InvalidArgument("no model registered as '" + model_id + "'");
  }
  ik::IkConfig config = defaults_;
  if (request.contains("config")) {
    io::ExpectObject(request["config"], "request.config");
    Json merged = ik::ToJson(defaults_);
    merged.merge_patch(request["config"]);
    config = ik::IkConfigFromJson(merged, "request.config");
  }
  std::optional<robot::JointState> initial;
  if (request.contains("initial")) {
    initial = StateFromJson(*model, request["initial"], "request.initial");
  }
  const bool single = request.contains("targets");
  const bool batch = request.contains("trajectories");
  if (single == batch) {
    throw ParseError("request",
                     "expected exactly one of 'targets' or 'trajectories'");
  }
  if (single) {
    if (request.contains("rate")) {
      throw ParseError("request.rate", "only valid with 'trajectories'");
    }
    ik::IkTargets targets{
        TargetsFromJson(request["targets"], "request.targets"),
        robot::ZeroState(*model)};
    ik::CheckTargets(*model, targets);
    int iterations = config.max_iterations;
    if (request.contains("iterations")) {
      iterations = static_cast<int>(
          io::AsInteger(request["iterations"], "request.iterations"));
      if (iterations < 1) {
        throw ParseError("request.iterations", "must be at least 1");
      }
    }
    const robot::JointState q0 =
        initial ? *initial : ik::InitialGuess(*model, targets);
    const ik::IkSolution sol = ik::Solve(*model, q0, targets, config.weights,
                                         config.tolerance, iterations);
    Json out = SolutionToJson(*model, sol);
    out["model"] = model_id;
    return out;
  }
  if (request.contains("iterations")) {
    throw ParseError("request.iterations",
                     "use config.max_iterations for trajectories");
  }
  const Json& trajs = request["trajectories"];
  io::ExpectObject(trajs, "request.trajectories");
  Keypoints keypoints;
  for (const auto& [name, doc] : trajs.items()) {
    keypoints[name] = ingest::TrajectoryFromJson(
        doc, name, "request.trajectories." + name);
  }
  double rate = 50.0;
  if (request.contains("rate")) {
    rate = io::AsNumber(request["rate"], "request.rate");
    if (!(rate > 0.0)) throw ParseError("request.rate", "must be positive");
  }
  const ik::TrajectorySolution sol =
      ik::SolveTrajectory(*model, keypoints, config, rate, initial);
  Json states = Json::array();
  for (const auto& st : sol.trajectory.states) {
    states.push_back(StateToJson(*model, st));
  }
  Json issues = Json::array();
  for (const auto& i : sol.report.issues) {
    issues.push_back({{"frame", i.frame},
                      {"time", i.time},
                      {"not_converged", i.not_converged},
                      {"collision", i.collision},
                      {"limit_saturated", i.limit_saturated}});
  }
  return {{"model", model_id},
          {"times", sol.trajectory.times},
          {"states", states},
          {"frames", sol.report.frames},
          {"issues", issues}};
}

void PreviewService::NoteDropped(const std::string& session, uint64_t count) {
  auto slot = FindSlot(session);
  if (!slot) return;
  std::lock_guard lock(slot->mutex);
  slot->dropped += count;
}

size_t PreviewService::num_sessions() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

bool PreviewService::HasSession(const std::string& id) const {
  return FindSlot(id) != nullptr;
}

void PreviewService::CloseSession(const std::string& id) {
  std::lock_guard lock(mutex_);
  sessions_.erase(id);
}

void PreviewService::CloseAll() {
  std::lock_guard lock(mutex_);
  sessions_.clear();
}

}  // namespace humi::preview
