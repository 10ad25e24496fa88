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

#include "humi/chunk.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "humi/error.h"
#include "humi/io.h"

namespace humi::chunk {
namespace {

using io::Json;

geom::Pose HeldAt(const geom::PoseTrajectory& traj, double t) {
  return traj.At(std::clamp(t, traj.start_time(), traj.end_time()));
}

void CheckRates(double waypoint_dt, double control_dt) {
  if (!(waypoint_dt > 0.0) || !(control_dt > 0.0)) {
    throw InvalidArgument("waypoint and control periods must be positive");
  }
}

}  // namespace

const char* ToString(ReferenceMode mode) {
  return mode == ReferenceMode::kTargetPose ? "target" : "executed";
}

ReferenceMode ParseReferenceMode(const std::string& text) {
  if (text == "target") return ReferenceMode::kTargetPose;
  if (text == "executed") return ReferenceMode::kExecutedPose;
  throw InvalidArgument("reference mode must be 'target' or 'executed', got '" +
                        text + "'");
}

size_t CommandChunk::num_waypoints() const {
  return absolute.empty() ? 0 : absolute.begin()->second.size();
}

geom::Pose CommandChunk::TargetAt(const std::string& keypoint,
                                  int64_t step) const {
  const auto it = absolute.find(keypoint);
  if (it == absolute.end()) {
    throw InvalidArgument("chunk has no keypoint '" + keypoint + "'");
  }
  const auto& w = it->second;
  double s = static_cast<double>(step - issued_at) * control_dt / waypoint_dt;
  const double nearest = std::round(s);
  if (std::abs(s - nearest) < 1e-9) s = nearest;
  if (s <= 0.0) return w.front();
  const auto i = static_cast<size_t>(std::floor(s));
  if (i + 1 >= w.size()) return w.back();
  const double u = s - static_cast<double>(i);
  return u == 0.0 ? w[i] : geom::Interpolate(w[i], w[i + 1], u);
}

KeypointPoses CommandChunk::TargetsAt(int64_t step) const {
  KeypointPoses out;
  for (const auto& [name, w] : absolute) out[name] = TargetAt(name, step);
  return out;
}

CommandChunk ComposeChunk(KeypointWaypoints relative,
                          const KeypointPoses& reference, int64_t issued_at,
                          std::map<std::string, std::vector<double>> widths,
                          double waypoint_dt, double control_dt) {
  CheckRates(waypoint_dt, control_dt);
  if (relative.empty()) throw InvalidArgument("chunk has no keypoints");
  const size_t n = relative.begin()->second.size();
  CommandChunk c;
  c.issued_at = issued_at;
  c.waypoint_dt = waypoint_dt;
  c.control_dt = control_dt;
  for (const auto& [name, waypoints] : relative) {
    if (waypoints.empty()) {
      throw InvalidArgument("keypoint '" + name + "' has no waypoints");
    }
    if (waypoints.size() != n) {
      throw InvalidArgument("keypoint '" + name +
                            "' has a different waypoint count");
    }
    const auto ref = reference.find(name);
    if (ref == reference.end()) {
      throw InvalidArgument("no reference pose for keypoint '" + name + "'");
    }
    c.reference[name] = ref->second;
    auto& abs = c.absolute[name];
    abs.reserve(n);
    for (const auto& w : waypoints) abs.push_back(geom::Compose(ref->second, w));
  }
  c.relative = std::move(relative);
  c.gripper_widths = std::move(widths);
  return c;
}

KeypointPoses NextReference(ReferenceMode mode, const CommandChunk* previous,
                            const KeypointPoses& executed, int64_t step) {
  if (previous == nullptr || previous->absolute.empty() ||
      mode == ReferenceMode::kExecutedPose) {
    return executed;
  }
  return previous->TargetsAt(step);
}

std::map<std::string, Discontinuity> BoundaryDiscontinuity(
    const CommandChunk& prev, const CommandChunk& next) {
  if (next.issued_at < prev.issued_at) {
    throw InvalidArgument("next chunk is issued before the previous one");
  }
  std::map<std::string, Discontinuity> out;
  for (const auto& [name, waypoints] : next.absolute) {
    if (!prev.absolute.count(name)) continue;
    const geom::Pose a = prev.TargetAt(name, next.issued_at);
    const geom::Pose& b = waypoints.front();
    out[name] = {(a.translation - b.translation).norm(),
                 geom::RotationError(a, b)};
  }
  return out;
}

int64_t ScheduleStride(double horizon, int count, double control_dt) {
  if (!(horizon > 0.0) || count <= 0 || !(control_dt > 0.0)) {
    throw InvalidArgument(
        "command schedule needs positive horizon, count and control step");
  }
  const double raw = horizon / (count * control_dt);
  // A ratio that is integral up to rounding is taken at its integer value.
  return static_cast<int64_t>(std::floor(raw + 1e-9));
}

std::vector<int64_t> SampleSchedule(int64_t t, double horizon, int count,
                                    double control_dt) {
  if (t < 0) throw InvalidArgument("schedule step must be >= 0");
  const int64_t stride = ScheduleStride(horizon, count, control_dt);
  if (stride <= 0) {
    throw InvalidArgument("command horizon is shorter than one control step "
                          "per waypoint");
  }
  std::vector<int64_t> out;
  for (int k = 1; k <= count; ++k) out.push_back(t + k * stride);
  return out;
}

geom::Pose LocalizationFrame(const geom::Pose& pelvis) {
  return geom::YawOnly(pelvis);
}

StudentCommand BuildStudentCommand(
    const std::map<std::string, geom::PoseTrajectory>& ee_refs,
    const std::map<std::string, geom::PoseTrajectory>& blind_refs,
    const KeypointPoses& measured, int64_t t, const geom::Pose& localization,
    const StudentCommandConfig& config) {
  StudentCommand cmd;
  cmd.schedule =
      SampleSchedule(t, config.horizon, config.count, config.control_dt);
  const geom::Pose to_local = geom::Inverse(localization);
  const Eigen::Matrix3d world_to_local =
      localization.rotation.toRotationMatrix().transpose();
  for (const auto& [name, ref] : ee_refs) {
    const auto m = measured.find(name);
    if (m == measured.end()) {
      throw InvalidArgument("no measured pose for end-effector '" + name + "'");
    }
    auto& out = cmd.ee[name];
    for (int64_t step : cmd.schedule) {
      const geom::Pose r = ref.At(static_cast<double>(step) * config.control_dt);
      const geom::Pose local = geom::Compose(to_local, r);
      EeWaypoint w;
      w.position = local.translation;
      w.rotation = geom::Log(local.rotation);
      w.position_delta =
          world_to_local * (r.translation - m->second.translation);
      w.rotation_delta = world_to_local * geom::RotationErrorVector(
                                              r.rotation, m->second.rotation);
      out.push_back(w);
    }
  }
  for (const auto& [name, ref] : blind_refs) {
    const geom::Pose now = ref.At(static_cast<double>(t) * config.control_dt);
    auto& out = cmd.blind[name];
    for (int64_t step : cmd.schedule) {
      const geom::Pose r = ref.At(static_cast<double>(step) * config.control_dt);
      out.push_back({r.translation - now.translation,
                     geom::RotationErrorVector(r.rotation, now.rotation)});
    }
  }
  return cmd;
}

ScriptedPolicy::ScriptedPolicy(
    std::map<std::string, geom::PoseTrajectory> reference,
    std::map<std::string, geom::ScalarSeries> widths, int horizon,
    double waypoint_dt, double control_dt)
    : reference_(std::move(reference)),
      widths_(std::move(widths)),
      horizon_(horizon),
      waypoint_dt_(waypoint_dt),
      control_dt_(control_dt) {
  CheckRates(waypoint_dt, control_dt);
  if (reference_.empty()) throw InvalidArgument("policy has no keypoints");
  if (horizon <= 0) throw InvalidArgument("policy horizon must be positive");
  for (const auto& [name, traj] : reference_) {
    if (traj.empty()) {
      throw InvalidArgument("empty reference for keypoint '" + name + "'");
    }
  }
}

CommandChunk ScriptedPolicy::Predict(int64_t step) const {
  const double t = static_cast<double>(step) * control_dt_;
  CommandChunk c;
  c.issued_at = step;
  c.waypoint_dt = waypoint_dt_;
  c.control_dt = control_dt_;
  for (const auto& [name, traj] : reference_) {
    const geom::Pose inv = geom::Inverse(HeldAt(traj, t));
    auto& rel = c.relative[name];
    rel.reserve(horizon_);
    rel.push_back(geom::Pose::Identity());
    for (int i = 1; i < horizon_; ++i) {
      rel.push_back(geom::Compose(inv, HeldAt(traj, t + i * waypoint_dt_)));
    }
  }
  for (const auto& [name, series] : widths_) {
    auto& w = c.gripper_widths[name];
    for (int i = 0; i < horizon_; ++i) {
      w.push_back(geom::SampleHold(series, t + i * waypoint_dt_));
    }
  }
  return c;
}

std::vector<CommandChunk> PolicyStream(const ScriptedPolicy& policy,
                                       int64_t steps, int64_t stride) {
  if (stride <= 0) throw InvalidArgument("chunk stride must be positive");
  std::vector<CommandChunk> out;
  for (int64_t s = 0; s < steps; s += stride) out.push_back(policy.Predict(s));
  return out;
}

Json ChunkToJson(const CommandChunk& c) {
  Json reference = Json::object();
  for (const auto& [name, pose] : c.reference) {
    reference[name] = io::PoseToJson(pose);
  }
  Json relative = Json::object();
  for (const auto& [name, waypoints] : c.relative) {
    Json list = Json::array();
    for (const auto& w : waypoints) list.push_back(io::PoseToJson(w));
    relative[name] = list;
  }
  Json widths = Json::object();
  for (const auto& [name, w] : c.gripper_widths) widths[name] = w;
  return {{"issued_at", c.issued_at},     {"waypoint_dt", c.waypoint_dt},
          {"control_dt", c.control_dt},   {"reference", reference},
          {"relative", relative},         {"gripper_widths", widths}};
}

CommandChunk ChunkFromJson(const Json& doc, const std::string& path) {
  io::ExpectObject(doc, path);
  io::RejectUnknownFields(doc,
                          {"issued_at", "waypoint_dt", "control_dt",
                           "reference", "relative", "gripper_widths"},
                          path);
  const int64_t issued =
      io::AsInteger(io::Require(doc, "issued_at", path), path + ".issued_at");
  double waypoint_dt = kWaypointDt;
  double control_dt = kControlDt;
  if (doc.contains("waypoint_dt")) {
    waypoint_dt = io::AsNumber(doc["waypoint_dt"], path + ".waypoint_dt");
  }
  if (doc.contains("control_dt")) {
    control_dt = io::AsNumber(doc["control_dt"], path + ".control_dt");
  }
  KeypointPoses reference;
  if (doc.contains("reference")) {
    io::ExpectObject(doc["reference"], path + ".reference");
    for (const auto& [name, pose] : doc["reference"].items()) {
      reference[name] = io::PoseFromJson(pose, path + ".reference." + name);
    }
  }
  const Json& rel = io::Require(doc, "relative", path);
  io::ExpectObject(rel, path + ".relative");
  KeypointWaypoints relative;
  for (const auto& [name, list] : rel.items()) {
    const std::string p = path + ".relative." + name;
    io::ExpectArray(list, p);
    auto& out = relative[name];
    for (size_t i = 0; i < list.size(); ++i) {
      out.push_back(io::PoseFromJson(list[i], p + "[" + std::to_string(i) + "]"));
    }
  }
  std::map<std::string, std::vector<double>> widths;
  if (doc.contains("gripper_widths")) {
    io::ExpectObject(doc["gripper_widths"], path + ".gripper_widths");
    for (const auto& [name, list] : doc["gripper_widths"].items()) {
      const std::string p = path + ".gripper_widths." + name;
      io::ExpectArray(list, p);
      auto& out = widths[name];
      for (const auto& v : list) out.push_back(io::AsNumber(v, p));
    }
  }
  // Unanchored chunks (policy output) carry relative waypoints only.
  KeypointPoses anchor = reference;
  if (anchor.empty()) {
    for (const auto& [name, list] : relative) anchor[name] = geom::Pose{};
  }
  try {
    CommandChunk c = ComposeChunk(std::move(relative), anchor, issued,
                                  std::move(widths), waypoint_dt, control_dt);
    if (reference.empty()) {
      c.reference.clear();
      c.absolute.clear();
    }
    return c;
  } catch (const InvalidArgument& e) {
    throw ParseError(path, e.what());
  }
}

void WriteChunkStream(const std::string& file,
                      const std::vector<CommandChunk>& chunks) {
  std::string text = Json{{"format", kChunkStreamFormat}}.dump() + "\n";
  for (const auto& c : chunks) text += ChunkToJson(c).dump() + "\n";
  io::WriteFileAtomic(file, text);
}

std::vector<CommandChunk> ReadChunkStream(const std::string& file) {
  const std::string text = io::ReadTextFile(file);
  std::istringstream lines(text);
  std::string line;
  int number = 0;
  bool header = false;
  std::vector<CommandChunk> out;
  while (std::getline(lines, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string path = file + ":" + std::to_string(number);
    const Json doc = io::ParseJson(line, path);
    if (!header) {
      io::ExpectObject(doc, path);
      io::ExpectFormat(doc, kChunkStreamFormat, path);
      header = true;
      continue;
    }
    out.push_back(ChunkFromJson(doc, path));
    if (out.size() > 1 && out.back().issued_at <= out[out.size() - 2].issued_at) {
      throw ParseError(path, "chunks must be issued in increasing order");
    }
  }
  if (!header) throw ParseError(file, "missing chunk stream header");
  return out;
}

}  // namespace humi::chunk
