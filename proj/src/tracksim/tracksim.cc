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

#include "humi/tracksim.h"

#include <algorithm>
#include <cmath>

#include "humi/error.h"
#include "humi/io.h"

namespace humi::tracksim {
namespace {

using chunk::KeypointPoses;
using geom::Pose;
using geom::Vec3;
using io::Json;

void Accumulate(ErrorStats& s, double position, double rotation) {
  s.mean_position += position;
  s.mean_rotation += rotation;
  s.max_position = std::max(s.max_position, position);
  s.max_rotation = std::max(s.max_rotation, rotation);
}

Json ToJson(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

// Blind waypoint deltas at fractional schedule position j (0 = now).
chunk::BlindWaypoint DeltaAt(const std::vector<chunk::BlindWaypoint>& w,
                             double j) {
  const auto lerp = [&](auto member) -> Vec3 {
    const auto value = [&](size_t k) -> Vec3 {
      return k == 0 ? Vec3::Zero() : w[k - 1].*member;
    };
    const size_t lo = std::min(static_cast<size_t>(std::floor(j)), w.size());
    const size_t hi = std::min(lo + 1, w.size());
    const double u = std::clamp(j - static_cast<double>(lo), 0.0, 1.0);
    return u == 0.0 ? value(lo) : (1.0 - u) * value(lo) + u * value(hi);
  };
  return {lerp(&chunk::BlindWaypoint::position_delta),
          lerp(&chunk::BlindWaypoint::rotation_delta)};
}

}  // namespace

void Validate(const TrackerModel& m) {
  if (!(m.gain >= 0.0) || !std::isfinite(m.gain)) {
    throw InvalidArgument("tracker gain must be >= 0");
  }
  if (!(m.latency >= 0.0) || !(m.noise_position >= 0.0) ||
      !(m.noise_rotation >= 0.0) || !(m.drift_rate >= 0.0)) {
    throw InvalidArgument("tracker latency, noise and drift must be >= 0");
  }
  if (!(m.dt > 0.0)) throw InvalidArgument("tracker dt must be positive");
  if (!(m.drift_axis.norm() > 0.0)) {
    throw InvalidArgument("drift axis must be nonzero");
  }
}

TrackerModel TrackerModelFromJson(const Json& doc, const std::string& path) {
  io::ExpectObject(doc, path);
  io::RejectUnknownFields(
      doc, {"gain", "latency", "noise", "drift", "blind", "dt"}, path);
  TrackerModel m;
  if (doc.contains("gain")) m.gain = io::AsNumber(doc["gain"], path + ".gain");
  if (doc.contains("latency")) {
    m.latency = io::AsNumber(doc["latency"], path + ".latency");
  }
  if (doc.contains("dt")) m.dt = io::AsNumber(doc["dt"], path + ".dt");
  if (doc.contains("noise")) {
    const Json& n = doc["noise"];
    const std::string p = path + ".noise";
    io::ExpectObject(n, p);
    io::RejectUnknownFields(n, {"position", "rotation"}, p);
    if (n.contains("position")) {
      m.noise_position = io::AsNumber(n["position"], p + ".position");
    }
    if (n.contains("rotation")) {
      m.noise_rotation = io::AsNumber(n["rotation"], p + ".rotation");
    }
  }
  if (doc.contains("drift")) {
    const Json& d = doc["drift"];
    const std::string p = path + ".drift";
    io::ExpectObject(d, p);
    io::RejectUnknownFields(d, {"rate", "axis", "offset"}, p);
    if (d.contains("rate")) m.drift_rate = io::AsNumber(d["rate"], p + ".rate");
    if (d.contains("axis")) m.drift_axis = io::AsVec3(d["axis"], p + ".axis");
    if (d.contains("offset")) {
      m.drift_offset = io::AsVec3(d["offset"], p + ".offset");
    }
  }
  if (doc.contains("blind")) {
    io::ExpectArray(doc["blind"], path + ".blind");
    m.blind.clear();
    for (const auto& b : doc["blind"]) {
      m.blind.push_back(io::AsString(b, path + ".blind"));
    }
  }
  try {
    Validate(m);
  } catch (const InvalidArgument& e) {
    throw ParseError(path, e.what());
  }
  return m;
}

Json ToJson(const TrackerModel& m) {
  return {{"gain", m.gain},
          {"latency", m.latency},
          {"noise",
           {{"position", m.noise_position}, {"rotation", m.noise_rotation}}},
          {"drift",
           {{"rate", m.drift_rate},
            {"axis", ToJson(m.drift_axis)},
            {"offset", ToJson(m.drift_offset)}}},
          {"blind", m.blind},
          {"dt", m.dt}};
}

double SteadyStateLag(double speed, const TrackerModel& model) {
  Validate(model);
  if (!(model.gain > 0.0)) {
    throw InvalidArgument("a frozen tracker has no steady state");
  }
  const double delay = std::round(model.latency / model.dt) * model.dt;
  return std::abs(speed) * (1.0 / model.gain + delay);
}

Tracker::Tracker(TrackerModel model, KeypointPoses initial, uint64_t seed)
    : model_(std::move(model)),
      poses_(std::move(initial)),
      command_(poses_),
      rng_(seed) {
  Validate(model_);
  if (poses_.empty()) throw InvalidArgument("tracker has no keypoints");
}

geom::Vec3 Tracker::Bias() const {
  return model_.drift_offset +
         model_.drift_rate * time() * model_.drift_axis.normalized();
}

bool Tracker::IsBlind(const std::string& keypoint) const {
  return std::find(model_.blind.begin(), model_.blind.end(), keypoint) !=
         model_.blind.end();
}

KeypointPoses Tracker::Estimate() const {
  KeypointPoses out = poses_;
  const Vec3 bias = Bias();
  for (auto& [name, pose] : out) {
    if (IsBlind(name)) pose.translation += bias;
  }
  return out;
}

void Tracker::Retarget(const KeypointPoses& targets) {
  for (const auto& [name, pose] : targets) command_[name] = pose;
}

void Tracker::Step(const KeypointPoses& targets, Feedback feedback) {
  const auto delay =
      static_cast<size_t>(std::round(model_.latency / model_.dt));
  Segment segment{command_, targets};
  for (const auto& [name, pose] : targets) command_[name] = pose;
  queue_.push_back(std::move(segment));
  const bool active = queue_.size() > delay;
  while (queue_.size() > delay + 1) queue_.pop_front();
  const double dt = model_.dt;
  const double g = model_.gain;
  const bool snap = g * dt >= 1.0;
  const double decay = std::exp(-g * dt);
  const Vec3 bias = Bias();
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& [name, pose] : poses_) {
    const auto from = queue_.front().from.find(name);
    const auto to = queue_.front().to.find(name);
    if (active && g > 0.0 && to != queue_.front().to.end() &&
        from != queue_.front().from.end()) {
      const Pose& a = from->second;
      const Pose& b = to->second;
      const Vec3 offset = feedback == Feedback::kWorld && IsBlind(name)
                              ? bias
                              : Vec3::Zero();
      // e' = v - g e with the target ramping from a to b.
      if (snap) {
        pose.translation = b.translation - offset;
        pose.rotation = b.rotation;
      } else {
        const Vec3 v = (b.translation - a.translation) / dt;
        const Vec3 e = a.translation - (pose.translation + offset);
        const Vec3 e_next = v / g + (e - v / g) * decay;
        pose.translation = b.translation - e_next - offset;
        const Vec3 w = geom::RotationErrorVector(b.rotation, a.rotation) / dt;
        const Vec3 r = geom::RotationErrorVector(a.rotation, pose.rotation);
        const Vec3 r_next = w / g + (r - w / g) * decay;
        pose.rotation = geom::Exp(-r_next) * b.rotation;
        pose.rotation.normalize();
      }
    }
    if (model_.noise_position > 0.0) {
      pose.translation += model_.noise_position *
                          Vec3(normal(rng_), normal(rng_), normal(rng_));
    }
    if (model_.noise_rotation > 0.0) {
      pose.rotation = geom::Exp(model_.noise_rotation *
                                Vec3(normal(rng_), normal(rng_), normal(rng_))) *
                      pose.rotation;
      pose.rotation.normalize();
    }
  }
  ++step_;
}

double EpisodeMetrics::MaxBoundaryPosition() const {
  double out = 0.0;
  for (const auto& b : boundaries) out = std::max(out, b.position);
  return out;
}

EpisodeMetrics RunEpisode(const std::vector<chunk::CommandChunk>& stream,
                          chunk::ReferenceMode mode, const TrackerModel& model,
                          const KeypointPoses& initial, uint64_t seed,
                          int64_t steps) {
  if (stream.empty()) throw InvalidArgument("empty chunk stream");
  if (stream.front().issued_at != 0) {
    throw InvalidArgument("the first chunk must be issued at step 0");
  }
  for (size_t i = 1; i < stream.size(); ++i) {
    if (stream[i].issued_at <= stream[i - 1].issued_at) {
      throw InvalidArgument("chunks must be issued in increasing order");
    }
  }
  if (steps <= 0) {
    const auto& last = stream.back();
    if (stream.size() > 1) {
      steps = 2 * last.issued_at - stream[stream.size() - 2].issued_at;
    } else {
      const size_t n = last.relative.empty()
                           ? 1
                           : last.relative.begin()->second.size();
      steps = static_cast<int64_t>(std::ceil(
          static_cast<double>(n - 1) * last.waypoint_dt / last.control_dt -
          1e-9));
      steps = std::max<int64_t>(steps, 1);
    }
  }
  Tracker tracker(model, initial, seed);
  EpisodeMetrics metrics;
  metrics.steps = steps;
  chunk::CommandChunk current;
  bool have = false;
  size_t next = 0;
  for (int64_t n = 0; n < steps; ++n) {
    if (next < stream.size() && stream[next].issued_at == n) {
      const auto& src = stream[next];
      const KeypointPoses reference = chunk::NextReference(
          mode, have ? &current : nullptr, tracker.Estimate(), n);
      chunk::CommandChunk composed =
          chunk::ComposeChunk(src.relative, reference, n, src.gripper_widths,
                              src.waypoint_dt, src.control_dt);
      if (have) {
        BoundaryRecord record;
        record.step = n;
        for (const auto& [name, d] :
             chunk::BoundaryDiscontinuity(current, composed)) {
          record.position = std::max(record.position, d.position);
          record.rotation = std::max(record.rotation, d.rotation);
        }
        metrics.boundaries.push_back(record);
      }
      current = std::move(composed);
      have = true;
      ++next;
      tracker.Retarget(current.TargetsAt(n));
    }
    const KeypointPoses targets = current.TargetsAt(n);
    for (const auto& [name, target] : targets) {
      const auto it = tracker.poses().find(name);
      if (it == tracker.poses().end()) {
        throw InvalidArgument("no initial pose for keypoint '" + name + "'");
      }
      Accumulate(metrics.tracking[name],
                 (it->second.translation - target.translation).norm(),
                 geom::RotationError(it->second, target));
    }
    tracker.Step(current.TargetsAt(n + 1));
  }
  for (auto& [name, s] : metrics.tracking) {
    s.mean_position /= static_cast<double>(steps);
    s.mean_rotation /= static_cast<double>(steps);
  }
  return metrics;
}

std::map<std::string, geom::PoseTrajectory> ConstantVelocityFixture(
    const std::string& keypoint, double speed, double duration) {
  std::vector<geom::TimedPose> samples;
  for (double t : geom::UniformClock(0.0, duration, 50.0)) {
    samples.push_back(
        {t, Pose{{0.3 + speed * t, 0.2, 0.9}, geom::Quat::Identity()}});
  }
  return {{keypoint, geom::PoseTrajectory(keypoint, std::move(samples), 50.0)}};
}

const char* ToString(CommandStyle style) {
  return style == CommandStyle::kAbsolute ? "absolute" : "relative";
}

CommandStyle ParseCommandStyle(const std::string& text) {
  if (text == "absolute") return CommandStyle::kAbsolute;
  if (text == "relative") return CommandStyle::kRelative;
  throw InvalidArgument("command style must be 'absolute' or 'relative', got '" +
                        text + "'");
}

DriftResult DriftExperiment(const geom::PoseTrajectory& reference,
                            CommandStyle style, const TrackerModel& model,
                            double duration, uint64_t seed, int64_t stride) {
  Validate(model);
  if (reference.empty()) throw InvalidArgument("empty blind reference");
  if (!(duration > 0.0)) throw InvalidArgument("duration must be positive");
  if (stride <= 0) throw InvalidArgument("chunk stride must be positive");
  const chunk::StudentCommandConfig cfg{chunk::kCommandHorizon,
                                        chunk::kCommandCount, model.dt};
  if (reference.start_time() > geom::kTimeEpsilon ||
      reference.end_time() + geom::kTimeEpsilon < duration + cfg.horizon) {
    throw InvalidArgument(
        "blind reference must cover [0, duration + command horizon]");
  }
  const std::string name = reference.frame_name();
  TrackerModel m = model;
  if (std::find(m.blind.begin(), m.blind.end(), name) == m.blind.end()) {
    m.blind.push_back(name);
  }
  const std::map<std::string, geom::PoseTrajectory> refs{{name, reference}};
  const auto steps = static_cast<int64_t>(std::llround(duration / m.dt));
  const int64_t spacing = chunk::ScheduleStride(cfg.horizon, cfg.count, m.dt);
  if (stride > spacing * cfg.count) {
    throw InvalidArgument("chunk stride exceeds the command horizon");
  }

  DriftResult out;
  std::vector<Pose> targets;
  targets.reserve(steps + 1);
  Pose anchor = reference.At(0.0);
  std::vector<chunk::BlindWaypoint> waypoints;
  int64_t issued = 0;
  for (int64_t n = 0; n <= steps; ++n) {
    if (style == CommandStyle::kRelative) {
      if (n % stride == 0) {
        if (n > 0) anchor = targets.back();
        const auto cmd =
            chunk::BuildStudentCommand({}, refs, {}, n, Pose{}, cfg);
        waypoints = cmd.blind.at(name);
        out.relative_commands.insert(out.relative_commands.end(),
                                     waypoints.begin(), waypoints.end());
        issued = n;
      }
      const auto d = DeltaAt(waypoints, static_cast<double>(n - issued) /
                                            static_cast<double>(spacing));
      if (n == issued && n > 0) {
        targets.push_back(anchor);
        continue;
      }
      targets.push_back({anchor.translation + d.position_delta,
                         geom::Exp(d.rotation_delta) * anchor.rotation});
    } else {
      if (n % stride == 0) {
        for (int64_t k :
             chunk::SampleSchedule(n, cfg.horizon, cfg.count, m.dt)) {
          out.absolute_targets.push_back(
              reference.At(static_cast<double>(k) * m.dt));
        }
      }
      targets.push_back(reference.At(static_cast<double>(n) * m.dt));
    }
  }

  Tracker tracker(m, {{name, reference.At(0.0)}}, seed);
  const Feedback feedback = style == CommandStyle::kAbsolute
                                ? Feedback::kWorld
                                : Feedback::kProprioceptive;
  for (int64_t n = 0; n <= steps; ++n) {
    const double t = static_cast<double>(n) * m.dt;
    const Pose ref = reference.At(t);
    // Where the commanded target lands in the true frame.
    const Vec3 effective = style == CommandStyle::kAbsolute
                               ? Vec3(targets[n].translation - tracker.Bias())
                               : targets[n].translation;
    out.times.push_back(t);
    out.target_error.push_back((effective - ref.translation).norm());
    out.pose_error.push_back(
        (tracker.poses().at(name).translation - ref.translation).norm());
    if (n < steps) tracker.Step({{name, targets[n + 1]}}, feedback);
  }
  out.final_target_error = out.target_error.back();
  out.final_pose_error = out.pose_error.back();
  return out;
}

Json ToJson(const EpisodeMetrics& metrics) {
  Json tracking = Json::object();
  for (const auto& [name, s] : metrics.tracking) {
    tracking[name] = {{"mean_position", s.mean_position},
                      {"max_position", s.max_position},
                      {"mean_rotation", s.mean_rotation},
                      {"max_rotation", s.max_rotation}};
  }
  Json boundaries = Json::array();
  for (const auto& b : metrics.boundaries) {
    boundaries.push_back(
        {{"step", b.step}, {"position", b.position}, {"rotation", b.rotation}});
  }
  return {{"steps", metrics.steps},
          {"tracking", tracking},
          {"boundaries", boundaries},
          {"max_boundary_position", metrics.MaxBoundaryPosition()}};
}

Json ToJson(const DriftResult& r) {
  return {{"duration", r.times.empty() ? 0.0 : r.times.back()},
          {"final_target_error", r.final_target_error},
          {"final_pose_error", r.final_pose_error},
          {"max_target_error",
           r.target_error.empty()
               ? 0.0
               : *std::max_element(r.target_error.begin(),
                                   r.target_error.end())},
          {"commands",
           r.relative_commands.empty() ? r.absolute_targets.size()
                                       : r.relative_commands.size()}};
}

}  // namespace humi::tracksim
