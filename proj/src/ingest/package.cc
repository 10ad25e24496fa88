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

#include <cstdio>
#include <filesystem>
#include <future>
#include <sstream>
#include <string>
#include <vector>

#include "humi/error.h"
#include "humi/ingest.h"
#include "humi/io.h"

namespace humi::ingest {
namespace {

namespace fs = std::filesystem;
using io::Json;

std::string EpisodeFile(const char* subset, int id) {
  char name[32];
  std::snprintf(name, sizeof(name), "episode_%03d.json", id);
  return std::string(subset) + "/" + name;
}

Json SeriesToJson(const geom::ScalarSeries& s) {
  return {{"t", s.times}, {"value", s.values}};
}

geom::ScalarSeries SeriesFromJson(const Json& doc, const std::string& path) {
  io::ExpectObject(doc, path);
  io::RejectUnknownFields(doc, {"t", "value"}, path);
  geom::ScalarSeries s;
  const Json& t = io::Require(doc, "t", path);
  const Json& v = io::Require(doc, "value", path);
  s.times = io::AsNumbers(t, path + ".t", t.is_array() ? t.size() : 0);
  s.values = io::AsNumbers(v, path + ".value", s.times.size());
  try {
    geom::ValidateSeries(s, path);
  } catch (const InvalidArgument& e) {
    throw ParseError(path, e.what());
  }
  return s;
}

Json KeypointsToJson(const std::map<std::string, geom::PoseTrajectory>& m) {
  Json out = Json::object();
  for (const auto& [name, traj] : m) out[name] = TrajectoryToJson(traj);
  return out;
}

std::map<std::string, geom::PoseTrajectory> KeypointsFromJson(
    const Json& doc, const std::string& path) {
  io::ExpectObject(doc, path);
  std::map<std::string, geom::PoseTrajectory> out;
  for (const auto& [name, traj] : doc.items()) {
    out[name] = TrajectoryFromJson(traj, name, path + "." + name);
  }
  return out;
}

Json SpanJson(double start, double end) { return Json::array({start, end}); }

std::pair<double, double> SpanFromJson(const Json& doc,
                                       const std::string& path) {
  const auto v = io::AsNumbers(doc, path, 2);
  return {v[0], v[1]};
}

Json HighLevelToJson(const HighLevelEpisode& ep) {
  Json obs = Json::object();
  for (const auto& [name, o] : ep.observations) {
    obs[name] = {{"frames", o.frames},
                 {"video_span", SpanJson(o.video_start, o.video_end)}};
  }
  Json widths = Json::object();
  for (const auto& [name, s] : ep.widths) widths[name] = SeriesToJson(s);
  return {{"format", kEpisodeFormat},
          {"subset", "high_level"},
          {"id", ep.id},
          {"span", SpanJson(ep.start, ep.end)},
          {"clipped", ep.clipped},
          {"observations", obs},
          {"widths", widths},
          {"keypoints", KeypointsToJson(ep.keypoints)}};
}

HighLevelEpisode HighLevelFromJson(const Json& doc, const std::string& path) {
  io::ExpectObject(doc, path);
  io::ExpectFormat(doc, kEpisodeFormat, path);
  io::RejectUnknownFields(doc,
                          {"format", "subset", "id", "span", "clipped",
                           "observations", "widths", "keypoints"},
                          path);
  HighLevelEpisode ep;
  ep.id = static_cast<int>(io::AsInteger(io::Require(doc, "id", path), path + ".id"));
  std::tie(ep.start, ep.end) =
      SpanFromJson(io::Require(doc, "span", path), path + ".span");
  ep.clipped = io::Require(doc, "clipped", path).get<bool>();
  const Json& obs = io::Require(doc, "observations", path);
  io::ExpectObject(obs, path + ".observations");
  for (const auto& [name, o] : obs.items()) {
    const std::string p = path + ".observations." + name;
    io::RejectUnknownFields(o, {"frames", "video_span"}, p);
    Observation ob;
    ob.frames = io::AsString(io::Require(o, "frames", p), p + ".frames");
    std::tie(ob.video_start, ob.video_end) =
        SpanFromJson(io::Require(o, "video_span", p), p + ".video_span");
    ep.observations[name] = ob;
  }
  const Json& widths = io::Require(doc, "widths", path);
  io::ExpectObject(widths, path + ".widths");
  for (const auto& [name, w] : widths.items()) {
    ep.widths[name] = SeriesFromJson(w, path + ".widths." + name);
  }
  ep.keypoints =
      KeypointsFromJson(io::Require(doc, "keypoints", path), path + ".keypoints");
  return ep;
}

Json LowLevelToJson(const LowLevelEpisode& ep) {
  Json q = Json::array();
  Json base_p = Json::array();
  Json base_q = Json::array();
  for (const auto& s : ep.joints.states) {
    q.push_back(std::vector<double>(s.q.data(), s.q.data() + s.q.size()));
    const Json pose = io::PoseToJson(s.base_pose);
    base_p.push_back(pose["p"]);
    base_q.push_back(pose["q"]);
  }
  Json issues = Json::array();
  for (const auto& i : ep.feasibility.issues) {
    issues.push_back({{"frame", i.frame},
                      {"t", i.time},
                      {"not_converged", i.not_converged},
                      {"collision", i.collision},
                      {"limit_saturated", i.limit_saturated}});
  }
  return {{"format", kEpisodeFormat},
          {"subset", "low_level"},
          {"id", ep.id},
          {"span", SpanJson(ep.start, ep.end)},
          {"keypoints", KeypointsToJson(ep.keypoints)},
          {"joints",
           {{"names", ep.joint_names},
            {"t", ep.joints.times},
            {"q", q},
            {"base", {{"p", base_p}, {"q", base_q}}}}},
          {"feasibility",
           {{"frames", ep.feasibility.frames}, {"issues", issues}}},
          {"flagged", ep.flagged}};
}

LowLevelEpisode LowLevelFromJson(const Json& doc, const std::string& path) {
  io::ExpectObject(doc, path);
  io::ExpectFormat(doc, kEpisodeFormat, path);
  io::RejectUnknownFields(doc,
                          {"format", "subset", "id", "span", "keypoints",
                           "joints", "feasibility", "flagged"},
                          path);
  LowLevelEpisode ep;
  ep.id = static_cast<int>(io::AsInteger(io::Require(doc, "id", path), path + ".id"));
  std::tie(ep.start, ep.end) =
      SpanFromJson(io::Require(doc, "span", path), path + ".span");
  ep.keypoints =
      KeypointsFromJson(io::Require(doc, "keypoints", path), path + ".keypoints");
  const std::string jp = path + ".joints";
  const Json& joints = io::Require(doc, "joints", path);
  io::ExpectObject(joints, jp);
  io::RejectUnknownFields(joints, {"names", "t", "q", "base"}, jp);
  for (const auto& n : io::Require(joints, "names", jp)) {
    ep.joint_names.push_back(io::AsString(n, jp + ".names"));
  }
  const Json& t = io::Require(joints, "t", jp);
  ep.joints.times = io::AsNumbers(t, jp + ".t", t.is_array() ? t.size() : 0);
  const Json& q = io::Require(joints, "q", jp);
  const Json& base = io::Require(joints, "base", jp);
  io::ExpectArray(q, jp + ".q");
  const Json& bp = io::Require(base, "p", jp + ".base");
  const Json& bq = io::Require(base, "q", jp + ".base");
  if (q.size() != ep.joints.times.size() || bp.size() != q.size() ||
      bq.size() != q.size()) {
    throw ParseError(jp, "joint arrays differ in length");
  }
  for (size_t i = 0; i < q.size(); ++i) {
    const std::string ip = jp + ".q[" + std::to_string(i) + "]";
    const auto values = io::AsNumbers(q[i], ip, ep.joint_names.size());
    robot::JointState s;
    s.q = Eigen::Map<const Eigen::VectorXd>(values.data(),
                                            static_cast<Eigen::Index>(values.size()));
    s.base_pose = io::PoseFromJson(Json{{"p", bp[i]}, {"q", bq[i]}},
                                   jp + ".base[" + std::to_string(i) + "]");
    ep.joints.states.push_back(std::move(s));
  }
  const std::string fp = path + ".feasibility";
  const Json& feas = io::Require(doc, "feasibility", path);
  io::RejectUnknownFields(feas, {"frames", "issues"}, fp);
  ep.feasibility.frames =
      static_cast<size_t>(io::AsInteger(io::Require(feas, "frames", fp), fp + ".frames"));
  for (const auto& i : io::Require(feas, "issues", fp)) {
    ik::FrameIssue issue;
    issue.frame = static_cast<size_t>(io::AsInteger(io::Require(i, "frame", fp), fp));
    issue.time = io::AsNumber(io::Require(i, "t", fp), fp);
    issue.not_converged = io::Require(i, "not_converged", fp).get<bool>();
    issue.collision = io::Require(i, "collision", fp).get<bool>();
    issue.limit_saturated = io::Require(i, "limit_saturated", fp).get<bool>();
    ep.feasibility.issues.push_back(issue);
  }
  ep.flagged = io::Require(doc, "flagged", path).get<bool>();
  return ep;
}

std::map<std::string, geom::PoseTrajectory> ScaledTargets(
    const Episode& ep, const robot::KinematicModel& model,
    const PackageConfig& config) {
  std::map<std::string, geom::PoseTrajectory> targets;
  for (const auto& [name, traj] : ep.keypoints) {
    if (model.FindKeyframe(name) < 0) continue;
    if (name != config.pelvis) {
      targets[name] = traj;
      continue;
    }
    std::vector<geom::TimedPose> samples;
    for (const auto& s : traj.samples()) {
      ik::IkTargets one;
      one.poses[name] = s.pose;
      one = ik::ScalePelvisHeight(one, config.ik.human_height,
                                  config.ik.robot_height, config.pelvis);
      samples.push_back({s.time, one.poses.at(name)});
    }
    targets[name] = geom::PoseTrajectory(name, std::move(samples));
  }
  if (targets.empty()) {
    throw InvalidArgument("no tracker stream matches a model keyframe");
  }
  return targets;
}

LowLevelEpisode Retarget(const Episode& ep, const robot::KinematicModel& model,
                         const PackageConfig& config) {
  LowLevelEpisode low;
  low.id = ep.id;
  low.start = ep.start;
  low.end = ep.end;
  low.keypoints = ep.keypoints;
  for (const auto& j : model.joints()) low.joint_names.push_back(j.name);
  try {
    const ik::TrajectorySolution sol = ik::SolveTrajectory(
        model, ScaledTargets(ep, model, config), config.ik, config.rate);
    low.joints = sol.trajectory;
    low.feasibility = sol.report;
  } catch (const Error& e) {
    throw InvalidArgument("episode " + std::to_string(ep.id) + ": " + e.what());
  }
  low.flagged = !low.feasibility.empty();
  return low;
}

}  // namespace

Json TrajectoryToJson(const geom::PoseTrajectory& traj) {
  Json t = Json::array();
  Json p = Json::array();
  Json q = Json::array();
  for (const auto& s : traj.samples()) {
    const Json pose = io::PoseToJson(s.pose);
    t.push_back(s.time);
    p.push_back(pose["p"]);
    q.push_back(pose["q"]);
  }
  return {{"t", t}, {"p", p}, {"q", q}};
}

geom::PoseTrajectory TrajectoryFromJson(const Json& doc, const std::string& name,
                                        const std::string& path) {
  io::ExpectObject(doc, path);
  io::RejectUnknownFields(doc, {"t", "p", "q"}, path);
  const Json& t = io::Require(doc, "t", path);
  const Json& p = io::Require(doc, "p", path);
  const Json& q = io::Require(doc, "q", path);
  io::ExpectArray(t, path + ".t");
  if (!p.is_array() || !q.is_array() || p.size() != t.size() ||
      q.size() != t.size()) {
    throw ParseError(path, "t, p and q must be arrays of equal length");
  }
  std::vector<geom::TimedPose> samples;
  for (size_t i = 0; i < t.size(); ++i) {
    const std::string ip = path + "[" + std::to_string(i) + "]";
    samples.push_back({io::AsNumber(t[i], ip + ".t"),
                       io::PoseFromJson(Json{{"p", p[i]}, {"q", q[i]}}, ip)});
  }
  try {
    return geom::PoseTrajectory(name, std::move(samples));
  } catch (const InvalidArgument& e) {
    throw ParseError(path, e.what());
  }
}

PackageConfig PackageConfigFromJson(const Json& doc, const std::string& path) {
  io::ExpectObject(doc, path);
  io::RejectUnknownFields(doc, {"ik", "rate", "warn_fraction", "pelvis"}, path);
  PackageConfig c;
  if (doc.contains("ik")) c.ik = ik::IkConfigFromJson(doc["ik"], path + ".ik");
  if (doc.contains("rate")) c.rate = io::AsNumber(doc["rate"], path + ".rate");
  if (doc.contains("warn_fraction")) {
    c.warn_fraction = io::AsNumber(doc["warn_fraction"], path + ".warn_fraction");
  }
  if (doc.contains("pelvis")) c.pelvis = io::AsString(doc["pelvis"], path + ".pelvis");
  if (!(c.rate > 0.0)) throw ParseError(path + ".rate", "must be positive");
  if (!(c.warn_fraction >= 0.0 && c.warn_fraction <= 1.0)) {
    throw ParseError(path + ".warn_fraction", "must be in [0, 1]");
  }
  return c;
}

Json ToJson(const PackageConfig& c) {
  return {{"ik", ik::ToJson(c.ik)},
          {"rate", c.rate},
          {"warn_fraction", c.warn_fraction},
          {"pelvis", c.pelvis}};
}

PackagedDataset Package(const std::vector<Episode>& episodes,
                        const PackageConfig& config,
                        const robot::KinematicModel& model) {
  PackagedDataset out;
  out.model = model.name();
  out.config = config;
  std::vector<std::future<LowLevelEpisode>> jobs;
  for (const Episode& ep : episodes) {
    jobs.push_back(std::async(std::launch::async, [&ep, &model, &config] {
      return Retarget(ep, model, config);
    }));
  }
  for (size_t i = 0; i < episodes.size(); ++i) {
    const Episode& ep = episodes[i];
    HighLevelEpisode high;
    high.id = ep.id;
    high.start = ep.start;
    high.end = ep.end;
    high.clipped = ep.clipped;
    high.observations = ep.observations;
    high.widths = ep.widths;
    high.keypoints = ep.keypoints;
    out.high_level.push_back(std::move(high));

    LowLevelEpisode low = jobs[i].get();
    const double share =
        low.feasibility.frames == 0
            ? 0.0
            : static_cast<double>(low.feasibility.issues.size()) /
                  static_cast<double>(low.feasibility.frames);
    if (share > config.warn_fraction) {
      std::ostringstream msg;
      msg << "episode " << ep.id << ": " << low.feasibility.issues.size()
          << " of " << low.feasibility.frames << " frames flagged by IK";
      out.warnings.push_back(msg.str());
    }
    out.low_level.push_back(std::move(low));
  }
  return out;
}

void WriteDataset(const std::string& dir, const PackagedDataset& dataset) {
  const fs::path root(dir);
  std::error_code ec;
  if (fs::exists(root / "manifest.json")) {
    // refresh a previous dataset in place; stale episode files must go
    io::ExpectFormat(io::ParseJson(io::ReadTextFile((root / "manifest.json").string()),
                                   (root / "manifest.json").string()),
                     kDatasetFormat, (root / "manifest.json").string());
    fs::remove_all(root / "high_level", ec);
    fs::remove_all(root / "low_level", ec);
  } else if (fs::exists(root) && !fs::is_empty(root, ec)) {
    throw IoError(dir, "refusing to write a dataset into a non-empty directory");
  }
  fs::create_directories(root / "high_level", ec);
  fs::create_directories(root / "low_level", ec);
  if (ec) throw IoError(dir, "cannot create dataset directories: " + ec.message());

  Json episodes = Json::array();
  for (size_t i = 0; i < dataset.high_level.size(); ++i) {
    const auto& high = dataset.high_level[i];
    const std::string high_file = EpisodeFile("high_level", high.id);
    io::WriteFileAtomic((root / high_file).string(), io::Dump(HighLevelToJson(high)));
    Json entry{{"id", high.id},
               {"span", SpanJson(high.start, high.end)},
               {"clipped", high.clipped},
               {"high_level", high_file}};
    if (i < dataset.low_level.size()) {
      const auto& low = dataset.low_level[i];
      const std::string low_file = EpisodeFile("low_level", low.id);
      io::WriteFileAtomic((root / low_file).string(), io::Dump(LowLevelToJson(low)));
      entry["low_level"] = low_file;
      entry["flagged"] = low.flagged;
      entry["flagged_frames"] = low.feasibility.issues.size();
    }
    episodes.push_back(entry);
  }
  const Json manifest{{"format", kDatasetFormat},
                      {"subsets", {"high_level", "low_level"}},
                      {"scene", dataset.scene},
                      {"operator", dataset.operator_id},
                      {"model", dataset.model},
                      {"seed", dataset.seed},
                      {"config", ToJson(dataset.config)},
                      {"episodes", episodes},
                      {"warnings", dataset.warnings}};
  io::WriteFileAtomic((root / "manifest.json").string(), io::Dump(manifest));
}

PackagedDataset LoadDataset(const std::string& dir) {
  const fs::path root(dir);
  const std::string mpath = (root / "manifest.json").string();
  const Json doc = io::ParseJson(io::ReadTextFile(mpath), mpath);
  io::ExpectObject(doc, mpath);
  io::ExpectFormat(doc, kDatasetFormat, mpath);
  io::RejectUnknownFields(doc,
                          {"format", "subsets", "scene", "operator", "model",
                           "seed", "config", "episodes", "warnings"},
                          mpath);
  const Json& subsets = io::Require(doc, "subsets", mpath);
  if (subsets != Json{"high_level", "low_level"}) {
    throw ParseError(mpath + ".subsets", "expected [\"high_level\", \"low_level\"]");
  }
  PackagedDataset ds;
  ds.scene = io::AsString(io::Require(doc, "scene", mpath), mpath + ".scene");
  ds.operator_id =
      io::AsString(io::Require(doc, "operator", mpath), mpath + ".operator");
  ds.model = io::AsString(io::Require(doc, "model", mpath), mpath + ".model");
  ds.seed = static_cast<uint64_t>(
      io::AsInteger(io::Require(doc, "seed", mpath), mpath + ".seed"));
  ds.config = PackageConfigFromJson(io::Require(doc, "config", mpath), mpath + ".config");
  for (const auto& w : io::Require(doc, "warnings", mpath)) {
    ds.warnings.push_back(io::AsString(w, mpath + ".warnings"));
  }
  const Json& episodes = io::Require(doc, "episodes", mpath);
  io::ExpectArray(episodes, mpath + ".episodes");
  for (size_t i = 0; i < episodes.size(); ++i) {
    const std::string ep = mpath + ".episodes[" + std::to_string(i) + "]";
    const Json& entry = episodes[i];
    const std::string high_file = (root / io::AsString(io::Require(entry, "high_level", ep),
                                                       ep + ".high_level"))
                                      .string();
    ds.high_level.push_back(
        HighLevelFromJson(io::ParseJson(io::ReadTextFile(high_file), high_file), high_file));
    if (entry.contains("low_level")) {
      const std::string low_file =
          (root / io::AsString(entry["low_level"], ep + ".low_level")).string();
      ds.low_level.push_back(
          LowLevelFromJson(io::ParseJson(io::ReadTextFile(low_file), low_file), low_file));
    }
  }
  return ds;
}

}  // namespace humi::ingest
