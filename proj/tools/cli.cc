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

#include "cli.h"

#include <pthread.h>
#include <signal.h>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "humi/chunk.h"
#include "humi/error.h"
#include "humi/ingest.h"
#include "humi/io.h"
#include "humi/preview.h"
#include "humi/preview_server.h"
#include "humi/rewards.h"
#include "humi/robot.h"
#include "humi/synthetic.h"
#include "humi/tracksim.h"
#include "humi/version.h"

namespace humi::cli {

namespace fs = std::filesystem;
using Json = nlohmann::json;

inline constexpr char kRunFormat[] = "humi-run/1";
inline constexpr char kSimReportFormat[] = "humi-sim-report/1";
inline constexpr char kRewardTraceFormat[] = "humi-reward-trace/1";
inline constexpr char kTrackedFormat[] = "humi-tracked/1";

std::string ManifestPath(const std::string& out) {
  std::string p = out;
  while (p.size() > 1 && (p.back() == '/' || p.back() == '\\')) p.pop_back();
  return p + ".run.json";
}

namespace {

// State shared by every subcommand.
struct Common {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::string out;
};

struct Manifest {
  std::string command;
  std::vector<std::string> args;
  Json config = Json::object();
  std::optional<uint64_t> seed;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

void WriteManifest(const std::string& out, const Manifest& m, double wall) {
  Json doc = {{"format", kRunFormat},
              {"tool", "humi"},
              {"version", kVersion},
              {"command", m.command},
              {"args", m.args},
              {"config", m.config},
              {"inputs", m.inputs},
              {"outputs", m.outputs},
              {"wall_time_s", wall}};
  doc["seed"] = m.seed ? Json(*m.seed) : Json(nullptr);
  io::WriteFileAtomic(ManifestPath(out), io::Dump(doc));
}

Json LoadConfig(const std::string& path) {
  if (path.empty()) return Json::object();
  Json doc = io::ParseJson(io::ReadTextFile(path), path);
  io::ExpectObject(doc, path);
  return doc;
}

// Config documents of each command: defaults, overlaid by the file.

synthetic::RecordingConfig RecordingConfigFromJson(const Json& doc,
                                                   const std::string& path) {
  io::RejectUnknownFields(doc,
                          {"seed", "duration", "tracker_rate", "gyro_rate",
                           "width_rate", "snr_db", "videos", "episodes",
                           "marker_jitter"},
                          path);
  synthetic::RecordingConfig c;
  auto num = [&](const char* key, double& into) {
    if (doc.contains(key)) into = io::AsNumber(doc[key], path + "." + key);
  };
  if (doc.contains("seed")) {
    const int64_t s = io::AsInteger(doc["seed"], path + ".seed");
    if (s < 0) throw ParseError(path + ".seed", "must be non-negative");
    c.seed = static_cast<uint64_t>(s);
  }
  num("duration", c.duration);
  num("tracker_rate", c.tracker_rate);
  num("gyro_rate", c.gyro_rate);
  num("width_rate", c.width_rate);
  num("snr_db", c.snr_db);
  num("marker_jitter", c.marker_jitter);
  if (doc.contains("videos")) {
    io::ExpectObject(doc["videos"], path + ".videos");
    c.videos.clear();
    for (const auto& [name, v] : doc["videos"].items()) {
      c.videos.emplace_back(name, io::AsNumber(v, path + ".videos." + name));
    }
  }
  if (doc.contains("episodes")) {
    io::ExpectArray(doc["episodes"], path + ".episodes");
    c.episodes.clear();
    for (size_t i = 0; i < doc["episodes"].size(); ++i) {
      const auto se = io::AsNumbers(doc["episodes"][i],
                                    path + ".episodes[" + std::to_string(i) + "]",
                                    2);
      c.episodes.emplace_back(se[0], se[1]);
    }
  }
  return c;
}

Json ToJson(const synthetic::RecordingConfig& c) {
  Json videos = Json::object();
  for (const auto& [name, offset] : c.videos) videos[name] = offset;
  Json episodes = Json::array();
  for (const auto& [s, e] : c.episodes) episodes.push_back(Json::array({s, e}));
  return {{"seed", c.seed},
          {"duration", c.duration},
          {"tracker_rate", c.tracker_rate},
          {"gyro_rate", c.gyro_rate},
          {"width_rate", c.width_rate},
          {"snr_db", c.snr_db},
          {"videos", videos},
          {"episodes", episodes},
          {"marker_jitter", c.marker_jitter}};
}

ingest::AlignConfig AlignConfigFromJson(const Json& doc,
                                        const std::string& path) {
  io::RejectUnknownFields(doc, {"rate", "window", "min_overlap", "min_variance"},
                          path);
  ingest::AlignConfig c;
  if (doc.contains("rate")) c.rate = io::AsNumber(doc["rate"], path + ".rate");
  if (doc.contains("window")) {
    c.window = io::AsNumber(doc["window"], path + ".window");
  }
  if (doc.contains("min_overlap")) {
    c.min_overlap = io::AsNumber(doc["min_overlap"], path + ".min_overlap");
  }
  if (doc.contains("min_variance")) {
    c.min_variance = io::AsNumber(doc["min_variance"], path + ".min_variance");
  }
  if (!(c.rate > 0.0)) throw ParseError(path + ".rate", "must be positive");
  if (!(c.window > 0.0)) throw ParseError(path + ".window", "must be positive");
  return c;
}

Json ToJson(const ingest::AlignConfig& c) {
  return {{"rate", c.rate},
          {"window", c.window},
          {"min_overlap", c.min_overlap},
          {"min_variance", c.min_variance}};
}

std::map<std::string, geom::PoseTrajectory> ShiftToZero(
    const std::map<std::string, geom::PoseTrajectory>& trajs, double start) {
  std::map<std::string, geom::PoseTrajectory> out;
  for (const auto& [name, traj] : trajs) {
    std::vector<geom::TimedPose> samples;
    for (const auto& s : traj.samples()) {
      samples.push_back({s.time - start, s.pose});
    }
    out[name] = geom::PoseTrajectory(name, std::move(samples), traj.rate_hint());
  }
  return out;
}

// ---------------------------------------------------------------------------

int MakeFixture(const Common& c, const std::string& model_path, Manifest& m,
                std::ostream& out) {
  const Json file = LoadConfig(c.config_path);
  synthetic::RecordingConfig config =
      RecordingConfigFromJson(file, c.config_path.empty() ? "config" : c.config_path);
  if (c.seed) config.seed = *c.seed;
  const robot::KinematicModel model = robot::LoadModelFile(model_path);
  const ingest::DemoRecording rec = synthetic::MakeRecording(model, config);
  ingest::WriteRecording(c.out, rec);
  m.config = ToJson(config);
  m.seed = config.seed;
  m.inputs = {model_path};
  m.outputs = {c.out};
  out << "wrote recording " << c.out << " (" << rec.trackers.size()
      << " trackers, " << rec.videos.size() << " videos)\n";
  return kOk;
}

int Sync(const Common& c, const std::string& dir, Manifest& m,
         std::ostream& out) {
  const Json file = LoadConfig(c.config_path);
  const ingest::AlignConfig config =
      AlignConfigFromJson(file, c.config_path.empty() ? "config" : c.config_path);
  const ingest::DemoRecording rec = ingest::LoadRecording(dir);
  const ingest::Offsets offsets = ingest::SyncRecording(rec, config);
  const std::string target = c.out.empty() ? ingest::OffsetsPath(dir) : c.out;
  io::WriteFileAtomic(target, io::Dump(ingest::OffsetsToJson(offsets)));
  m.config = ToJson(config);
  m.inputs = {dir};
  m.outputs = {target};
  for (const auto& [name, o] : offsets) {
    out << name << " offset " << o.offset << " s (correlation "
        << o.correlation << ")\n";
  }
  return kOk;
}

int Package(const Common& c, const std::string& dir,
            const std::string& model_path, Manifest& m, std::ostream& out,
            std::ostream& err) {
  const Json file = LoadConfig(c.config_path);
  const ingest::PackageConfig config = ingest::PackageConfigFromJson(
      file, c.config_path.empty() ? "config" : c.config_path);
  const robot::KinematicModel model = robot::LoadModelFile(model_path);
  const ingest::DemoRecording rec = ingest::LoadRecording(dir);
  const std::string offsets_path = ingest::OffsetsPath(dir);
  const ingest::Offsets offsets = ingest::OffsetsFromJson(
      io::ParseJson(io::ReadTextFile(offsets_path), offsets_path),
      offsets_path);
  const auto episodes = ingest::DelineateEpisodes(rec, offsets, config.rate);
  ingest::PackagedDataset ds = ingest::Package(episodes, config, model);
  ds.scene = rec.scene;
  ds.operator_id = rec.operator_id;
  ds.seed = c.seed.value_or(0);
  ingest::WriteDataset(c.out, ds);
  m.config = ingest::ToJson(config);
  m.seed = ds.seed;
  m.inputs = {dir, offsets_path, model_path};
  m.outputs = {c.out};
  for (const auto& w : ds.warnings) err << "warning: " << w << "\n";
  size_t flagged = 0;
  for (const auto& low : ds.low_level) flagged += low.flagged ? 1 : 0;
  out << "packaged " << ds.high_level.size() << " episodes into " << c.out
      << " (" << flagged << " flagged by IK)\n";
  return kOk;
}

int Simulate(const Common& c, const std::string& dir, std::string mode_flag,
             std::string style_flag, Manifest& m, std::ostream& out) {
  const std::string cpath = c.config_path.empty() ? "config" : c.config_path;
  Json file = LoadConfig(c.config_path);
  io::RejectUnknownFields(file, {"tracker", "mode", "style", "seed"}, cpath);
  tracksim::TrackerModel tracker;
  if (file.contains("tracker")) {
    tracker = tracksim::TrackerModelFromJson(file["tracker"], cpath + ".tracker");
  }
  std::string mode_text = "target";
  std::string style_text = "relative";
  uint64_t seed = 0;
  if (file.contains("mode")) mode_text = io::AsString(file["mode"], cpath + ".mode");
  if (file.contains("style")) {
    style_text = io::AsString(file["style"], cpath + ".style");
  }
  if (file.contains("seed")) {
    const int64_t s = io::AsInteger(file["seed"], cpath + ".seed");
    if (s < 0) throw ParseError(cpath + ".seed", "must be non-negative");
    seed = static_cast<uint64_t>(s);
  }
  if (!mode_flag.empty()) mode_text = mode_flag;
  if (!style_flag.empty()) style_text = style_flag;
  if (c.seed) seed = *c.seed;
  const chunk::ReferenceMode mode = chunk::ParseReferenceMode(mode_text);
  const tracksim::CommandStyle style = tracksim::ParseCommandStyle(style_text);
  tracksim::Validate(tracker);

  if (!fs::is_directory(fs::path(dir) / "low_level")) {
    throw InvalidArgument("dataset '" + dir + "' has no low_level subset");
  }
  const ingest::PackagedDataset ds = ingest::LoadDataset(dir);
  if (ds.low_level.empty()) {
    throw InvalidArgument("dataset '" + dir + "' has no low_level episodes");
  }
  Json episodes = Json::array();
  double max_boundary = 0.0;
  for (const auto& low : ds.low_level) {
    const auto ref = ShiftToZero(low.keypoints, low.start);
    const double duration = low.end - low.start;
    const auto steps = static_cast<int64_t>(std::floor(duration / tracker.dt + 1e-9));
    const chunk::ScriptedPolicy policy(ref);
    const auto stream =
        chunk::PolicyStream(policy, steps, chunk::ScheduleStride());
    chunk::KeypointPoses initial;
    for (const auto& [name, traj] : ref) initial[name] = traj.At(0.0);
    const tracksim::EpisodeMetrics metrics =
        tracksim::RunEpisode(stream, mode, tracker, initial, seed, steps);
    max_boundary = std::max(max_boundary, metrics.MaxBoundaryPosition());
    Json entry = {{"id", low.id}, {"metrics", tracksim::ToJson(metrics)}};
    Json drift = Json::object();
    const double horizon = chunk::kCommandHorizon;
    for (const auto& name : tracker.blind) {
      const auto it = ref.find(name);
      if (it == ref.end() || duration - horizon <= 0.0) continue;
      drift[name] = tracksim::ToJson(tracksim::DriftExperiment(
          it->second, style, tracker, duration - horizon, seed));
    }
    entry["drift"] = drift;
    episodes.push_back(entry);
  }
  const Json config = {{"tracker", tracksim::ToJson(tracker)},
                       {"mode", chunk::ToString(mode)},
                       {"style", tracksim::ToString(style)},
                       {"seed", seed}};
  const Json report = {{"format", kSimReportFormat},
                       {"dataset", dir},
                       {"config", config},
                       {"episodes", episodes}};
  io::WriteFileAtomic(c.out, io::Dump(report));
  m.config = config;
  m.seed = seed;
  m.inputs = {dir};
  m.outputs = {c.out};
  out << "simulated " << ds.low_level.size() << " episodes ("
      << chunk::ToString(mode) << " anchoring, " << tracksim::ToString(style)
      << " blind commands); max boundary discontinuity " << max_boundary
      << " m\n";
  return kOk;
}

int RewardEval(const Common& c, const std::string& dir,
               const std::string& tracked_path, int episode_id,
               std::optional<double> step_flag, std::string ee_mode,
               const std::string& model_path, Manifest& m, std::ostream& out) {
  const std::string cpath = c.config_path.empty() ? "config" : c.config_path;
  Json file = LoadConfig(c.config_path);
  io::RejectUnknownFields(file, {"rewards", "step", "end_effectors", "base"},
                          cpath);
  rewards::TrackingRewardConfig config;
  if (file.contains("rewards")) {
    config = rewards::RewardConfigFromJson(file["rewards"], cpath + ".rewards");
  }
  double step = 0.0;
  if (file.contains("step")) step = io::AsNumber(file["step"], cpath + ".step");
  if (step_flag) step = *step_flag;
  if (ee_mode == "fixed") {
    config.mode = rewards::EeMode::kFixed;
  } else if (ee_mode == "adaptive") {
    config.mode = rewards::EeMode::kAdaptive;
  } else if (!ee_mode.empty()) {
    throw InvalidArgument("unknown EE mode '" + ee_mode + "'");
  }
  rewards::Validate(config);
  std::vector<std::string> ees = {"left_gripper", "right_gripper"};
  if (file.contains("end_effectors")) {
    io::ExpectArray(file["end_effectors"], cpath + ".end_effectors");
    ees.clear();
    for (size_t i = 0; i < file["end_effectors"].size(); ++i) {
      ees.push_back(io::AsString(file["end_effectors"][i],
                                 cpath + ".end_effectors[" + std::to_string(i) + "]"));
    }
  }
  std::string base = "pelvis";
  if (file.contains("base")) base = io::AsString(file["base"], cpath + ".base");

  const ingest::PackagedDataset ds = ingest::LoadDataset(dir);
  const ingest::LowLevelEpisode* low = nullptr;
  for (const auto& e : ds.low_level) {
    if (e.id == episode_id) low = &e;
  }
  if (!low) {
    throw InvalidArgument("dataset has no low_level episode " +
                          std::to_string(episode_id));
  }
  // reference on the packaged joint clock
  rewards::TraceInput input;
  input.base = base;
  for (const auto& [name, traj] : low->keypoints) {
    input.reference[name] = geom::Resample(traj, low->joints.times);
  }
  for (const auto& name : ees) {
    if (input.reference.count(name)) input.end_effectors.push_back(name);
  }
  std::optional<robot::KinematicModel> model;
  if (!model_path.empty()) model = robot::LoadModelFile(model_path);
  if (tracked_path.empty()) {
    input.tracked = input.reference;
    input.joints = low->joints.states;
  } else {
    const Json doc =
        io::ParseJson(io::ReadTextFile(tracked_path), tracked_path);
    io::ExpectObject(doc, tracked_path);
    io::RejectUnknownFields(doc, {"format", "keypoints", "joints"},
                            tracked_path);
    io::ExpectFormat(doc, kTrackedFormat, tracked_path);
    const Json& kp = io::Require(doc, "keypoints", tracked_path);
    io::ExpectObject(kp, tracked_path + ".keypoints");
    for (const auto& [name, t] : kp.items()) {
      input.tracked[name] = ingest::TrajectoryFromJson(
          t, name, tracked_path + ".keypoints." + name);
    }
    if (doc.contains("joints")) {
      if (!model) {
        throw InvalidArgument("tracked joints need --model for penalties");
      }
      io::ExpectArray(doc["joints"], tracked_path + ".joints");
      for (size_t i = 0; i < doc["joints"].size(); ++i) {
        input.joints.push_back(preview::StateFromJson(
            *model, doc["joints"][i],
            tracked_path + ".joints[" + std::to_string(i) + "]"));
      }
    }
  }
  const auto frames = rewards::EvaluateTrace(
      input, model ? &*model : nullptr, config, step);
  const rewards::CurriculumState cur = rewards::CurriculumAt(step, config);
  Json trace = Json::array();
  double sum = 0.0;
  for (const auto& f : frames) {
    trace.push_back({{"time", f.time},
                     {"r_body", f.tracking.r_body},
                     {"r_ee", f.tracking.r_ee},
                     {"w_ee", f.tracking.w_ee},
                     {"r_total", f.tracking.total},
                     {"gated", f.gated},
                     {"penalties",
                      {{"action_rate", f.penalties.action_rate},
                       {"joint_limits", f.penalties.joint_limits},
                       {"contacts", f.penalties.contacts},
                       {"total", f.penalties.total}}}});
    sum += f.tracking.total;
  }
  const Json settings = {{"rewards", rewards::ToJson(config)},
                         {"step", step},
                         {"end_effectors", input.end_effectors},
                         {"base", base}};
  const Json report = {
      {"format", kRewardTraceFormat},
      {"dataset", dir},
      {"episode", episode_id},
      {"config", settings},
      {"curriculum",
       {{"step", cur.step},
        {"w_ee", cur.w_ee},
        {"sigma_p_min", cur.sigma_p_min},
        {"speed_sigma", cur.speed_sigma}}},
      {"frames", trace}};
  io::WriteFileAtomic(c.out, io::Dump(report));
  m.config = settings;
  m.inputs = {dir};
  if (!tracked_path.empty()) m.inputs.push_back(tracked_path);
  if (!model_path.empty()) m.inputs.push_back(model_path);
  m.outputs = {c.out};
  out << frames.size() << " frames, mean r_total "
      << (frames.empty() ? 0.0 : sum / static_cast<double>(frames.size()))
      << " at step " << step << "\n";
  return kOk;
}

int Serve(const Common& c, const std::string& model_path,
          const std::string& dataset, const std::string& address,
          std::optional<int> port_flag, Manifest& m, std::ostream& out) {
  const std::string cpath = c.config_path.empty() ? "config" : c.config_path;
  Json file = LoadConfig(c.config_path);
  io::RejectUnknownFields(file, {"ik", "port", "queue_capacity"}, cpath);
  ik::IkConfig ik_config;
  if (file.contains("ik")) {
    ik_config = ik::IkConfigFromJson(file["ik"], cpath + ".ik");
  }
  preview::ServerOptions options;
  options.address = address;
  int port = 8765;
  if (file.contains("port")) {
    port = static_cast<int>(io::AsInteger(file["port"], cpath + ".port"));
  }
  if (file.contains("queue_capacity")) {
    const int64_t q =
        io::AsInteger(file["queue_capacity"], cpath + ".queue_capacity");
    if (q < 1) throw ParseError(cpath + ".queue_capacity", "must be positive");
    options.queue_capacity = static_cast<size_t>(q);
  }
  if (port_flag) port = *port_flag;
  if (port < 0 || port > 65535) {
    throw InvalidArgument("port " + std::to_string(port) + " out of range");
  }
  options.port = static_cast<uint16_t>(port);

  robot::KinematicModel model = robot::LoadModelFile(model_path);
  const std::string model_id = model.name();
  preview::PreviewService service(ik_config);
  service.AddModel(model_id, std::move(model));
  size_t loaded = 0;
  if (!dataset.empty()) {
    for (const auto& low : ingest::LoadDataset(dataset).low_level) {
      service.AddEpisode(std::to_string(low.id), low.keypoints);
      ++loaded;
    }
  }

  // Signals are taken synchronously; server threads inherit the mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  sigset_t previous;
  pthread_sigmask(SIG_BLOCK, &signals, &previous);
  preview::PreviewServer server(service, options);
  try {
    server.Start();
  } catch (...) {
    pthread_sigmask(SIG_SETMASK, &previous, nullptr);
    throw;
  }
  m.config = {{"ik", ik::ToJson(ik_config)},
              {"port", server.port()},
              {"address", address},
              {"queue_capacity", options.queue_capacity}};
  m.inputs = {model_path};
  if (!dataset.empty()) m.inputs.push_back(dataset);
  out << "serving model '" << model_id << "' (" << loaded
      << " episodes) on " << address << ":" << server.port() << std::endl;
  int received = 0;
  sigwait(&signals, &received);
  server.Stop();
  pthread_sigmask(SIG_SETMASK, &previous, nullptr);
  out << "stopped" << std::endl;
  return kOk;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Demonstration processing, reward evaluation and IK preview "
               "for humanoid whole-body manipulation data",
               "humi"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool out_required) {
    sub->add_option("--config", common.config_path, "JSON config file")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "random seed");
    auto* o = sub->add_option("--out", common.out, "output path");
    if (out_required) o->required();
  };

  std::string recording, dataset, model_path, tracked, mode, style, ee_mode;
  std::string address = "127.0.0.1";
  std::optional<int> port;
  std::optional<double> step;
  int episode = 0;

  auto* fixture = app.add_subcommand(
      "make-fixture", "write a synthetic recording with known stream offsets");
  add_common(fixture, true);
  fixture->add_option("--model", model_path, "model file")->required();

  auto* sync = app.add_subcommand(
      "sync", "estimate video-to-tracker offsets of a recording");
  sync->add_option("recording", recording, "recording directory")->required();
  add_common(sync, false);

  auto* package = app.add_subcommand(
      "package", "delineate, retarget and package a synced recording");
  package->add_option("recording", recording, "recording directory")
      ->required();
  package->add_option("--model", model_path, "model file")->required();
  add_common(package, true);

  auto* simulate = app.add_subcommand(
      "simulate", "replay packaged episodes through the tracking simulator");
  simulate->add_option("dataset", dataset, "dataset directory")->required();
  simulate->add_option("--mode", mode, "chunk anchoring: target | executed");
  simulate->add_option("--style", style,
                       "blind command style: relative | absolute");
  add_common(simulate, true);

  auto* reward = app.add_subcommand(
      "reward-eval", "per-frame tracking rewards of a packaged episode");
  reward->add_option("dataset", dataset, "dataset directory")->required();
  reward->add_option("--episode", episode, "episode id")->required();
  reward->add_option("--tracked", tracked,
                     "tracked trajectory file (default: the reference)");
  reward->add_option("--step", step, "training step for the curriculum");
  reward->add_option("--ee-mode", ee_mode, "adaptive | fixed");
  reward->add_option("--model", model_path, "model file, enables penalties");
  add_common(reward, true);

  auto* serve = app.add_subcommand("serve", "run the IK preview service");
  serve->add_option("--model", model_path, "model file")->required();
  serve->add_option("--dataset", dataset, "dataset whose episodes can be scrubbed");
  serve->add_option("--port", port, "TCP port (0 picks a free one)");
  serve->add_option("--address", address, "listen address");
  add_common(serve, false);

  std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageOrIo;
  }

  Manifest m;
  m.args = args;
  const auto started = std::chrono::steady_clock::now();
  int code = kOk;
  try {
    if (fixture->parsed()) {
      m.command = "make-fixture";
      code = MakeFixture(common, model_path, m, out);
    } else if (sync->parsed()) {
      m.command = "sync";
      code = Sync(common, recording, m, out);
    } else if (package->parsed()) {
      m.command = "package";
      code = Package(common, recording, model_path, m, out, err);
    } else if (simulate->parsed()) {
      m.command = "simulate";
      code = Simulate(common, dataset, mode, style, m, out);
    } else if (reward->parsed()) {
      m.command = "reward-eval";
      code = RewardEval(common, dataset, tracked, episode, step, ee_mode,
                        model_path, m, out);
    } else if (serve->parsed()) {
      m.command = "serve";
      code = Serve(common, model_path, dataset, address, port, m, out);
    }
  } catch (const ParseError& e) {
    err << "humi " << m.command << ": " << e.what() << "\n";
    return kUsageOrIo;
  } catch (const IoError& e) {
    err << "humi " << m.command << ": " << e.what() << "\n";
    return kUsageOrIo;
  } catch (const Error& e) {
    err << "humi " << m.command << ": " << e.what() << "\n";
    return kDomainFailure;
  }
  const double wall = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - started)
                          .count();
  std::string manifest_at = common.out;
  if (m.command == "sync" && manifest_at.empty()) {
    manifest_at = m.outputs.empty() ? std::string() : m.outputs.front();
  }
  if (!manifest_at.empty()) {
    try {
      WriteManifest(manifest_at, m, wall);
    } catch (const Error& e) {
      err << "humi " << m.command << ": " << e.what() << "\n";
      return kUsageOrIo;
    }
  }
  return code;
}

}  // namespace humi::cli
