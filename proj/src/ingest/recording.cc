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

#include <cmath>
#include <filesystem>
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

std::string Join(const std::string& dir, const std::string& relative) {
  return (fs::path(dir) / relative).string();
}

// Calls `fn(record, path)` for every non-blank line of a JSONL file.
template <typename Fn>
void ForEachRecord(const std::string& file, Fn fn) {
  const std::string text = io::ReadTextFile(file);
  std::istringstream lines(text);
  std::string line;
  int number = 0;
  while (std::getline(lines, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string path = file + ":" + std::to_string(number);
    const Json record = io::ParseJson(line, path);
    io::ExpectObject(record, path);
    fn(record, path);
  }
}

geom::PoseTrajectory ReadTrackerStream(const std::string& file,
                                       const std::string& name) {
  std::vector<geom::TimedPose> samples;
  ForEachRecord(file, [&](const Json& r, const std::string& path) {
    io::RejectUnknownFields(r, {"t", "p", "q"}, path);
    samples.push_back({io::AsNumber(io::Require(r, "t", path), path + ".t"),
                       io::PoseFromJson(
                           Json{{"p", io::Require(r, "p", path)},
                                {"q", io::Require(r, "q", path)}},
                           path)});
  });
  if (samples.empty()) throw ParseError(file, "tracker stream has no samples");
  try {
    return geom::PoseTrajectory(name, std::move(samples));
  } catch (const InvalidArgument& e) {
    throw ParseError(file, e.what());
  }
}

geom::ScalarSeries ReadScalarStream(const std::string& file,
                                    const std::string& key) {
  geom::ScalarSeries series;
  ForEachRecord(file, [&](const Json& r, const std::string& path) {
    io::RejectUnknownFields(r, {"t", key}, path);
    series.times.push_back(
        io::AsNumber(io::Require(r, "t", path), path + ".t"));
    series.values.push_back(
        io::AsNumber(io::Require(r, key, path), path + "." + key));
  });
  if (series.empty()) throw ParseError(file, "stream has no samples");
  try {
    geom::ValidateSeries(series, file);
  } catch (const InvalidArgument& e) {
    throw ParseError(file, e.what());
  }
  return series;
}

std::string TrackerLines(const geom::PoseTrajectory& traj) {
  std::string out;
  for (const auto& s : traj.samples()) {
    Json r = io::PoseToJson(s.pose);
    r["t"] = s.time;
    out += r.dump() + "\n";
  }
  return out;
}

std::string ScalarLines(const geom::ScalarSeries& series,
                        const std::string& key) {
  std::string out;
  for (size_t i = 0; i < series.size(); ++i) {
    out += Json{{"t", series.times[i]}, {key, series.values[i]}}.dump() + "\n";
  }
  return out;
}

}  // namespace

DemoRecording LoadRecording(const std::string& dir) {
  const std::string manifest_path = Join(dir, "manifest.json");
  const Json doc =
      io::ParseJson(io::ReadTextFile(manifest_path), manifest_path);
  io::ExpectObject(doc, manifest_path);
  io::ExpectFormat(doc, kRecordingFormat, manifest_path);
  io::RejectUnknownFields(doc,
                          {"format", "scene", "operator", "trackers", "videos"},
                          manifest_path);
  DemoRecording rec;
  if (doc.contains("scene")) {
    rec.scene = io::AsString(doc["scene"], manifest_path + ".scene");
  }
  if (doc.contains("operator")) {
    rec.operator_id = io::AsString(doc["operator"], manifest_path + ".operator");
  }
  const Json& trackers = io::Require(doc, "trackers", manifest_path);
  io::ExpectObject(trackers, manifest_path + ".trackers");
  for (const auto& [name, file] : trackers.items()) {
    const std::string rel =
        io::AsString(file, manifest_path + ".trackers." + name);
    rec.trackers[name] = ReadTrackerStream(Join(dir, rel), name);
  }
  if (rec.trackers.empty()) {
    throw ParseError(manifest_path + ".trackers", "no tracker streams");
  }
  const Json& videos = io::Require(doc, "videos", manifest_path);
  io::ExpectArray(videos, manifest_path + ".videos");
  for (size_t i = 0; i < videos.size(); ++i) {
    const std::string path = manifest_path + ".videos[" + std::to_string(i) + "]";
    const Json& v = videos[i];
    io::ExpectObject(v, path);
    io::RejectUnknownFields(
        v, {"name", "sync_tracker", "frames", "gyro", "width", "markers"}, path);
    VideoStream video;
    video.name = io::AsString(io::Require(v, "name", path), path + ".name");
    video.sync_tracker = io::AsString(io::Require(v, "sync_tracker", path),
                                      path + ".sync_tracker");
    if (v.contains("frames")) {
      video.frames = io::AsString(v["frames"], path + ".frames");
    }
    video.gyro = ReadScalarStream(
        Join(dir, io::AsString(io::Require(v, "gyro", path), path + ".gyro")),
        "w");
    video.width = ReadScalarStream(
        Join(dir, io::AsString(io::Require(v, "width", path), path + ".width")),
        "width");
    const Json& markers = io::Require(v, "markers", path);
    io::ExpectArray(markers, path + ".markers");
    for (size_t k = 0; k < markers.size(); ++k) {
      const auto pair = io::AsNumbers(
          markers[k], path + ".markers[" + std::to_string(k) + "]", 2);
      video.markers.emplace_back(pair[0], pair[1]);
    }
    for (const auto& other : rec.videos) {
      if (other.name == video.name) {
        throw ParseError(path + ".name", "duplicate video '" + video.name + "'");
      }
    }
    rec.videos.push_back(std::move(video));
  }
  return rec;
}

void WriteRecording(const std::string& dir, const DemoRecording& recording) {
  Json trackers = Json::object();
  for (const auto& [name, traj] : recording.trackers) {
    const std::string rel = "trackers/" + name + ".jsonl";
    io::WriteFileAtomic(Join(dir, rel), TrackerLines(traj));
    trackers[name] = rel;
  }
  Json videos = Json::array();
  for (const auto& video : recording.videos) {
    const std::string gyro = "video/" + video.name + "_gyro.jsonl";
    const std::string width = "video/" + video.name + "_width.jsonl";
    io::WriteFileAtomic(Join(dir, gyro), ScalarLines(video.gyro, "w"));
    io::WriteFileAtomic(Join(dir, width), ScalarLines(video.width, "width"));
    Json markers = Json::array();
    for (const auto& [start, stop] : video.markers) {
      markers.push_back({start, stop});
    }
    videos.push_back({{"name", video.name},
                      {"sync_tracker", video.sync_tracker},
                      {"frames", video.frames},
                      {"gyro", gyro},
                      {"width", width},
                      {"markers", markers}});
  }
  const Json doc{{"format", kRecordingFormat},
                 {"scene", recording.scene},
                 {"operator", recording.operator_id},
                 {"trackers", trackers},
                 {"videos", videos}};
  io::WriteFileAtomic(Join(dir, "manifest.json"), io::Dump(doc));
}

std::string OffsetsPath(const std::string& recording_dir) {
  return Join(recording_dir, "offsets.json");
}

Json OffsetsToJson(const Offsets& offsets) {
  Json streams = Json::object();
  for (const auto& [name, o] : offsets) {
    streams[name] = {{"tracker", o.tracker},
                     {"offset", o.offset},
                     {"correlation", o.correlation}};
  }
  return {{"format", kOffsetsFormat},
          {"convention", "video clock minus tracker clock, seconds"},
          {"streams", streams}};
}

Offsets OffsetsFromJson(const Json& doc, const std::string& path) {
  io::ExpectObject(doc, path);
  io::ExpectFormat(doc, kOffsetsFormat, path);
  io::RejectUnknownFields(doc, {"format", "convention", "streams"}, path);
  const Json& streams = io::Require(doc, "streams", path);
  io::ExpectObject(streams, path + ".streams");
  Offsets out;
  for (const auto& [name, s] : streams.items()) {
    const std::string p = path + ".streams." + name;
    io::ExpectObject(s, p);
    io::RejectUnknownFields(s, {"tracker", "offset", "correlation"}, p);
    StreamOffset o;
    o.tracker = io::AsString(io::Require(s, "tracker", p), p + ".tracker");
    o.offset = io::AsNumber(io::Require(s, "offset", p), p + ".offset");
    if (s.contains("correlation")) {
      o.correlation = io::AsNumber(s["correlation"], p + ".correlation");
    }
    out[name] = o;
  }
  return out;
}

}  // namespace humi::ingest
