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

#ifndef HUMI_INGEST_H_
#define HUMI_INGEST_H_

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "humi/geom.h"
#include "humi/ik.h"
#include "humi/robot.h"

namespace humi::ingest {

inline constexpr char kRecordingFormat[] = "humi-demo/1";
inline constexpr char kOffsetsFormat[] = "humi-offsets/1";
inline constexpr char kDatasetFormat[] = "humi-dataset/1";
inline constexpr char kEpisodeFormat[] = "humi-episode/1";

// ---------------------------------------------------------------------------
// Stream alignment

struct AlignConfig {
  double rate = 50.0;           // common grid, Hz
  double window = 30.0;         // searched offsets are within +-window seconds
  double min_overlap = 0.25;    // fraction of the shorter series
  double min_variance = 1e-8;
};

struct AlignResult {
  double offset = 0.0;       // seconds; b(t + offset) lines up with a(t)
  double correlation = 0.0;  // normalized peak value in [-1, 1]
};

// Offset maximizing the normalized cross-correlation of two magnitude
// series. Positive when b lags a. Throws DegenerateSignalError when either
// series is (near-)constant and InvalidArgument when no offset inside the
// window leaves enough overlap.
AlignResult AlignStreams(const geom::ScalarSeries& a,
                         const geom::ScalarSeries& b,
                         const AlignConfig& config = {});

// |angular velocity| of a tracker, by finite differences at its own samples.
geom::ScalarSeries AngularSpeed(const geom::PoseTrajectory& traj);

// ---------------------------------------------------------------------------
// Recording

// One gripper camera. All series and markers are on the video clock.
struct VideoStream {
  std::string name;
  std::string sync_tracker;  // tracker whose |w| the gyro is matched against
  std::string frames;        // relative path of the video, never opened
  geom::ScalarSeries gyro;   // |angular velocity|, rad/s
  geom::ScalarSeries width;  // gripper opening, m
  std::vector<std::pair<double, double>> markers;  // start/stop pairs
};

struct DemoRecording {
  std::string scene;
  std::string operator_id;
  std::map<std::string, geom::PoseTrajectory> trackers;  // reference clock
  std::vector<VideoStream> videos;
};

// Reads <dir>/manifest.json and the stream files it lists.
DemoRecording LoadRecording(const std::string& dir);
void WriteRecording(const std::string& dir, const DemoRecording& recording);

// video name -> offset (video clock minus reference clock)
struct StreamOffset {
  std::string tracker;
  double offset = 0.0;
  double correlation = 0.0;
};
using Offsets = std::map<std::string, StreamOffset>;

// Aligns every video gyro against its sync tracker. A degenerate stream
// raises DegenerateSignalError naming the video.
Offsets SyncRecording(const DemoRecording& recording,
                      const AlignConfig& config = {});

nlohmann::json OffsetsToJson(const Offsets& offsets);
Offsets OffsetsFromJson(const nlohmann::json& doc, const std::string& path);
std::string OffsetsPath(const std::string& recording_dir);

// ---------------------------------------------------------------------------
// Episodes

struct Observation {
  std::string frames;
  double video_start = 0.0;  // span on the video clock
  double video_end = 0.0;
};

struct Episode {
  int id = 0;
  double start = 0.0;  // reference clock
  double end = 0.0;
  bool clipped = false;  // span was cut to tracker coverage
  std::vector<double> times;
  std::map<std::string, geom::PoseTrajectory> keypoints;
  std::map<std::string, geom::ScalarSeries> widths;
  std::map<std::string, Observation> observations;
};

// One episode per start/stop pair. Pairs of different videos whose spans
// overlap describe the same episode and are merged to their common span.
// Throws InvalidArgument for stop <= start or overlapping pairs within one
// video and for videos without an offset.
std::vector<Episode> DelineateEpisodes(const DemoRecording& recording,
                                       const Offsets& offsets,
                                       double rate = 50.0);

// ---------------------------------------------------------------------------
// Packaging

struct PackageConfig {
  ik::IkConfig ik;
  double rate = 50.0;
  // Share of flagged frames above which a warning is raised.
  double warn_fraction = 0.1;
  std::string pelvis = "pelvis";
};

PackageConfig PackageConfigFromJson(const nlohmann::json& doc,
                                    const std::string& path);
nlohmann::json ToJson(const PackageConfig& config);

struct HighLevelEpisode {
  int id = 0;
  double start = 0.0;
  double end = 0.0;
  bool clipped = false;
  std::map<std::string, Observation> observations;
  std::map<std::string, geom::ScalarSeries> widths;
  std::map<std::string, geom::PoseTrajectory> keypoints;
};

struct LowLevelEpisode {
  int id = 0;
  double start = 0.0;
  double end = 0.0;
  std::map<std::string, geom::PoseTrajectory> keypoints;
  std::vector<std::string> joint_names;
  ik::JointTrajectory joints;
  ik::FeasibilityReport feasibility;
  bool flagged = false;
};

struct PackagedDataset {
  std::string scene;
  std::string operator_id;
  std::string model;
  PackageConfig config;
  uint64_t seed = 0;
  std::vector<HighLevelEpisode> high_level;
  std::vector<LowLevelEpisode> low_level;
  std::vector<std::string> warnings;
};

// IK-retargets every episode (pelvis height scaled, everything else as
// recorded). Infeasible frames are flagged, not dropped. IK errors are
// rethrown with the episode id.
PackagedDataset Package(const std::vector<Episode>& episodes,
                        const PackageConfig& config,
                        const robot::KinematicModel& model);

// Writes manifest.json, high_level/ and low_level/ under `dir`. Output is a
// pure function of the dataset.
void WriteDataset(const std::string& dir, const PackagedDataset& dataset);
PackagedDataset LoadDataset(const std::string& dir);

nlohmann::json TrajectoryToJson(const geom::PoseTrajectory& traj);
geom::PoseTrajectory TrajectoryFromJson(const nlohmann::json& doc,
                                        const std::string& name,
                                        const std::string& path);

}  // namespace humi::ingest

#endif  // HUMI_INGEST_H_
