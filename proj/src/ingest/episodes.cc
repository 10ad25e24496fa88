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

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>
#include <vector>

#include "humi/error.h"
#include "humi/ingest.h"

namespace humi::ingest {
namespace {

struct Span {
  double start = 0.0;  // reference clock
  double end = 0.0;
  const VideoStream* video = nullptr;
  double offset = 0.0;
};

std::string Describe(const Span& s) {
  std::ostringstream out;
  out << "'" << s.video->name << "' [" << s.start << ", " << s.end << "] s";
  return out.str();
}

std::vector<Span> VideoSpans(const VideoStream& video, double offset) {
  std::vector<std::pair<double, double>> markers = video.markers;
  for (const auto& [start, stop] : markers) {
    if (!(stop > start)) {
      std::ostringstream msg;
      msg << "video '" << video.name << "': stop marker " << stop
          << " s is not after start marker " << start << " s";
      throw InvalidArgument(msg.str());
    }
  }
  std::sort(markers.begin(), markers.end());
  for (size_t i = 1; i < markers.size(); ++i) {
    if (markers[i].first < markers[i - 1].second) {
      std::ostringstream msg;
      msg << "video '" << video.name << "': marker pairs overlap at "
          << markers[i].first << " s";
      throw InvalidArgument(msg.str());
    }
  }
  std::vector<Span> spans;
  for (const auto& [start, stop] : markers) {
    spans.push_back({start - offset, stop - offset, &video, offset});
  }
  return spans;
}

}  // namespace

std::vector<Episode> DelineateEpisodes(const DemoRecording& recording,
                                       const Offsets& offsets, double rate) {
  if (recording.trackers.empty()) {
    throw InvalidArgument("recording has no tracker streams");
  }
  double cover_start = -std::numeric_limits<double>::infinity();
  double cover_end = std::numeric_limits<double>::infinity();
  for (const auto& [name, traj] : recording.trackers) {
    cover_start = std::max(cover_start, traj.start_time());
    cover_end = std::min(cover_end, traj.end_time());
  }

  std::vector<Span> spans;
  for (const auto& video : recording.videos) {
    auto it = offsets.find(video.name);
    if (it == offsets.end()) {
      throw InvalidArgument("video '" + video.name + "' has no sync offset");
    }
    for (const Span& s : VideoSpans(video, it->second.offset)) {
      spans.push_back(s);
    }
  }
  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) {
    return std::tie(a.start, a.end, a.video->name) <
           std::tie(b.start, b.end, b.video->name);
  });

  // group spans that overlap each other; a group is one episode
  std::vector<std::vector<Span>> groups;
  double group_end = -std::numeric_limits<double>::infinity();
  for (const Span& s : spans) {
    if (groups.empty() || s.start >= group_end) {
      groups.push_back({s});
      group_end = s.end;
    } else {
      for (const Span& other : groups.back()) {
        if (other.video == s.video) {
          throw InvalidArgument("episode markers are ambiguous: " +
                                Describe(other) + " and " + Describe(s) +
                                " both overlap another video's episode");
        }
      }
      groups.back().push_back(s);
      group_end = std::max(group_end, s.end);
    }
  }

  std::vector<Episode> episodes;
  for (const auto& group : groups) {
    Episode ep;
    ep.id = static_cast<int>(episodes.size());
    ep.start = -std::numeric_limits<double>::infinity();
    ep.end = std::numeric_limits<double>::infinity();
    for (const Span& s : group) {
      ep.start = std::max(ep.start, s.start);
      ep.end = std::min(ep.end, s.end);
    }
    if (!(ep.end > ep.start)) {
      throw InvalidArgument("episode markers disagree: " +
                            Describe(group.front()) + " and " +
                            Describe(group.back()) + " share no common span");
    }
    if (ep.start < cover_start || ep.end > cover_end) {
      ep.clipped = true;
      ep.start = std::max(ep.start, cover_start);
      ep.end = std::min(ep.end, cover_end);
      if (!(ep.end > ep.start)) {
        std::ostringstream msg;
        msg << "episode " << ep.id << " lies outside tracker coverage ["
            << cover_start << ", " << cover_end << "] s";
        throw RangeError(msg.str());
      }
    }
    ep.times = geom::UniformClock(ep.start, ep.end, rate);
    ep.end = ep.times.back();
    for (const auto& [name, traj] : recording.trackers) {
      ep.keypoints[name] = geom::Resample(traj, ep.times);
    }
    for (const Span& s : group) {
      geom::ScalarSeries width;
      width.times = ep.times;
      for (double t : ep.times) {
        width.values.push_back(geom::SampleHold(s.video->width, t + s.offset));
      }
      ep.widths[s.video->name] = std::move(width);
      ep.observations[s.video->name] = {s.video->frames, ep.start + s.offset,
                                        ep.end + s.offset};
    }
    episodes.push_back(std::move(ep));
  }
  return episodes;
}

}  // namespace humi::ingest
