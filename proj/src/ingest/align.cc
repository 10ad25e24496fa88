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
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "humi/error.h"
#include "humi/ingest.h"

namespace humi::ingest {
namespace {

// Series sampled on the global grid k / rate, k = first .. first + size - 1.
struct GridSeries {
  int64_t first = 0;
  std::vector<double> values;
};

GridSeries ToGrid(const geom::ScalarSeries& series, double rate) {
  const double eps = 1e-9;
  GridSeries out;
  out.first = static_cast<int64_t>(std::ceil(series.start_time() * rate - eps));
  const int64_t last =
      static_cast<int64_t>(std::floor(series.end_time() * rate + eps));
  for (int64_t k = out.first; k <= last; ++k) {
    out.values.push_back(geom::SampleHold(series, k / rate));
  }
  return out;
}

double Variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return var / static_cast<double>(v.size());
}

// Pearson correlation of a[i] against b[i + lag] over the shared indices.
double CorrelationAt(const GridSeries& a, const GridSeries& b, int64_t lag,
                     int64_t min_count) {
  const int64_t lo = std::max(a.first, b.first - lag);
  const int64_t hi =
      std::min(a.first + static_cast<int64_t>(a.values.size()),
               b.first + static_cast<int64_t>(b.values.size()) - lag);
  const int64_t n = hi - lo;
  if (n < min_count) return std::numeric_limits<double>::quiet_NaN();
  const double* pa = a.values.data() + (lo - a.first);
  const double* pb = b.values.data() + (lo + lag - b.first);
  double ma = 0.0;
  double mb = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    ma += pa[i];
    mb += pb[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double da = pa[i] - ma;
    const double db = pb[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

AlignResult AlignStreams(const geom::ScalarSeries& a,
                         const geom::ScalarSeries& b,
                         const AlignConfig& config) {
  if (!(config.rate > 0.0) || !(config.window >= 0.0) ||
      !(config.min_overlap > 0.0 && config.min_overlap <= 1.0)) {
    throw InvalidArgument("invalid alignment configuration");
  }
  if (a.empty() || b.empty()) throw InvalidArgument("cannot align an empty series");
  geom::ValidateSeries(a, "first series");
  geom::ValidateSeries(b, "second series");
  const GridSeries ga = ToGrid(a, config.rate);
  const GridSeries gb = ToGrid(b, config.rate);
  if (ga.values.size() < 3 || Variance(ga.values) < config.min_variance) {
    throw DegenerateSignalError("first series is constant; no correlation peak");
  }
  if (gb.values.size() < 3 || Variance(gb.values) < config.min_variance) {
    throw DegenerateSignalError("second series is constant; no correlation peak");
  }

  const int64_t max_lag =
      static_cast<int64_t>(std::floor(config.window * config.rate + 1e-9));
  const int64_t min_count = std::max<int64_t>(
      3, static_cast<int64_t>(std::ceil(
             config.min_overlap *
             static_cast<double>(std::min(ga.values.size(), gb.values.size())))));

  std::vector<double> corr(2 * max_lag + 1);
  int64_t best = -1;
  for (int64_t i = 0; i < static_cast<int64_t>(corr.size()); ++i) {
    corr[i] = CorrelationAt(ga, gb, i - max_lag, min_count);
    if (!std::isnan(corr[i]) && (best < 0 || corr[i] > corr[best])) best = i;
  }
  if (best < 0) {
    std::ostringstream msg;
    msg << "series do not overlap enough within +-" << config.window
        << " s to be aligned";
    throw InvalidArgument(msg.str());
  }

  double refine = 0.0;
  if (best > 0 && best + 1 < static_cast<int64_t>(corr.size()) &&
      !std::isnan(corr[best - 1]) && !std::isnan(corr[best + 1])) {
    const double cm = corr[best - 1];
    const double c0 = corr[best];
    const double cp = corr[best + 1];
    const double curvature = cm - 2.0 * c0 + cp;
    if (curvature < 0.0) {
      refine = std::clamp(0.5 * (cm - cp) / curvature, -0.5, 0.5);
    }
  }
  AlignResult result;
  result.offset = (static_cast<double>(best - max_lag) + refine) / config.rate;
  result.correlation = corr[best];
  return result;
}

geom::ScalarSeries AngularSpeed(const geom::PoseTrajectory& traj) {
  geom::ScalarSeries out;
  for (const auto& s : traj.samples()) {
    out.times.push_back(s.time);
    out.values.push_back(
        geom::FiniteDifferenceTwist(traj, s.time).angular.norm());
  }
  return out;
}

Offsets SyncRecording(const DemoRecording& recording,
                      const AlignConfig& config) {
  Offsets offsets;
  for (const auto& video : recording.videos) {
    auto it = recording.trackers.find(video.sync_tracker);
    if (it == recording.trackers.end()) {
      throw InvalidArgument("video '" + video.name +
                            "' syncs against unknown tracker '" +
                            video.sync_tracker + "'");
    }
    AlignResult r;
    try {
      r = AlignStreams(AngularSpeed(it->second), video.gyro, config);
    } catch (const DegenerateSignalError& e) {
      throw DegenerateSignalError("video '" + video.name + "' against tracker '" +
                                  video.sync_tracker + "': " + e.what());
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("video '" + video.name + "': " + e.what());
    }
    offsets[video.name] = {video.sync_tracker, r.offset, r.correlation};
  }
  return offsets;
}

}  // namespace humi::ingest
