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

#ifndef HUMI_SYNTHETIC_H_
#define HUMI_SYNTHETIC_H_

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "humi/geom.h"
#include "humi/ingest.h"
#include "humi/robot.h"

// Seeded generators for demonstration recordings with known ground truth.
namespace humi::synthetic {

// Smooth random signal: a sum of `components` sinusoids with frequencies
// drawn from [f_min, f_max] Hz. Peak magnitude never exceeds `amplitude`.
class BandLimitedSignal {
 public:
  BandLimitedSignal(std::mt19937_64& rng, double amplitude, double f_min,
                    double f_max, int components = 12);
  double operator()(double t) const;

 private:
  std::vector<double> amplitude_;
  std::vector<double> omega_;
  std::vector<double> phase_;
};

struct GyroPair {
  geom::ScalarSeries reference;  // |w| on the reference clock
  geom::ScalarSeries shifted;    // same motion seen `offset` seconds later
};

// |w| of a band-limited 3-axis angular velocity sampled at `rate`. The
// shifted copy satisfies shifted(t + offset) = reference(t) before noise.
// Independent Gaussian noise is added to both at the given SNR.
GyroPair MakeGyroPair(uint64_t seed, double offset, double duration,
                      double rate = 200.0, double snr_db = 10.0);

struct RecordingConfig {
  uint64_t seed = 7;
  double duration = 20.0;
  double tracker_rate = 100.0;
  double gyro_rate = 200.0;
  double width_rate = 30.0;
  double snr_db = 20.0;
  // gripper video name -> injected offset (video clock minus tracker clock)
  std::vector<std::pair<std::string, double>> videos = {
      {"left_gripper", 3.7}, {"right_gripper", -0.3}};
  // episode spans on the tracker clock; each video marks them with jitter
  std::vector<std::pair<double, double>> episodes = {{2.0, 8.0}, {10.0, 17.0}};
  double marker_jitter = 0.1;
};

// Trackers replay forward kinematics of smooth, collision-free joint motion
// around a relaxed stance, so every keypoint target is reachable.
ingest::DemoRecording MakeRecording(const robot::KinematicModel& model,
                                    const RecordingConfig& config = {});

// The stance the recording moves around.
robot::JointState RelaxedStance(const robot::KinematicModel& model);

}  // namespace humi::synthetic

#endif  // HUMI_SYNTHETIC_H_
