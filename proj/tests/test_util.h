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

#ifndef HUMI_TESTS_TEST_UTIL_H_
#define HUMI_TESTS_TEST_UTIL_H_

#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "humi/geom.h"

namespace humi::testing {

inline std::string DataPath(const std::string& relative) {
  return std::string(HUMI_DATA_DIR) + "/" + relative;
}

inline std::string ModelPath(const std::string& name) {
  return DataPath("models/" + name + ".json");
}

inline geom::Quat RandomQuat(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  geom::Quat q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q;
}

inline geom::Vec3 RandomVec3(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

inline geom::Pose RandomPose(std::mt19937_64& rng, double scale = 1.0) {
  return {RandomVec3(rng, scale), RandomQuat(rng)};
}

inline geom::Quat Rz(double angle) {
  return geom::Quat(Eigen::AngleAxisd(angle, geom::Vec3::UnitZ()));
}

// Translation distance plus rotation angle, for pose comparisons.
inline double PoseDistance(const geom::Pose& a, const geom::Pose& b) {
  return (a.translation - b.translation).norm() +
         geom::RotationError(a.rotation, b.rotation);
}

// Fresh directory under the system temp dir, removed on destruction.
class ScopedTempDir {
 public:
  ScopedTempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("humi_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScopedTempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScopedTempDir(const ScopedTempDir&) = delete;
  ScopedTempDir& operator=(const ScopedTempDir&) = delete;

  std::string path() const { return path_.string(); }
  std::string Sub(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

}  // namespace humi::testing

#endif  // HUMI_TESTS_TEST_UTIL_H_
