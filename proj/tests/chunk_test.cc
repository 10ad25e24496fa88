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

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "humi/error.h"
#include "humi/io.h"
#include "test_util.h"

namespace humi::chunk {
namespace {

using geom::Pose;
using geom::Vec3;
using testing::RandomPose;
using testing::Rz;

KeypointWaypoints Straight(const std::string& name, int n, const Vec3& step) {
  KeypointWaypoints w;
  for (int i = 0; i < n; ++i) w[name].push_back(Pose::FromTranslation(i * step));
  return w;
}

geom::PoseTrajectory Track(const std::string& name, double duration,
                           const std::function<Pose(double)>& f) {
  std::vector<geom::TimedPose> samples;
  for (double t : geom::UniformClock(0.0, duration, 50.0)) {
    samples.push_back({t, f(t)});
  }
  return geom::PoseTrajectory(name, std::move(samples), 50.0);
}

// Integer-exact stride: horizon * (1 / control_dt) / count.
int64_t OracleStride(int64_t horizon_s, int64_t control_hz, int64_t count) {
  return horizon_s * control_hz / count;
}

TEST(ScheduleTest, DefaultsGiveTenStepStride) {
  EXPECT_EQ(OracleStride(2, 50, 10), 10);
  EXPECT_EQ(ScheduleStride(), OracleStride(2, 50, 10));
  const auto s = SampleSchedule(0);
  ASSERT_EQ(s.size(), 10u);
  for (int k = 1; k <= 10; ++k) EXPECT_EQ(s[k - 1], 10 * k);
  EXPECT_EQ(s.back(), 100);
  EXPECT_NEAR(s.back() * kControlDt, 2.0, 1e-12);
}

TEST(ScheduleTest, SingleWaypointAndOffsetStart) {
  EXPECT_EQ(SampleSchedule(7, 2.0, 1), std::vector<int64_t>{107});
  const auto s = SampleSchedule(33);
  for (size_t i = 1; i < s.size(); ++i) EXPECT_EQ(s[i] - s[i - 1], 10);
  EXPECT_EQ(s.back(), 133);
}

TEST(ScheduleTest, StrideMatchesOracleOverGrid) {
  for (int64_t hz : {20, 25, 50, 100, 200}) {
    for (int64_t count : {1, 2, 4, 5, 10, 20}) {
      for (int64_t horizon : {1, 2, 4}) {
        EXPECT_EQ(ScheduleStride(horizon, count, 1.0 / hz),
                  horizon * hz / count)
            << hz << " " << count << " " << horizon;
      }
    }
  }
}

TEST(ScheduleTest, RejectsBadArguments) {
  EXPECT_THROW(SampleSchedule(-1), InvalidArgument);
  EXPECT_THROW(SampleSchedule(0, 0.0), InvalidArgument);
  EXPECT_THROW(SampleSchedule(0, 2.0, 0), InvalidArgument);
  EXPECT_THROW(SampleSchedule(0, 2.0, 10, 0.0), InvalidArgument);
  EXPECT_THROW(SampleSchedule(0, 0.01, 10), InvalidArgument);
}

TEST(ComposeTest, IdentityWaypointsRepeatTheReference) {
  std::mt19937_64 rng(1);
  const Pose ref = RandomPose(rng);
  KeypointWaypoints w;
  w["a"].assign(5, Pose::Identity());
  const auto c = ComposeChunk(w, {{"a", ref}}, 0);
  for (const auto& p : c.absolute.at("a")) {
    EXPECT_EQ(p.translation, ref.translation);
    EXPECT_LT(geom::RotationError(p, ref), 1e-15);
  }
}

TEST(ComposeTest, IdentityReferenceKeepsWaypoints) {
  std::mt19937_64 rng(2);
  KeypointWaypoints w;
  for (int i = 0; i < 4; ++i) w["a"].push_back(RandomPose(rng));
  const auto c = ComposeChunk(w, {{"a", Pose::Identity()}}, 3);
  for (int i = 0; i < 4; ++i) {
    EXPECT_LT(testing::PoseDistance(c.absolute.at("a")[i], w["a"][i]), 1e-15);
  }
}

TEST(ComposeTest, TranslationWaypointsRotateWithReference) {
  const Pose ref{{1, 2, 3}, Rz(std::numbers::pi / 2)};
  const auto c = ComposeChunk(Straight("a", 2, {0.5, 0, 0}), {{"a", ref}}, 0);
  const Vec3 expected(1.0, 2.5, 3.0);
  EXPECT_LT((c.absolute.at("a")[1].translation - expected).norm(), 1e-15);
}

TEST(ComposeTest, Errors) {
  EXPECT_THROW(ComposeChunk({}, {}, 0), InvalidArgument);
  EXPECT_THROW(ComposeChunk(Straight("a", 3, Vec3::UnitX()), {{"b", {}}}, 0),
               InvalidArgument);
  KeypointWaypoints ragged = Straight("a", 3, Vec3::UnitX());
  ragged["b"].assign(2, Pose{});
  EXPECT_THROW(ComposeChunk(ragged, {{"a", {}}, {"b", {}}}, 0),
               InvalidArgument);
}

TEST(ChunkTest, TargetAtInterpolatesBetweenWaypoints) {
  // waypoints every 0.05 s at 0.1 m spacing = 2 m/s
  const auto c = ComposeChunk(Straight("a", 5, {0.1, 0, 0}), {{"a", {}}}, 100);
  EXPECT_EQ(c.TargetAt("a", 100).translation.x(), 0.0);
  EXPECT_NEAR(c.TargetAt("a", 101).translation.x(), 0.04, 1e-12);
  EXPECT_NEAR(c.TargetAt("a", 105).translation.x(), 0.2, 1e-12);
  EXPECT_EQ(c.TargetAt("a", 90).translation.x(), 0.0);
  EXPECT_NEAR(c.TargetAt("a", 1000).translation.x(), 0.4, 1e-12);
  EXPECT_THROW(c.TargetAt("b", 100), InvalidArgument);
}

TEST(ReferenceTest, ModesAgreeWithoutTrackingError) {
  const auto prev = ComposeChunk(Straight("a", 48, {0.01, 0, 0}),
                                 {{"a", {}}}, 0);
  const KeypointPoses executed = prev.TargetsAt(10);
  const auto t = NextReference(ReferenceMode::kTargetPose, &prev, executed, 10);
  const auto e =
      NextReference(ReferenceMode::kExecutedPose, &prev, executed, 10);
  EXPECT_EQ(t.at("a").translation, e.at("a").translation);
}

TEST(ReferenceTest, LagSeparatesModesByExactlyTheLag) {
  const auto prev = ComposeChunk(Straight("a", 48, {0.01, 0, 0}),
                                 {{"a", {}}}, 0);
  const double eps = 0.037;
  Pose lagged = prev.TargetAt("a", 10);
  lagged.translation.x() -= eps;
  const auto t =
      NextReference(ReferenceMode::kTargetPose, &prev, {{"a", lagged}}, 10);
  const auto e =
      NextReference(ReferenceMode::kExecutedPose, &prev, {{"a", lagged}}, 10);
  EXPECT_NEAR((t.at("a").translation - e.at("a").translation).norm(), eps,
              1e-15);
}

TEST(ReferenceTest, TargetModeIgnoresExecuted) {
  std::mt19937_64 rng(3);
  const auto prev = ComposeChunk(Straight("a", 48, {0.01, 0, 0}),
                                 {{"a", RandomPose(rng)}}, 0);
  const auto base =
      NextReference(ReferenceMode::kTargetPose, &prev, {{"a", {}}}, 20);
  for (int i = 0; i < 50; ++i) {
    const auto r = NextReference(ReferenceMode::kTargetPose, &prev,
                                 {{"a", RandomPose(rng, 5.0)}}, 20);
    EXPECT_EQ(r.at("a").translation, base.at("a").translation);
    EXPECT_EQ(r.at("a").rotation.coeffs(), base.at("a").rotation.coeffs());
  }
}

TEST(ReferenceTest, FirstChunkAnchorsToExecutedInBothModes) {
  std::mt19937_64 rng(4);
  const KeypointPoses executed{{"a", RandomPose(rng)}};
  for (auto mode : {ReferenceMode::kTargetPose, ReferenceMode::kExecutedPose}) {
    const auto r = NextReference(mode, nullptr, executed, 0);
    EXPECT_EQ(r.at("a").translation, executed.at("a").translation);
  }
}

TEST(BoundaryTest, TargetAnchoringIsContinuous) {
  const auto prev = ComposeChunk(Straight("a", 48, {0.02, 0, 0}),
                                 {{"a", {}}}, 0);
  const auto ref = NextReference(ReferenceMode::kTargetPose, &prev, {}, 10);
  const auto next = ComposeChunk(Straight("a", 48, {0.02, 0, 0}), ref, 10);
  const auto d = BoundaryDiscontinuity(prev, next).at("a");
  EXPECT_EQ(d.position, 0.0);
  EXPECT_EQ(d.rotation, 0.0);
}

TEST(BoundaryTest, ExecutedAnchoringJumpsByTheLag) {
  const auto prev = ComposeChunk(Straight("a", 48, {0.02, 0, 0}),
                                 {{"a", {}}}, 0);
  Pose lagged = prev.TargetAt("a", 10);
  lagged.translation.x() -= 0.05;
  const auto ref =
      NextReference(ReferenceMode::kExecutedPose, &prev, {{"a", lagged}}, 10);
  const auto next = ComposeChunk(Straight("a", 48, {0.02, 0, 0}), ref, 10);
  EXPECT_NEAR(BoundaryDiscontinuity(prev, next).at("a").position, 0.05, 1e-15);
}

TEST(BoundaryTest, RotationOnlyLag) {
  KeypointWaypoints w;
  w["a"].assign(48, Pose::Identity());
  const auto prev = ComposeChunk(w, {{"a", {}}}, 0);
  const Pose lagged = Pose::FromRotation(Rz(0.2));
  const auto next = ComposeChunk(w, {{"a", lagged}}, 10);
  const auto d = BoundaryDiscontinuity(prev, next).at("a");
  EXPECT_EQ(d.position, 0.0);
  EXPECT_NEAR(d.rotation, 0.2, 1e-12);
  EXPECT_THROW(BoundaryDiscontinuity(next, prev), InvalidArgument);
}

TEST(BoundaryTest, TargetChainingIsContinuousUnderAnyTrackingError) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const CommandChunk* prev = nullptr;
    CommandChunk current;
    for (int k = 0; k < 8; ++k) {
      KeypointWaypoints w;
      for (const std::string name : {"a", "b"}) {
        w[name].push_back(Pose::Identity());
        for (int i = 1; i < 48; ++i) {
          w[name].push_back(geom::Compose(w[name].back(), RandomPose(rng, 0.01)));
        }
      }
      const int64_t step = 10 * k;
      const KeypointPoses executed{{"a", RandomPose(rng)},
                                   {"b", RandomPose(rng)}};
      const auto ref =
          NextReference(ReferenceMode::kTargetPose, prev, executed, step);
      CommandChunk next = ComposeChunk(w, ref, step);
      if (prev != nullptr) {
        for (const auto& [name, d] : BoundaryDiscontinuity(*prev, next)) {
          EXPECT_LT(d.position, 1e-9) << name;
          EXPECT_LT(d.rotation, 1e-9) << name;
        }
      }
      current = std::move(next);
      prev = &current;
    }
  }
}

class StudentCommandTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ee_["left"] = Track("left", 6.0, [](double t) {
      return Pose{{0.4 + 0.1 * t, 0.2, 1.0 + 0.05 * std::sin(t)}, Rz(0.3 * t)};
    });
    blind_["pelvis"] = Track("pelvis", 6.0, [](double t) {
      return Pose{{0.2 * t, 0.0, 0.7 + 0.02 * std::sin(2 * t)}, Rz(0.1 * t)};
    });
  }
  std::map<std::string, geom::PoseTrajectory> ee_;
  std::map<std::string, geom::PoseTrajectory> blind_;
};

TEST_F(StudentCommandTest, TenWaypointsPerKeypoint) {
  const auto cmd = BuildStudentCommand(ee_, blind_, {{"left", Pose{}}}, 50,
                                       Pose{});
  EXPECT_EQ(cmd.schedule.size(), 10u);
  EXPECT_EQ(cmd.ee.at("left").size(), 10u);
  EXPECT_EQ(cmd.blind.at("pelvis").size(), 10u);
}

TEST_F(StudentCommandTest, BlindEntriesMatchReferenceDifferences) {
  const auto cmd =
      BuildStudentCommand(ee_, blind_, {{"left", Pose{}}}, 50, Pose{});
  const auto& ref = blind_.at("pelvis");
  for (size_t k = 0; k < 10; ++k) {
    const double tk = (50 + 10 * (k + 1)) / 50.0;
    const Vec3 expected = ref.At(tk).translation - ref.At(1.0).translation;
    EXPECT_LT((cmd.blind.at("pelvis")[k].position_delta - expected).norm(),
              1e-12);
    EXPECT_NEAR(cmd.blind.at("pelvis")[k].rotation_delta.z(), 0.1 * (tk - 1.0),
                1e-9);
  }
}

TEST_F(StudentCommandTest, BlindEntriesIgnoreMeasuredPoses) {
  const auto base =
      BuildStudentCommand(ee_, blind_, {{"left", Pose{}}}, 50, Pose{});
  std::mt19937_64 rng(6);
  for (int i = 0; i < 20; ++i) {
    const KeypointPoses measured{{"left", RandomPose(rng, 3.0)},
                                 {"pelvis", RandomPose(rng, 3.0)}};
    const auto cmd = BuildStudentCommand(ee_, blind_, measured, 50,
                                         RandomPose(rng, 2.0));
    for (size_t k = 0; k < 10; ++k) {
      EXPECT_EQ(cmd.blind.at("pelvis")[k].position_delta,
                base.blind.at("pelvis")[k].position_delta);
      EXPECT_EQ(cmd.blind.at("pelvis")[k].rotation_delta,
                base.blind.at("pelvis")[k].rotation_delta);
    }
  }
}

TEST_F(StudentCommandTest, BlindEntriesInvariantToGlobalTranslation) {
  const auto base =
      BuildStudentCommand(ee_, blind_, {{"left", Pose{}}}, 50, Pose{});
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) {
    const Vec3 offset = testing::RandomVec3(rng, 10.0);
    std::map<std::string, geom::PoseTrajectory> shifted;
    for (const auto& [name, traj] : blind_) {
      std::vector<geom::TimedPose> s = traj.samples();
      for (auto& p : s) p.pose.translation += offset;
      shifted[name] = geom::PoseTrajectory(name, s, 50.0);
    }
    const auto cmd = BuildStudentCommand(ee_, shifted, {{"left", Pose{}}}, 50,
                                         Pose{});
    for (size_t k = 0; k < 10; ++k) {
      EXPECT_LT((cmd.blind.at("pelvis")[k].position_delta -
                 base.blind.at("pelvis")[k].position_delta)
                    .norm(),
                1e-12);
      EXPECT_EQ(cmd.blind.at("pelvis")[k].rotation_delta,
                base.blind.at("pelvis")[k].rotation_delta);
    }
  }
}

TEST_F(StudentCommandTest, StaticBlindReferenceGivesIdentity) {
  std::map<std::string, geom::PoseTrajectory> still;
  still["pelvis"] = Track("pelvis", 4.0, [](double) {
    return Pose{{0.1, 0.2, 0.7}, Rz(0.4)};
  });
  const auto cmd = BuildStudentCommand({}, still, {}, 20, Pose{});
  for (const auto& w : cmd.blind.at("pelvis")) {
    EXPECT_EQ(w.position_delta, Vec3::Zero());
    EXPECT_EQ(w.rotation_delta, Vec3::Zero());
  }
}

TEST_F(StudentCommandTest, EeDeltasVanishWhenMeasuredMatchesReference) {
  std::map<std::string, geom::PoseTrajectory> still;
  const Pose p{{0.5, -0.2, 0.9}, Rz(-0.7)};
  still["right"] = Track("right", 4.0, [&](double) { return p; });
  const auto cmd = BuildStudentCommand(still, {}, {{"right", p}}, 20,
                                       Pose{{0.3, 0.1, 0.0}, Rz(0.5)});
  for (const auto& w : cmd.ee.at("right")) {
    EXPECT_LT(w.position_delta.norm(), 1e-15);
    EXPECT_LT(w.rotation_delta.norm(), 1e-12);
  }
}

TEST_F(StudentCommandTest, EePositionsAreLocalized) {
  const Pose pelvis{{1.0, 2.0, 0.7}, Rz(std::numbers::pi / 2) *
                                         geom::AxisAngle(Vec3::UnitX(), 0.2)};
  const Pose frame = LocalizationFrame(pelvis);
  EXPECT_NEAR(geom::RotationError(frame.rotation, Rz(std::numbers::pi / 2)),
              0.0, 1e-12);
  const auto cmd =
      BuildStudentCommand(ee_, {}, {{"left", Pose{}}}, 0, frame);
  const Pose r = ee_.at("left").At(0.2);
  // a quarter turn maps world (x, y) offsets to local (y, -x)
  const Vec3 world = r.translation - pelvis.translation;
  const Vec3 local = cmd.ee.at("left")[0].position;
  EXPECT_NEAR(local.x(), world.y(), 1e-12);
  EXPECT_NEAR(local.y(), -world.x(), 1e-12);
  EXPECT_NEAR(local.z(), world.z(), 1e-12);
}

TEST_F(StudentCommandTest, ScheduleOutsideReferenceThrows) {
  EXPECT_THROW(
      BuildStudentCommand(ee_, blind_, {{"left", Pose{}}}, 250, Pose{}),
      RangeError);
  EXPECT_THROW(BuildStudentCommand(ee_, blind_, {}, 0, Pose{}),
               InvalidArgument);
}

TEST(PolicyTest, ChunksStartAtIdentityAndReplayReference) {
  std::map<std::string, geom::PoseTrajectory> ref;
  ref["left"] = Track("left", 5.0, [](double t) {
    return Pose{{0.3 * t, 0.1, 1.0}, Rz(0.2 * t)};
  });
  geom::ScalarSeries width{{0.0, 5.0}, {0.02, 0.08}};
  const ScriptedPolicy policy(ref, {{"left", width}});
  const CommandChunk c = policy.Predict(25);
  ASSERT_EQ(c.relative.at("left").size(), static_cast<size_t>(kActionHorizon));
  EXPECT_EQ(c.relative.at("left")[0].translation, Vec3::Zero());
  EXPECT_EQ(c.gripper_widths.at("left").size(),
            static_cast<size_t>(kActionHorizon));
  EXPECT_NEAR(c.gripper_widths.at("left")[0], 0.02 + 0.06 * 0.5 / 5.0, 1e-12);
  const auto anchored =
      ComposeChunk(c.relative, {{"left", ref.at("left").At(0.5)}}, 25);
  for (int i = 0; i < kActionHorizon; ++i) {
    const double t = std::min(0.5 + i * kWaypointDt, 5.0);
    EXPECT_LT(testing::PoseDistance(anchored.absolute.at("left")[i],
                                    ref.at("left").At(t)),
              1e-12);
  }
  const auto stream = PolicyStream(policy, 100, 10);
  ASSERT_EQ(stream.size(), 10u);
  EXPECT_EQ(stream[3].issued_at, 30);
}

TEST(StreamTest, RoundTrip) {
  testing::ScopedTempDir dir;
  std::mt19937_64 rng(8);
  std::vector<CommandChunk> chunks;
  for (int k = 0; k < 3; ++k) {
    KeypointWaypoints w;
    for (int i = 0; i < 5; ++i) w["a"].push_back(RandomPose(rng));
    chunks.push_back(ComposeChunk(w, {{"a", RandomPose(rng)}}, 10 * k,
                                  {{"a", {0.01, 0.02, 0.03, 0.04, 0.05}}}));
  }
  chunks.push_back(chunks.back());
  chunks.back().issued_at = 40;
  chunks.back().reference.clear();
  chunks.back().absolute.clear();
  const std::string file = dir.Sub("chunks.jsonl");
  WriteChunkStream(file, chunks);
  const auto back = ReadChunkStream(file);
  ASSERT_EQ(back.size(), chunks.size());
  for (size_t k = 0; k < chunks.size(); ++k) {
    EXPECT_EQ(ChunkToJson(back[k]).dump(), ChunkToJson(chunks[k]).dump());
    EXPECT_EQ(back[k].absolute.size(), chunks[k].absolute.size());
  }
  io::WriteFileAtomic(file, "{\"format\":\"humi-chunks/1\"}\n{\"issued_at\":1}\n");
  try {
    ReadChunkStream(file);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(e.path().find(":2"), std::string::npos);
  }
}

}  // namespace
}  // namespace humi::chunk
