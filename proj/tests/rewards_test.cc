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

#include "humi/rewards.h"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "humi/error.h"
#include "humi/policy_config.h"
#include "test_util.h"

namespace humi::rewards {
namespace {

using ::humi::testing::ModelPath;
using ::humi::testing::RandomPose;
using ::humi::testing::RandomVec3;

// Straight-line tolerance written out case by case.
double OracleTolerance(double v, double lo, double hi) {
  if (v <= 0.05) return lo;
  if (v >= 0.1) return hi;
  return lo + (v - 0.05) / 0.05 * (hi - lo);
}

TrackingSample PerfectSample(std::mt19937_64& rng, int bodies = 5,
                             int ees = 2) {
  TrackingSample s;
  for (int i = 0; i < bodies; ++i) {
    const geom::Pose p = RandomPose(rng);
    const geom::Twist tw{RandomVec3(rng, 1.0), RandomVec3(rng, 1.0)};
    s.bodies.push_back({"b" + std::to_string(i), p, p, tw, tw});
  }
  for (int i = 0; i < ees; ++i) {
    const geom::Pose p = RandomPose(rng);
    s.end_effectors.push_back({"e" + std::to_string(i), p, p, 0.0});
  }
  return s;
}

TEST(DefaultsTest, ReproducePublishedConstants) {
  const TrackingRewardConfig c;
  EXPECT_EQ(c.sigma_p, 0.3);
  EXPECT_EQ(c.sigma_theta, 0.4);
  EXPECT_EQ(c.sigma_v, 1.0);
  EXPECT_EQ(c.sigma_w, std::numbers::pi);
  EXPECT_EQ(c.ee_position.min, 0.01);
  EXPECT_EQ(c.ee_position.max, 0.1);
  EXPECT_EQ(c.ee_rotation.min, 5.0 * std::numbers::pi / 180.0);
  EXPECT_EQ(c.ee_rotation.max, 20.0 * std::numbers::pi / 180.0);
  EXPECT_EQ(c.v_min, 0.05);
  EXPECT_EQ(c.v_max, 0.1);
  EXPECT_EQ(c.gate_delta, 0.02);
  EXPECT_EQ(c.w_body, 1.0);
  EXPECT_EQ(c.w_ee_max, 0.5);
  EXPECT_EQ(c.w_action_rate, -5e-2);
  EXPECT_EQ(c.w_joint_limit, -10.0);
  EXPECT_EQ(c.w_contact, -0.1);
  EXPECT_EQ(c.contact_threshold, 1.0);
  EXPECT_EQ(c.fixed_sigma_p, 0.01);
  EXPECT_EQ(c.fixed_sigma_theta, c.ee_rotation.min);
  EXPECT_EQ(c.fixed_w_ee, 0.5);
  EXPECT_NO_THROW(Validate(c));
}

TEST(KernelTest, Examples) {
  EXPECT_EQ(Kernel(0.0, 0.3), 1.0);
  EXPECT_NEAR(Kernel(0.09, 0.3), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(Kernel(0.09, 0.3), 0.367879, 1e-6);
  EXPECT_GT(Kernel(0.01, 0.3), Kernel(0.04, 0.3));
  EXPECT_THROW(Kernel(-1.0, 0.3), InvalidArgument);
  EXPECT_THROW(Kernel(1.0, 0.0), InvalidArgument);
}

TEST(KernelTest, RangeAndMonotonicity) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> e(0.0, 2.0);
  std::uniform_real_distribution<double> s(0.1, 3.0);
  for (int i = 0; i < 2000; ++i) {
    const double e1 = e(rng);
    const double e2 = e1 + 1e-3 + e(rng);
    const double s1 = s(rng);
    const double s2 = s1 + 1e-3 + s(rng);
    const double k = Kernel(e1, s1);
    EXPECT_GT(k, 0.0);
    EXPECT_LE(k, 1.0);
    EXPECT_GT(k, Kernel(e2, s1));
    EXPECT_LT(k, Kernel(e1, s2));
    EXPECT_NEAR(k, std::exp(-e1 / (s1 * s1)), 1e-15);
  }
}

TEST(BodyRewardTest, PerfectTrackingIsFour) {
  std::mt19937_64 rng(32);
  const TrackingRewardConfig c;
  for (int i = 0; i < 50; ++i) {
    EXPECT_EQ(BodyReward(PerfectSample(rng, 1 + i % 7), c), 4.0);
  }
}

TEST(BodyRewardTest, OneDegradedTerm) {
  std::mt19937_64 rng(33);
  TrackingSample s = PerfectSample(rng, 2);
  // squared position errors 0.04 and 0.14 average to 0.09
  s.bodies[0].actual.translation += geom::Vec3(0.2, 0.0, 0.0);
  s.bodies[1].actual.translation += geom::Vec3(0.0, 0.0, std::sqrt(0.14));
  EXPECT_NEAR(BodyReward(s, TrackingRewardConfig{}), 3.0 + std::exp(-1.0),
              1e-12);
}

TEST(BodyRewardTest, LargeErrorsVanishAndEmptyThrows) {
  std::mt19937_64 rng(34);
  TrackingSample s = PerfectSample(rng, 3);
  for (auto& b : s.bodies) {
    b.actual.translation += geom::Vec3(1e3, 0, 0);
    b.actual.rotation = geom::Quat(0, 1, 0, 0) * b.ref.rotation;
    b.actual_twist.linear += geom::Vec3(1e3, 0, 0);
    b.actual_twist.angular += geom::Vec3(0, 1e3, 0);
  }
  const double r = BodyReward(s, TrackingRewardConfig{});
  EXPECT_LT(r, 0.3);  // the rotation term is bounded below by exp(-pi^2/0.16)
  EXPECT_LT(r, 1e-20 + std::exp(-std::numbers::pi * std::numbers::pi / 0.16));
  EXPECT_THROW(BodyReward(TrackingSample{}, TrackingRewardConfig{}),
               InvalidArgument);
}

TEST(EeToleranceTest, EndpointsAndMidpoint) {
  const TrackingRewardConfig c;
  EXPECT_EQ(EeTolerance(0.05, EeMetric::kPosition, c), 0.01);
  EXPECT_EQ(EeTolerance(0.2, EeMetric::kPosition, c), 0.1);
  EXPECT_EQ(EeTolerance(0.1, EeMetric::kPosition, c), 0.1);
  EXPECT_EQ(EeTolerance(0.0, EeMetric::kPosition, c), 0.01);
  EXPECT_NEAR(EeTolerance(0.075, EeMetric::kPosition, c), 0.055, 1e-12);
  EXPECT_EQ(EeTolerance(0.05, EeMetric::kRotation, c), 5.0 * kDegree);
  EXPECT_EQ(EeTolerance(0.3, EeMetric::kRotation, c), 20.0 * kDegree);
  EXPECT_THROW(EeTolerance(-0.1, EeMetric::kPosition, c), InvalidArgument);
}

TEST(EeToleranceTest, MatchesOracleAndIsMonotone) {
  std::mt19937_64 rng(35);
  std::uniform_real_distribution<double> v(0.0, 0.2);
  const TrackingRewardConfig c;
  for (int i = 0; i < 2000; ++i) {
    const double a = v(rng);
    const double b = a + v(rng);
    for (auto metric : {EeMetric::kPosition, EeMetric::kRotation}) {
      const SigmaRange r =
          metric == EeMetric::kPosition ? c.ee_position : c.ee_rotation;
      const double sa = EeTolerance(a, metric, c);
      EXPECT_NEAR(sa, OracleTolerance(a, r.min, r.max), 1e-12);
      EXPECT_LE(sa, EeTolerance(b, metric, c));
      EXPECT_GE(sa, r.min);
      EXPECT_LE(sa, r.max);
    }
  }
}

TEST(EeRewardTest, GateAndFixedMode) {
  std::mt19937_64 rng(36);
  TrackingRewardConfig c;
  const CurriculumState late = CurriculumAt(15000, c);
  TrackingSample s = PerfectSample(rng);
  s.ref_base_speed = 0.0;
  EXPECT_EQ(EeReward(s, c, late), 2.0);
  s.ref_base_speed = 0.03;
  EXPECT_EQ(EeReward(s, c, late), 0.0);
  s.ref_base_speed = 0.02;
  EXPECT_EQ(EeReward(s, c, late), 0.0);
  c.mode = EeMode::kFixed;
  s.ref_base_speed = 0.03;
  EXPECT_EQ(EeReward(s, c, late), 2.0);
  EXPECT_EQ(TotalTrackingReward(s, c, CurriculumAt(0, c)).total, 5.0);
  s.end_effectors.clear();
  EXPECT_THROW(EeReward(s, c, late), InvalidArgument);
}

TEST(EeRewardTest, FixedModeUsesTightTolerance) {
  std::mt19937_64 rng(37);
  TrackingRewardConfig c;
  c.mode = EeMode::kFixed;
  TrackingSample s = PerfectSample(rng, 1, 1);
  s.end_effectors[0].actual.translation += geom::Vec3(0.01, 0.0, 0.0);
  s.end_effectors[0].ref_speed = 1.0;  // would loosen an adaptive tolerance
  EXPECT_NEAR(EeReward(s, c, CurriculumAt(0, c)), 1.0 + std::exp(-1.0), 1e-12);
}

TEST(EeRewardTest, GateZeroesAnyTrackingQuality) {
  std::mt19937_64 rng(38);
  std::uniform_real_distribution<double> speed(0.02, 5.0);
  const TrackingRewardConfig c;
  for (int i = 0; i < 500; ++i) {
    TrackingSample s = PerfectSample(rng, 2, 1 + i % 3);
    for (auto& e : s.end_effectors) {
      e.actual = RandomPose(rng);
      e.ref_speed = speed(rng) - 0.02;
    }
    s.ref_base_speed = speed(rng);
    EXPECT_EQ(EeReward(s, c, CurriculumAt(20000, c)), 0.0);
  }
}

TEST(EeRewardTest, AdaptiveToleranceFollowsMeanEeSpeed) {
  std::mt19937_64 rng(39);
  const TrackingRewardConfig c;
  TrackingSample s = PerfectSample(rng, 1, 2);
  for (auto& e : s.end_effectors) {
    e.actual.translation += geom::Vec3(0.0, 0.055, 0.0);
  }
  s.end_effectors[0].ref_speed = 0.05;
  s.end_effectors[1].ref_speed = 0.1;
  // mean speed 0.075 -> sigma_p 0.055 at the end of the ramp
  EXPECT_NEAR(EeReward(s, c, CurriculumAt(15000, c)), 1.0 + std::exp(-1.0),
              1e-12);
}

TEST(TotalRewardTest, CurriculumExamples) {
  std::mt19937_64 rng(40);
  const TrackingRewardConfig c;
  const TrackingSample s = PerfectSample(rng);
  EXPECT_EQ(TotalTrackingReward(s, c, CurriculumAt(0, c)).total, 4.0);
  EXPECT_EQ(TotalTrackingReward(s, c, CurriculumAt(10000, c)).total, 4.0);
  EXPECT_EQ(TotalTrackingReward(s, c, CurriculumAt(15000, c)).total, 5.0);
  EXPECT_EQ(TotalTrackingReward(s, c, CurriculumAt(1e6, c)).total, 5.0);
  EXPECT_NEAR(TotalTrackingReward(s, c, CurriculumAt(12500, c)).total, 4.5,
              1e-12);
}

TEST(TotalRewardTest, ZeroEeWeightIgnoresEeFields) {
  std::mt19937_64 rng(41);
  const TrackingRewardConfig c;
  for (int i = 0; i < 200; ++i) {
    TrackingSample s = PerfectSample(rng, 3, 2);
    for (auto& b : s.bodies) b.actual = RandomPose(rng);
    const double base = TotalTrackingReward(s, c, CurriculumAt(5000, c)).total;
    for (auto& e : s.end_effectors) {
      e.actual = RandomPose(rng, 10.0);
      e.ref_speed = std::numeric_limits<double>::quiet_NaN();
    }
    s.ref_base_speed = 0.0;
    EXPECT_EQ(TotalTrackingReward(s, c, CurriculumAt(5000, c)).total, base);
    s.end_effectors.clear();
    EXPECT_EQ(TotalTrackingReward(s, c, CurriculumAt(5000, c)).total, base);
  }
}

TEST(CurriculumTest, Endpoints) {
  const TrackingRewardConfig c;
  const CurriculumState s0 = CurriculumAt(0, c);
  EXPECT_EQ(s0.w_ee, 0.0);
  EXPECT_EQ(s0.sigma_p_min, 0.1);
  EXPECT_EQ(s0.speed_sigma, 1e-4);
  const CurriculumState s10 = CurriculumAt(10000, c);
  EXPECT_EQ(s10.w_ee, 0.0);
  const CurriculumState s15 = CurriculumAt(15000, c);
  EXPECT_EQ(s15.w_ee, 0.5);
  EXPECT_EQ(s15.sigma_p_min, 0.01);
  EXPECT_EQ(s15.speed_sigma, 1.0);
  const CurriculumState mid = CurriculumAt(12500, c);
  EXPECT_NEAR(mid.w_ee, 0.25, 1e-15);
  EXPECT_NEAR(mid.sigma_p_min, 0.055, 1e-15);
  EXPECT_NEAR(mid.speed_sigma, 0.50005, 1e-15);
  EXPECT_THROW(CurriculumAt(-1, c), InvalidArgument);
}

TEST(CurriculumTest, PiecewiseLinearAndContinuous) {
  const TrackingRewardConfig c;
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> step(0.0, 30000.0);
  for (int i = 0; i < 2000; ++i) {
    const double s = step(rng);
    const CurriculumState x = CurriculumAt(s, c);
    const double f = std::clamp((s - 10000.0) / 5000.0, 0.0, 1.0);
    EXPECT_NEAR(x.w_ee, 0.5 * f, 1e-12);
    EXPECT_NEAR(x.sigma_p_min, 0.1 - 0.09 * f, 1e-12);
    EXPECT_NEAR(x.speed_sigma, 1e-4 + (1.0 - 1e-4) * f, 1e-12);
  }
  for (double edge : {10000.0, 15000.0}) {
    const CurriculumState a = CurriculumAt(edge - 1.0, c);
    const CurriculumState b = CurriculumAt(edge, c);
    EXPECT_LT(std::abs(a.w_ee - b.w_ee), 1e-3 * 0.5);
    EXPECT_LT(std::abs(a.sigma_p_min - b.sigma_p_min), 1e-3 * 0.09);
    EXPECT_LT(std::abs(a.speed_sigma - b.speed_sigma), 1e-3 * (1.0 - 1e-4));
  }
}

class PenaltyTest : public ::testing::Test {
 protected:
  PenaltyTest()
      : model_(robot::LoadModelFile(ModelPath("toy_humanoid"))),
        state_(robot::ZeroState(model_)) {}
  robot::KinematicModel model_;
  robot::JointState state_;
  TrackingRewardConfig config_;
};

TEST_F(PenaltyTest, QuietStateHasNoPenalty) {
  const Eigen::VectorXd a = Eigen::VectorXd::Ones(model_.num_joints());
  const PenaltyBreakdown p = Penalties(a, a, state_, model_, {}, config_);
  EXPECT_EQ(p.total, 0.0);
}

TEST_F(PenaltyTest, PublishedWeights) {
  const Eigen::VectorXd a = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd b = a;
  b[1] = 2.0;
  EXPECT_NEAR(Penalties(b, a, state_, model_, {}, config_).action_rate, -0.2,
              1e-15);

  robot::JointState at_limit = state_;
  const int knee = model_.FindJoint("left_knee_joint");
  at_limit.q[knee] = model_.joints()[knee].q_max;
  EXPECT_EQ(Penalties(a, a, at_limit, model_, {}, config_).total, -10.0);

  EXPECT_NEAR(Penalties(a, a, state_, model_, {{"torso_link", 2.0}}, config_)
                  .total,
              -0.1, 1e-15);
  EXPECT_EQ(Penalties(a, a, state_, model_, {{"torso_link", 1.0}}, config_)
                .total,
            0.0);
  EXPECT_EQ(Penalties(a, a, state_, model_,
                      {{"left_knee_link", 50.0}, {"right_ankle_roll_link", 9.0}},
                      config_)
                .total,
            0.0);
  EXPECT_THROW(Penalties(a, a, state_, model_, {{"no_such_link", 2.0}}, config_),
               InvalidArgument);
  EXPECT_THROW(Penalties(a, Eigen::VectorXd::Zero(2), state_, model_, {},
                         config_),
               InvalidArgument);
}

TEST(RewardConfigTest, JsonRoundTripAndRejection) {
  const TrackingRewardConfig c;
  const TrackingRewardConfig back = RewardConfigFromJson(ToJson(c), "rewards");
  EXPECT_EQ(back.sigma_p, c.sigma_p);
  EXPECT_NEAR(back.ee_rotation.min, c.ee_rotation.min, 1e-15);
  EXPECT_NEAR(back.fixed_sigma_theta, c.fixed_sigma_theta, 1e-15);
  EXPECT_EQ(back.contact_exempt, c.contact_exempt);
  const TrackingRewardConfig empty =
      RewardConfigFromJson(nlohmann::json::object(), "rewards");
  EXPECT_EQ(empty.ee_rotation.min, c.ee_rotation.min);
  auto doc = ToJson(c);
  doc["mode"] = "fixed";
  EXPECT_EQ(RewardConfigFromJson(doc, "rewards").mode, EeMode::kFixed);
  doc["mode"] = "loose";
  EXPECT_THROW(RewardConfigFromJson(doc, "rewards"), ParseError);
  doc = ToJson(c);
  doc["sigma_body"]["p"] = -0.3;
  EXPECT_THROW(RewardConfigFromJson(doc, "rewards"), ParseError);
  doc = ToJson(c);
  doc["sigma_ee"]["position"] = {0.2, 0.1};
  EXPECT_THROW(RewardConfigFromJson(doc, "rewards"), ParseError);
  doc = ToJson(c);
  doc["bonus"] = 1.0;
  EXPECT_THROW(RewardConfigFromJson(doc, "rewards"), ParseError);
}

TEST(PolicyHyperparametersTest, DefaultsAndValidation) {
  const PolicyHyperparameters p;
  EXPECT_EQ(p.action_horizon, 48);
  EXPECT_EQ(p.action_hz, 20.0);
  EXPECT_EQ(p.proprio_obs_horizon, 3);
  EXPECT_EQ(p.num_cameras, 2);
  EXPECT_EQ(p.image_height, 224);
  EXPECT_EQ(p.learning_rate, 3e-4);
  EXPECT_EQ(p.backbone_learning_rate, 3e-5);
  EXPECT_EQ(p.batch_size, 256);
  EXPECT_EQ(p.denoising_steps, 10);
  EXPECT_EQ(ToJson(PolicyHyperparametersFromJson(ToJson(p), "policy")),
            ToJson(p));
  auto doc = ToJson(p);
  doc["epochs"] = 0;
  EXPECT_THROW(PolicyHyperparametersFromJson(doc, "policy"), ParseError);
  doc = ToJson(p);
  doc["dropout"] = 0.1;
  EXPECT_THROW(PolicyHyperparametersFromJson(doc, "policy"), ParseError);
}

geom::PoseTrajectory Line(const std::string& name, double speed) {
  std::vector<geom::TimedPose> s;
  for (double t : geom::UniformClock(0.0, 1.0, 50.0)) {
    s.push_back({t, geom::Pose::FromTranslation({speed * t, 0.0, 1.0})});
  }
  return geom::PoseTrajectory(name, s);
}

TEST(EvaluateTraceTest, SelfTrackingClosedForm) {
  TraceInput in;
  in.reference = {{"pelvis", Line("pelvis", 0.01)},
                  {"left_gripper", Line("left_gripper", 0.2)}};
  in.tracked = in.reference;
  in.end_effectors = {"left_gripper"};
  const TrackingRewardConfig c;
  for (double step : {0.0, 12500.0, 15000.0}) {
    const double w = CurriculumAt(step, c).w_ee;
    for (const auto& f : EvaluateTrace(in, nullptr, c, step)) {
      EXPECT_NEAR(f.tracking.total, 4.0 + w * 2.0, 1e-12);
      EXPECT_FALSE(f.gated);
    }
  }
  in.reference["pelvis"] = Line("pelvis", 0.05);
  in.tracked = in.reference;
  for (const auto& f : EvaluateTrace(in, nullptr, c, 15000.0)) {
    EXPECT_TRUE(f.gated);
    EXPECT_NEAR(f.tracking.total, 4.0, 1e-12);
  }
}

TEST(EvaluateTraceTest, MisalignedSpansRejected) {
  TraceInput in;
  in.reference = {{"pelvis", Line("pelvis", 0.01)}};
  std::vector<geom::TimedPose> shifted;
  for (const auto& s : in.reference.at("pelvis").samples()) {
    shifted.push_back({s.time + 0.5, s.pose});
  }
  in.tracked = {{"pelvis", geom::PoseTrajectory("pelvis", shifted)}};
  EXPECT_THROW(EvaluateTrace(in, nullptr, TrackingRewardConfig{}, 0.0),
               InvalidArgument);
}

}  // namespace
}  // namespace humi::rewards
