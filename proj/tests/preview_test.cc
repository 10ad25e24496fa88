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
#include <chrono>
#include <cmath>
#include <random>
#include <thread>

#include <gtest/gtest.h>

#include "humi/error.h"
#include "humi/io.h"
#include "humi/preview.h"
#include "humi/version.h"
#include "ik_fixtures.h"
#include "test_util.h"

namespace humi::preview {
namespace {

using geom::Pose;
using geom::Vec3;
using Json = nlohmann::json;
using ::humi::testing::ModelPath;
using ::humi::testing::RandomReachableState;
using ::humi::testing::ReplayTrajectories;

class PreviewTest : public ::testing::Test {
 protected:
  void SetUp() override {
    model_ = robot::LoadModelFile(ModelPath("toy_humanoid"));
    service_.AddModel("toy", model_);
  }

  std::string Open(const Json& config = nullptr) {
    Json payload = {{"model", "toy"}};
    if (!config.is_null()) payload["config"] = config;
    const Json reply = service_.Handle(
        {{"type", "open"}, {"seq", 0}, {"payload", payload}});
    EXPECT_EQ(reply["type"], "state") << reply.dump();
    return reply["session"].get<std::string>();
  }

  Json Send(const std::string& session, const std::string& type,
            const Json& payload = Json::object(), int seq = 1) {
    return service_.Handle(
        {{"type", type}, {"session", session}, {"seq", seq},
         {"payload", payload}});
  }

  Json SendTargets(const std::string& session, const Targets& targets,
                   int seq = 1) {
    return Send(session, "targets", {{"targets", TargetsToJson(targets)}},
                seq);
  }

  robot::KinematicModel model_;
  PreviewService service_;
};

void ExpectTriple(const Json& reply) {
  const Json& p = reply["payload"];
  ASSERT_TRUE(p.contains("converged")) << reply.dump();
  EXPECT_TRUE(p["converged"].is_boolean());
  EXPECT_TRUE(p["collision_flags"].is_array());
  EXPECT_TRUE(p["limit_flags"].is_array());
}

TEST_F(PreviewTest, OpenStartsAtTheZeroPose) {
  const Json reply = service_.Handle(
      {{"type", "open"}, {"seq", 4}, {"payload", {{"model", "toy"}}}});
  EXPECT_EQ(reply["type"], "state");
  EXPECT_EQ(reply["seq"], 4);
  EXPECT_EQ(reply["payload"]["protocol"], kProtocol);
  EXPECT_EQ(reply["payload"]["tick_budget"], 5);
  EXPECT_EQ(reply["payload"]["joints"].size(),
            static_cast<size_t>(model_.num_joints()));
  const robot::JointState s =
      StateFromJson(model_, reply["payload"]["state"], "state");
  EXPECT_EQ(s.q, Eigen::VectorXd::Zero(model_.num_joints()));
  EXPECT_EQ(s.base_pose.translation, Vec3::Zero());
  ExpectTriple(reply);
}

TEST_F(PreviewTest, UnknownModelIsAnError) {
  const Json reply = service_.Handle(
      {{"type", "open"}, {"seq", 2}, {"payload", {{"model", "nope"}}}});
  EXPECT_EQ(reply["type"], "error");
  EXPECT_EQ(reply["seq"], 2);
  EXPECT_EQ(reply["payload"]["code"], "unknown_model");
  EXPECT_EQ(service_.num_sessions(), 0u);
}

TEST_F(PreviewTest, SessionsAreIndependent) {
  const std::string a = Open();
  const std::string b = Open();
  EXPECT_NE(a, b);
  std::mt19937_64 rng(3);
  const auto target = robot::ForwardKinematics(
      model_, RandomReachableState(model_, rng, 0.4, 0.05));
  SendTargets(a, {{"left_gripper", target.at("left_gripper")}});
  const Json sb = Send(b, "state");
  EXPECT_EQ(StateFromJson(model_, sb["payload"]["state"], "s").q,
            Eigen::VectorXd::Zero(model_.num_joints()));
  EXPECT_TRUE(sb["payload"]["targets"].empty());
}

// Isolation under concurrency: two sessions driven from two threads end
// where they end when driven one after another.
TEST_F(PreviewTest, ConcurrentSessionsMatchSerialRuns) {
  std::mt19937_64 rng(5);
  std::vector<std::vector<Targets>> streams(2);
  for (auto& stream : streams) {
    for (int i = 0; i < 20; ++i) {
      const auto fk = robot::ForwardKinematics(
          model_, RandomReachableState(model_, rng, 0.3, 0.05));
      stream.push_back({{"left_gripper", fk.at("left_gripper")},
                        {"pelvis", fk.at("pelvis")}});
    }
  }
  auto drive = [&](const std::string& id, const std::vector<Targets>& s) {
    Json last;
    for (const auto& t : s) last = SendTargets(id, t);
    return last["payload"]["state"].dump();
  };
  const std::string serial0 = drive(Open(), streams[0]);
  const std::string serial1 = drive(Open(), streams[1]);
  const std::string a = Open();
  const std::string b = Open();
  std::string par0, par1;
  std::thread t0([&] { par0 = drive(a, streams[0]); });
  std::thread t1([&] { par1 = drive(b, streams[1]); });
  t0.join();
  t1.join();
  EXPECT_EQ(par0, serial0);
  EXPECT_EQ(par1, serial1);
}

TEST_F(PreviewTest, TargetAtCurrentPoseHasNoResidual) {
  const std::string id = Open();
  const auto fk = robot::ForwardKinematics(model_, robot::ZeroState(model_));
  const Json reply = SendTargets(id, fk);
  ExpectTriple(reply);
  EXPECT_TRUE(reply["payload"]["converged"].get<bool>());
  EXPECT_TRUE(reply["payload"]["collision_flags"].empty());
  EXPECT_TRUE(reply["payload"]["limit_flags"].empty());
  for (const auto& [name, r] : reply["payload"]["residuals"].items()) {
    EXPECT_LT(r["position"].get<double>(), 1e-12) << name;
    EXPECT_LT(r["rotation"].get<double>(), 1e-12) << name;
  }
}

TEST_F(PreviewTest, UnreachableTargetIsFlaggedAndClamped) {
  const std::string id = Open(Json{{"mobile_base", false}});
  const Pose far = Pose::FromTranslation({10.0, 0.0, 1.0});
  Json reply;
  for (int i = 0; i < 20; ++i) reply = SendTargets(id, {{"left_gripper", far}});
  ExpectTriple(reply);
  EXPECT_FALSE(reply["payload"]["converged"].get<bool>());
  EXPECT_GT(reply["payload"]["residuals"]["left_gripper"]["position"]
                .get<double>(),
            8.0);
  const robot::JointState s =
      StateFromJson(model_, reply["payload"]["state"], "s");
  for (int j = 0; j < model_.num_joints(); ++j) {
    EXPECT_GE(s.q[j], model_.joints()[j].q_min);
    EXPECT_LE(s.q[j], model_.joints()[j].q_max);
  }
}

TEST_F(PreviewTest, MalformedUpdateLeavesSessionUntouched) {
  const std::string id = Open();
  std::mt19937_64 rng(9);
  const auto fk = robot::ForwardKinematics(
      model_, RandomReachableState(model_, rng, 0.3, 0.05));
  SendTargets(id, {{"right_gripper", fk.at("right_gripper")}});
  const std::string before = Send(id, "state")["payload"].dump();

  Json bad = TargetsToJson({{"left_gripper", fk.at("left_gripper")}});
  bad["pelvis"] = {{"p", {0, 0, 1}}, {"q", {2, 0, 0, 0}}};
  Json reply = Send(id, "targets", {{"targets", bad}});
  EXPECT_EQ(reply["type"], "error");
  EXPECT_EQ(reply["payload"]["code"], "bad_message");
  EXPECT_EQ(reply["payload"]["path"], "payload.targets.pelvis.q");
  ExpectTriple(reply);

  reply = SendTargets(id, {{"left_gripper", fk.at("left_gripper")},
                           {"tail", Pose{}}});
  EXPECT_EQ(reply["payload"]["code"], "invalid");
  reply = Send(id, "targets", {{"targets", {{"pelvis", {{"p", {0, 0}}}}}}});
  EXPECT_EQ(reply["payload"]["code"], "bad_message");
  EXPECT_EQ(Send(id, "state")["payload"].dump(), before);
}

TEST_F(PreviewTest, PartialUpdatesMerge) {
  const std::string id = Open();
  const Pose a = Pose::FromTranslation({0.1, 0.2, 0.9});
  const Pose b = Pose::FromTranslation({0.3, 0.2, 0.9});
  SendTargets(id, {{"pelvis", a}});
  SendTargets(id, {{"left_gripper", b}});
  Json reply = SendTargets(id, {{"left_gripper", a}});
  const Targets held = TargetsFromJson(reply["payload"]["targets"], "t");
  ASSERT_EQ(held.size(), 2u);
  EXPECT_EQ(held.at("pelvis").translation, a.translation);
  EXPECT_EQ(held.at("left_gripper").translation, a.translation);
}

TEST_F(PreviewTest, SameSequenceGivesSameStates) {
  std::mt19937_64 rng(11);
  std::vector<Targets> stream;
  for (int i = 0; i < 15; ++i) {
    const auto fk = robot::ForwardKinematics(
        model_, RandomReachableState(model_, rng, 0.3, 0.05));
    stream.push_back({{"right_gripper", fk.at("right_gripper")}});
  }
  std::vector<std::string> runs;
  for (int r = 0; r < 2; ++r) {
    PreviewService fresh;
    fresh.AddModel("toy", model_);
    const Json open = fresh.Handle(
        {{"type", "open"}, {"payload", {{"model", "toy"}}}});
    std::string all;
    for (const auto& t : stream) {
      all += fresh.Handle({{"type", "targets"},
                           {"session", open["session"]},
                           {"payload", {{"targets", TargetsToJson(t)}}}})
                 .dump();
    }
    runs.push_back(all);
  }
  EXPECT_EQ(runs[0], runs[1]);
}

// Replay property: a captured stream replayed into a fresh session
// reproduces every state bit for bit, also after a JSON round trip.
TEST_F(PreviewTest, RecordingReplaysBitIdentically) {
  const auto keys = std::vector<std::string>{"pelvis", "left_gripper",
                                             "right_gripper", "left_foot"};
  const auto episode = ReplayTrajectories(model_, robot::ZeroState(model_),
                                          1.0, 50.0);
  service_.AddEpisode("ep", episode);
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    const std::string id = Open();
    // some history before recording starts
    SendTargets(id, {{"pelvis", Pose::FromTranslation({0, 0, 0.8})}});
    Send(id, "record_start");
    std::vector<std::string> live;
    std::uniform_int_distribution<int> pick(0, 3);
    std::uniform_real_distribution<double> when(0.0, 1.0);
    for (int i = 0; i < 25; ++i) {
      Json reply;
      if (i % 7 == 3) {
        reply = Send(id, "scrub", {{"episode", "ep"}, {"t", when(rng)}});
      } else {
        const auto fk = robot::ForwardKinematics(
            model_, RandomReachableState(model_, rng, 0.3, 0.05));
        Targets t;
        for (int k = 0; k <= pick(rng); ++k) t[keys[k]] = fk.at(keys[k]);
        reply = SendTargets(id, t);
      }
      ASSERT_EQ(reply["type"], "state") << reply.dump();
      live.push_back(reply["payload"]["state"].dump());
    }
    const Json stop = Send(id, "record_stop");
    ASSERT_TRUE(stop["payload"].contains("recording"));
    EXPECT_FALSE(stop["payload"]["recording"].is_null());
    const Recording rec = RecordingFromJson(
        model_, Json::parse(stop["payload"]["recording"].dump()), "rec");
    ASSERT_EQ(rec.updates.size(), 25u);
    auto model = std::make_shared<const robot::KinematicModel>(model_);
    const auto replayed = Replay(model, rec);
    ASSERT_EQ(replayed.size(), live.size());
    for (size_t i = 0; i < live.size(); ++i) {
      EXPECT_EQ(StateToJson(model_, replayed[i]).dump(), live[i])
          << "seed " << seed << " update " << i;
      EXPECT_EQ(replayed[i].q, rec.updates[i].state.q);
    }
  }
}

TEST_F(PreviewTest, RecordStopWithoutStartIsAnError) {
  const std::string id = Open();
  const Json reply = Send(id, "record_stop");
  EXPECT_EQ(reply["type"], "error");
  EXPECT_EQ(reply["payload"]["code"], "invalid");
  ExpectTriple(reply);
}

TEST_F(PreviewTest, ScrubAtStartMatchesBatchFirstFrame) {
  std::mt19937_64 rng(21);
  const auto center = RandomReachableState(model_, rng, 0.3, 0.08);
  const auto episode = ReplayTrajectories(model_, center, 1.0, 100.0);
  service_.AddEpisode("ep", episode);
  ik::IkConfig config;
  config.preview_iterations = config.max_iterations;
  const std::string id = Open(Json{{"preview_iterations",
                                    config.max_iterations}});
  const Json reply = Send(id, "scrub", {{"episode", "ep"}, {"t", 0.0}});
  ASSERT_EQ(reply["type"], "state") << reply.dump();
  const robot::JointState live =
      StateFromJson(model_, reply["payload"]["state"], "s");
  const auto batch = ik::SolveTrajectory(model_, episode, config, 50.0,
                                         robot::ZeroState(model_));
  const robot::JointState& first = batch.trajectory.states.front();
  EXPECT_LE((live.q - first.q).lpNorm<Eigen::Infinity>(), 1e-6);
  EXPECT_LE((live.base_pose.translation - first.base_pose.translation).norm(),
            1e-6);
  EXPECT_LE(geom::RotationError(live.base_pose.rotation,
                                first.base_pose.rotation),
            1e-6);
}

TEST_F(PreviewTest, ScrubSweepIsStepClamped) {
  std::mt19937_64 rng(22);
  const auto center = RandomReachableState(model_, rng, 0.3, 0.08);
  service_.AddEpisode("ep", ReplayTrajectories(model_, center, 2.0, 50.0));
  const std::string id = Open(Json{{"preview_iterations", 1}});
  const double max_step = ik::IkTaskWeights{}.max_step;
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(model_.num_joints());
  for (int i = 0; i <= 100; ++i) {
    const Json reply =
        Send(id, "scrub", {{"episode", "ep"}, {"t", 0.02 * i}});
    ASSERT_EQ(reply["type"], "state") << reply.dump();
    EXPECT_EQ(reply["payload"]["iterations"].get<int>() <= 1, true);
    const Eigen::VectorXd q =
        StateFromJson(model_, reply["payload"]["state"], "s").q;
    EXPECT_LE((q - prev).lpNorm<Eigen::Infinity>(), max_step + 1e-12) << i;
    prev = q;
  }
}

TEST_F(PreviewTest, ScrubErrors) {
  service_.AddEpisode(
      "ep", ReplayTrajectories(model_, robot::ZeroState(model_), 1.0, 50.0));
  const std::string id = Open();
  Json reply = Send(id, "scrub", {{"episode", "ep"}, {"t", 1.5}});
  EXPECT_EQ(reply["payload"]["code"], "out_of_span");
  reply = Send(id, "scrub", {{"episode", "ep"}, {"t", -0.01}});
  EXPECT_EQ(reply["payload"]["code"], "out_of_span");
  reply = Send(id, "scrub", {{"episode", "other"}, {"t", 0.5}});
  EXPECT_EQ(reply["payload"]["code"], "unknown_episode");
  ExpectTriple(reply);
}

TEST_F(PreviewTest, ProtocolErrors) {
  Json reply = service_.HandleText("{nope");
  EXPECT_EQ(reply["type"], "error");
  EXPECT_EQ(reply["payload"]["code"], "bad_message");
  reply = service_.Handle({{"type", "targets"}, {"session", "s99"}, {"seq", 3}});
  EXPECT_EQ(reply["payload"]["code"], "unknown_session");
  EXPECT_EQ(reply["seq"], 3);
  reply = service_.Handle({{"type", "open"}, {"extra", 1}});
  EXPECT_EQ(reply["payload"]["code"], "bad_message");
  const std::string id = Open();
  reply = Send(id, "dance");
  EXPECT_EQ(reply["payload"]["code"], "unknown_type");
  ExpectTriple(reply);
  reply = service_.Handle({{"type", "open"},
                           {"payload", {{"model", "toy"},
                                        {"config", {{"damping", -1.0}}}}}});
  EXPECT_EQ(reply["type"], "error");
}

TEST_F(PreviewTest, EveryStateReplyCarriesTheTriple) {
  service_.AddEpisode(
      "ep", ReplayTrajectories(model_, robot::ZeroState(model_), 1.0, 50.0));
  const std::string id = Open();
  for (const Json& r :
       {Send(id, "state"), Send(id, "record_start"),
        SendTargets(id, {{"pelvis", Pose::FromTranslation({0, 0, 0.9})}}),
        Send(id, "scrub", {{"episode", "ep"}, {"t", 0.5}}),
        Send(id, "record_stop"), Send(id, "close")}) {
    EXPECT_EQ(r["type"], "state");
    ExpectTriple(r);
  }
}

TEST_F(PreviewTest, CloseRemovesTheSession) {
  const std::string id = Open();
  EXPECT_TRUE(service_.HasSession(id));
  const Json reply = Send(id, "close");
  EXPECT_TRUE(reply["payload"]["closed"].get<bool>());
  EXPECT_FALSE(service_.HasSession(id));
  EXPECT_EQ(Send(id, "state")["payload"]["code"], "unknown_session");
}

TEST_F(PreviewTest, UpdateLatencyFitsTheFrameBudget) {
  const std::string id = Open();
  std::mt19937_64 rng(31);
  std::vector<double> ms;
  for (int i = 0; i < 60; ++i) {
    const auto fk = robot::ForwardKinematics(
        model_, RandomReachableState(model_, rng, 0.3, 0.05));
    const auto t0 = std::chrono::steady_clock::now();
    SendTargets(id, fk);
    ms.push_back(std::chrono::duration<double, std::milli>(
                     std::chrono::steady_clock::now() - t0)
                     .count());
  }
  std::nth_element(ms.begin(), ms.begin() + 30, ms.end());
  EXPECT_LE(ms[30], 33.0);
}

TEST_F(PreviewTest, HealthReportsVersionAndProtocol) {
  const Json h = service_.Health();
  EXPECT_EQ(h["status"], "ok");
  EXPECT_EQ(h["version"], kVersion);
  EXPECT_EQ(h["protocol"], kProtocol);
  EXPECT_EQ(h["models"], Json::array({"toy"}));
}

TEST_F(PreviewTest, OneShotSolve) {
  std::mt19937_64 rng(41);
  const auto fk = robot::ForwardKinematics(
      model_, RandomReachableState(model_, rng, 0.3, 0.08));
  Json out = service_.Solve({{"model", "toy"}, {"targets", TargetsToJson(fk)}});
  EXPECT_TRUE(out["converged"].get<bool>());
  EXPECT_LT(out["residuals"]["left_gripper"]["position"].get<double>(), 1e-3);

  out = service_.Solve({{"model", "toy"},
                        {"targets", TargetsToJson(fk)},
                        {"iterations", 1},
                        {"initial", StateToJson(model_, robot::ZeroState(model_))}});
  EXPECT_EQ(out["iterations"], 1);
  EXPECT_LE(StateFromJson(model_, out["state"], "s").q.lpNorm<Eigen::Infinity>(),
            ik::IkTaskWeights{}.max_step + 1e-12);
  EXPECT_THROW(service_.Solve({{"model", "toy"},
                               {"targets", TargetsToJson(fk)},
                               {"iterations", 0}}),
               ParseError);

  Json trajs = Json::object();
  const auto episode =
      ReplayTrajectories(model_, robot::ZeroState(model_), 0.5, 50.0);
  for (const auto& [name, traj] : episode) {
    Json t = Json::array(), p = Json::array(), q = Json::array();
    for (const auto& s : traj.samples()) {
      const Json pose = io::PoseToJson(s.pose);
      t.push_back(s.time);
      p.push_back(pose["p"]);
      q.push_back(pose["q"]);
    }
    trajs[name] = {{"t", t}, {"p", p}, {"q", q}};
  }
  out = service_.Solve({{"model", "toy"}, {"trajectories", trajs}, {"rate", 20.0}});
  EXPECT_EQ(out["frames"], 11u);
  EXPECT_EQ(out["states"].size(), 11u);
  EXPECT_TRUE(out["issues"].empty());

  EXPECT_THROW(service_.Solve({{"model", "x"}, {"targets", Json::object()}}),
               InvalidArgument);
  EXPECT_THROW(service_.Solve({{"model", "toy"}}), ParseError);
  EXPECT_THROW(service_.Solve({{"model", "toy"},
                               {"targets", Json::object()},
                               {"trajectories", trajs}}),
               ParseError);
  EXPECT_THROW(service_.Solve({{"model", "toy"},
                               {"targets", {{"nose", io::PoseToJson(Pose{})}}}}),
               InvalidArgument);
}

Json TargetsMessage(const std::string& session, const Targets& t, int seq) {
  return {{"type", "targets"},
          {"session", session},
          {"seq", seq},
          {"payload", {{"targets", TargetsToJson(t)}}}};
}

TEST(MessageQueueTest, FifoBelowCapacity) {
  MessageQueue q(4);
  for (int i = 0; i < 3; ++i) EXPECT_FALSE(q.Push({{"seq", i}}));
  for (int i = 0; i < 3; ++i) EXPECT_EQ((*q.Pop())["seq"], i);
  EXPECT_FALSE(q.Pop());
  EXPECT_THROW(MessageQueue(0), InvalidArgument);
}

TEST(MessageQueueTest, OverflowDropsOldestTargetsAndFoldsThem) {
  MessageQueue q(3);
  const Pose a = Pose::FromTranslation({1, 0, 0});
  const Pose b = Pose::FromTranslation({2, 0, 0});
  const Pose c = Pose::FromTranslation({3, 0, 0});
  q.Push({{"type", "open"}, {"seq", 0}});
  q.Push(TargetsMessage("s1", {{"pelvis", a}, {"left_gripper", a}}, 1));
  q.Push(TargetsMessage("s1", {{"pelvis", b}}, 2));
  const auto dropped = q.Push(TargetsMessage("s1", {{"pelvis", c}}, 3));
  ASSERT_TRUE(dropped);
  EXPECT_EQ(*dropped, "s1");
  EXPECT_EQ(q.dropped(), 1u);
  EXPECT_EQ((*q.Pop())["type"], "open");
  const Json next = *q.Pop();
  EXPECT_EQ(next["seq"], 2);
  const Targets folded = TargetsFromJson(next["payload"]["targets"], "t");
  EXPECT_EQ(folded.at("pelvis").translation, b.translation);
  EXPECT_EQ(folded.at("left_gripper").translation, a.translation);
  EXPECT_EQ((*q.Pop())["seq"], 3);
}

TEST(MessageQueueTest, WithoutTargetsTheOldestGoes) {
  MessageQueue q(2);
  q.Push({{"type", "state"}, {"session", "s1"}, {"seq", 0}});
  q.Push({{"type", "state"}, {"session", "s2"}, {"seq", 1}});
  EXPECT_EQ(*q.Push({{"type", "state"}, {"seq", 2}}), "s1");
  EXPECT_EQ((*q.Pop())["seq"], 1);
}

// Property: however the queue overflows, the held targets after applying
// what survives equal the held targets after applying everything.
TEST(MessageQueueTest, DroppingPreservesHeldTargets) {
  const std::vector<std::string> keys = {"pelvis", "left_gripper",
                                         "right_gripper", "left_foot"};
  for (uint64_t seed = 1; seed <= 50; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> cap(1, 6);
    std::uniform_int_distribution<int> key(0, 3);
    std::uniform_int_distribution<int> count(1, 3);
    MessageQueue q(cap(rng));
    Targets all;
    for (int i = 0; i < 40; ++i) {
      Targets t;
      for (int k = count(rng); k > 0; --k) {
        t[keys[key(rng)]] = Pose::FromTranslation({double(i), double(k), 0.0});
      }
      for (const auto& [n, p] : t) all[n] = p;
      q.Push(TargetsMessage("s1", t, i));
    }
    Targets held;
    while (auto m = q.Pop()) {
      for (const auto& [n, p] : TargetsFromJson((*m)["payload"]["targets"], "t")) {
        held[n] = p;
      }
    }
    ASSERT_EQ(held.size(), all.size()) << seed;
    for (const auto& [n, p] : all) {
      EXPECT_EQ(held.at(n).translation, p.translation) << seed << " " << n;
    }
  }
}

}  // namespace
}  // namespace humi::preview
