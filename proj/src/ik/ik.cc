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

#include "humi/ik.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>

#include "humi/error.h"
#include "humi/io.h"

namespace humi::ik {
namespace {

using robot::JointState;
using robot::KinematicModel;

// Joints are clamped this far inside their limits so a clamped joint never
// counts as a limit violation (the limit interval is open).
constexpr double kLimitInset = 1e-9;

double WeightOr(const std::map<std::string, double>& table,
                const std::string& key, double fallback) {
  auto it = table.find(key);
  return it == table.end() ? fallback : it->second;
}

}  // namespace

double IkTaskWeights::PositionWeight(const std::string& keyframe) const {
  return WeightOr(w_position, keyframe, default_position);
}

double IkTaskWeights::RotationWeight(const std::string& keyframe) const {
  return WeightOr(w_rotation, keyframe, default_rotation);
}

void Validate(const IkTaskWeights& weights) {
  auto check = [](double w, const std::string& what) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidArgument("IK weight '" + what + "' must be >= 0");
    }
  };
  for (const auto& [k, w] : weights.w_position) check(w, "w_position." + k);
  for (const auto& [k, w] : weights.w_rotation) check(w, "w_rotation." + k);
  check(weights.default_position, "default_position");
  check(weights.default_rotation, "default_rotation");
  check(weights.w_posture, "w_posture");
  check(weights.w_collision, "w_collision");
  check(weights.collision_margin, "collision_margin");
  if (!(weights.damping > 0.0)) {
    throw InvalidArgument("IK damping must be > 0");
  }
  if (!(weights.max_step > 0.0)) {
    throw InvalidArgument("IK max_step must be > 0");
  }
}

double IkSolution::MaxPositionResidual() const {
  double m = 0.0;
  for (const auto& r : residuals) m = std::max(m, r.position);
  return m;
}

double IkSolution::MaxRotationResidual() const {
  double m = 0.0;
  for (const auto& r : residuals) m = std::max(m, r.rotation);
  return m;
}

IkTargets ScalePelvisHeight(const IkTargets& targets, double human_height,
                            double robot_height, std::string_view pelvis) {
  if (!(human_height > 0.0) || !(robot_height > 0.0)) {
    throw InvalidArgument("heights must be positive for pelvis scaling");
  }
  IkTargets out = targets;
  auto it = out.poses.find(std::string(pelvis));
  if (it != out.poses.end() && robot_height != human_height) {
    it->second.translation.z() *= robot_height / human_height;
  }
  return out;
}

void CheckTargets(const KinematicModel& model, const IkTargets& targets) {
  for (const auto& [name, pose] : targets.poses) {
    if (model.FindKeyframe(name) < 0) {
      throw InvalidArgument("IK target names unknown keyframe '" + name + "'");
    }
    if (!geom::IsFinite(pose)) {
      throw InvalidArgument("IK target '" + name + "' is not a finite pose");
    }
  }
}

// Solves lhs * delta = rhs over the free coordinates. A joint whose update
// would leave its limits is pinned at the bound and the rest is re-solved.
Eigen::VectorXd ClampedStep(const KinematicModel& model, const JointState& state,
                            const Eigen::MatrixXd& lhs,
                            const Eigen::VectorXd& rhs, bool mobile_base,
                            double max_step) {
  const int dofs = model.num_dofs();
  const int nq = model.num_joints();
  std::vector<bool> pinned(dofs, false);
  if (!mobile_base) {
    for (int i = 0; i < robot::kBaseDofs; ++i) pinned[i] = true;
  }
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(dofs);
  for (int pass = 0; pass <= nq; ++pass) {
    std::vector<int> free;
    for (int i = 0; i < dofs; ++i) {
      if (!pinned[i]) free.push_back(i);
    }
    Eigen::VectorXd reduced_rhs(free.size());
    Eigen::MatrixXd reduced(free.size(), free.size());
    for (size_t a = 0; a < free.size(); ++a) {
      double r = rhs[free[a]];
      for (int i = 0; i < dofs; ++i) {
        if (pinned[i]) r -= lhs(free[a], i) * delta[i];
      }
      reduced_rhs[a] = r;
      for (size_t b = 0; b < free.size(); ++b) {
        reduced(a, b) = lhs(free[a], free[b]);
      }
    }
    const Eigen::VectorXd solved = reduced.ldlt().solve(reduced_rhs);
    for (size_t a = 0; a < free.size(); ++a) delta[free[a]] = solved[a];

    const double largest = delta.lpNorm<Eigen::Infinity>();
    const double scale = largest > max_step ? max_step / largest : 1.0;
    bool changed = false;
    for (int j = 0; j < nq; ++j) {
      const int i = robot::kBaseDofs + j;
      if (pinned[i]) continue;
      const auto& joint = model.joints()[j];
      const double next = state.q[j] + scale * delta[i];
      const double lo = joint.q_min + kLimitInset;
      const double hi = joint.q_max - kLimitInset;
      if (next < lo || next > hi) {
        pinned[i] = true;
        delta[i] = (next < lo ? lo : hi) - state.q[j];
        changed = true;
      }
    }
    if (!changed) {
      delta *= scale;
      break;
    }
  }
  const double largest = delta.lpNorm<Eigen::Infinity>();
  if (largest > max_step) delta *= max_step / largest;
  return delta;
}

JointState SolveStep(const KinematicModel& model, const JointState& state,
                     const IkTargets& targets, const IkTaskWeights& weights) {
  robot::CheckState(model, state);
  const int dofs = model.num_dofs();
  const int nq = model.num_joints();
  const auto link_poses = robot::LinkPoses(model, state);
  const Eigen::VectorXd rest =
      targets.rest_posture.q.size() == nq ? targets.rest_posture.q
                                          : Eigen::VectorXd::Zero(nq);

  // accumulate the normal equations block by block
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(dofs, dofs);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dofs);

  // keyframe tracking
  for (const auto& [name, target] : targets.poses) {
    const int k = model.FindKeyframe(name);
    if (k < 0) {
      throw InvalidArgument("IK target names unknown keyframe '" + name + "'");
    }
    const double wp = weights.PositionWeight(name);
    const double wr = weights.RotationWeight(name);
    if (wp == 0.0 && wr == 0.0) continue;
    const geom::Pose current = robot::KeyframePose(model, link_poses, k);
    const robot::Jacobian jac =
        robot::KeyframeJacobian(model, state, link_poses, k);
    Eigen::Matrix<double, 6, 1> residual;
    residual.head<3>() = target.translation - current.translation;
    residual.tail<3>() =
        geom::RotationErrorVector(target.rotation, current.rotation);
    Eigen::Matrix<double, 6, 1> w;
    w << wp, wp, wp, wr, wr, wr;
    lhs.noalias() += jac.transpose() * w.asDiagonal() * jac;
    rhs.noalias() += jac.transpose() * w.asDiagonal() * residual;
  }

  // posture regularization (joint coordinates only)
  if (weights.w_posture > 0.0) {
    lhs.bottomRightCorner(nq, nq).diagonal().array() += weights.w_posture;
    rhs.tail(nq) += weights.w_posture * (rest - state.q);
  }

  // self-collision repulsion along each close pair's center axis
  if (weights.w_collision > 0.0) {
    const auto clearances = robot::CollisionDistances(model, link_poses);
    for (const auto& c : clearances) {
      if (c.clearance >= weights.collision_margin) continue;
      const auto& pair = model.pairs()[c.pair];
      const auto& a = model.spheres()[pair.first];
      const auto& b = model.spheres()[pair.second];
      const geom::Vec3 ca = geom::TransformPoint(link_poses[a.link], a.center);
      const geom::Vec3 cb = geom::TransformPoint(link_poses[b.link], b.center);
      geom::Vec3 axis = ca - cb;
      axis = axis.norm() > 1e-12 ? axis.normalized() : geom::Vec3::UnitZ();
      const Eigen::RowVectorXd row =
          axis.transpose() *
          (robot::PointJacobian(model, state, link_poses, a.link, ca) -
           robot::PointJacobian(model, state, link_poses, b.link, cb));
      const double residual = weights.collision_margin - c.clearance;
      lhs.noalias() += weights.w_collision * row.transpose() * row;
      rhs.noalias() += weights.w_collision * residual * row.transpose();
    }
  }

  lhs.diagonal().array() += weights.damping;
  const Eigen::VectorXd delta =
      ClampedStep(model, state, lhs, rhs, weights.mobile_base, weights.max_step);

  JointState next = robot::Integrate(model, state, delta);
  for (int j = 0; j < nq; ++j) {
    const auto& joint = model.joints()[j];
    next.q[j] = std::clamp(next.q[j], joint.q_min + kLimitInset,
                           joint.q_max - kLimitInset);
  }
  return next;
}

IkSolution Evaluate(const KinematicModel& model, const JointState& state,
                    const IkTargets& targets, const IkTolerance& tolerance) {
  IkSolution sol;
  sol.state = state;
  const auto link_poses = robot::LinkPoses(model, state);
  for (const auto& [name, target] : targets.poses) {
    const int k = model.FindKeyframe(name);
    if (k < 0) {
      throw InvalidArgument("IK target names unknown keyframe '" + name + "'");
    }
    const geom::Pose current = robot::KeyframePose(model, link_poses, k);
    sol.residuals.push_back(
        {name, (target.translation - current.translation).norm(),
         geom::RotationError(target.rotation, current.rotation)});
  }
  bool in_collision = false;
  for (const auto& c : robot::CollisionDistances(model, link_poses)) {
    if (c.clearance < 0.0) {
      sol.collision_flags.push_back(c.first + "|" + c.second);
      in_collision = true;
    }
  }
  for (int j = 0; j < model.num_joints(); ++j) {
    const auto& joint = model.joints()[j];
    if (state.q[j] - joint.q_min <= tolerance.limit_band ||
        joint.q_max - state.q[j] <= tolerance.limit_band) {
      sol.limit_flags.push_back(joint.name);
    }
  }
  sol.converged = !in_collision &&
                  robot::JointLimitViolations(model, state).empty() &&
                  sol.MaxPositionResidual() <= tolerance.position &&
                  sol.MaxRotationResidual() <= tolerance.rotation;
  return sol;
}

IkSolution Solve(const KinematicModel& model, const JointState& q0,
                 const IkTargets& targets, const IkTaskWeights& weights,
                 const IkTolerance& tolerance, int max_iters) {
  if (max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
  Validate(weights);
  CheckTargets(model, targets);
  JointState state = q0;
  IkSolution sol = Evaluate(model, state, targets, tolerance);
  int iterations = 0;
  while (!sol.converged && iterations < max_iters) {
    state = SolveStep(model, state, targets, weights);
    ++iterations;
    sol = Evaluate(model, state, targets, tolerance);
  }
  sol.iterations = iterations;
  return sol;
}

JointState InitialGuess(const KinematicModel& model, const IkTargets& targets,
                        std::string_view pelvis) {
  JointState state = targets.rest_posture.q.size() == model.num_joints()
                         ? targets.rest_posture
                         : robot::ZeroState(model);
  const int k = model.FindKeyframe(pelvis);
  auto it = targets.poses.find(std::string(pelvis));
  if (k >= 0 && it != targets.poses.end()) {
    // place the root so the pelvis keyframe lands on its target
    const JointState at_origin{geom::Pose::Identity(), state.q, {}};
    const auto link_poses = robot::LinkPoses(model, at_origin);
    const geom::Pose key_in_root = robot::KeyframePose(model, link_poses, k);
    if (model.keyframes()[k].link == model.root_link()) {
      state.base_pose =
          geom::Compose(it->second, geom::Inverse(key_in_root));
    } else {
      state.base_pose = geom::Pose::FromTranslation(
          it->second.translation - key_in_root.translation);
    }
  }
  return state;
}

std::pair<double, double> CommonSpan(
    const std::map<std::string, geom::PoseTrajectory>& trajectories) {
  if (trajectories.empty()) {
    throw InvalidArgument("no target trajectories");
  }
  double start = -std::numeric_limits<double>::infinity();
  double end = std::numeric_limits<double>::infinity();
  for (const auto& [name, traj] : trajectories) {
    if (traj.empty()) {
      throw InvalidArgument("target trajectory '" + name + "' is empty");
    }
    start = std::max(start, traj.start_time());
    end = std::min(end, traj.end_time());
  }
  if (end < start) {
    std::ostringstream msg;
    msg << "target trajectories have no common time span (latest start "
        << start << " s after earliest end " << end << " s)";
    throw InvalidArgument(msg.str());
  }
  return {start, end};
}

IkTargets TargetsAt(const std::map<std::string, geom::PoseTrajectory>& trajs,
                    double t, const JointState& rest) {
  IkTargets targets;
  targets.rest_posture = rest;
  for (const auto& [name, traj] : trajs) targets.poses[name] = traj.At(t);
  return targets;
}

TrajectorySolution SolveTrajectory(
    const KinematicModel& model,
    const std::map<std::string, geom::PoseTrajectory>& targets,
    const IkConfig& config, double rate,
    std::optional<JointState> initial) {
  const auto [start, end] = CommonSpan(targets);
  const std::vector<double> clock = geom::UniformClock(start, end, rate);
  const JointState rest = robot::ZeroState(model);

  TrajectorySolution out;
  out.report.frames = clock.size();
  const bool warm = initial.has_value();
  JointState previous = warm ? *initial : JointState{};
  for (size_t i = 0; i < clock.size(); ++i) {
    const IkTargets frame_targets = TargetsAt(targets, clock[i], rest);
    const JointState q0 = (warm || i > 0) ? previous
                                          : InitialGuess(model, frame_targets);
    const IkSolution sol =
        Solve(model, q0, frame_targets, config.weights, config.tolerance,
              config.max_iterations);
    if (!sol.converged || !sol.collision_flags.empty() ||
        !sol.limit_flags.empty()) {
      out.report.issues.push_back({i, clock[i], !sol.converged,
                                   !sol.collision_flags.empty(),
                                   !sol.limit_flags.empty()});
    }
    out.trajectory.times.push_back(clock[i]);
    out.trajectory.states.push_back(sol.state);
    previous = sol.state;
  }
  return out;
}

IkConfig IkConfigFromJson(const nlohmann::json& doc, const std::string& path) {
  IkConfig c;
  io::RejectUnknownFields(
      doc,
      {"w_position", "w_rotation", "default_position", "default_rotation",
       "w_posture", "w_collision", "damping", "max_step", "collision_margin",
       "mobile_base", "tolerance_position", "tolerance_rotation",
       "limit_band", "max_iterations", "preview_iterations", "human_height",
       "robot_height"},
      path);
  auto num = [&](const char* key, double& field) {
    if (doc.contains(key)) field = io::AsNumber(doc[key], path + "." + key);
  };
  auto table = [&](const char* key, std::map<std::string, double>& field) {
    if (!doc.contains(key)) return;
    io::ExpectObject(doc[key], path + "." + key);
    for (const auto& [k, v] : doc[key].items()) {
      field[k] = io::AsNumber(v, path + "." + key + "." + k);
    }
  };
  table("w_position", c.weights.w_position);
  table("w_rotation", c.weights.w_rotation);
  num("default_position", c.weights.default_position);
  num("default_rotation", c.weights.default_rotation);
  num("w_posture", c.weights.w_posture);
  num("w_collision", c.weights.w_collision);
  num("damping", c.weights.damping);
  num("max_step", c.weights.max_step);
  num("collision_margin", c.weights.collision_margin);
  if (doc.contains("mobile_base")) {
    if (!doc["mobile_base"].is_boolean()) {
      throw ParseError(path + ".mobile_base", "expected a boolean");
    }
    c.weights.mobile_base = doc["mobile_base"].get<bool>();
  }
  num("tolerance_position", c.tolerance.position);
  num("tolerance_rotation", c.tolerance.rotation);
  num("limit_band", c.tolerance.limit_band);
  if (doc.contains("max_iterations")) {
    c.max_iterations = static_cast<int>(
        io::AsInteger(doc["max_iterations"], path + ".max_iterations"));
  }
  if (doc.contains("preview_iterations")) {
    c.preview_iterations = static_cast<int>(io::AsInteger(
        doc["preview_iterations"], path + ".preview_iterations"));
  }
  num("human_height", c.human_height);
  num("robot_height", c.robot_height);
  try {
    Validate(c.weights);
  } catch (const InvalidArgument& e) {
    throw ParseError(path, e.what());
  }
  if (c.max_iterations < 1 || c.preview_iterations < 1) {
    throw ParseError(path, "iteration budgets must be >= 1");
  }
  if (!(c.human_height > 0.0) || !(c.robot_height > 0.0)) {
    throw ParseError(path, "heights must be positive");
  }
  return c;
}

nlohmann::json ToJson(const IkConfig& c) {
  return nlohmann::json{
      {"w_position", c.weights.w_position},
      {"w_rotation", c.weights.w_rotation},
      {"default_position", c.weights.default_position},
      {"default_rotation", c.weights.default_rotation},
      {"w_posture", c.weights.w_posture},
      {"w_collision", c.weights.w_collision},
      {"damping", c.weights.damping},
      {"max_step", c.weights.max_step},
      {"collision_margin", c.weights.collision_margin},
      {"mobile_base", c.weights.mobile_base},
      {"tolerance_position", c.tolerance.position},
      {"tolerance_rotation", c.tolerance.rotation},
      {"limit_band", c.tolerance.limit_band},
      {"max_iterations", c.max_iterations},
      {"preview_iterations", c.preview_iterations},
      {"human_height", c.human_height},
      {"robot_height", c.robot_height},
  };
}

}  // namespace humi::ik
