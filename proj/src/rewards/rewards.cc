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

#include <algorithm>
#include <cmath>
#include <sstream>

#include "humi/error.h"

namespace humi::rewards {
namespace {

double Lerp(double a, double b, double f) { return (1.0 - f) * a + f * b; }

void CheckPositive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw InvalidArgument(std::string("reward config: ") + name +
                          " must be positive");
  }
}

bool Exempt(const std::string& link, const TrackingRewardConfig& config) {
  for (const auto& token : config.contact_exempt) {
    if (link.find(token) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

void Validate(const TrackingRewardConfig& c) {
  CheckPositive(c.sigma_p, "sigma_p");
  CheckPositive(c.sigma_theta, "sigma_theta");
  CheckPositive(c.sigma_v, "sigma_v");
  CheckPositive(c.sigma_w, "sigma_w");
  CheckPositive(c.ee_position.min, "ee position sigma min");
  CheckPositive(c.ee_rotation.min, "ee rotation sigma min");
  CheckPositive(c.fixed_sigma_p, "fixed sigma_p");
  CheckPositive(c.fixed_sigma_theta, "fixed sigma_theta");
  CheckPositive(c.sigma_p_min_start, "sigma_p_min_start");
  CheckPositive(c.speed_sigma_start, "speed_sigma_start");
  CheckPositive(c.speed_sigma_end, "speed_sigma_end");
  if (c.ee_position.min > c.ee_position.max ||
      c.ee_rotation.min > c.ee_rotation.max) {
    throw InvalidArgument("reward config: sigma min exceeds sigma max");
  }
  if (c.sigma_p_min_start > c.ee_position.max) {
    throw InvalidArgument("reward config: sigma_p_min_start exceeds sigma max");
  }
  if (!(c.v_min < c.v_max) || c.v_min < 0.0) {
    throw InvalidArgument("reward config: need 0 <= v_min < v_max");
  }
  if (!(c.ramp_start < c.ramp_end) || c.ramp_start < 0.0) {
    throw InvalidArgument("reward config: need 0 <= ramp_start < ramp_end");
  }
  if (c.w_body < 0.0 || c.w_ee_max < 0.0 || c.fixed_w_ee < 0.0 ||
      c.gate_delta < 0.0 || c.contact_threshold < 0.0) {
    throw InvalidArgument("reward config: weights and thresholds must be >= 0");
  }
  if (c.w_action_rate > 0.0 || c.w_joint_limit > 0.0 || c.w_contact > 0.0) {
    throw InvalidArgument("reward config: penalty weights must be <= 0");
  }
}

CurriculumState CurriculumAt(double step, const TrackingRewardConfig& config) {
  if (!(step >= 0.0)) throw InvalidArgument("curriculum step must be >= 0");
  const double f = std::clamp(
      (step - config.ramp_start) / (config.ramp_end - config.ramp_start), 0.0,
      1.0);
  CurriculumState s;
  s.step = step;
  s.w_ee = Lerp(0.0, config.w_ee_max, f);
  s.sigma_p_min = Lerp(config.sigma_p_min_start, config.ee_position.min, f);
  s.speed_sigma = Lerp(config.speed_sigma_start, config.speed_sigma_end, f);
  return s;
}

double Kernel(double error_sq, double sigma) {
  if (!(error_sq >= 0.0)) throw InvalidArgument("kernel error must be >= 0");
  if (!(sigma > 0.0)) throw InvalidArgument("kernel sigma must be positive");
  return std::exp(-error_sq / (sigma * sigma));
}

double EeTolerance(double v_ref_ee, const SigmaRange& range, double v_min,
                   double v_max) {
  if (!(v_ref_ee >= 0.0)) throw InvalidArgument("EE speed must be >= 0");
  const double interp =
      (v_ref_ee - v_min) / (v_max - v_min) * (range.max - range.min) + range.min;
  return std::clamp(interp, range.min, range.max);
}

double EeTolerance(double v_ref_ee, EeMetric metric,
                   const TrackingRewardConfig& config) {
  return EeTolerance(v_ref_ee,
                     metric == EeMetric::kPosition ? config.ee_position
                                                   : config.ee_rotation,
                     config.v_min, config.v_max);
}

double BodyReward(const TrackingSample& sample,
                  const TrackingRewardConfig& config) {
  if (sample.bodies.empty()) {
    throw InvalidArgument("body reward needs at least one tracked body");
  }
  double ep = 0.0;
  double er = 0.0;
  double ev = 0.0;
  double ew = 0.0;
  for (const auto& b : sample.bodies) {
    ep += (b.ref.translation - b.actual.translation).squaredNorm();
    const double angle = geom::RotationError(b.ref.rotation, b.actual.rotation);
    er += angle * angle;
    ev += (b.ref_twist.linear - b.actual_twist.linear).squaredNorm();
    ew += (b.ref_twist.angular - b.actual_twist.angular).squaredNorm();
  }
  const double n = static_cast<double>(sample.bodies.size());
  return Kernel(ep / n, config.sigma_p) + Kernel(er / n, config.sigma_theta) +
         Kernel(ev / n, config.sigma_v) + Kernel(ew / n, config.sigma_w);
}

double EeReward(const TrackingSample& sample,
                const TrackingRewardConfig& config,
                const CurriculumState& curriculum) {
  if (sample.end_effectors.empty()) {
    throw InvalidArgument("EE reward needs at least one end-effector");
  }
  double ep = 0.0;
  double er = 0.0;
  double speed = 0.0;
  for (const auto& e : sample.end_effectors) {
    ep += (e.ref.translation - e.actual.translation).squaredNorm();
    const double angle = geom::RotationError(e.ref.rotation, e.actual.rotation);
    er += angle * angle;
    speed += e.ref_speed;
  }
  const double n = static_cast<double>(sample.end_effectors.size());
  ep /= n;
  er /= n;
  speed /= n;
  if (config.mode == EeMode::kFixed) {
    return Kernel(ep, config.fixed_sigma_p) +
           Kernel(er, config.fixed_sigma_theta);
  }
  if (!(sample.ref_base_speed < config.gate_delta)) return 0.0;
  const SigmaRange position{curriculum.sigma_p_min, config.ee_position.max};
  return Kernel(ep, EeTolerance(speed, position, config.v_min, config.v_max)) +
         Kernel(er, EeTolerance(speed, config.ee_rotation, config.v_min,
                                config.v_max));
}

TrackingReward TotalTrackingReward(const TrackingSample& sample,
                                   const TrackingRewardConfig& config,
                                   const CurriculumState& curriculum) {
  TrackingReward r;
  r.r_body = BodyReward(sample, config);
  r.w_ee = config.mode == EeMode::kFixed ? config.fixed_w_ee : curriculum.w_ee;
  if (r.w_ee != 0.0) r.r_ee = EeReward(sample, config, curriculum);
  r.total = config.w_body * r.r_body;
  if (r.w_ee != 0.0) r.total += r.w_ee * r.r_ee;
  return r;
}

PenaltyBreakdown Penalties(const Eigen::VectorXd& action,
                           const Eigen::VectorXd& previous_action,
                           const robot::JointState& state,
                           const robot::KinematicModel& model,
                           const std::map<std::string, double>& contacts,
                           const TrackingRewardConfig& config) {
  if (action.size() != previous_action.size()) {
    std::ostringstream msg;
    msg << "action length " << action.size() << " differs from previous "
        << previous_action.size();
    throw InvalidArgument(msg.str());
  }
  PenaltyBreakdown p;
  p.action_rate =
      config.w_action_rate * (action - previous_action).squaredNorm();
  p.joint_limits =
      config.w_joint_limit *
      static_cast<double>(robot::JointLimitViolations(model, state).size());
  int touching = 0;
  for (const auto& [link, force] : contacts) {
    if (model.FindLink(link) < 0) {
      throw InvalidArgument("contact names unknown link '" + link + "'");
    }
    if (force > config.contact_threshold && !Exempt(link, config)) ++touching;
  }
  p.contacts = config.w_contact * touching;
  p.total = p.action_rate + p.joint_limits + p.contacts;
  return p;
}

std::vector<FrameReward> EvaluateTrace(const TraceInput& input,
                                       const robot::KinematicModel* model,
                                       const TrackingRewardConfig& config,
                                       double step) {
  Validate(config);
  if (input.reference.empty()) throw InvalidArgument("empty reference");
  const auto& clock = input.reference.begin()->second.samples();
  auto check_aligned = [&](const geom::PoseTrajectory& traj,
                           const std::string& what) {
    bool ok = traj.size() == clock.size();
    for (size_t i = 0; ok && i < clock.size(); ++i) {
      ok = std::abs(traj.samples()[i].time - clock[i].time) <= 1e-9;
    }
    if (!ok) {
      throw InvalidArgument(what + " '" + traj.frame_name() +
                            "' is not time-aligned with the reference");
    }
  };
  for (const auto& [name, traj] : input.reference) {
    check_aligned(traj, "reference");
    auto it = input.tracked.find(name);
    if (it == input.tracked.end()) {
      throw InvalidArgument("tracked trajectories lack '" + name + "'");
    }
    check_aligned(it->second, "tracked");
  }
  for (const auto& name : input.end_effectors) {
    if (!input.reference.count(name)) {
      throw InvalidArgument("unknown end-effector '" + name + "'");
    }
  }
  if (!input.reference.count(input.base)) {
    throw InvalidArgument("reference lacks base frame '" + input.base + "'");
  }
  const bool with_penalties = model != nullptr && !input.joints.empty();
  if (with_penalties && input.joints.size() != clock.size()) {
    throw InvalidArgument("joint trajectory length differs from the reference");
  }

  const CurriculumState curriculum = CurriculumAt(step, config);
  std::vector<FrameReward> out;
  for (size_t i = 0; i < clock.size(); ++i) {
    const double t = clock[i].time;
    TrackingSample sample;
    for (const auto& [name, ref] : input.reference) {
      const auto& tracked = input.tracked.at(name);
      sample.bodies.push_back({name, ref.samples()[i].pose,
                               tracked.samples()[i].pose,
                               geom::FiniteDifferenceTwist(ref, t),
                               geom::FiniteDifferenceTwist(tracked, t)});
    }
    for (const auto& name : input.end_effectors) {
      const auto& ref = input.reference.at(name);
      sample.end_effectors.push_back(
          {name, ref.samples()[i].pose, input.tracked.at(name).samples()[i].pose,
           geom::FiniteDifferenceTwist(ref, t).linear.norm()});
    }
    sample.ref_base_speed =
        geom::FiniteDifferenceTwist(input.reference.at(input.base), t)
            .linear.norm();
    FrameReward frame;
    frame.time = t;
    frame.tracking = TotalTrackingReward(sample, config, curriculum);
    frame.gated = config.mode == EeMode::kAdaptive &&
                  !(sample.ref_base_speed < config.gate_delta);
    if (with_penalties) {
      const auto& q = input.joints[i].q;
      const auto& prev = input.joints[i == 0 ? 0 : i - 1].q;
      frame.penalties = Penalties(q, prev, input.joints[i], *model, {}, config);
    }
    out.push_back(frame);
  }
  return out;
}

}  // namespace humi::rewards
