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

#include "humi/augment.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "humi/error.h"

namespace humi::augment {
namespace {

using nlohmann::json;

constexpr int kMaxProposals = 1000000;

// Cumulative phase surplus over output time at each interval start.
class PhaseMap {
 public:
  explicit PhaseMap(const SpeedSchedule& s) : s_(s) {
    if (!(s.delta > 0.0)) throw InvalidArgument("speed interval must be > 0");
    if (s.factors.empty()) throw InvalidArgument("empty speed schedule");
    surplus_.reserve(s.factors.size() + 1);
    surplus_.push_back(0.0);
    for (double f : s.factors) {
      if (!(f > 0.0) || !std::isfinite(f)) {
        throw InvalidArgument("speed factors must be positive");
      }
      surplus_.push_back(surplus_.back() + (f - 1.0) * s.delta);
    }
  }

  double operator()(double t) const {
    const double end = s_.duration();
    if (t < -geom::kTimeEpsilon || t > end + geom::kTimeEpsilon) {
      std::ostringstream msg;
      msg << "time " << t << " outside speed schedule [0, " << end << "]";
      throw RangeError(msg.str());
    }
    t = std::clamp(t, 0.0, end);
    const size_t k = Interval(t);
    return t + surplus_[k] +
           (s_.factors[k] - 1.0) * (t - static_cast<double>(k) * s_.delta);
  }

  double Inverse(double phase) const {
    const size_t n = s_.factors.size();
    if (phase < 0.0 || phase > (*this)(s_.duration()) + geom::kTimeEpsilon) {
      std::ostringstream msg;
      msg << "phase " << phase << " not reached by the speed schedule";
      throw RangeError(msg.str());
    }
    for (size_t k = 0; k < n; ++k) {
      const double t0 = static_cast<double>(k) * s_.delta;
      const double p1 = static_cast<double>(k + 1) * s_.delta + surplus_[k + 1];
      if (phase <= p1 || k + 1 == n) {
        const double p0 = t0 + surplus_[k];
        return std::min(t0 + (phase - p0) / s_.factors[k], s_.duration());
      }
    }
    return s_.duration();
  }

 private:
  size_t Interval(double t) const {
    const auto k = static_cast<size_t>(std::floor(t / s_.delta));
    return std::min(k, s_.factors.size() - 1);
  }

  const SpeedSchedule& s_;
  std::vector<double> surplus_;
};

double SampleSpacing(const std::vector<double>& times) {
  if (times.size() < 2) {
    throw InvalidArgument("time warp needs at least two samples");
  }
  const double dt = (times.back() - times.front()) /
                    static_cast<double>(times.size() - 1);
  for (size_t i = 1; i < times.size(); ++i) {
    if (std::abs(times[i] - times[i - 1] - dt) > 1e-6) {
      throw InvalidArgument("time warp needs uniformly sampled input");
    }
  }
  return dt;
}

// Calls emit(output_time, index_or_npos, query_time) for every output
// sample. index is set when the query lands exactly on input sample index.
template <typename Emit>
void WarpClock(const std::vector<double>& times, const SpeedSchedule& schedule,
               Emit emit) {
  const double dt = SampleSpacing(times);
  const PhaseMap phase(schedule);
  const double start = times.front();
  const double length = times.back() - start;
  if (phase(schedule.duration()) < length - geom::kTimeEpsilon) {
    std::ostringstream msg;
    msg << "speed schedule of " << schedule.duration() << " s reaches phase "
        << phase(schedule.duration()) << " s, short of the trajectory's "
        << length << " s";
    throw InvalidArgument(msg.str());
  }
  for (size_t k = 0;; ++k) {
    const double u =
        k < times.size() ? times[k] - start : static_cast<double>(k) * dt;
    if (u > schedule.duration() + geom::kTimeEpsilon) break;
    const double p = phase(u);
    if (p > length + geom::kTimeEpsilon) break;
    const bool on_sample = k < times.size() && p == u;
    emit(start + u, on_sample ? k : times.size(),
         std::min(start + p, times.back()));
  }
}

}  // namespace

double Uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double TruncatedNormal(Rng& rng, double mean, double sigma, double lo,
                       double hi) {
  if (!(sigma >= 0.0) || !(lo <= hi)) {
    throw InvalidArgument("truncated normal needs sigma >= 0 and lo <= hi");
  }
  if (sigma == 0.0) {
    if (mean < lo || mean > hi) {
      throw InvalidArgument("degenerate normal outside its bounds");
    }
    return mean;
  }
  std::normal_distribution<double> normal(mean, sigma);
  for (int i = 0; i < kMaxProposals; ++i) {
    const double x = normal(rng);
    if (x >= lo && x <= hi) return x;
  }
  throw InvalidArgument("truncation window rejects every proposal");
}

SpeedSchedule SampleSpeedSchedule(double duration, double sigma,
                                  uint64_t seed) {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw InvalidArgument("speed schedule duration must be positive");
  }
  if (!(sigma >= 0.0)) throw InvalidArgument("speed sigma must be >= 0");
  Rng rng(seed);
  SpeedSchedule s;
  s.sigma = sigma;
  const auto n = static_cast<size_t>(
      std::ceil(duration / s.delta - geom::kTimeEpsilon));
  s.factors.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    s.factors.push_back(
        TruncatedNormal(rng, kSpeedMean, sigma, kSpeedMin, kSpeedMax));
  }
  return s;
}

double Phase(const SpeedSchedule& schedule, double t) {
  return PhaseMap(schedule)(t);
}

double InversePhase(const SpeedSchedule& schedule, double phase) {
  return PhaseMap(schedule).Inverse(phase);
}

geom::PoseTrajectory TimeWarp(const geom::PoseTrajectory& traj,
                              const SpeedSchedule& schedule) {
  std::vector<double> times;
  for (const auto& s : traj.samples()) times.push_back(s.time);
  std::vector<geom::TimedPose> out;
  WarpClock(times, schedule, [&](double t, size_t index, double query) {
    out.push_back({t, index < traj.size() ? traj.samples()[index].pose
                                          : traj.At(query)});
  });
  const double rate = traj.rate_hint();
  return geom::PoseTrajectory(traj.frame_name(), std::move(out), rate);
}

ik::JointTrajectory TimeWarp(const ik::JointTrajectory& traj,
                             const SpeedSchedule& schedule) {
  if (traj.times.size() != traj.states.size()) {
    throw InvalidArgument("joint trajectory times and states differ in length");
  }
  ik::JointTrajectory out;
  WarpClock(traj.times, schedule, [&](double t, size_t index, double query) {
    out.times.push_back(t);
    if (index < traj.states.size()) {
      out.states.push_back(traj.states[index]);
      return;
    }
    const auto hi = std::upper_bound(traj.times.begin(), traj.times.end(),
                                     query) - traj.times.begin();
    const size_t b = std::clamp<size_t>(hi, 1, traj.times.size() - 1);
    const size_t a = b - 1;
    const double u = std::clamp(
        (query - traj.times[a]) / (traj.times[b] - traj.times[a]), 0.0, 1.0);
    const auto& sa = traj.states[a];
    const auto& sb = traj.states[b];
    robot::JointState s;
    s.base_pose = geom::Interpolate(sa.base_pose, sb.base_pose, u);
    s.q = (1.0 - u) * sa.q + u * sb.q;
    if (sa.qd.size() == sa.q.size() && sb.qd.size() == sb.q.size()) {
      s.qd = (1.0 - u) * sa.qd + u * sb.qd;
    }
    out.states.push_back(std::move(s));
  });
  return out;
}

PushPerturbation DrawPush(Rng& rng) {
  PushPerturbation p;
  p.interval = Uniform(rng, 4.0, 6.0);
  p.vx = Uniform(rng, -0.5, 0.5);
  p.vy = Uniform(rng, -0.5, 0.5);
  p.yaw_rate = Uniform(rng, -0.78, 0.78);
  return p;
}

RandomizationDraw DrawRandomization(Rng& rng) {
  RandomizationDraw d;
  d.static_friction = Uniform(rng, 0.3, 1.6);
  d.dynamic_friction = Uniform(rng, 0.3, 1.2);
  d.restitution = Uniform(rng, 0.3, 1.2);
  d.default_joint_offset = Uniform(rng, 0.0, 0.5);
  d.com_offset = {Uniform(rng, -0.025, 0.025), Uniform(rng, -0.05, 0.05),
                  Uniform(rng, -0.05, 0.05)};
  d.ee_mass_scale = Uniform(rng, 0.75, 1.25);
  d.push = DrawPush(rng);
  auto& r = d.reset;
  r.position = {Uniform(rng, -0.05, 0.05), Uniform(rng, -0.05, 0.05),
                Uniform(rng, 0.0, 0.05)};
  r.roll = Uniform(rng, -0.1, 0.1);
  r.pitch = Uniform(rng, -0.1, 0.1);
  r.yaw = Uniform(rng, -0.2, 0.2);
  r.linear_velocity = {Uniform(rng, -0.05, 0.05), Uniform(rng, -0.05, 0.05),
                       Uniform(rng, -0.2, 0.2)};
  r.angular_velocity = {Uniform(rng, -0.52, 0.52), Uniform(rng, -0.52, 0.52),
                        Uniform(rng, -0.78, 0.78)};
  r.joint_offset = Uniform(rng, -0.1, 0.1);
  r.time_shift = Uniform(rng, -0.05, 0.05);
  return d;
}

RandomizationDraw DrawRandomization(uint64_t seed) {
  Rng rng(seed);
  return DrawRandomization(rng);
}

std::vector<std::pair<double, PushPerturbation>> PushSchedule(double horizon,
                                                              uint64_t seed) {
  if (!(horizon >= 0.0)) throw InvalidArgument("push horizon must be >= 0");
  Rng rng(seed);
  std::vector<std::pair<double, PushPerturbation>> out;
  double t = 0.0;
  while (true) {
    const PushPerturbation p = DrawPush(rng);
    t += p.interval;
    if (t > horizon) break;
    out.emplace_back(t, p);
  }
  return out;
}

double ShiftResetTime(double t_reset, double trajectory_end, uint64_t seed) {
  if (!(t_reset >= 0.0) || !(t_reset <= trajectory_end)) {
    throw InvalidArgument("reset time must lie in [0, trajectory end]");
  }
  Rng rng(seed);
  return std::clamp(t_reset + Uniform(rng, -0.05, 0.05), 0.0, trajectory_end);
}

json ToJson(const RandomizationDraw& d) {
  const auto vec = [](const geom::Vec3& v) {
    return json::array({v.x(), v.y(), v.z()});
  };
  const auto& r = d.reset;
  return {{"static_friction", d.static_friction},
          {"dynamic_friction", d.dynamic_friction},
          {"restitution", d.restitution},
          {"default_joint_offset", d.default_joint_offset},
          {"com_offset", vec(d.com_offset)},
          {"ee_mass_scale", d.ee_mass_scale},
          {"push",
           {{"interval", d.push.interval},
            {"v_xy", json::array({d.push.vx, d.push.vy})},
            {"yaw_rate", d.push.yaw_rate}}},
          {"reset",
           {{"position", vec(r.position)},
            {"rpy", json::array({r.roll, r.pitch, r.yaw})},
            {"linear_velocity", vec(r.linear_velocity)},
            {"angular_velocity", vec(r.angular_velocity)},
            {"joint_offset", r.joint_offset},
            {"time_shift", r.time_shift}}}};
}

json ToJson(const SpeedSchedule& s) {
  return {{"delta", s.delta}, {"sigma", s.sigma}, {"factors", s.factors}};
}

}  // namespace humi::augment
