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

#include <sstream>

#include "humi/error.h"
#include "humi/robot.h"

namespace humi::robot {
namespace {

Eigen::Matrix3d Skew(const geom::Vec3& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

geom::Pose JointMotion(const Joint& joint, double q) {
  if (joint.type == JointType::kPrismatic) {
    return geom::Pose::FromTranslation(joint.axis * q);
  }
  return geom::Pose::FromRotation(geom::AxisAngle(joint.axis, q));
}

// World pose of the frame a link's joint acts in.
geom::Pose JointFrame(const KinematicModel& model,
                      const std::vector<geom::Pose>& link_poses, int link) {
  const Link& l = model.links()[link];
  return geom::Compose(link_poses[l.parent], l.offset);
}

}  // namespace

JointState ZeroState(const KinematicModel& model) {
  JointState state;
  state.q = Eigen::VectorXd::Zero(model.num_joints());
  return state;
}

void CheckState(const KinematicModel& model, const JointState& state) {
  if (state.q.size() != model.num_joints()) {
    std::ostringstream msg;
    msg << "joint state has " << state.q.size() << " positions, model '"
        << model.name() << "' has " << model.num_joints() << " joints";
    throw InvalidArgument(msg.str());
  }
}

std::vector<geom::Pose> LinkPoses(const KinematicModel& model,
                                  const JointState& state) {
  CheckState(model, state);
  const auto& links = model.links();
  std::vector<geom::Pose> poses(links.size());
  poses[0] = state.base_pose;
  for (size_t i = 1; i < links.size(); ++i) {
    const Link& link = links[i];
    geom::Pose frame = geom::Compose(poses[link.parent], link.offset);
    if (link.joint >= 0) {
      const Joint& joint = model.joints()[link.joint];
      frame = geom::Compose(frame, JointMotion(joint, state.q[link.joint]));
    }
    poses[i] = frame;
  }
  return poses;
}

geom::Pose KeyframePose(const KinematicModel& model,
                        const std::vector<geom::Pose>& link_poses,
                        int keyframe) {
  const Keyframe& k = model.keyframes()[keyframe];
  return geom::Compose(link_poses[k.link], k.offset);
}

std::map<std::string, geom::Pose> ForwardKinematics(
    const KinematicModel& model, const JointState& state) {
  const auto poses = LinkPoses(model, state);
  std::map<std::string, geom::Pose> out;
  for (size_t i = 0; i < model.keyframes().size(); ++i) {
    out[model.keyframes()[i].name] =
        KeyframePose(model, poses, static_cast<int>(i));
  }
  return out;
}

Eigen::Matrix<double, 3, Eigen::Dynamic> PointJacobian(
    const KinematicModel& model, const JointState& state,
    const std::vector<geom::Pose>& link_poses, int link,
    const geom::Vec3& world_point) {
  Eigen::Matrix<double, 3, Eigen::Dynamic> jac(3, model.num_dofs());
  jac.setZero();
  jac.block<3, 3>(0, 0).setIdentity();
  jac.block<3, 3>(0, 3) = -Skew(world_point - state.base_pose.translation);
  for (int l = link; l > 0; l = model.links()[l].parent) {
    const int j = model.links()[l].joint;
    if (j < 0) continue;
    const Joint& joint = model.joints()[j];
    const geom::Pose frame = JointFrame(model, link_poses, l);
    const geom::Vec3 axis = frame.rotation * joint.axis;
    if (joint.type == JointType::kPrismatic) {
      jac.col(kBaseDofs + j) = axis;
    } else {
      jac.col(kBaseDofs + j) = axis.cross(world_point - frame.translation);
    }
  }
  return jac;
}

Jacobian KeyframeJacobian(const KinematicModel& model,
                          const JointState& state,
                          const std::vector<geom::Pose>& link_poses,
                          int keyframe) {
  const Keyframe& key = model.keyframes()[keyframe];
  const geom::Vec3 point = KeyframePose(model, link_poses, keyframe).translation;
  Jacobian jac(6, model.num_dofs());
  jac.setZero();
  jac.topRows<3>() =
      PointJacobian(model, state, link_poses, key.link, point);
  jac.block<3, 3>(3, 3).setIdentity();
  for (int l = key.link; l > 0; l = model.links()[l].parent) {
    const int j = model.links()[l].joint;
    if (j < 0) continue;
    const Joint& joint = model.joints()[j];
    if (joint.type == JointType::kRevolute) {
      const geom::Pose frame = JointFrame(model, link_poses, l);
      jac.block<3, 1>(3, kBaseDofs + j) = frame.rotation * joint.axis;
    }
  }
  return jac;
}

Jacobian KeyframeJacobian(const KinematicModel& model, const JointState& state,
                          std::string_view keyframe) {
  const int index = model.FindKeyframe(keyframe);
  if (index < 0) {
    throw InvalidArgument("unknown keyframe '" + std::string(keyframe) + "'");
  }
  return KeyframeJacobian(model, state, LinkPoses(model, state), index);
}

JointState Integrate(const KinematicModel& model, const JointState& state,
                     const Eigen::VectorXd& delta) {
  CheckState(model, state);
  if (delta.size() != model.num_dofs()) {
    throw InvalidArgument("update vector does not match model dofs");
  }
  JointState out = state;
  out.base_pose.translation += delta.head<3>();
  out.base_pose.rotation =
      geom::Exp(delta.segment<3>(3)) * state.base_pose.rotation;
  out.base_pose.rotation.normalize();
  out.q += delta.tail(model.num_joints());
  return out;
}

std::vector<LimitViolation> JointLimitViolations(const KinematicModel& model,
                                                 const JointState& state) {
  CheckState(model, state);
  std::vector<LimitViolation> out;
  for (int j = 0; j < model.num_joints(); ++j) {
    const Joint& joint = model.joints()[j];
    const double q = state.q[j];
    if (q >= joint.q_max) {
      out.push_back({j, joint.name, q - joint.q_max});
    } else if (q <= joint.q_min) {
      out.push_back({j, joint.name, q - joint.q_min});
    }
  }
  return out;
}

std::vector<PairClearance> CollisionDistances(
    const KinematicModel& model, const std::vector<geom::Pose>& link_poses) {
  std::vector<PairClearance> out;
  out.reserve(model.pairs().size());
  for (size_t i = 0; i < model.pairs().size(); ++i) {
    const CollisionPair& pair = model.pairs()[i];
    const CollisionSphere& a = model.spheres()[pair.first];
    const CollisionSphere& b = model.spheres()[pair.second];
    const geom::Vec3 ca = geom::TransformPoint(link_poses[a.link], a.center);
    const geom::Vec3 cb = geom::TransformPoint(link_poses[b.link], b.center);
    out.push_back({static_cast<int>(i), a.name, b.name,
                   (ca - cb).norm() - (a.radius + b.radius)});
  }
  return out;
}

std::vector<PairClearance> CollisionDistances(const KinematicModel& model,
                                              const JointState& state) {
  return CollisionDistances(model, LinkPoses(model, state));
}

}  // namespace humi::robot
