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

#ifndef HUMI_ROBOT_H_
#define HUMI_ROBOT_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "humi/geom.h"

namespace humi::robot {

inline constexpr std::string_view kModelFormat = "humi-model/1";

// Number of floating-base coordinates that precede the joint coordinates in
// every Jacobian and update vector: linear (x, y, z), then angular (x, y, z),
// both in the world frame.
inline constexpr int kBaseDofs = 6;

enum class JointType { kRevolute, kPrismatic, kFloatingBase };

struct Link {
  std::string name;
  // Fixed pose of the link's joint frame in the parent link frame. Identity
  // for the root.
  geom::Pose offset;
  int parent = -1;  // link index, -1 for the root
  int joint = -1;   // actuated joint index, -1 for the root
};

// Actuated joint. The floating base is not listed here; it is the pose of the
// root link carried in JointState::base_pose.
struct Joint {
  std::string name;
  JointType type = JointType::kRevolute;
  int parent_link = -1;
  int child_link = -1;
  geom::Vec3 axis = geom::Vec3::UnitZ();  // unit, in the joint frame
  double q_min = 0.0;
  double q_max = 0.0;
};

struct Keyframe {
  std::string name;
  int link = -1;
  geom::Pose offset;
};

struct CollisionSphere {
  std::string name;
  int link = -1;
  geom::Vec3 center = geom::Vec3::Zero();  // in the link frame
  double radius = 0.0;
};

struct CollisionPair {
  int first = -1;
  int second = -1;
};

// Immutable link/joint tree rooted at the floating base.
class KinematicModel {
 public:
  KinematicModel() = default;

  const std::string& name() const { return name_; }
  const std::vector<Link>& links() const { return links_; }
  const std::vector<Joint>& joints() const { return joints_; }
  const std::vector<Keyframe>& keyframes() const { return keyframes_; }
  const std::vector<CollisionSphere>& spheres() const { return spheres_; }
  const std::vector<CollisionPair>& pairs() const { return pairs_; }

  int num_joints() const { return static_cast<int>(joints_.size()); }
  // Columns of a Jacobian: floating base plus joints.
  int num_dofs() const { return kBaseDofs + num_joints(); }
  int root_link() const { return 0; }

  // -1 when absent.
  int FindLink(std::string_view name) const;
  int FindJoint(std::string_view name) const;
  int FindKeyframe(std::string_view name) const;

  // Actuated joints on the path from the root to `link`.
  std::vector<int> JointPath(int link) const;

 private:
  friend KinematicModel ParseModel(std::string_view text);

  std::string name_;
  // topologically ordered: parents precede children, root first
  std::vector<Link> links_;
  std::vector<Joint> joints_;
  std::vector<Keyframe> keyframes_;
  std::vector<CollisionSphere> spheres_;
  std::vector<CollisionPair> pairs_;
};

// Parses a "humi-model/1" document. Throws ParseError with the path of the
// first offending field.
KinematicModel ParseModel(std::string_view text);
KinematicModel LoadModelFile(const std::string& path);

struct JointState {
  geom::Pose base_pose;
  Eigen::VectorXd q;
  Eigen::VectorXd qd;  // optional, may be empty
};

// Zero joint positions with the base at the world origin.
JointState ZeroState(const KinematicModel& model);

// Throws InvalidArgument when q does not match the model.
void CheckState(const KinematicModel& model, const JointState& state);

// World poses of every link, indexed like model.links().
std::vector<geom::Pose> LinkPoses(const KinematicModel& model,
                                  const JointState& state);

// World pose of every keyframe by name.
std::map<std::string, geom::Pose> ForwardKinematics(
    const KinematicModel& model, const JointState& state);

geom::Pose KeyframePose(const KinematicModel& model,
                        const std::vector<geom::Pose>& link_poses,
                        int keyframe);

using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

// Geometric Jacobian of a keyframe: rows are linear then angular velocity in
// the world frame, columns are kBaseDofs base coordinates then joints.
// Throws InvalidArgument on an unknown keyframe.
Jacobian KeyframeJacobian(const KinematicModel& model, const JointState& state,
                          std::string_view keyframe);

// Same, from precomputed link poses and a keyframe index.
Jacobian KeyframeJacobian(const KinematicModel& model,
                          const JointState& state,
                          const std::vector<geom::Pose>& link_poses,
                          int keyframe);

// 3 x num_dofs Jacobian of a world point rigidly attached to `link`.
Eigen::Matrix<double, 3, Eigen::Dynamic> PointJacobian(
    const KinematicModel& model, const JointState& state,
    const std::vector<geom::Pose>& link_poses, int link,
    const geom::Vec3& world_point);

// Applies a num_dofs update: base translation += d[0:3], base rotation is
// pre-multiplied by Exp(d[3:6]), q += d[6:].
JointState Integrate(const KinematicModel& model, const JointState& state,
                     const Eigen::VectorXd& delta);

struct LimitViolation {
  int joint = -1;
  std::string name;
  // q - q_max when above, q - q_min when below; zero on a boundary.
  double amount = 0.0;
};

// Joints not strictly inside (q_min, q_max).
std::vector<LimitViolation> JointLimitViolations(const KinematicModel& model,
                                                 const JointState& state);

struct PairClearance {
  int pair = -1;
  std::string first;
  std::string second;
  // center distance minus radius sum; negative means interpenetration
  double clearance = 0.0;
};

std::vector<PairClearance> CollisionDistances(const KinematicModel& model,
                                              const JointState& state);
std::vector<PairClearance> CollisionDistances(
    const KinematicModel& model, const std::vector<geom::Pose>& link_poses);

}  // namespace humi::robot

#endif  // HUMI_ROBOT_H_
