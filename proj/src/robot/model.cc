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

#include <map>
#include <set>
#include <sstream>

#include "humi/error.h"
#include "humi/io.h"
#include "humi/robot.h"

namespace humi::robot {
namespace {

using io::Json;

std::string Index(const std::string& base, size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

// Name lookup that rejects duplicates as they are inserted.
class NameTable {
 public:
  explicit NameTable(std::string kind) : kind_(std::move(kind)) {}

  void Add(const std::string& name, int index, const std::string& path) {
    if (name.empty()) throw ParseError(path, kind_ + " name is empty");
    if (!table_.emplace(name, index).second) {
      throw ParseError(path, "duplicate " + kind_ + " name '" + name + "'");
    }
  }

  int Get(const std::string& name, const std::string& path) const {
    auto it = table_.find(name);
    if (it == table_.end()) {
      throw ParseError(path, "unknown " + kind_ + " '" + name + "'");
    }
    return it->second;
  }

 private:
  std::string kind_;
  std::map<std::string, int> table_;
};

struct RawLink {
  std::string name;
  geom::Pose offset;
  bool has_offset = false;
};

struct RawJoint {
  std::string name;
  JointType type;
  std::string parent;
  std::string child;
  geom::Vec3 axis = geom::Vec3::UnitZ();
  double q_min = 0.0;
  double q_max = 0.0;
  std::string path;
};

JointType ParseJointType(const std::string& text, const std::string& path) {
  if (text == "revolute") return JointType::kRevolute;
  if (text == "prismatic") return JointType::kPrismatic;
  if (text == "floating-base") return JointType::kFloatingBase;
  throw ParseError(path, "unknown joint type '" + text +
                             "' (expected revolute, prismatic or "
                             "floating-base)");
}

}  // namespace

int KinematicModel::FindLink(std::string_view name) const {
  for (size_t i = 0; i < links_.size(); ++i) {
    if (links_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int KinematicModel::FindJoint(std::string_view name) const {
  for (size_t i = 0; i < joints_.size(); ++i) {
    if (joints_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int KinematicModel::FindKeyframe(std::string_view name) const {
  for (size_t i = 0; i < keyframes_.size(); ++i) {
    if (keyframes_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<int> KinematicModel::JointPath(int link) const {
  std::vector<int> path;
  for (int l = link; l >= 0; l = links_[l].parent) {
    if (links_[l].joint >= 0) path.push_back(links_[l].joint);
  }
  return path;
}

KinematicModel ParseModel(std::string_view text) {
  const Json doc = io::ParseJson(text, "");
  io::RejectUnknownFields(
      doc, {"format", "name", "links", "joints", "keyframes", "collision"},
      "");
  io::ExpectFormat(doc, kModelFormat, "");

  KinematicModel model;
  model.name_ = doc.contains("name") ? io::AsString(doc["name"], "name") : "";

  // links
  const Json& links_doc = io::Require(doc, "links", "");
  io::ExpectArray(links_doc, "links");
  if (links_doc.empty()) throw ParseError("links", "model has no links");
  std::vector<RawLink> raw_links;
  NameTable link_names("link");
  for (size_t i = 0; i < links_doc.size(); ++i) {
    const std::string path = Index("links", i);
    const Json& l = links_doc[i];
    io::RejectUnknownFields(l, {"name", "offset"}, path);
    RawLink raw;
    raw.name = io::AsString(io::Require(l, "name", path), path + ".name");
    if (l.contains("offset")) {
      raw.offset = io::PoseFromJson(l["offset"], path + ".offset");
      raw.has_offset = true;
    }
    link_names.Add(raw.name, static_cast<int>(i), path + ".name");
    raw_links.push_back(raw);
  }

  // joints
  const Json& joints_doc = io::Require(doc, "joints", "");
  io::ExpectArray(joints_doc, "joints");
  std::vector<RawJoint> raw_joints;
  NameTable joint_names("joint");
  for (size_t i = 0; i < joints_doc.size(); ++i) {
    const std::string path = Index("joints", i);
    const Json& j = joints_doc[i];
    io::RejectUnknownFields(
        j, {"name", "type", "parent", "child", "axis", "limits"}, path);
    RawJoint raw;
    raw.path = path;
    raw.name = io::AsString(io::Require(j, "name", path), path + ".name");
    joint_names.Add(raw.name, static_cast<int>(i), path + ".name");
    raw.type = ParseJointType(
        io::AsString(io::Require(j, "type", path), path + ".type"),
        path + ".type");
    raw.parent =
        io::AsString(io::Require(j, "parent", path), path + ".parent");
    raw.child = io::AsString(io::Require(j, "child", path), path + ".child");
    if (raw.type == JointType::kFloatingBase) {
      if (j.contains("axis") || j.contains("limits")) {
        throw ParseError(path, "floating-base joint takes no axis or limits");
      }
    } else {
      const geom::Vec3 axis =
          io::AsVec3(io::Require(j, "axis", path), path + ".axis");
      if (axis.norm() < 1e-9) throw ParseError(path + ".axis", "zero axis");
      raw.axis = axis.normalized();
      const auto limits =
          io::AsNumbers(io::Require(j, "limits", path), path + ".limits", 2);
      raw.q_min = limits[0];
      raw.q_max = limits[1];
      if (!(raw.q_min < raw.q_max)) {
        std::ostringstream msg;
        msg << "joint '" << raw.name << "' has q_min (" << raw.q_min
            << ") not below q_max (" << raw.q_max << ")";
        throw ParseError(path + ".limits", msg.str());
      }
    }
    raw_joints.push_back(raw);
  }

  // tree: the floating base binds the root, every other link is the child of
  // exactly one joint
  int root = -1;
  std::vector<int> parent_of(raw_links.size(), -2);
  std::vector<int> joint_of(raw_links.size(), -1);
  for (size_t i = 0; i < raw_joints.size(); ++i) {
    const RawJoint& j = raw_joints[i];
    const int child = link_names.Get(j.child, j.path + ".child");
    if (parent_of[child] != -2) {
      throw ParseError(j.path + ".child",
                       "link '" + j.child + "' is the child of two joints");
    }
    if (j.type == JointType::kFloatingBase) {
      if (root >= 0) {
        throw ParseError(j.path, "more than one floating-base joint");
      }
      if (j.parent != "world") {
        throw ParseError(j.path + ".parent",
                         "floating-base joint must have parent 'world'");
      }
      root = child;
      parent_of[child] = -1;
    } else {
      const int parent = link_names.Get(j.parent, j.path + ".parent");
      if (parent == child) {
        throw ParseError(j.path, "joint '" + j.name + "' connects a link to "
                                 "itself");
      }
      parent_of[child] = parent;
      joint_of[child] = static_cast<int>(i);
    }
  }
  if (root < 0) throw ParseError("joints", "no floating-base joint");
  if (raw_links[root].has_offset) {
    throw ParseError(Index("links", root) + ".offset",
                     "the floating-base link takes no offset");
  }
  for (size_t i = 0; i < raw_links.size(); ++i) {
    if (parent_of[i] == -2) {
      throw ParseError(Index("links", i),
                       "link '" + raw_links[i].name +
                           "' is not the child of any joint");
    }
    // walk to the root; more steps than links means a cycle
    int l = static_cast<int>(i);
    size_t steps = 0;
    while (l != root) {
      l = parent_of[l];
      if (l < 0 || ++steps > raw_links.size()) {
        throw ParseError(Index("links", i), "link '" + raw_links[i].name +
                                                "' is on a cycle in the "
                                                "joint graph");
      }
    }
  }

  // topological order: breadth first from the root
  std::vector<int> order{root};
  for (size_t head = 0; head < order.size(); ++head) {
    for (size_t i = 0; i < raw_links.size(); ++i) {
      if (parent_of[i] == order[head]) order.push_back(static_cast<int>(i));
    }
  }
  std::vector<int> new_index(raw_links.size(), -1);
  for (size_t k = 0; k < order.size(); ++k) new_index[order[k]] = static_cast<int>(k);

  // actuated joints keep document order
  std::vector<int> actuated_index(raw_joints.size(), -1);
  for (size_t i = 0; i < raw_joints.size(); ++i) {
    const RawJoint& j = raw_joints[i];
    if (j.type == JointType::kFloatingBase) continue;
    actuated_index[i] = static_cast<int>(model.joints_.size());
    Joint joint;
    joint.name = j.name;
    joint.type = j.type;
    joint.parent_link = new_index[link_names.Get(j.parent, j.path)];
    joint.child_link = new_index[link_names.Get(j.child, j.path)];
    joint.axis = j.axis;
    joint.q_min = j.q_min;
    joint.q_max = j.q_max;
    model.joints_.push_back(joint);
  }
  for (int old : order) {
    Link link;
    link.name = raw_links[old].name;
    link.offset = raw_links[old].offset;
    link.parent = parent_of[old] >= 0 ? new_index[parent_of[old]] : -1;
    link.joint = joint_of[old] >= 0 ? actuated_index[joint_of[old]] : -1;
    model.links_.push_back(link);
  }

  // keyframes
  const Json& keys_doc = io::Require(doc, "keyframes", "");
  io::ExpectArray(keys_doc, "keyframes");
  NameTable key_names("keyframe");
  for (size_t i = 0; i < keys_doc.size(); ++i) {
    const std::string path = Index("keyframes", i);
    const Json& k = keys_doc[i];
    io::RejectUnknownFields(k, {"name", "link", "offset"}, path);
    Keyframe key;
    key.name = io::AsString(io::Require(k, "name", path), path + ".name");
    key_names.Add(key.name, static_cast<int>(i), path + ".name");
    const std::string link =
        io::AsString(io::Require(k, "link", path), path + ".link");
    key.link = new_index[link_names.Get(link, path + ".link")];
    if (k.contains("offset")) {
      key.offset = io::PoseFromJson(k["offset"], path + ".offset");
    }
    model.keyframes_.push_back(key);
  }

  // collision
  if (doc.contains("collision")) {
    const Json& col = doc["collision"];
    io::RejectUnknownFields(col, {"spheres", "pairs"}, "collision");
    NameTable sphere_names("sphere");
    if (col.contains("spheres")) {
      io::ExpectArray(col["spheres"], "collision.spheres");
      for (size_t i = 0; i < col["spheres"].size(); ++i) {
        const std::string path = Index("collision.spheres", i);
        const Json& s = col["spheres"][i];
        io::RejectUnknownFields(s, {"name", "link", "center", "radius"}, path);
        CollisionSphere sphere;
        sphere.name =
            io::AsString(io::Require(s, "name", path), path + ".name");
        sphere_names.Add(sphere.name, static_cast<int>(i), path + ".name");
        const std::string link =
            io::AsString(io::Require(s, "link", path), path + ".link");
        sphere.link = new_index[link_names.Get(link, path + ".link")];
        if (s.contains("center")) {
          sphere.center = io::AsVec3(s["center"], path + ".center");
        }
        sphere.radius =
            io::AsNumber(io::Require(s, "radius", path), path + ".radius");
        if (!(sphere.radius > 0.0)) {
          throw ParseError(path + ".radius", "radius must be positive");
        }
        model.spheres_.push_back(sphere);
      }
    }
    if (col.contains("pairs")) {
      io::ExpectArray(col["pairs"], "collision.pairs");
      for (size_t i = 0; i < col["pairs"].size(); ++i) {
        const std::string path = Index("collision.pairs", i);
        const Json& p = col["pairs"][i];
        io::ExpectArray(p, path);
        if (p.size() != 2) throw ParseError(path, "expected two sphere names");
        CollisionPair pair;
        pair.first = sphere_names.Get(io::AsString(p[0], path + "[0]"),
                                      path + "[0]");
        pair.second = sphere_names.Get(io::AsString(p[1], path + "[1]"),
                                       path + "[1]");
        if (pair.first == pair.second) {
          throw ParseError(path, "pair references the same sphere twice");
        }
        model.pairs_.push_back(pair);
      }
    }
  }
  return model;
}

KinematicModel LoadModelFile(const std::string& path) {
  const std::string text = io::ReadTextFile(path);
  try {
    return ParseModel(text);
  } catch (const ParseError& e) {
    throw ParseError(path + ":" + e.path(),
                     std::string(e.what()).substr(
                         e.path().empty() ? 0 : e.path().size() + 2));
  }
}

}  // namespace humi::robot
