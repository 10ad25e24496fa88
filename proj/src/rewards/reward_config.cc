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

#include "humi/error.h"
#include "humi/io.h"
#include "humi/rewards.h"

namespace humi::rewards {
namespace {

using io::Json;

void Number(const Json& obj, const char* key, const std::string& path,
            double& out, double scale = 1.0) {
  if (obj.contains(key)) out = io::AsNumber(obj[key], path + "." + key) * scale;
}

void Range(const Json& obj, const char* key, const std::string& path,
           double& lo, double& hi, double scale = 1.0) {
  if (!obj.contains(key)) return;
  const auto v = io::AsNumbers(obj[key], path + "." + key, 2);
  lo = v[0] * scale;
  hi = v[1] * scale;
}

const Json& Section(const Json& doc, const char* key, const std::string& path,
                    std::initializer_list<std::string_view> fields) {
  static const Json kEmpty = Json::object();
  if (!doc.contains(key)) return kEmpty;
  const Json& s = doc[key];
  io::ExpectObject(s, path + "." + key);
  io::RejectUnknownFields(s, fields, path + "." + key);
  return s;
}

}  // namespace

TrackingRewardConfig RewardConfigFromJson(const Json& doc,
                                          const std::string& path) {
  io::ExpectObject(doc, path);
  io::RejectUnknownFields(doc,
                          {"sigma_body", "sigma_ee", "v_interp", "gate_delta",
                           "w_body", "w_ee_max", "mode", "fixed", "curriculum",
                           "penalties"},
                          path);
  TrackingRewardConfig c;
  const Json& body = Section(doc, "sigma_body", path, {"p", "theta", "v", "w"});
  const std::string bp = path + ".sigma_body";
  Number(body, "p", bp, c.sigma_p);
  Number(body, "theta", bp, c.sigma_theta);
  Number(body, "v", bp, c.sigma_v);
  Number(body, "w", bp, c.sigma_w);

  const Json& ee = Section(doc, "sigma_ee", path, {"position", "rotation_deg"});
  Range(ee, "position", path + ".sigma_ee", c.ee_position.min,
        c.ee_position.max);
  Range(ee, "rotation_deg", path + ".sigma_ee", c.ee_rotation.min,
        c.ee_rotation.max, kDegree);
  Range(doc, "v_interp", path, c.v_min, c.v_max);
  Number(doc, "gate_delta", path, c.gate_delta);
  Number(doc, "w_body", path, c.w_body);
  Number(doc, "w_ee_max", path, c.w_ee_max);
  if (doc.contains("mode")) {
    const std::string mode = io::AsString(doc["mode"], path + ".mode");
    if (mode == "adaptive") {
      c.mode = EeMode::kAdaptive;
    } else if (mode == "fixed") {
      c.mode = EeMode::kFixed;
    } else {
      throw ParseError(path + ".mode", "expected 'adaptive' or 'fixed'");
    }
  }
  const Json& fixed =
      Section(doc, "fixed", path, {"sigma_p", "sigma_theta_deg", "w_ee"});
  Number(fixed, "sigma_p", path + ".fixed", c.fixed_sigma_p);
  Number(fixed, "sigma_theta_deg", path + ".fixed", c.fixed_sigma_theta,
         kDegree);
  Number(fixed, "w_ee", path + ".fixed", c.fixed_w_ee);

  const Json& cur = Section(doc, "curriculum", path,
                            {"window", "sigma_p_min_start", "speed_sigma"});
  const std::string cp = path + ".curriculum";
  Range(cur, "window", cp, c.ramp_start, c.ramp_end);
  Number(cur, "sigma_p_min_start", cp, c.sigma_p_min_start);
  Range(cur, "speed_sigma", cp, c.speed_sigma_start, c.speed_sigma_end);

  const Json& pen =
      Section(doc, "penalties", path,
              {"action_rate", "joint_limit", "contact", "contact_threshold",
               "contact_exempt"});
  const std::string pp = path + ".penalties";
  Number(pen, "action_rate", pp, c.w_action_rate);
  Number(pen, "joint_limit", pp, c.w_joint_limit);
  Number(pen, "contact", pp, c.w_contact);
  Number(pen, "contact_threshold", pp, c.contact_threshold);
  if (pen.contains("contact_exempt")) {
    io::ExpectArray(pen["contact_exempt"], pp + ".contact_exempt");
    c.contact_exempt.clear();
    for (const auto& token : pen["contact_exempt"]) {
      c.contact_exempt.push_back(io::AsString(token, pp + ".contact_exempt"));
    }
  }
  try {
    Validate(c);
  } catch (const InvalidArgument& e) {
    throw ParseError(path, e.what());
  }
  return c;
}

Json ToJson(const TrackingRewardConfig& c) {
  return {
      {"sigma_body",
       {{"p", c.sigma_p}, {"theta", c.sigma_theta}, {"v", c.sigma_v},
        {"w", c.sigma_w}}},
      {"sigma_ee",
       {{"position", Json::array({c.ee_position.min, c.ee_position.max})},
        {"rotation_deg", Json::array({c.ee_rotation.min / kDegree,
                                      c.ee_rotation.max / kDegree})}}},
      {"v_interp", Json::array({c.v_min, c.v_max})},
      {"gate_delta", c.gate_delta},
      {"w_body", c.w_body},
      {"w_ee_max", c.w_ee_max},
      {"mode", c.mode == EeMode::kFixed ? "fixed" : "adaptive"},
      {"fixed",
       {{"sigma_p", c.fixed_sigma_p},
        {"sigma_theta_deg", c.fixed_sigma_theta / kDegree},
        {"w_ee", c.fixed_w_ee}}},
      {"curriculum",
       {{"window", Json::array({c.ramp_start, c.ramp_end})},
        {"sigma_p_min_start", c.sigma_p_min_start},
        {"speed_sigma", Json::array({c.speed_sigma_start, c.speed_sigma_end})}}},
      {"penalties",
       {{"action_rate", c.w_action_rate},
        {"joint_limit", c.w_joint_limit},
        {"contact", c.w_contact},
        {"contact_threshold", c.contact_threshold},
        {"contact_exempt", c.contact_exempt}}}};
}

}  // namespace humi::rewards
