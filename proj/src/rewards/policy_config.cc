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

#include "humi/policy_config.h"

#include "humi/error.h"
#include "humi/io.h"

namespace humi::rewards {
namespace {

using io::Json;

void Positive(const Json& doc, const char* key, const std::string& path,
              int& out) {
  if (!doc.contains(key)) return;
  const int64_t v = io::AsInteger(doc[key], path + "." + key);
  if (v <= 0) throw ParseError(path + "." + key, "must be positive");
  out = static_cast<int>(v);
}

void Positive(const Json& doc, const char* key, const std::string& path,
              double& out) {
  if (!doc.contains(key)) return;
  const double v = io::AsNumber(doc[key], path + "." + key);
  if (!(v > 0.0)) throw ParseError(path + "." + key, "must be positive");
  out = v;
}

}  // namespace

PolicyHyperparameters PolicyHyperparametersFromJson(const Json& doc,
                                                    const std::string& path) {
  io::ExpectObject(doc, path);
  io::RejectUnknownFields(
      doc,
      {"visual_obs_horizon", "visual_obs_hz", "proprio_obs_horizon",
       "proprio_obs_hz", "action_horizon", "action_hz", "speed_ratio",
       "num_cameras", "image_height", "image_width", "vision_backbone",
       "learning_rate", "backbone_learning_rate", "epochs", "batch_size",
       "loss", "denoising_steps"},
      path);
  PolicyHyperparameters p;
  Positive(doc, "visual_obs_horizon", path, p.visual_obs_horizon);
  Positive(doc, "visual_obs_hz", path, p.visual_obs_hz);
  Positive(doc, "proprio_obs_horizon", path, p.proprio_obs_horizon);
  Positive(doc, "proprio_obs_hz", path, p.proprio_obs_hz);
  Positive(doc, "action_horizon", path, p.action_horizon);
  Positive(doc, "action_hz", path, p.action_hz);
  Positive(doc, "speed_ratio", path, p.speed_ratio);
  Positive(doc, "num_cameras", path, p.num_cameras);
  Positive(doc, "image_height", path, p.image_height);
  Positive(doc, "image_width", path, p.image_width);
  Positive(doc, "learning_rate", path, p.learning_rate);
  Positive(doc, "backbone_learning_rate", path, p.backbone_learning_rate);
  Positive(doc, "epochs", path, p.epochs);
  Positive(doc, "batch_size", path, p.batch_size);
  Positive(doc, "denoising_steps", path, p.denoising_steps);
  if (doc.contains("vision_backbone")) {
    p.vision_backbone =
        io::AsString(doc["vision_backbone"], path + ".vision_backbone");
  }
  if (doc.contains("loss")) {
    p.loss = io::AsString(doc["loss"], path + ".loss");
    if (p.loss != "flow_matching" && p.loss != "ddpm") {
      throw ParseError(path + ".loss", "expected 'flow_matching' or 'ddpm'");
    }
  }
  return p;
}

Json ToJson(const PolicyHyperparameters& p) {
  return {{"visual_obs_horizon", p.visual_obs_horizon},
          {"visual_obs_hz", p.visual_obs_hz},
          {"proprio_obs_horizon", p.proprio_obs_horizon},
          {"proprio_obs_hz", p.proprio_obs_hz},
          {"action_horizon", p.action_horizon},
          {"action_hz", p.action_hz},
          {"speed_ratio", p.speed_ratio},
          {"num_cameras", p.num_cameras},
          {"image_height", p.image_height},
          {"image_width", p.image_width},
          {"vision_backbone", p.vision_backbone},
          {"learning_rate", p.learning_rate},
          {"backbone_learning_rate", p.backbone_learning_rate},
          {"epochs", p.epochs},
          {"batch_size", p.batch_size},
          {"loss", p.loss},
          {"denoising_steps", p.denoising_steps}};
}

}  // namespace humi::rewards
