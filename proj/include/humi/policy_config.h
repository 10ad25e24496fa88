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

#ifndef HUMI_POLICY_CONFIG_H_
#define HUMI_POLICY_CONFIG_H_

#include <string>

#include <nlohmann/json.hpp>

namespace humi::rewards {

// Training hyperparameters of the high-level visuomotor policy. Nothing in
// the toolkit trains that policy; the schema is kept so datasets and their
// consumers agree on horizons and rates.
struct PolicyHyperparameters {
  int visual_obs_horizon = 1;
  double visual_obs_hz = 20.0;
  int proprio_obs_horizon = 3;
  double proprio_obs_hz = 20.0;
  int action_horizon = 48;
  double action_hz = 20.0;
  double speed_ratio = 1.0;
  int num_cameras = 2;
  int image_height = 224;
  int image_width = 224;
  std::string vision_backbone = "vit_base_patch14_dinov2.lvd142m";
  double learning_rate = 3e-4;
  double backbone_learning_rate = 3e-5;
  int epochs = 200;
  int batch_size = 256;
  std::string loss = "flow_matching";
  int denoising_steps = 10;
};

// Throws ParseError on unknown fields or non-positive values.
PolicyHyperparameters PolicyHyperparametersFromJson(const nlohmann::json& doc,
                                                    const std::string& path);
nlohmann::json ToJson(const PolicyHyperparameters& p);

}  // namespace humi::rewards

#endif  // HUMI_POLICY_CONFIG_H_
