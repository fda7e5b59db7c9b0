// Copyright 2026 The ScrewSplat Authors. All Rights Reserved.
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
// =============================================================================


#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "screwsplat/model.hpp"
#include "screwsplat/render.hpp"
#include "screwsplat/scene_synth.hpp"

namespace screwsplat {

using Json = nlohmann::json;

inline constexpr int kModelFormatVersion = 1;
inline constexpr int kDatasetFormatVersion = 1;

Json to_json(const Vec3& v);
Json to_json(const VecX& v);
Json to_json(const ScrewAxisd& axis);
Json to_json(const Camera& cam);
Json to_json(const ObjectSpec& spec);
Json to_json(const ArticulatedSplatModel& model);

Vec3 vec3_from_json(const Json& j);
VecX vecx_from_json(const Json& j);
ScrewAxisd screw_from_json(const Json& j);
Camera camera_from_json(const Json& j);
ObjectSpec object_spec_from_json(const Json& j);
ArticulatedSplatModel model_from_json(const Json& j);

void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

void save_model(const std::filesystem::path& path, const ArticulatedSplatModel& model);
ArticulatedSplatModel load_model(const std::filesystem::path& path);

/// Directory with dataset.json plus img_k{K}_c{C}.png (training) and
/// heldout_k{K}_c{C}.png (midpoint configurations).
void save_dataset(const std::filesystem::path& dir, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace screwsplat
