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

#include <cstdint>
#include <string>
#include <vector>

#include "screwsplat/model.hpp"
#include "screwsplat/render.hpp"

namespace screwsplat {

enum class PartShape { Box, Slab, CylinderShell };

const char* to_string(PartShape s);
PartShape part_shape_from_string(const std::string& s);

/// One rigid part sampled as a Gaussian soup on its surface. `extent` is the
/// full size along x, y, z (for cylinder shells: two diameters and the height).
struct PartSpec {
  PartShape shape = PartShape::Box;
  Vec3 center = Vec3::Zero();
  Vec3 extent = Vec3::Ones();
  Vec3 color = Vec3::Constant(0.5);
  int gaussian_count = 100;
  int attached_screw = -1;  // -1 = static base
};

struct JointSpec {
  ScrewAxisd axis;
  double lo = 0.0;
  double hi = 1.0;
};

struct ObjectSpec {
  std::string name;
  std::vector<PartSpec> parts;
  std::vector<JointSpec> joints;

  /// Throws InvalidSpec.
  void validate() const;
};

/// "laptop", "drawer", "storage-3", "static".
ObjectSpec object_preset(const std::string& name);
std::vector<std::string> preset_names();

struct GroundTruthObject {
  ObjectSpec spec;
  ArticulatedSplatModel model;  // one-hot parts, confidence 1, no joint angles yet
  std::vector<ScrewAxisd> screws;
};

GroundTruthObject make_object(const ObjectSpec& spec, std::uint64_t seed);

/// Fibonacci placement over the upper hemisphere; the first camera sits at the pole.
std::vector<Camera> hemisphere_cameras(int n, double radius, const Vec3& target, int width, int height, double focal);

/// n evenly spaced values per joint between its limits (single joint) or
/// seeded Latin-hypercube samples within the limits (several joints).
std::vector<VecX> training_configs(const ObjectSpec& spec, int n, std::uint64_t seed);
std::vector<VecX> evenly_spaced_configs(const ObjectSpec& spec, int n);
std::vector<VecX> random_configs(const ObjectSpec& spec, int n, std::uint64_t seed);
std::vector<VecX> midpoint_configs(const std::vector<VecX>& configs);

struct Observation {
  int config_index = 0;
  VecX joint_angles_gt;
  Camera camera;
  Image image;
};

/// One 8-bit quantized observation per (config, camera). Throws OutOfLimits.
std::vector<Observation> generate_dataset(const GroundTruthObject& object, const std::vector<VecX>& configs,
                                          const std::vector<Camera>& cameras);

/// Everything a fit/eval run needs; mirrors the on-disk dataset directory.
struct Dataset {
  ObjectSpec spec;
  std::uint64_t seed = 0;
  std::vector<VecX> configs;
  std::vector<VecX> heldout_configs;
  std::vector<Camera> cameras;
  std::vector<Observation> observations;
  std::vector<Observation> heldout;

  int num_configs() const { return static_cast<int>(configs.size()); }
};

struct DatasetOptions {
  int cameras = 8;
  int configs = 5;
  int width = 64;
  int height = 64;
  double radius = 2.5;
  double focal_scale = 1.25;  // focal = focal_scale * width
};

Dataset build_dataset(const ObjectSpec& spec, const DatasetOptions& opts, std::uint64_t seed);

/// Ground-truth model with its joint-angle vectors set to the dataset configurations.
ArticulatedSplatModel ground_truth_model(const Dataset& ds);

}  // namespace screwsplat
